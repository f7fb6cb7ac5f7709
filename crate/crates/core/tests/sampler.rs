use defect_perc::lattice::{build_edge_table, EdgeTable, LatticeSpec};
use defect_perc::observables::{sample_key, ClusterExplorer};
use defect_perc::sampler::{
    convolve_grid, homogeneous_sweep, sweep, FacePairs, Faces, SweepParams, Sweeper,
};
use proptest::prelude::*;

fn setup(d: usize, s: usize, l: usize) -> (EdgeTable, Faces) {
    let spec = LatticeSpec::free(d, s, l).unwrap();
    (build_edge_table(&spec).unwrap(), Faces::new(&spec, FacePairs::First).unwrap())
}

fn params(p: f64, realizations: u64, seed: u64, workers: usize) -> SweepParams {
    SweepParams {
        p,
        realizations,
        seed,
        workers,
        face_pairs: FacePairs::First,
    }
}

#[test]
fn counts_do_not_depend_on_worker_count() {
    let (table, faces) = setup(3, 2, 4);
    let base = sweep(&table, &faces, &params(0.15, 600, 11, 1)).unwrap();
    for workers in [4, 8] {
        let other = sweep(&table, &faces, &params(0.15, 600, 11, workers)).unwrap();
        assert_eq!(other.counts, base.counts, "workers = {workers}");
    }
    let homog = homogeneous_sweep(&table, &faces, &params(0.0, 300, 11, 1)).unwrap();
    let homog8 = homogeneous_sweep(&table, &faces, &params(0.0, 300, 11, 8)).unwrap();
    assert_eq!(homog.counts, homog8.counts);
}

#[test]
fn microcanonical_counts_are_monotone() {
    for (d, s, l, p) in [(3, 2, 3, 0.0), (3, 2, 5, 0.2), (4, 2, 2, 0.1), (4, 3, 2, 0.05)] {
        let (table, faces) = setup(d, s, l);
        let curve = sweep(&table, &faces, &params(p, 400, 5, 2)).unwrap();
        assert!(curve.counts.windows(2).all(|w| w[0] <= w[1]), "({d},{s}) L={l}");
        assert!(*curve.counts.last().unwrap() <= curve.trials());
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let canon = convolve_grid(&curve, &grid).unwrap();
        assert!(canon.values.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }
}

#[test]
fn larger_box_is_harder_to_cross_below_criticality() {
    let grid = [0.3];
    let q = |l| {
        let (table, faces) = setup(3, 2, l);
        let c = sweep(&table, &faces, &params(0.0, 2000, 3, 1)).unwrap();
        convolve_grid(&c, &grid).unwrap().values[0]
    };
    assert!(q(6) < q(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coupled_thresholds_dominate_in_p(
        p1 in 0.0f64..0.3,
        dp in 0.0f64..0.3,
        seed in any::<u64>(),
        index in 0u64..1000,
    ) {
        let (table, faces) = setup(3, 2, 3);
        let mut sweeper = Sweeper::defect(&table, &faces);
        let low = sweeper.run_realization(p1, seed, index)[0];
        let high = sweeper.run_realization(p1 + dp, seed, index)[0];
        match (low, high) {
            (Some(a), Some(b)) => prop_assert!(b <= a),
            (None, _) => {}
            (Some(_), None) => prop_assert!(false, "more bulk edges blocked a crossing"),
        }
    }

    #[test]
    fn coupled_clusters_grow_with_both_densities(
        p in 0.0f64..0.2,
        dp in 0.0f64..0.1,
        sigma in 0.0f64..0.5,
        ds in 0.0f64..0.2,
        seed in any::<u64>(),
        index in 0u64..1000,
    ) {
        let spec = LatticeSpec::free(3, 2, 6).unwrap();
        let mut explorer = ClusterExplorer::new(&spec).unwrap();
        let key = sample_key(seed, index);
        let small = explorer.explore(p, sigma, key);
        for (p2, s2) in [(p + dp, sigma), (p, sigma + ds), (p + dp, sigma + ds)] {
            let large = explorer.explore(p2, s2, key);
            if small.touched_boundary {
                prop_assert!(large.touched_boundary);
            } else if !large.touched_boundary {
                prop_assert!(small.vertex_size <= large.vertex_size);
                prop_assert!(small.edge_size <= large.edge_size);
            }
        }
    }
}
