use std::collections::BTreeMap;

use approx::assert_relative_eq;
use defect_perc::animals::{
    enumerate, enumerate_into, exact_edge_pmf, exact_vertex_pmf, partition_function_z, reference,
    AnimalCensus, AnimalSpec, CycleContactCensus,
};
use defect_perc::lattice::LatticeSpec;
use defect_perc::observables::sample_distribution;
use proptest::prelude::*;

fn census(d: usize, s: usize, cap: usize) -> AnimalCensus {
    enumerate(AnimalSpec::new(d, s).unwrap(), cap).unwrap()
}

#[test]
fn smallest_homogeneous_counts() {
    let c3 = census(3, 2, 2).homogeneous_marginal();
    assert_eq!(c3[&(0, 6)], 1);
    assert_eq!(c3[&(1, 10)], 6);
    assert_eq!(c3.keys().filter(|k| k.0 == 1).count(), 1);
    let c2 = census(2, 2, 1).homogeneous_marginal();
    assert_eq!(c2[&(0, 4)], 1);
    assert_eq!(c2[&(1, 6)], 4);
}

#[test]
fn homogeneous_marginal_ignores_the_plane() {
    let base = census(3, 3, 5).homogeneous_marginal();
    for s in 0..3 {
        assert_eq!(census(3, s, 5).homogeneous_marginal(), base, "s = {s}");
    }
    let base4 = census(4, 2, 4).homogeneous_marginal();
    assert_eq!(census(4, 3, 4).homogeneous_marginal(), base4);
}

#[test]
fn enumeration_matches_naive_search() {
    for (d, s) in [(2, 2), (2, 1), (3, 2), (3, 3), (4, 2), (4, 3)] {
        let fast = census(d, s, 4);
        let slow = reference::census(AnimalSpec::new(d, s).unwrap(), 4).unwrap();
        assert_eq!(fast.entries, slow, "(d, s) = ({d}, {s})");
    }
}

#[test]
fn unit_squares_have_one_cycle() {
    let spec = AnimalSpec::new(3, 2).unwrap();
    let cycles = enumerate_into(spec, 4, CycleContactCensus::default).unwrap();
    assert_eq!(cycles.entries[&(4, 1, 0)], 12);
    let c = census(3, 2, 4);
    let squares: u64 = c
        .entries
        .iter()
        .filter(|(k, _)| k.v == 4 && k.n == 4)
        .map(|(k, &n)| {
            assert_eq!(k.t + k.r, 16);
            n
        })
        .sum();
    assert_eq!(squares, 12);
    // four in the plane, eight crossing it
    let in_plane: u64 = c.entries.iter().filter(|(k, _)| k.n == 4 && k.v == 4 && k.m == 4).map(|(_, &n)| n).sum();
    assert_eq!(in_plane, 4);
}

#[test]
fn equal_densities_collapse_to_homogeneous_form() {
    let c = census(3, 2, 6);
    let marginal: BTreeMap<(u32, u32), u64> = c.homogeneous_marginal();
    for p in [0.05f64, 0.1, 0.3, 0.7] {
        for n in 0..=6u32 {
            let homog: f64 = marginal
                .iter()
                .filter(|((m, _), _)| *m == n)
                .map(|((m, t), &a)| a as f64 * p.powi(*m as i32) * (1.0 - p).powi(*t as i32))
                .sum();
            let got = exact_edge_pmf(&c, p, p, n as usize).unwrap();
            assert_relative_eq!(got, homog, max_relative = 1e-12);
        }
    }
    assert_relative_eq!(
        exact_edge_pmf(&c, 0.2, 0.2, 1).unwrap(),
        6.0 * 0.2 * 0.8f64.powi(10),
        max_relative = 1e-12
    );
}

#[test]
fn small_box_monte_carlo_agrees() {
    let c = census(3, 2, 4);
    let spec = LatticeSpec::free(3, 2, 8).unwrap();
    let samples = 200_000u64;
    let (p, sigma) = (0.15, 0.3);
    let dist = sample_distribution(&spec, p, sigma, 21, 0..samples, 1).unwrap();
    for v in 1..=3 {
        let exact = exact_vertex_pmf(&c, p, sigma, v).unwrap();
        let se = (exact * (1.0 - exact) / samples as f64).sqrt();
        let z = (dist.prob_vertices(v) - exact) / se;
        assert!(z.abs() < 4.5, "v = {v}: z = {z}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_function_positive_and_increasing(
        x in 0.1f64..3.0,
        y in 0.1f64..3.0,
        z in 0.1f64..3.0,
        bump in 1.01f64..1.5,
        n in 0usize..=4,
    ) {
        thread_local! {
            static CENSUS: AnimalCensus = census(3, 2, 4);
        }
        CENSUS.with(|c| {
            let base = partition_function_z(c, n, x, y, z).unwrap();
            prop_assert!(base > 0.0);
            prop_assert!(partition_function_z(c, n, x * bump, y, z).unwrap() > base);
            prop_assert!(partition_function_z(c, n, x, y * bump, z).unwrap() > base);
            let zm = partition_function_z(c, n, x, y, z * bump).unwrap();
            // z counts defect edges; animals without them do not grow
            prop_assert!(zm >= base);
            if n > 0 {
                prop_assert!(zm > base);
            }
            Ok(())
        })?;
    }

    #[test]
    fn edge_pmf_partial_sums_are_subprobabilities(p in 0.0f64..1.0, sigma in 0.0f64..1.0) {
        thread_local! {
            static CENSUS: AnimalCensus = census(3, 2, 5);
        }
        CENSUS.with(|c| {
            let mut total = 0.0;
            for n in 0..=5 {
                let q = exact_edge_pmf(c, p, sigma, n).unwrap();
                prop_assert!(q >= 0.0);
                total += q;
            }
            prop_assert!(total <= 1.0 + 1e-12);
            Ok(())
        })?;
    }
}
