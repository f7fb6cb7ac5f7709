//! Newman-Ziff sweeps over a box.

use rand::Rng;
use rayon::prelude::*;

use super::curve::{CurveBuilder, CurveMeta, MicrocanonicalCurve, SweepMode};
use super::forest::DisjointSetForest;
use crate::error::{Error, Result};
use crate::lattice::{face_vertices, EdgeClass, EdgeTable, LatticeSpec};
use crate::stream::{self, Stream};

const LANE_BULK: u64 = 0;
const LANE_DEFECT_ORDER: u64 = 1;
const LANE_ALL_ORDER: u64 = 2;

/// Which opposite-face pairs are crossing targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FacePairs {
    /// `A_1` against `A_{-1}` only.
    First,
    /// Every vertical pair `A_i`, `A_{-i}` for `i = 1..=s`.
    AllVertical,
}

/// Initial per-vertex face flags for a set of target axes.
#[derive(Clone, Debug)]
pub struct Faces {
    /// 0-based axes whose face pair is tested.
    pub axes: Vec<usize>,
    pub flags: Vec<u32>,
}

impl Faces {
    pub fn new(spec: &LatticeSpec, pairs: FacePairs) -> Result<Self> {
        let axes: Vec<usize> = match pairs {
            FacePairs::First => vec![0],
            FacePairs::AllVertical => (0..spec.s).collect(),
        };
        let mut flags = vec![0u32; spec.vertex_count()];
        for &a in &axes {
            for v in face_vertices(spec, a + 1, 1)? {
                flags[v as usize] |= 1 << (2 * a);
            }
            for v in face_vertices(spec, a + 1, -1)? {
                flags[v as usize] |= 1 << (2 * a + 1);
            }
        }
        Ok(Faces { axes, flags })
    }

    pub fn pairs(&self) -> usize {
        self.axes.len()
    }
}

/// Per-worker sweep state: a private forest and scratch permutation.
pub struct Sweeper<'a> {
    bulk: Vec<(u32, u32)>,
    swept: Vec<(u32, u32)>,
    faces: &'a Faces,
    forest: DisjointSetForest,
    order: Vec<u32>,
    thresholds: Vec<Option<usize>>,
}

impl<'a> Sweeper<'a> {
    /// Bulk edges are sampled, defect edges swept.
    pub fn defect(table: &EdgeTable, faces: &'a Faces) -> Self {
        let pick = |class| {
            table
                .edges
                .iter()
                .filter(|e| e.class == class)
                .map(|e| (e.a, e.b))
                .collect::<Vec<_>>()
        };
        Self::with_edges(table, faces, pick(EdgeClass::Bulk), pick(EdgeClass::Defect))
    }

    /// Every edge swept in one permutation.
    pub fn homogeneous(table: &EdgeTable, faces: &'a Faces) -> Self {
        let all = table.edges.iter().map(|e| (e.a, e.b)).collect();
        Self::with_edges(table, faces, Vec::new(), all)
    }

    fn with_edges(
        table: &EdgeTable,
        faces: &'a Faces,
        bulk: Vec<(u32, u32)>,
        swept: Vec<(u32, u32)>,
    ) -> Self {
        Sweeper {
            forest: DisjointSetForest::new(table.spec.vertex_count()),
            order: (0..swept.len() as u32).collect(),
            thresholds: vec![None; faces.pairs()],
            bulk,
            swept,
            faces,
        }
    }

    pub fn swept_edges(&self) -> usize {
        self.swept.len()
    }

    pub fn forest(&self) -> &DisjointSetForest {
        &self.forest
    }

    fn reset(&mut self) {
        self.forest.reset(&self.faces.flags);
        self.thresholds.fill(None);
    }

    /// Marks newly crossed pairs at `count`; true once every pair crossed.
    #[inline]
    fn check(&mut self, root: u32, count: usize) -> bool {
        let flags = self.forest.flags_of(root);
        let mut done = true;
        for (i, &a) in self.faces.axes.iter().enumerate() {
            if self.thresholds[i].is_none() {
                let both = 0b11 << (2 * a);
                if flags & both == both {
                    self.thresholds[i] = Some(count);
                } else {
                    done = false;
                }
            }
        }
        done
    }

    /// Opens bulk edges for which `open(k)` holds; returns true if every
    /// target pair crossed already.
    fn open_bulk(&mut self, open: impl Fn(usize) -> bool) -> bool {
        for k in 0..self.bulk.len() {
            if open(k) {
                let (a, b) = self.bulk[k];
                let r = self.forest.union(a, b);
                if self.check(r, 0) {
                    return true;
                }
            }
        }
        false
    }

    /// Inserts swept edges in the given order; thresholds count inserted edges.
    fn insert_in_order(&mut self, order: impl Iterator<Item = usize>) {
        for (i, k) in order.enumerate() {
            let (a, b) = self.swept[k];
            let r = self.forest.union(a, b);
            if self.check(r, i + 1) {
                return;
            }
        }
    }

    /// One realization at bulk density `p` with the defect permutation drawn
    /// from the stream of `(seed, index)`. Returns one threshold per pair.
    ///
    /// Bulk edge `k` is open iff its counter-stream uniform is below `p`, so
    /// realizations at different `p` with the same seed are coupled.
    pub fn run_realization(&mut self, p: f64, seed: u64, index: u64) -> &[Option<usize>] {
        self.reset();
        let bulk_key = stream::stream_key(seed, index, LANE_BULK);
        if !self.open_bulk(|k| stream::unit_at(bulk_key, k as u64) < p) {
            let mut rng = Stream::for_realization(seed, index, LANE_DEFECT_ORDER);
            self.shuffle_and_insert(&mut rng);
        }
        &self.thresholds
    }

    /// Homogeneous realization: all edges in one random permutation.
    pub fn run_homogeneous(&mut self, seed: u64, index: u64) -> &[Option<usize>] {
        self.reset();
        let mut rng = Stream::for_realization(seed, index, LANE_ALL_ORDER);
        self.shuffle_and_insert(&mut rng);
        &self.thresholds
    }

    /// Lazy Fisher-Yates: positions are drawn only until every pair crossed.
    fn shuffle_and_insert(&mut self, rng: &mut Stream) {
        let n = self.swept.len();
        for (i, o) in self.order.iter_mut().enumerate() {
            *o = i as u32;
        }
        for i in 0..n {
            let j = rng.gen_range(i..n);
            self.order.swap(i, j);
            let (a, b) = self.swept[self.order[i] as usize];
            let r = self.forest.union(a, b);
            if self.check(r, i + 1) {
                return;
            }
        }
    }

    /// Replays a given bulk configuration and swept-edge order.
    pub fn run_with_order(&mut self, bulk_open: &[bool], order: &[usize]) -> &[Option<usize>] {
        self.reset();
        if !self.open_bulk(|k| bulk_open.get(k).copied().unwrap_or(false)) {
            self.insert_in_order(order.iter().copied());
        }
        &self.thresholds
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SweepParams {
    pub p: f64,
    pub realizations: u64,
    pub seed: u64,
    pub workers: usize,
    pub face_pairs: FacePairs,
}

fn check_params(params: &SweepParams) -> Result<()> {
    if params.realizations == 0 {
        return Err(Error::InvalidParameter("realizations must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&params.p) {
        return Err(Error::InvalidParameter(format!(
            "bulk density {} outside [0, 1]",
            params.p
        )));
    }
    Ok(())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

fn base_meta(table: &EdgeTable, params: &SweepParams, faces: &Faces, mode: SweepMode) -> CurveMeta {
    let spec = table.spec;
    CurveMeta {
        d: spec.d,
        s: spec.s,
        half_side: spec.half_side,
        p: (mode == SweepMode::Defect).then_some(params.p),
        boundary: spec.boundary,
        seed: params.seed,
        rng: stream::GENERATOR_NAME.to_string(),
        realizations: 0,
        mode,
        face_pairs: faces.pairs(),
        config_hash: None,
        workers: None,
        timestamp: None,
    }
}

fn drive<'a, F>(
    table: &EdgeTable,
    faces: &'a Faces,
    params: &SweepParams,
    mode: SweepMode,
    make: F,
) -> Result<MicrocanonicalCurve>
where
    F: Fn(&EdgeTable, &'a Faces) -> Sweeper<'a> + Sync,
{
    check_params(params)?;
    let meta = base_meta(table, params, faces, mode);
    let swept = make(table, faces).swept_edges();
    let empty = CurveBuilder::new(meta, swept);
    let builder = pool(params.workers)?.install(|| {
        (0..params.realizations)
            .into_par_iter()
            .fold(
                || (make(table, faces), empty.clone()),
                |(mut sweeper, mut builder), index| {
                    let thresholds = match mode {
                        SweepMode::Defect => sweeper.run_realization(params.p, params.seed, index),
                        SweepMode::Homogeneous => sweeper.run_homogeneous(params.seed, index),
                    };
                    for &t in thresholds {
                        builder.accumulate(t);
                    }
                    builder.end_realization();
                    (sweeper, builder)
                },
            )
            .map(|(_, b)| b)
            .reduce(
                || empty.clone(),
                |mut a, b| {
                    a.merge(&b).expect("builders of one sweep share an ensemble");
                    a
                },
            )
    });
    let curve = builder.finish();
    curve.validate()?;
    Ok(curve)
}

/// Microcanonical crossing curve `Q_p(s)` at bulk density `p`.
///
/// The result is identical for any worker count: each realization draws
/// from its own stream and the reduction is integer addition.
pub fn sweep(table: &EdgeTable, faces: &Faces, params: &SweepParams) -> Result<MicrocanonicalCurve> {
    if table.spec.is_homogeneous() {
        return Err(Error::InvalidLattice(
            "defect sweeps need s < d; use the homogeneous sweep for s = d".into(),
        ));
    }
    drive(table, faces, params, SweepMode::Defect, Sweeper::defect)
}

/// Homogeneous crossing counts over the total edge count; convolve in `p`.
pub fn homogeneous_sweep(
    table: &EdgeTable,
    faces: &Faces,
    params: &SweepParams,
) -> Result<MicrocanonicalCurve> {
    drive(table, faces, params, SweepMode::Homogeneous, Sweeper::homogeneous)
}
