use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeSpec};
use crate::sampler::FORMAT_VERSION;
use crate::stream;

const LANE_CLUSTER: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSample {
    /// `|C|`, vertices.
    pub vertex_size: u64,
    /// `||C||`, open edges.
    pub edge_size: u64,
    /// The exploration reached the box boundary and stopped there.
    pub touched_boundary: bool,
}

/// Lazy breadth-first growth of the origin cluster in a free box.
///
/// Edge `e` is open iff the uniform at position `e` of the sample's counter
/// stream is below its density, so explorations of the same sample at
/// different `(p, sigma)` see coupled configurations.
pub struct ClusterExplorer {
    spec: LatticeSpec,
    strides: Vec<usize>,
    boundary: Vec<bool>,
    defect: Vec<bool>,
    vertex_stamp: Vec<u32>,
    edge_stamp: Vec<u32>,
    stamp: u32,
    queue: Vec<u32>,
}

impl ClusterExplorer {
    pub fn new(spec: &LatticeSpec) -> Result<Self> {
        spec.validate()?;
        if spec.boundary != Boundary::Free {
            return Err(Error::InvalidLattice(
                "origin clusters are grown in free-boundary boxes".into(),
            ));
        }
        let n = spec.vertex_count();
        let top = 2 * spec.half_side;
        let boundary = (0..n)
            .map(|v| {
                (0..spec.d).any(|a| {
                    let c = spec.shifted_coord(v, a);
                    c == 0 || c == top
                })
            })
            .collect();
        Ok(ClusterExplorer {
            spec: *spec,
            strides: (0..spec.d).map(|a| spec.stride(a)).collect(),
            boundary,
            defect: (0..n).map(|v| spec.in_defect_plane(v)).collect(),
            vertex_stamp: vec![0; n],
            edge_stamp: vec![0; n * spec.d],
            stamp: 0,
            queue: Vec::new(),
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    fn next_stamp(&mut self) -> u32 {
        if self.stamp == u32::MAX {
            self.vertex_stamp.fill(0);
            self.edge_stamp.fill(0);
            self.stamp = 0;
        }
        self.stamp += 1;
        self.stamp
    }

    /// Grows the cluster of the origin for the configuration keyed by `key`.
    pub fn explore(&mut self, p: f64, sigma: f64, key: u64) -> ClusterSample {
        let stamp = self.next_stamp();
        let d = self.spec.d;
        let origin = self.spec.origin() as u32;
        self.queue.clear();
        self.queue.push(origin);
        self.vertex_stamp[origin as usize] = stamp;
        let mut vertices = 1u64;
        let mut edges = 0u64;
        let mut head = 0;
        while head < self.queue.len() {
            let x = self.queue[head] as usize;
            head += 1;
            for axis in 0..d {
                let stride = self.strides[axis];
                // x is interior, so both neighbours exist
                for y in [x - stride, x + stride] {
                    let edge = x.min(y) * d + axis;
                    if self.edge_stamp[edge] == stamp {
                        continue;
                    }
                    self.edge_stamp[edge] = stamp;
                    let density = if self.defect[x] && self.defect[y] {
                        sigma
                    } else {
                        p
                    };
                    if stream::unit_at(key, edge as u64) >= density {
                        continue;
                    }
                    edges += 1;
                    if self.vertex_stamp[y] == stamp {
                        continue;
                    }
                    self.vertex_stamp[y] = stamp;
                    vertices += 1;
                    if self.boundary[y] {
                        return ClusterSample {
                            vertex_size: vertices,
                            edge_size: edges,
                            touched_boundary: true,
                        };
                    }
                    self.queue.push(y as u32);
                }
            }
        }
        assert!(
            edges <= d as u64 * vertices && vertices <= edges + 1,
            "cluster sizes violate ||C||/d <= |C| <= ||C|| + 1: |C| = {vertices}, ||C|| = {edges}"
        );
        ClusterSample {
            vertex_size: vertices,
            edge_size: edges,
            touched_boundary: false,
        }
    }
}

/// Stream key of cluster sample `index`; shared by every `(p, sigma)`.
pub fn sample_key(seed: u64, index: u64) -> u64 {
    stream::stream_key(seed, index, LANE_CLUSTER)
}

/// One origin-cluster sample at `(p, sigma)` from a fresh explorer.
pub fn sample_origin_cluster(
    spec: &LatticeSpec,
    p: f64,
    sigma: f64,
    seed: u64,
    index: u64,
) -> Result<ClusterSample> {
    check_densities(p, sigma)?;
    Ok(ClusterExplorer::new(spec)?.explore(p, sigma, sample_key(seed, index)))
}

fn check_densities(p: f64, sigma: f64) -> Result<()> {
    for (name, x) in [("p", p), ("sigma", sigma)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!("{name} = {x} outside [0, 1]")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionMeta {
    pub d: usize,
    pub s: usize,
    #[serde(rename = "N")]
    pub half_side: usize,
    pub p: f64,
    pub sigma: f64,
    pub seed: u64,
    pub rng: String,
}

/// Histograms of finite origin-cluster sizes; boundary-touching samples are
/// counted separately and stand in for infinite clusters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterDistribution {
    pub format: String,
    pub meta: DistributionMeta,
    /// `hist_v[n]`: finite samples with `|C| = n`.
    pub hist_v: Vec<u64>,
    /// `hist_e[n]`: finite samples with `||C|| = n`.
    pub hist_e: Vec<u64>,
    pub boundary_count: u64,
    pub samples: u64,
}

fn bump(hist: &mut Vec<u64>, n: usize) {
    if hist.len() <= n {
        hist.resize(n + 1, 0);
    }
    hist[n] += 1;
}

impl ClusterDistribution {
    pub fn empty(meta: DistributionMeta) -> Self {
        ClusterDistribution {
            format: FORMAT_VERSION.to_string(),
            meta,
            hist_v: Vec::new(),
            hist_e: Vec::new(),
            boundary_count: 0,
            samples: 0,
        }
    }

    /// Distribution with the given finite-size counts and no edge data.
    pub fn from_vertex_counts(meta: DistributionMeta, hist_v: Vec<u64>, boundary_count: u64) -> Self {
        let samples = hist_v.iter().sum::<u64>() + boundary_count;
        ClusterDistribution {
            format: FORMAT_VERSION.to_string(),
            meta,
            hist_v,
            hist_e: Vec::new(),
            boundary_count,
            samples,
        }
    }

    pub fn record(&mut self, sample: ClusterSample) {
        self.samples += 1;
        if sample.touched_boundary {
            self.boundary_count += 1;
        } else {
            bump(&mut self.hist_v, sample.vertex_size as usize);
            bump(&mut self.hist_e, sample.edge_size as usize);
        }
    }

    pub fn merge(&mut self, other: &ClusterDistribution) -> Result<()> {
        if self.meta != other.meta {
            return Err(Error::Mismatch("cluster distributions of different runs".into()));
        }
        for (mine, theirs) in [
            (&mut self.hist_v, &other.hist_v),
            (&mut self.hist_e, &other.hist_e),
        ] {
            if mine.len() < theirs.len() {
                mine.resize(theirs.len(), 0);
            }
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
        self.boundary_count += other.boundary_count;
        self.samples += other.samples;
        Ok(())
    }

    pub fn finite_samples(&self) -> u64 {
        self.samples - self.boundary_count
    }

    /// `P(|C| = n)` estimate.
    pub fn prob_vertices(&self, n: usize) -> f64 {
        self.hist_v.get(n).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    pub fn prob_edges(&self, n: usize) -> f64 {
        self.hist_e.get(n).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    pub fn boundary_fraction(&self) -> f64 {
        self.boundary_count as f64 / self.samples as f64
    }

    /// Binomial standard error of `prob_vertices(n)`.
    pub fn prob_vertices_stderr(&self, n: usize) -> f64 {
        let q = self.prob_vertices(n);
        (q * (1.0 - q) / self.samples as f64).sqrt()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dist: Self = serde_json::from_str(text)?;
        let total = dist.hist_v.iter().sum::<u64>() + dist.boundary_count;
        if total != dist.samples {
            return Err(Error::Mismatch(format!(
                "histogram holds {total} samples but header says {}",
                dist.samples
            )));
        }
        Ok(dist)
    }
}

/// Samples `index_range` of the origin-cluster ensemble at `(p, sigma)`.
///
/// Results do not depend on `workers`.
pub fn sample_distribution(
    spec: &LatticeSpec,
    p: f64,
    sigma: f64,
    seed: u64,
    index_range: Range<u64>,
    workers: usize,
) -> Result<ClusterDistribution> {
    check_densities(p, sigma)?;
    ClusterExplorer::new(spec)?;
    let meta = DistributionMeta {
        d: spec.d,
        s: spec.s,
        half_side: spec.half_side,
        p,
        sigma,
        seed,
        rng: stream::GENERATOR_NAME.to_string(),
    };
    let empty = ClusterDistribution::empty(meta);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        index_range
            .into_par_iter()
            .fold(
                || {
                    (
                        ClusterExplorer::new(spec).expect("spec validated above"),
                        empty.clone(),
                    )
                },
                |(mut explorer, mut dist), index| {
                    dist.record(explorer.explore(p, sigma, sample_key(seed, index)));
                    (explorer, dist)
                },
            )
            .map(|(_, d)| d)
            .reduce(
                || empty.clone(),
                |mut a, b| {
                    a.merge(&b).expect("same run");
                    a
                },
            )
    }))
}
