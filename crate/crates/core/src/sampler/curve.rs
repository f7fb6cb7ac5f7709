//! Microcanonical crossing counts and their binomial convolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeSpec};

pub const FORMAT_VERSION: &str = "defect-perc/1";

/// Which edges the sweep inserts one at a time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Bulk edges sampled at density `p`, defect edges swept.
    Defect,
    /// Every edge swept in one permutation; the convolution variable is `p`.
    Homogeneous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub d: usize,
    pub s: usize,
    #[serde(rename = "L")]
    pub half_side: usize,
    /// Bulk density; absent for homogeneous sweeps.
    pub p: Option<f64>,
    pub boundary: Boundary,
    pub seed: u64,
    pub rng: String,
    pub realizations: u64,
    pub mode: SweepMode,
    /// Face pairs tested per realization; each contributes one trial.
    pub face_pairs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl CurveMeta {
    pub fn spec(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.d, self.s, self.half_side, self.boundary)
    }

    pub fn trials(&self) -> u64 {
        self.realizations * self.face_pairs as u64
    }

    /// True if two runs sample the same ensemble (seed and provenance aside).
    pub fn same_ensemble(&self, other: &CurveMeta) -> bool {
        self.d == other.d
            && self.s == other.s
            && self.half_side == other.half_side
            && self.p.map(f64::to_bits) == other.p.map(f64::to_bits)
            && self.boundary == other.boundary
            && self.mode == other.mode
            && self.face_pairs == other.face_pairs
    }
}

/// Crossing counts indexed by the number of swept edges that are open.
///
/// `counts[k]` is the number of trials that had crossed once `k` swept edges
/// were open.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicrocanonicalCurve {
    pub format: String,
    pub meta: CurveMeta,
    pub counts: Vec<u64>,
}

impl MicrocanonicalCurve {
    /// Number of swept edges (`S`, or the total edge count when homogeneous).
    pub fn swept_edges(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }

    pub fn trials(&self) -> u64 {
        self.meta.trials()
    }

    /// Estimated crossing probability with exactly `k` swept edges open.
    pub fn q_hat(&self, k: usize) -> f64 {
        self.counts[k] as f64 / self.trials() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.is_empty() {
            return Err(Error::Mismatch("curve has no counts".into()));
        }
        let trials = self.trials();
        if trials == 0 {
            return Err(Error::InvalidParameter("curve has zero realizations".into()));
        }
        if let Some(w) = self.counts.windows(2).find(|w| w[1] < w[0]) {
            return Err(Error::Mismatch(format!(
                "counts decrease ({} -> {}); curve is not a finalized cumulative count",
                w[0], w[1]
            )));
        }
        if *self.counts.last().unwrap() > trials {
            return Err(Error::Mismatch("counts exceed the number of trials".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let curve: Self = serde_json::from_str(text)?;
        curve.validate()?;
        Ok(curve)
    }
}

/// Threshold histogram for one ensemble; `None` thresholds land in the
/// overflow bin `S + 1`.
#[derive(Clone, Debug)]
pub struct CurveBuilder {
    meta: CurveMeta,
    hist: Vec<u64>,
    realizations: u64,
}

impl CurveBuilder {
    pub fn new(mut meta: CurveMeta, swept_edges: usize) -> Self {
        meta.realizations = 0;
        CurveBuilder {
            meta,
            hist: vec![0; swept_edges + 2],
            realizations: 0,
        }
    }

    pub fn swept_edges(&self) -> usize {
        self.hist.len() - 2
    }

    /// Records one trial's crossing threshold.
    pub fn accumulate(&mut self, threshold: Option<usize>) {
        let s = self.swept_edges();
        let bin = threshold.map_or(s + 1, |t| t.min(s + 1));
        self.hist[bin] += 1;
    }

    /// Marks the end of one realization (all of its face pairs recorded).
    pub fn end_realization(&mut self) {
        self.realizations += 1;
    }

    pub fn merge(&mut self, other: &CurveBuilder) -> Result<()> {
        if !self.meta.same_ensemble(&other.meta) || self.hist.len() != other.hist.len() {
            return Err(Error::Mismatch(
                "cannot merge threshold histograms of different ensembles".into(),
            ));
        }
        for (a, b) in self.hist.iter_mut().zip(&other.hist) {
            *a += b;
        }
        self.realizations += other.realizations;
        Ok(())
    }

    pub fn finish(mut self) -> MicrocanonicalCurve {
        let s = self.swept_edges();
        let mut counts = Vec::with_capacity(s + 1);
        let mut running = 0u64;
        for &h in &self.hist[..=s] {
            running += h;
            counts.push(running);
        }
        self.meta.realizations = self.realizations;
        MicrocanonicalCurve {
            format: FORMAT_VERSION.to_string(),
            meta: self.meta,
            counts,
        }
    }
}

/// Binomial(n, prob) probabilities on the window where they are not
/// negligible. Returns the first index of the window and the weights.
///
/// Weights are built outward from the mode by the ratio recurrence and
/// renormalized; terms below `1e-30` of the modal term are dropped.
pub fn binomial_weights(n: usize, prob: f64) -> (usize, Vec<f64>) {
    if prob <= 0.0 {
        return (0, vec![1.0]);
    }
    if prob >= 1.0 {
        return (n, vec![1.0]);
    }
    const CUTOFF: f64 = 1e-30;
    let mode = (((n + 1) as f64 * prob).floor() as usize).min(n);
    let odds = prob / (1.0 - prob);
    let mut upper = vec![1.0];
    let mut w = 1.0;
    for k in mode..n {
        w *= (n - k) as f64 / (k + 1) as f64 * odds;
        if w < CUTOFF {
            break;
        }
        upper.push(w);
    }
    let mut lower = Vec::new();
    w = 1.0;
    for k in (1..=mode).rev() {
        w *= k as f64 / (n - k + 1) as f64 / odds;
        if w < CUTOFF {
            break;
        }
        lower.push(w);
    }
    let start = mode - lower.len();
    let mut weights: Vec<f64> = lower.into_iter().rev().chain(upper).collect();
    let total: f64 = weights.iter().sum();
    for x in &mut weights {
        *x /= total;
    }
    (start, weights)
}

/// `Q_L(p, sigma) = sum_k Binom(S, k; sigma) Q_p(k)`, with a conservative
/// binomial standard error `sqrt(Q (1 - Q) / trials)`.
pub fn convolve(curve: &MicrocanonicalCurve, sigma: f64) -> Result<(f64, f64)> {
    curve.validate()?;
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::InvalidParameter(format!(
            "convolution density {sigma} outside [0, 1]"
        )));
    }
    let s = curve.swept_edges();
    let trials = curve.trials() as f64;
    let q = if sigma == 0.0 {
        curve.counts[0] as f64 / trials
    } else if sigma == 1.0 {
        curve.counts[s] as f64 / trials
    } else {
        let (start, weights) = binomial_weights(s, sigma);
        let acc: f64 = weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * curve.counts[start + i] as f64)
            .sum();
        (acc / trials).clamp(0.0, 1.0)
    };
    Ok((q, (q * (1.0 - q) / trials).sqrt()))
}

/// Canonical crossing curve over a density grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalCurve {
    pub format: String,
    pub meta: CurveMeta,
    /// Convolution densities: `sigma` for defect sweeps, `p` for homogeneous.
    pub sigma_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl CanonicalCurve {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let curve: Self = serde_json::from_str(text)?;
        if curve.values.len() != curve.sigma_grid.len()
            || curve.stderr.len() != curve.sigma_grid.len()
        {
            return Err(Error::Mismatch("canonical curve columns differ in length".into()));
        }
        Ok(curve)
    }
}

/// Slack allowed for round-off when checking monotonicity along the grid.
pub const MONOTONE_SLACK: f64 = 1e-12;

pub fn convolve_grid(curve: &MicrocanonicalCurve, grid: &[f64]) -> Result<CanonicalCurve> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "density grid must be strictly increasing".into(),
        ));
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    for &sigma in grid {
        let (q, e) = convolve(curve, sigma)?;
        if let Some(&prev) = values.last() {
            if q < prev - MONOTONE_SLACK {
                return Err(Error::Mismatch(format!(
                    "convolved curve decreases at density {sigma}: {prev} -> {q}"
                )));
            }
        }
        values.push(q);
        stderr.push(e);
    }
    Ok(CanonicalCurve {
        format: FORMAT_VERSION.to_string(),
        meta: curve.meta.clone(),
        sigma_grid: grid.to_vec(),
        values,
        stderr,
    })
}
