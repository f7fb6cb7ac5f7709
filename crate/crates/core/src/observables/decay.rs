//! Tail fits of the finite-cluster size distribution.
//!
//! `log P(|C| >= n)` is regressed on `n^alpha` for each candidate exponent:
//! `alpha = 1` is the subcritical exponential law, `(d-1)/d` and `(s-1)/s`
//! are the surface-tension laws of the bulk and surface supercritical phases.
//! Each exponent is also fitted with a `log n` term for the power-law
//! prefactor of cluster-size tails.
//!
//! Points of an empirical survival function are correlated; the fit uses the
//! increments of `log P(|C| >= n)` between populated bins, which are
//! independent with binomial variances, so residuals are chi-square
//! distributed. Models are ranked by residual plus [`PARAMETER_PENALTY`] per
//! parameter.

use serde::{Deserialize, Serialize};

use super::ClusterDistribution;

/// Minimum number of populated bins inside the fit window.
pub const MIN_TAIL_BINS: usize = 10;
/// Bins with fewer samples than this end the window.
pub const MIN_BIN_COUNT: u64 = 10;
/// Window start, as a quantile of the finite-size distribution.
pub const WINDOW_QUANTILE: f64 = 0.75;
/// Chi-square cost of one fitted parameter.
pub const PARAMETER_PENALTY: f64 = 25.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub alpha: f64,
    /// `c` in `P(|C| >= n) ~ A n^{-theta} exp(-c n^alpha)`.
    pub rate: f64,
    /// Zero unless `prefactor` is set.
    pub theta: f64,
    pub log_prefactor: f64,
    /// Whether `theta` was fitted.
    pub prefactor: bool,
    /// Chi-square of the increments.
    pub residual: f64,
    /// `residual` plus the parameter penalty.
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum DecayVerdict {
    Selected { alpha: f64 },
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// Inclusive `n` range used for the fit.
    pub window: Option<(usize, usize)>,
    pub points: usize,
    /// Two fits per exponent, without and with the prefactor term.
    pub fits: Vec<DecayFit>,
    pub verdict: DecayVerdict,
}

impl DecayReport {
    pub fn selected_alpha(&self) -> Option<f64> {
        match self.verdict {
            DecayVerdict::Selected { alpha } => Some(alpha),
            DecayVerdict::Inconclusive { .. } => None,
        }
    }

    /// Best-scoring fit for `alpha`.
    pub fn fit_for(&self, alpha: f64) -> Option<&DecayFit> {
        self.fits
            .iter()
            .filter(|f| (f.alpha - alpha).abs() < 1e-12)
            .min_by(|a, b| a.score.total_cmp(&b.score))
    }
}

/// The three candidate exponents `1, (d-1)/d, (s-1)/s`.
pub fn regime_exponents(d: usize, s: usize) -> Vec<f64> {
    vec![1.0, (d - 1) as f64 / d as f64, (s - 1) as f64 / s as f64]
}

fn inconclusive(reason: impl Into<String>, window: Option<(usize, usize)>, points: usize) -> DecayReport {
    DecayReport {
        window,
        points,
        fits: Vec::new(),
        verdict: DecayVerdict::Inconclusive {
            reason: reason.into(),
        },
    }
}

/// Weighted least squares through the origin, `y = -c x - theta z`, with
/// `z` optional; returns `(c, theta, chi-square)`.
fn increment_fit(x: &[f64], z: Option<&[f64]>, y: &[f64], w: &[f64]) -> (f64, f64, f64) {
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).zip(w).map(|((a, b), c)| a * b * c).sum::<f64>();
    let (bx, bz) = match z {
        None => (dot(x, y) / dot(x, x), 0.0),
        Some(z) => {
            let (sxx, szz, sxz) = (dot(x, x), dot(z, z), dot(x, z));
            let (sxy, szy) = (dot(x, y), dot(z, y));
            let det = sxx * szz - sxz * sxz;
            ((sxy * szz - szy * sxz) / det, (szy * sxx - sxy * sxz) / det)
        }
    };
    let rss = (0..y.len())
        .map(|i| {
            let fitted = bx * x[i] + z.map_or(0.0, |z| bz * z[i]);
            w[i] * (y[i] - fitted).powi(2)
        })
        .sum();
    (-bx, -bz, rss)
}

fn increments(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] - w[0]).collect()
}

pub fn decay_fit(dist: &ClusterDistribution, exponents: &[f64]) -> DecayReport {
    let hist = &dist.hist_v;
    let finite: u64 = hist.iter().sum();
    if finite == 0 {
        return inconclusive("no finite clusters", None, 0);
    }
    // survival[n] = #finite samples with |C| >= n
    let mut survival = vec![0u64; hist.len() + 1];
    for n in (0..hist.len()).rev() {
        survival[n] = survival[n + 1] + hist[n];
    }
    let threshold = WINDOW_QUANTILE * finite as f64;
    let mut cumulative = 0u64;
    let start = hist
        .iter()
        .position(|&c| {
            cumulative += c;
            cumulative as f64 >= threshold
        })
        .unwrap_or(0);
    let end = match hist.iter().rposition(|&c| c >= MIN_BIN_COUNT) {
        Some(e) if e >= start => e,
        _ => return inconclusive("no well-populated bins in the tail", None, 0),
    };
    let ns: Vec<usize> = (start..=end).filter(|&n| hist[n] > 0).collect();
    if ns.len() < MIN_TAIL_BINS {
        return inconclusive(
            format!("only {} populated tail bins (need {MIN_TAIL_BINS})", ns.len()),
            Some((start, end)),
            ns.len(),
        );
    }
    let total = dist.samples as f64;
    let tail: Vec<f64> = ns.iter().map(|&n| survival[n] as f64 / total).collect();
    let log_tail: Vec<f64> = tail.iter().map(|t| t.ln()).collect();
    let dy = increments(&log_tail);
    // var(log S_j - log S_i) = (S_i - S_j) / (N S_i S_j)
    let w: Vec<f64> = tail
        .windows(2)
        .map(|t| total * t[0] * t[1] / (t[0] - t[1]))
        .collect();
    let logs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let dz = increments(&logs);

    let mut fits = Vec::with_capacity(2 * exponents.len());
    for &alpha in exponents {
        let x: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(alpha)).collect();
        let dx = increments(&x);
        for prefactor in [false, true] {
            let (rate, theta, residual) = increment_fit(&dx, prefactor.then_some(&dz[..]), &dy, &w);
            let parameters = if prefactor { 3.0 } else { 2.0 };
            fits.push(DecayFit {
                alpha,
                rate,
                theta,
                log_prefactor: log_tail[0] + rate * x[0] + theta * logs[0],
                prefactor,
                residual,
                score: residual + PARAMETER_PENALTY * parameters,
            });
        }
    }
    let best = fits
        .iter()
        .filter(|f| f.rate > 0.0)
        .min_by(|a, b| a.score.total_cmp(&b.score));
    let verdict = match best {
        Some(f) => DecayVerdict::Selected { alpha: f.alpha },
        None => DecayVerdict::Inconclusive {
            reason: "tail does not decay".into(),
        },
    };
    DecayReport {
        window: Some((start, end)),
        points: ns.len(),
        fits,
        verdict,
    }
}
