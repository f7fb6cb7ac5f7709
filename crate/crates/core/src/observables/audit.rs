//! Numerical check of the two ghost-field differential inequalities
//!
//! ```text
//! (1-p) d_p theta + (1-sigma) d_sigma theta <= 2d (1-gamma) chi_H(p) theta d_gamma theta
//! theta <= gamma d_gamma theta + theta^2 + chi_H(p) theta (p d_p theta + sigma d_sigma theta)
//! ```
//!
//! valid for `p <= sigma`. Derivatives are central differences of `theta`
//! estimated from coupled samples (one configuration per sample index shared
//! by every stencil point). Errors come from batch means.

use serde::{Deserialize, Serialize};

use super::{ghost_chi, ghost_theta, sample_distribution, ClusterDistribution};
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

pub const DEFAULT_STEP: f64 = 0.02;
pub const DEFAULT_BATCHES: u64 = 20;
/// Seed offset separating the homogeneous susceptibility run.
const HOMOGENEOUS_SEED_SALT: u64 = 0x05ee_dc41;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    /// Box `B(N)` the clusters grow in.
    pub spec: LatticeSpec,
    pub p: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub step: f64,
    pub samples_per_point: u64,
    pub batches: u64,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    pub stderr: f64,
    /// `slack >= -3 stderr`.
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StencilEstimate {
    pub theta: f64,
    pub d_theta_dp: f64,
    pub d_theta_dsigma: f64,
    pub d_theta_dgamma: f64,
    pub chi_homogeneous: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub config: AuditConfig,
    pub estimate: StencilEstimate,
    pub first: InequalityCheck,
    pub second: InequalityCheck,
    pub pass: bool,
}

struct Stencil {
    center: ClusterDistribution,
    p_plus: ClusterDistribution,
    p_minus: ClusterDistribution,
    s_plus: ClusterDistribution,
    s_minus: ClusterDistribution,
    homogeneous: ClusterDistribution,
}

impl Stencil {
    fn merge(&mut self, other: &Stencil) -> Result<()> {
        self.center.merge(&other.center)?;
        self.p_plus.merge(&other.p_plus)?;
        self.p_minus.merge(&other.p_minus)?;
        self.s_plus.merge(&other.s_plus)?;
        self.s_minus.merge(&other.s_minus)?;
        self.homogeneous.merge(&other.homogeneous)
    }

    fn estimate(&self, cfg: &AuditConfig) -> Result<StencilEstimate> {
        let (g, h) = (cfg.gamma, cfg.step);
        let theta = |d: &ClusterDistribution, gamma: f64| ghost_theta(d, gamma);
        Ok(StencilEstimate {
            theta: theta(&self.center, g)?,
            d_theta_dp: (theta(&self.p_plus, g)? - theta(&self.p_minus, g)?) / (2.0 * h),
            d_theta_dsigma: (theta(&self.s_plus, g)? - theta(&self.s_minus, g)?) / (2.0 * h),
            d_theta_dgamma: (theta(&self.center, g + h)? - theta(&self.center, g - h)?) / (2.0 * h),
            chi_homogeneous: ghost_chi(&self.homogeneous, 0.0)?,
        })
    }
}

/// `(lhs, rhs)` of both inequalities.
fn sides(est: &StencilEstimate, cfg: &AuditConfig) -> [(f64, f64); 2] {
    let (p, sigma, gamma) = (cfg.p, cfg.sigma, cfg.gamma);
    let d = cfg.spec.d as f64;
    let first = (
        (1.0 - p) * est.d_theta_dp + (1.0 - sigma) * est.d_theta_dsigma,
        2.0 * d * (1.0 - gamma) * est.chi_homogeneous * est.theta * est.d_theta_dgamma,
    );
    let second = (
        est.theta,
        gamma * est.d_theta_dgamma
            + est.theta * est.theta
            + est.chi_homogeneous
                * est.theta
                * (p * est.d_theta_dp + sigma * est.d_theta_dsigma),
    );
    [first, second]
}

fn validate(cfg: &AuditConfig) -> Result<()> {
    if cfg.p > cfg.sigma {
        return Err(Error::Hypothesis(format!(
            "the inequalities need p <= sigma, got p = {} > sigma = {}",
            cfg.p, cfg.sigma
        )));
    }
    let h = cfg.step;
    for (name, x) in [("p", cfg.p), ("sigma", cfg.sigma), ("gamma", cfg.gamma)] {
        if !(h > 0.0 && x - h > 0.0 && x + h < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {x} with step {h}: stencil leaves (0, 1)"
            )));
        }
    }
    if cfg.batches < 2 || cfg.samples_per_point < cfg.batches {
        return Err(Error::InvalidParameter(
            "need at least 2 batches and one sample per batch".into(),
        ));
    }
    Ok(())
}

pub fn inequality_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    validate(cfg)?;
    let (p, sigma, h) = (cfg.p, cfg.sigma, cfg.step);
    let per_batch = cfg.samples_per_point / cfg.batches;
    let spec = &cfg.spec;
    let mut batches = Vec::with_capacity(cfg.batches as usize);
    for b in 0..cfg.batches {
        let range = b * per_batch..(b + 1) * per_batch;
        let run = |p: f64, sigma: f64, seed: u64| {
            sample_distribution(spec, p, sigma, seed, range.clone(), cfg.workers)
        };
        batches.push(Stencil {
            center: run(p, sigma, cfg.seed)?,
            p_plus: run(p + h, sigma, cfg.seed)?,
            p_minus: run(p - h, sigma, cfg.seed)?,
            s_plus: run(p, sigma + h, cfg.seed)?,
            s_minus: run(p, sigma - h, cfg.seed)?,
            homogeneous: run(p, p, cfg.seed ^ HOMOGENEOUS_SEED_SALT)?,
        });
    }
    let mut slacks: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for stencil in &batches {
        let est = stencil.estimate(cfg)?;
        for (i, (lhs, rhs)) in sides(&est, cfg).into_iter().enumerate() {
            slacks[i].push(rhs - lhs);
        }
    }
    let mut pooled = batches.remove(0);
    for b in &batches {
        pooled.merge(b)?;
    }
    let estimate = pooled.estimate(cfg)?;
    let checks: Vec<InequalityCheck> = sides(&estimate, cfg)
        .into_iter()
        .zip(&slacks)
        .map(|((lhs, rhs), batch)| {
            let k = batch.len() as f64;
            let mean = batch.iter().sum::<f64>() / k;
            let var = batch.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
            let stderr = (var / k).sqrt();
            let slack = rhs - lhs;
            InequalityCheck {
                lhs,
                rhs,
                slack,
                stderr,
                pass: slack >= -3.0 * stderr,
            }
        })
        .collect();
    Ok(AuditReport {
        config: cfg.clone(),
        estimate,
        first: checks[0],
        second: checks[1],
        pass: checks.iter().all(|c| c.pass),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: f64, sigma: f64, gamma: f64) -> AuditConfig {
        AuditConfig {
            spec: LatticeSpec::free(3, 2, 6).unwrap(),
            p,
            sigma,
            gamma,
            step: DEFAULT_STEP,
            samples_per_point: 20_000,
            batches: 10,
            seed: 4,
            workers: 4,
        }
    }

    #[test]
    fn refuses_p_above_sigma() {
        assert!(matches!(
            inequality_audit(&cfg(0.3, 0.2, 0.2)),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn refuses_stencil_outside_unit_interval() {
        assert!(inequality_audit(&cfg(0.01, 0.2, 0.2)).is_err());
        assert!(inequality_audit(&cfg(0.1, 0.2, 0.99)).is_err());
    }

    #[test]
    fn deep_subcritical_passes() {
        let report = inequality_audit(&cfg(0.05, 0.05, 0.05)).unwrap();
        assert!(report.pass, "{report:#?}");
        assert!(report.first.slack > 0.0);
    }
}
