//! Ghost-field generating functions of the finite-cluster distribution.
//!
//! Every vertex links to an external ghost vertex with probability `gamma`.
//! `theta(gamma)` is the chance that the origin reaches the ghost and
//! `chi(gamma) = (1 - gamma) d theta / d gamma`. Boundary-touching samples
//! count as infinite clusters: they always reach the ghost.

use crate::error::{Error, Result};

use super::ClusterDistribution;

fn check_open_unit(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("gamma = {gamma} outside (0, 1)")))
    }
}

/// `1 - sum_n (1 - gamma)^n P(|C| = n)`.
pub fn ghost_theta(dist: &ClusterDistribution, gamma: f64) -> Result<f64> {
    check_open_unit(gamma)?;
    let reach: f64 = weighted_sum(dist, |n| (1.0 - gamma).powi(n as i32));
    Ok(1.0 - reach / dist.samples as f64)
}

/// Standard error of [`ghost_theta`] from the per-sample indicator variance.
pub fn ghost_theta_stderr(dist: &ClusterDistribution, gamma: f64) -> Result<f64> {
    check_open_unit(gamma)?;
    let n = dist.samples as f64;
    let mean = 1.0 - weighted_sum(dist, |k| (1.0 - gamma).powi(k as i32)) / n;
    let second = dist.boundary_count as f64
        + weighted_sum(dist, |k| (1.0 - (1.0 - gamma).powi(k as i32)).powi(2));
    let var = (second / n - mean * mean).max(0.0);
    Ok((var / n).sqrt())
}

/// `sum_n n (1 - gamma)^n P(|C| = n)`; at `gamma = 0` the finite-cluster
/// susceptibility.
pub fn ghost_chi(dist: &ClusterDistribution, gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} outside [0, 1)")));
    }
    Ok(weighted_sum(dist, |n| n as f64 * (1.0 - gamma).powi(n as i32)) / dist.samples as f64)
}

fn weighted_sum(dist: &ClusterDistribution, f: impl Fn(usize) -> f64) -> f64 {
    dist.hist_v
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(n, &c)| c as f64 * f(n))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::DistributionMeta;

    fn dist(hist: Vec<u64>, boundary: u64) -> ClusterDistribution {
        let meta = DistributionMeta {
            d: 3,
            s: 2,
            half_side: 4,
            p: 0.1,
            sigma: 0.1,
            seed: 0,
            rng: "test".into(),
        };
        ClusterDistribution::from_vertex_counts(meta, hist, boundary)
    }

    #[test]
    fn singletons() {
        let d = dist(vec![0, 10], 0);
        assert!((ghost_theta(&d, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(ghost_chi(&d, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn two_point_distribution() {
        let d = dist(vec![0, 1, 1], 0);
        assert!((ghost_theta(&d, 0.5).unwrap() - 0.625).abs() < 1e-15);
        assert!((ghost_chi(&d, 0.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((ghost_chi(&d, 0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn theta_tends_to_one() {
        let d = dist(vec![0, 5, 3, 1], 0);
        assert!(ghost_theta(&d, 1.0 - 1e-9).unwrap() > 1.0 - 1e-8);
    }

    #[test]
    fn boundary_samples_count_in_theta() {
        let d = dist(vec![0, 1], 1);
        // half the mass is infinite, the other half reaches with prob gamma
        assert!((ghost_theta(&d, 0.2).unwrap() - 0.6).abs() < 1e-15);
        assert!((ghost_chi(&d, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let d = dist(vec![0, 1], 0);
        assert!(ghost_theta(&d, 0.0).is_err());
        assert!(ghost_theta(&d, 1.0).is_err());
        assert!(ghost_chi(&d, 1.0).is_err());
        assert!(ghost_chi(&d, -0.1).is_err());
    }

    #[test]
    fn chi_is_scaled_gamma_derivative() {
        let d = dist(vec![0, 40, 17, 9, 5, 2, 1, 1], 3);
        let h = 1e-4;
        for &g in &[0.1, 0.3, 0.6] {
            let deriv = (ghost_theta(&d, g + h).unwrap() - ghost_theta(&d, g - h).unwrap()) / (2.0 * h);
            assert!(((1.0 - g) * deriv - ghost_chi(&d, g).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn theta_non_decreasing_in_gamma() {
        let d = dist(vec![0, 40, 17, 9, 5, 2, 1, 1], 3);
        let values: Vec<f64> = (1..100).map(|i| ghost_theta(&d, i as f64 / 100.0).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn stderr_of_degenerate_distribution_is_zero() {
        let d = dist(vec![0, 0, 0, 7], 0);
        assert!(ghost_theta_stderr(&d, 0.3).unwrap() < 1e-12);
    }
}
