//! Bridge mean-field approximation of the surface critical curve.
//!
//! A defect edge `x ~ y` is effectively open if it is open itself or if one
//! of its `2(d - s)` three-edge bridges through the bulk is open. Treating
//! bridges of different edges as independent, the defect lattice percolates
//! once that effective density exceeds `sigma_c = p_c(s)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldInput {
    pub p: f64,
    pub d: usize,
    pub s: usize,
    /// Critical density of the `s`-dimensional defect lattice.
    pub sigma_c: f64,
}

impl MeanFieldInput {
    /// Uses the exact `sigma_c = 1/2` for a two-dimensional defect plane.
    pub fn planar(p: f64, d: usize) -> Result<Self> {
        Self::new(p, d, 2, 0.5)
    }

    pub fn new(p: f64, d: usize, s: usize, sigma_c: f64) -> Result<Self> {
        let input = MeanFieldInput { p, d, s, sigma_c };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!("p = {} outside [0, 1]", self.p)));
        }
        if !(self.sigma_c > 0.0 && self.sigma_c < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_c = {} outside (0, 1)",
                self.sigma_c
            )));
        }
        if self.s < 2 || self.s >= self.d {
            return Err(Error::InvalidParameter(format!(
                "need 2 <= s < d, got s = {}, d = {}",
                self.s, self.d
            )));
        }
        Ok(())
    }

    /// Probability that none of an edge's bridges is open, and its
    /// complement computed without cancellation.
    fn bridge_probabilities(&self) -> (f64, f64) {
        let k = 2.0 * (self.d - self.s) as f64;
        let log_closed = k * (-self.p.powi(3)).ln_1p();
        (log_closed.exp(), -log_closed.exp_m1())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldEstimate {
    pub sigma_star: f64,
    /// False when the bridges alone already exceed `sigma_c`; `sigma_star`
    /// is then reported as 0.
    pub valid: bool,
}

/// `(sigma_c + b - 1) / b` with `b = (1 - p^3)^{2(d-s)}`, evaluated as
/// `sigma_c - (1 - sigma_c)(1 - b) / b` so that `p = 0` returns `sigma_c`
/// exactly.
pub fn sigma_star_mf(input: &MeanFieldInput) -> Result<MeanFieldEstimate> {
    input.validate()?;
    let (b, open) = input.bridge_probabilities();
    if b <= 1.0 - input.sigma_c {
        return Ok(MeanFieldEstimate {
            sigma_star: 0.0,
            valid: false,
        });
    }
    Ok(MeanFieldEstimate {
        sigma_star: input.sigma_c - (1.0 - input.sigma_c) * open / b,
        valid: true,
    })
}

/// Leading small-`p` expansion `sigma_c - 2(d-s)(1-sigma_c) p^3`.
pub fn sigma_star_mf_cubic(input: &MeanFieldInput) -> Result<f64> {
    input.validate()?;
    let k = 2.0 * (input.d - input.s) as f64;
    Ok(input.sigma_c - k * (1.0 - input.sigma_c) * input.p.powi(3))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldRow {
    pub p: f64,
    pub sigma_mf: f64,
    pub sigma_mf_cubic: f64,
    pub valid: bool,
}

pub fn table(p_grid: &[f64], d: usize, s: usize, sigma_c: f64) -> Result<Vec<MeanFieldRow>> {
    p_grid
        .iter()
        .map(|&p| {
            let input = MeanFieldInput::new(p, d, s, sigma_c)?;
            let full = sigma_star_mf(&input)?;
            Ok(MeanFieldRow {
                p,
                sigma_mf: full.sigma_star,
                sigma_mf_cubic: sigma_star_mf_cubic(&input)?,
                valid: full.valid,
            })
        })
        .collect()
}
