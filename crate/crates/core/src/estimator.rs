//! Crossing-point estimation of `sigma*(p)` from curves at several box sizes.
//!
//! The least-square width `E^2(sigma) = sum_L sum_K (Q_L - Q_K)^2` of the
//! family is minimized over the grid; the minimum is refined by a parabola
//! through the three lowest neighbouring points. The statistical error is the
//! half-width of the region where `E^2` stays below twice its minimum, and
//! the systematic error is twice the shift caused by dropping the smallest
//! box.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{CanonicalCurve, SweepMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingFamily {
    /// Bulk density, absent for homogeneous families.
    pub p: Option<f64>,
    pub sizes: Vec<usize>,
    pub sigma_grid: Vec<f64>,
    /// `curves[i][j]` is `Q_{sizes[i]}` at `sigma_grid[j]`.
    pub curves: Vec<Vec<f64>>,
    pub realizations: Vec<u64>,
}

impl CrossingFamily {
    pub fn new(
        p: Option<f64>,
        sizes: Vec<usize>,
        sigma_grid: Vec<f64>,
        curves: Vec<Vec<f64>>,
        realizations: Vec<u64>,
    ) -> Result<Self> {
        if sizes.len() != curves.len() || sizes.len() != realizations.len() {
            return Err(Error::Mismatch("one curve per box size required".into()));
        }
        if sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Mismatch("box sizes must be strictly increasing".into()));
        }
        if sigma_grid.len() < 3 || sigma_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Mismatch(
                "grid needs at least 3 strictly increasing points".into(),
            ));
        }
        if curves.iter().any(|c| c.len() != sigma_grid.len()) {
            return Err(Error::Mismatch("curve length differs from grid length".into()));
        }
        Ok(CrossingFamily {
            p,
            sizes,
            sigma_grid,
            curves,
            realizations,
        })
    }

    /// Assembles a family from canonical curves of one ensemble.
    ///
    /// Curves must agree on `d`, `s`, `p`, sweep mode and grid. Unless
    /// `allow_mixed` is set they must also carry the same configuration hash.
    pub fn from_canonical(curves: &[CanonicalCurve], allow_mixed: bool) -> Result<Self> {
        let first = curves
            .first()
            .ok_or_else(|| Error::Mismatch("no curves given".into()))?;
        let m0 = &first.meta;
        for c in &curves[1..] {
            let m = &c.meta;
            if m.d != m0.d || m.s != m0.s {
                return Err(Error::Mismatch(format!(
                    "(d, s) = ({}, {}) vs ({}, {})",
                    m.d, m.s, m0.d, m0.s
                )));
            }
            if m.p.map(f64::to_bits) != m0.p.map(f64::to_bits) || m.mode != m0.mode {
                return Err(Error::Mismatch(format!(
                    "bulk density / mode differ: {:?} {:?} vs {:?} {:?}",
                    m.p, m.mode, m0.p, m0.mode
                )));
            }
            if c.sigma_grid != first.sigma_grid {
                return Err(Error::Mismatch("curves use different density grids".into()));
            }
            if !allow_mixed && m.config_hash != m0.config_hash {
                return Err(Error::Mismatch(
                    "curves come from different run configurations (pass force to mix)".into(),
                ));
            }
        }
        let mut sorted: Vec<&CanonicalCurve> = curves.iter().collect();
        sorted.sort_by_key(|c| c.meta.half_side);
        let p = if m0.mode == SweepMode::Homogeneous {
            None
        } else {
            m0.p
        };
        Self::new(
            p,
            sorted.iter().map(|c| c.meta.half_side).collect(),
            first.sigma_grid.clone(),
            sorted.iter().map(|c| c.values.clone()).collect(),
            sorted.iter().map(|c| c.meta.trials()).collect(),
        )
    }

    /// The family without its `k` smallest boxes.
    pub fn drop_smallest(&self, k: usize) -> CrossingFamily {
        CrossingFamily {
            p: self.p,
            sizes: self.sizes[k..].to_vec(),
            sigma_grid: self.sigma_grid.clone(),
            curves: self.curves[k..].to_vec(),
            realizations: self.realizations[k..].to_vec(),
        }
    }

    /// Same curves on a grid shifted by `delta`.
    pub fn shifted(&self, delta: f64) -> CrossingFamily {
        CrossingFamily {
            sigma_grid: self.sigma_grid.iter().map(|x| x + delta).collect(),
            ..self.clone()
        }
    }
}

/// `E^2` at grid point `index`, summed over ordered pairs.
pub fn e_squared(family: &CrossingFamily, index: usize) -> f64 {
    let column: Vec<f64> = family.curves.iter().map(|c| c[index]).collect();
    column
        .iter()
        .map(|a| column.iter().map(|b| (a - b) * (a - b)).sum::<f64>())
        .sum()
}

pub fn e_squared_profile(family: &CrossingFamily) -> Vec<f64> {
    (0..family.sigma_grid.len())
        .map(|i| e_squared(family, i))
        .collect()
}

/// Crossing estimate for one set of box sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub sizes: Vec<usize>,
    pub sigma: f64,
    pub e2_min: f64,
    pub grid_index: usize,
    /// `{E^2 <= 2 min}` and `{E^2 <= 4 min}`, linearly interpolated.
    pub interval_2x: (f64, f64),
    pub interval_4x: (f64, f64),
    /// An interval ran into the end of the grid.
    pub truncated: bool,
    /// More than one grid point attains the minimum.
    pub multiple_minima: bool,
}

impl PointEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.interval_2x.1 - self.interval_2x.0)
    }
}

fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let (a, b) = (x[1] - x[0], x[1] - x[2]);
    let (fa, fb) = (y[1] - y[2], y[1] - y[0]);
    let den = a * fa - b * fb;
    if den >= 0.0 || !den.is_finite() {
        // flat or non-convex triple
        return x[1];
    }
    let shift = 0.5 * (a * a * fa - b * b * fb) / den;
    (x[1] - shift).clamp(x[0], x[2])
}

fn level_interval(grid: &[f64], e2: &[f64], center: usize, level: f64) -> ((f64, f64), bool) {
    let mut truncated = false;
    let mut j = center;
    while j > 0 && e2[j - 1] <= level {
        j -= 1;
    }
    let left = if j == 0 {
        truncated = true;
        grid[0]
    } else {
        let (x0, x1, y0, y1) = (grid[j - 1], grid[j], e2[j - 1], e2[j]);
        x0 + (y0 - level) / (y0 - y1) * (x1 - x0)
    };
    let mut k = center;
    while k + 1 < grid.len() && e2[k + 1] <= level {
        k += 1;
    }
    let right = if k + 1 == grid.len() {
        truncated = true;
        grid[k]
    } else {
        let (x0, x1, y0, y1) = (grid[k], grid[k + 1], e2[k], e2[k + 1]);
        x0 + (level - y0) / (y1 - y0) * (x1 - x0)
    };
    ((left, right), truncated)
}

/// Minimizes `E^2` over the grid of a family with at least two curves.
pub fn locate_crossing(family: &CrossingFamily) -> Result<PointEstimate> {
    if family.curves.len() < 2 {
        return Err(Error::TooFewSizes(family.curves.len()));
    }
    let grid = &family.sigma_grid;
    let e2 = e_squared_profile(family);
    let min = e2.iter().copied().fold(f64::INFINITY, f64::min);
    let index = e2.iter().position(|&v| v == min).unwrap();
    let multiple_minima = e2.iter().filter(|&&v| v == min).count() > 1;
    if index == 0 || index + 1 == grid.len() {
        return Err(Error::GridTooNarrow(grid[index]));
    }
    let sigma = parabola_vertex(
        [grid[index - 1], grid[index], grid[index + 1]],
        [e2[index - 1], e2[index], e2[index + 1]],
    );
    let (interval_2x, t2) = level_interval(grid, &e2, index, 2.0 * min);
    let (interval_4x, t4) = level_interval(grid, &e2, index, 4.0 * min);
    Ok(PointEstimate {
        sizes: family.sizes.clone(),
        sigma,
        e2_min: min,
        grid_index: index,
        interval_2x,
        interval_4x,
        truncated: t2 || t4,
        multiple_minima,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub all_sizes: PointEstimate,
    pub drop_smallest: PointEstimate,
    /// Only when at least four sizes are available.
    pub drop_two: Option<PointEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalEstimate {
    pub p: Option<f64>,
    pub sizes: Vec<usize>,
    pub realizations: u64,
    pub sigma_star: f64,
    pub stat_err: f64,
    pub sys_err: f64,
    pub combined_err: f64,
    pub e2_min: f64,
    pub diagnostics: Diagnostics,
}

/// Headline estimate with statistical and systematic errors.
///
/// The reported point and its statistical error come from the family with
/// the smallest box removed; the systematic error is twice the distance to
/// the all-sizes estimate.
pub fn estimate_sigma_star(family: &CrossingFamily) -> Result<CriticalEstimate> {
    if family.sizes.len() < 3 {
        return Err(Error::TooFewSizes(family.sizes.len()));
    }
    let all_sizes = locate_crossing(family)?;
    let drop_smallest = locate_crossing(&family.drop_smallest(1))?;
    let drop_two = if family.sizes.len() >= 4 {
        locate_crossing(&family.drop_smallest(2)).ok()
    } else {
        None
    };
    let stat_err = drop_smallest.half_width();
    let sys_err = 2.0 * (all_sizes.sigma - drop_smallest.sigma).abs();
    for est in [&all_sizes, &drop_smallest] {
        if est.multiple_minima {
            log::warn!("E^2 has several minimizers for sizes {:?}", est.sizes);
        }
        if est.truncated {
            log::warn!("E^2 interval for sizes {:?} hits the grid edge", est.sizes);
        }
    }
    Ok(CriticalEstimate {
        p: family.p,
        sizes: family.sizes.clone(),
        realizations: family.realizations.iter().copied().min().unwrap_or(0),
        sigma_star: drop_smallest.sigma,
        stat_err,
        sys_err,
        combined_err: stat_err + sys_err,
        e2_min: drop_smallest.e2_min,
        diagnostics: Diagnostics {
            all_sizes,
            drop_smallest,
            drop_two,
        },
    })
}

/// Critical-point estimates of the bulk lattices, used for bound checks.
pub fn known_pc(d: usize) -> Option<f64> {
    match d {
        2 => Some(0.5),
        3 => Some(0.248_811_82),
        4 => Some(0.160_130),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub p: f64,
    pub sigma_star: f64,
    pub stat_err: f64,
    pub sys_err: f64,
    pub combined_err: f64,
    pub sizes: Vec<usize>,
    pub realizations: u64,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalCurveTable {
    pub d: usize,
    pub s: usize,
    pub rows: Vec<TableRow>,
}

impl CriticalCurveTable {
    pub fn is_clean(&self) -> bool {
        self.rows.iter().all(|r| r.flags.is_empty())
    }

    pub const CSV_HEADER: &'static str =
        "p,sigma_star,stat_err,sys_err,combined_err,L_list,realizations";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let sizes: Vec<String> = r.sizes.iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.p,
                r.sigma_star,
                r.stat_err,
                r.sys_err,
                r.combined_err,
                sizes.join(";"),
                r.realizations
            );
        }
        out
    }
}

/// Collects per-`p` estimates into a table sorted by `p` and flags rows
/// that break `p_c(d) <= sigma* <= p_c(s)` or the decrease of `sigma*` in
/// `p`, beyond the combined error bars.
pub fn curve_table(
    d: usize,
    s: usize,
    estimates: &[CriticalEstimate],
    pc_bulk: Option<f64>,
    pc_plane: Option<f64>,
) -> Result<CriticalCurveTable> {
    let mut rows = estimates
        .iter()
        .map(|e| {
            let p = e.p.ok_or_else(|| {
                Error::Mismatch("critical-curve rows need a bulk density".into())
            })?;
            Ok(TableRow {
                p,
                sigma_star: e.sigma_star,
                stat_err: e.stat_err,
                sys_err: e.sys_err,
                combined_err: e.combined_err,
                sizes: e.sizes.clone(),
                realizations: e.realizations,
                flags: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.p.total_cmp(&b.p));
    for i in 0..rows.len() {
        let (lo, hi) = (
            rows[i].sigma_star - rows[i].combined_err,
            rows[i].sigma_star + rows[i].combined_err,
        );
        if let Some(pc) = pc_bulk {
            if hi < pc {
                rows[i].flags.push(format!("below p_c(d) = {pc}"));
            }
        }
        if let Some(pc) = pc_plane {
            if lo > pc {
                rows[i].flags.push(format!("above p_c(s) = {pc}"));
            }
        }
        if i > 0 {
            let prev = &rows[i - 1];
            if lo > prev.sigma_star + prev.combined_err {
                let flag = format!("increases from p = {} beyond error bars", prev.p);
                rows[i].flags.push(flag);
            }
        }
    }
    Ok(CriticalCurveTable { d, s, rows })
}
