//! Newman-Ziff microcanonical sampling of face-to-face crossings.
//!
//! Bulk edges are opened independently at density `p`; defect edges are then
//! inserted one at a time in a uniformly random order while a union-find
//! forest tracks which clusters touch the opposite faces. The first insertion
//! count at which a cluster spans the faces is the realization's threshold.
//! Thresholds accumulate into integer counts `Q_p(s)`, and a binomial
//! convolution turns those into canonical curves `Q_L(p, sigma)`.

mod curve;
mod forest;
mod sweep;

pub use curve::{
    binomial_weights, convolve, convolve_grid, CanonicalCurve, CurveBuilder, CurveMeta,
    MicrocanonicalCurve, SweepMode, FORMAT_VERSION, MONOTONE_SLACK,
};
pub use forest::DisjointSetForest;
pub use sweep::{homogeneous_sweep, sweep, FacePairs, Faces, SweepParams, Sweeper};
