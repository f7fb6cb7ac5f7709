//! Exact enumeration of lattice animals at the origin of `Z^d`.
//!
//! An animal is a connected set of edges whose vertex set contains the
//! origin; the bare origin (no edges) is the `n = 0` animal. Every edge and
//! every perimeter edge is classified as bulk or as lying in the defect
//! plane spanned by the first `s` axes, so the census gives exact cluster
//! probabilities of the inhomogeneous model as polynomials in `(p, sigma)`.

mod audit;
mod census;
mod enumerate;
mod pmf;
pub mod reference;

pub use audit::{
    audited_census, identity_audit, lambda, supermult_audit, IdentityReport, SupermultCheck,
};
pub use census::{AnimalCensus, CensusKey, CycleContactCensus};
pub use enumerate::{
    check_cap, default_cap, enumerate, enumerate_into, enumerate_unguarded, estimated_animals,
    AnimalSink, AnimalStats,
};
pub use pmf::{
    exact_edge_pmf, exact_vertex_pmf, max_edges_for_vertices, partition_function_y,
    partition_function_z,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension of the lattice and of the defect plane. Unlike a box, the
/// animal lattice admits `s = d` (every edge is a defect edge).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnimalSpec {
    pub d: usize,
    pub s: usize,
}

impl AnimalSpec {
    pub fn new(d: usize, s: usize) -> Result<Self> {
        let spec = AnimalSpec { d, s };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 || self.d > 8 {
            return Err(Error::InvalidParameter(format!(
                "animal enumeration needs 2 <= d <= 8, got d = {}",
                self.d
            )));
        }
        if self.s > self.d {
            return Err(Error::InvalidParameter(format!(
                "need s <= d, got s = {}, d = {}",
                self.s, self.d
            )));
        }
        Ok(())
    }
}
