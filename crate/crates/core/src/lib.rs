//! Inhomogeneous bond percolation on the hypercubic lattice with a defect
//! plane.
//!
//! The crate covers the whole numerical pipeline: box geometry
//! ([`lattice`]), Newman-Ziff crossing sweeps ([`sampler`]), crossing-point
//! estimation of the surface critical curve ([`estimator`]), origin-cluster
//! statistics ([`observables`]), the bridge mean-field approximation
//! ([`meanfield`]) and exact lattice-animal enumeration ([`animals`]).

pub mod animals;
pub mod error;
pub mod estimator;
pub mod lattice;
pub mod meanfield;
pub mod observables;
pub mod sampler;
pub mod stream;

pub use error::{Error, Result};
pub use lattice::{build_edge_table, face_vertices, Boundary, EdgeTable, LatticeSpec};
