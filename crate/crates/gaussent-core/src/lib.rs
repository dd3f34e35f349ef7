//! Gaussian-state entanglement toolkit for disjoint regions of the 1D
//! lattice scalar-field vacuum.
//!
//! The crate builds vacuum covariance matrices, computes logarithmic
//! negativity and its additive PT-mode decomposition, constructs the local
//! symplectic transformation that consolidates all negativity into
//! (1x1)-mode core pairs, runs Gaussian separability flows with constructive
//! decompositions, and quantifies the separability-obscured (bound)
//! entanglement left in the halo. Everything runs at configurable
//! arbitrary precision; separability flows default to several hundred
//! digits.

pub mod cm;
pub mod consolidate;
pub mod emit;
pub mod error;
pub mod fixtures;
pub mod lattice;
pub mod mpnum;
pub mod negativity;
pub mod qubit;
pub mod separability;
pub mod soe;
pub mod symplectic;

pub use cm::{CovarianceMatrix, ModeLayout, Region};
pub use error::{Error, Result};
pub use lattice::RegionSpec;
pub use mpnum::{Matrix, PrecisionContext};
