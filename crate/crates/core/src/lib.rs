//! Numerical laboratory for fourth-order Dirichlet operators on planar domains.
//!
//! Clamped boundary conditions come from zero extension on a uniform grid.
//! The crate computes clamped-plate spectra, boundary distances in the
//! Finsler metric of the coefficient tensor, Hardy-Rellich constants,
//! weighted boundary-decay integrals, the weighted form inequality and its
//! stability under coefficient perturbation, and eigenvalue drift when the
//! domain is eroded.

pub mod assembly;
pub mod experiments;
pub mod finsler;
pub mod geometry;
pub mod sparse;
pub mod spectral;
pub mod verifier;
