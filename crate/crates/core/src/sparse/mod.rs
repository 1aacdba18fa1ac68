//! Sparse symmetric storage and a profile Cholesky solver.

mod cholesky;
mod csr;

pub use cholesky::{EnvelopeCholesky, NotPositiveDefinite};
pub use csr::CsrMatrix;
