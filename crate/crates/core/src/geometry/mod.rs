//! Analytic domains, uniform grids, interior masks, erosion and the cutoff `tau`.

mod cutoff;
mod domain;
mod grid;

pub use cutoff::{build_cutoff, smoothstep, CutoffField, MIN_BAND_CELLS};
pub use domain::{AnalyticDomain, Bbox, Shape};
pub use grid::{build_grid, Grid, GridMask, MIN_INTERIOR, PAD};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("grid too coarse: {count} interior nodes at h = {h}")]
    GridTooCoarse { count: usize, h: f64 },
    #[error("grid spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("invalid shape parameters {0:?}")]
    InvalidShape(Shape),
    #[error("erosion by {eps} empties a domain of inradius {inradius}")]
    EmptyErosion { eps: f64, inradius: f64 },
    #[error("erosion width must be positive, got {0}")]
    InvalidErosion(f64),
    #[error("cutoff band eps = {eps} is narrower than 4h = {}", 4.0 * h)]
    BandUnresolved { eps: f64, h: f64 },
}

/// Computational domain: `domain` eroded by `offset_cells * h`.
///
/// The zero-extension scheme places the effective clamped boundary about half
/// a cell beyond the last interior node, so shrinking the node set by half a
/// cell lines the discrete boundary up with the true one.
pub fn computational_domain(domain: &AnalyticDomain, h: f64, offset_cells: f64) -> Result<AnalyticDomain, GeometryError> {
    if offset_cells == 0.0 {
        Ok(*domain)
    } else {
        domain.erode(offset_cells * h)
    }
}
