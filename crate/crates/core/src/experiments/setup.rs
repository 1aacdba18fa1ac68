use super::{ExperimentError, RunConfig};
use crate::assembly::{assemble_q, FormMatrix};
use crate::finsler::{DistanceField, Metric};
use crate::geometry::{build_grid, computational_domain, AnalyticDomain, Grid, GridMask};
use crate::spectral::{lowest_eigenpairs, SpectralError, Spectrum};

/// Grid, mask and operator form of a run.
#[derive(Debug, Clone)]
pub struct Discretization {
    /// The physical domain; distances are measured to its boundary.
    pub omega: AnalyticDomain,
    /// `omega` eroded by the boundary offset; its nodes carry the unknowns.
    pub computational: AnalyticDomain,
    pub grid: Grid,
    pub mask: GridMask,
    pub q: FormMatrix,
    pub mass: FormMatrix,
}

impl Discretization {
    pub fn new(cfg: &RunConfig) -> Result<Self, ExperimentError> {
        let omega = cfg.domain;
        let computational = computational_domain(&omega, cfg.h, cfg.boundary_offset)?;
        let (grid, mask) = build_grid(&computational, cfg.h)?;
        let q = assemble_q(&grid, &mask, &cfg.coefficients)?;
        let mass = FormMatrix::l2_mass(&mask, cfg.h);
        Ok(Self { omega, computational, grid, mask, q, mass })
    }

    /// Exact Euclidean distance to the boundary of `omega` on every node.
    pub fn exact_distance(&self) -> DistanceField {
        let values = (0..self.grid.len()).map(|n| (-self.omega.sdf(self.grid.point(n))).max(0.0)).collect();
        DistanceField::from_values(Metric::Euclidean, values, crate::finsler::default_n_reg(self.grid.h))
    }

    /// `m` lowest pairs; an unconverged solve is returned with `converged = false`.
    pub fn spectrum(&self, cfg: &RunConfig, m: usize) -> Result<Spectrum, ExperimentError> {
        match lowest_eigenpairs(&self.q.matrix, &self.mass.matrix, m, &cfg.solver) {
            Ok(s) => Ok(s),
            Err(SpectralError::NoConvergence { spectrum, .. }) => Ok(*spectrum),
            Err(e) => Err(e.into()),
        }
    }
}
