use serde::{Deserialize, Serialize};

use super::{AnalyticDomain, GeometryError};

/// Extra node rings around the bounding box; the widest stencil reaches two nodes.
pub const PAD: usize = 3;

/// Minimum number of interior nodes accepted by [`build_grid`].
pub const MIN_INTERIOR: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub h: f64,
    pub origin: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Grid aligned with the domain centre, covering the bounding box plus [`PAD`] rings.
    pub fn covering(domain: &AnalyticDomain, h: f64) -> Result<Self, GeometryError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(GeometryError::InvalidSpacing(h));
        }
        let b = domain.bbox();
        let c = domain.center();
        let half = |lo: f64, hi: f64, c: f64| ((hi - c).max(c - lo) / h).ceil() as usize + PAD;
        let mx = half(b.min[0], b.max[0], c[0]);
        let my = half(b.min[1], b.max[1], c[1]);
        Ok(Self {
            h,
            origin: [c[0] - mx as f64 * h, c[1] - my as f64 * h],
            nx: 2 * mx + 1,
            ny: 2 * my + 1,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.coords(idx);
        self.node(i, j)
    }

    /// Node index at integer offset `(di, dj)` from `idx`, if it lies on the grid.
    #[inline]
    pub fn offset(&self, idx: usize, di: i64, dj: i64) -> Option<usize> {
        let (i, j) = self.coords(idx);
        let ii = i as i64 + di;
        let jj = j as i64 + dj;
        if ii < 0 || jj < 0 || ii >= self.nx as i64 || jj >= self.ny as i64 {
            None
        } else {
            Some(self.index(ii as usize, jj as usize))
        }
    }
}

const NO_DOF: usize = usize::MAX;

/// Interior nodes of a grid and the dof numbering (node order).
#[derive(Debug, Clone, PartialEq)]
pub struct GridMask {
    dof_of_node: Vec<usize>,
    node_of_dof: Vec<usize>,
}

impl GridMask {
    pub fn from_predicate(grid: &Grid, mut inside: impl FnMut(usize) -> bool) -> Self {
        let mut dof_of_node = vec![NO_DOF; grid.len()];
        let mut node_of_dof = Vec::new();
        for (idx, slot) in dof_of_node.iter_mut().enumerate() {
            if inside(idx) {
                *slot = node_of_dof.len();
                node_of_dof.push(idx);
            }
        }
        Self { dof_of_node, node_of_dof }
    }

    /// Nodes with `sdf < 0`.
    pub fn from_domain(grid: &Grid, domain: &AnalyticDomain) -> Self {
        Self::from_predicate(grid, |idx| domain.sdf(grid.point(idx)) < 0.0)
    }

    pub fn count(&self) -> usize {
        self.node_of_dof.len()
    }

    #[inline]
    pub fn contains(&self, node: usize) -> bool {
        self.dof_of_node[node] != NO_DOF
    }

    #[inline]
    pub fn dof(&self, node: usize) -> Option<usize> {
        let d = self.dof_of_node[node];
        (d != NO_DOF).then_some(d)
    }

    #[inline]
    pub fn node(&self, dof: usize) -> usize {
        self.node_of_dof[dof]
    }

    pub fn nodes(&self) -> &[usize] {
        &self.node_of_dof
    }

    pub fn grid_len(&self) -> usize {
        self.dof_of_node.len()
    }

    pub fn is_subset_of(&self, other: &GridMask) -> bool {
        self.grid_len() == other.grid_len() && self.node_of_dof.iter().all(|&n| other.contains(n))
    }

    /// For each dof of `self`, the dof of the same node in `parent`.
    pub fn dofs_in(&self, parent: &GridMask) -> Option<Vec<usize>> {
        self.node_of_dof.iter().map(|&n| parent.dof(n)).collect()
    }

    /// Scatter a dof vector into a full grid vector with zeros outside.
    pub fn scatter(&self, u: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.grid_len()];
        for (dof, &node) in self.node_of_dof.iter().enumerate() {
            full[node] = u[dof];
        }
        full
    }

    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.node_of_dof.iter().map(|&n| full[n]).collect()
    }
}

/// Grid covering `domain` with the strict interior mask `sdf < 0`.
pub fn build_grid(domain: &AnalyticDomain, h: f64) -> Result<(Grid, GridMask), GeometryError> {
    let grid = Grid::covering(domain, h)?;
    let mask = GridMask::from_domain(&grid, domain);
    if mask.count() < MIN_INTERIOR {
        return Err(GeometryError::GridTooCoarse { count: mask.count(), h });
    }
    Ok((grid, mask))
}
