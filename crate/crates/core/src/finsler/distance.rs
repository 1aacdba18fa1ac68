use serde::{Deserialize, Serialize};

use crate::geometry::{Grid, GridMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Finsler,
}

/// Distance to the boundary sampled on every grid node (zero outside the domain).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub metric: Metric,
    values: Vec<f64>,
    pub n_reg: u32,
    /// `(c1_hat, c2_hat)` against the Euclidean distance once measured.
    pub equivalence: Option<(f64, f64)>,
    pub sweeps: usize,
}

/// `round(1/h)`.
pub fn default_n_reg(h: f64) -> u32 {
    ((1.0 / h).round() as u32).max(1)
}

impl DistanceField {
    pub fn from_values(metric: Metric, values: Vec<f64>, n_reg: u32) -> Self {
        assert!(n_reg >= 1, "n_reg must be at least 1");
        Self { metric, values, n_reg, equivalence: None, sweeps: 0 }
    }

    /// Node values of `d`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn d(&self, node: usize) -> f64 {
        self.values[node]
    }

    #[inline]
    pub fn d_n(&self, node: usize) -> f64 {
        self.values[node].max(0.0) + 1.0 / self.n_reg as f64
    }

    pub fn d_n_values(&self) -> Vec<f64> {
        (0..self.values.len()).map(|n| self.d_n(n)).collect()
    }

    /// `omega_n = d_n^{-alpha}` at a node.
    #[inline]
    pub fn omega(&self, node: usize, alpha: f64) -> f64 {
        self.d_n(node).powf(-alpha)
    }

    /// `d_n^{-alpha}` on the dofs of `mask`.
    pub fn omega_dofs(&self, mask: &GridMask, alpha: f64) -> Vec<f64> {
        mask.nodes().iter().map(|&n| self.omega(n, alpha)).collect()
    }

    pub fn covers(&self, grid: &Grid) -> bool {
        self.values.len() == grid.len()
    }
}

/// Same field with `d_n = d + 1/n`.
pub fn regularize(dist: &DistanceField, n: u32) -> DistanceField {
    assert!(n >= 1, "regularization index must be at least 1");
    DistanceField { n_reg: n, ..dist.clone() }
}

/// `(min, max)` of `d / d_euclid` over the mask.
pub fn equivalence_constants(dist: &DistanceField, dist_euclid: &DistanceField, mask: &GridMask) -> (f64, f64) {
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    for &n in mask.nodes() {
        let r = dist.d(n) / dist_euclid.d(n);
        c1 = c1.min(r);
        c2 = c2.max(r);
    }
    (c1, c2)
}
