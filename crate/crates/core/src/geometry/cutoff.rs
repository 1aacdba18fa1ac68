use serde::Serialize;

use super::{GeometryError, Grid};
use crate::finsler::DistanceField;

/// `6t^5 - 15t^4 + 10t^3` clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// Transition band factor: `eps` must span at least this many cells.
pub const MIN_BAND_CELLS: f64 = 4.0;

#[derive(Debug, Clone, Serialize)]
pub struct CutoffField {
    #[serde(skip)]
    pub tau: Vec<f64>,
    pub epsilon: f64,
    pub grad_bound: f64,
    pub hess_bound: f64,
}

impl CutoffField {
    /// `C` in `grad_bound <= C / eps`.
    pub fn grad_constant(&self) -> f64 {
        self.grad_bound * self.epsilon
    }

    /// `C` in `hess_bound <= C / eps^2`.
    pub fn hess_constant(&self) -> f64 {
        self.hess_bound * self.epsilon * self.epsilon
    }
}

/// `tau = smoothstep((d - eps) / eps)` on every grid node.
pub fn build_cutoff(grid: &Grid, dist: &DistanceField, eps: f64) -> Result<CutoffField, GeometryError> {
    if !(eps >= MIN_BAND_CELLS * grid.h) {
        return Err(GeometryError::BandUnresolved { eps, h: grid.h });
    }
    assert_eq!(dist.values().len(), grid.len(), "distance field does not cover the grid");
    let tau: Vec<f64> = dist.values().iter().map(|&d| smoothstep((d - eps) / eps)).collect();
    let h = grid.h;
    let mut grad_bound = 0.0f64;
    let mut hess_bound = 0.0f64;
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let c = tau[grid.index(i, j)];
            let e = tau[grid.index(i + 1, j)];
            let w = tau[grid.index(i - 1, j)];
            let n = tau[grid.index(i, j + 1)];
            let s = tau[grid.index(i, j - 1)];
            let gx = (e - w) / (2.0 * h);
            let gy = (n - s) / (2.0 * h);
            grad_bound = grad_bound.max(gx.hypot(gy));
            let xx = (e - 2.0 * c + w) / (h * h);
            let yy = (n - 2.0 * c + s) / (h * h);
            let xy = (tau[grid.index(i + 1, j + 1)] - tau[grid.index(i + 1, j - 1)]
                - tau[grid.index(i - 1, j + 1)]
                + tau[grid.index(i - 1, j - 1)])
                / (4.0 * h * h);
            hess_bound = hess_bound.max((xx * xx + 2.0 * xy * xy + yy * yy).sqrt());
        }
    }
    Ok(CutoffField { tau, epsilon: eps, grad_bound, hess_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_values() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        // 6/32 - 15/16 + 10/8
        assert_eq!(smoothstep(0.5), 6.0 / 32.0 - 15.0 / 16.0 + 10.0 / 8.0);
        assert_eq!(smoothstep(0.5), 0.5);
        assert_eq!(smoothstep(-3.0), 0.0);
        assert_eq!(smoothstep(7.0), 1.0);
    }

    #[test]
    fn smoothstep_is_c2_at_ends() {
        let t = 1e-4;
        let d1 = smoothstep(t) / t;
        let d2 = 2.0 * smoothstep(t) / (t * t);
        assert!(d1 < 1e-6 && d2 < 1e-2);
        let s = 1.0 - smoothstep(1.0 - t);
        assert!(s / t < 1e-6);
    }
}
