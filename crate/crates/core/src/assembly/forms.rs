use serde::{Deserialize, Serialize};

use super::nodal::{NodalForm, Stencil};
use super::AssemblyError;
use crate::finsler::{CoefficientField, DistanceField, FrozenCoefficients};
use crate::geometry::{Grid, GridMask};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightOrder {
    Mass,
    Grad,
    Hess,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormKind {
    Q,
    Q0,
    WeightedMass { power: f64, n_reg: u32 },
    WeightedGrad { power: f64, n_reg: u32 },
    WeightedHess { power: f64, n_reg: u32 },
    /// A linear combination built from other forms (shifted pencils).
    Combined,
}

/// Sparse symmetric matrix of a quadratic form on mask dofs.
#[derive(Debug, Clone)]
pub struct FormMatrix {
    pub matrix: CsrMatrix,
    pub kind: FormKind,
    pub h: f64,
}

impl FormMatrix {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn quadratic(&self, u: &[f64]) -> f64 {
        self.matrix.quadratic(u)
    }

    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        self.matrix.bilinear(u, v)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scaled(s), kind: self.kind, h: self.h }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &FormMatrix, s: f64) -> Self {
        Self { matrix: self.matrix.add_scaled(&other.matrix, s), kind: FormKind::Combined, h: self.h }
    }

    /// Restriction to the dofs `keep` (increasing).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        Self { matrix: self.matrix.principal_submatrix(keep), kind: self.kind, h: self.h }
    }

    /// `h^2 I`, the discrete `L^2` mass.
    pub fn l2_mass(mask: &GridMask, h: f64) -> Self {
        Self {
            matrix: CsrMatrix::identity(mask.count(), h * h),
            kind: FormKind::WeightedMass { power: 0.0, n_reg: 1 },
            h,
        }
    }
}

fn hessian_ops(grid: &Grid) -> Vec<Stencil> {
    Stencil::hessian(grid.h)
}

/// `h^2 sum (Delta_h u)^2`.
pub fn q0_form<'a>(grid: &'a Grid, mask: &'a GridMask) -> NodalForm<'a> {
    NodalForm::new(grid, mask, vec![Stencil::laplacian(grid.h)], |_, m| m[0] = 1.0)
}

/// `h^2 sum c^T M_p c` over `c = (D_xx u, D_xy u, D_yy u)`; the bilaplacian goes through `Delta_h`.
pub fn q_form<'a>(grid: &'a Grid, mask: &'a GridMask, coeffs: &FrozenCoefficients) -> NodalForm<'a> {
    if coeffs.bilaplacian {
        return q0_form(grid, mask);
    }
    NodalForm::new(grid, mask, hessian_ops(grid), |p, m| {
        let a = coeffs.hessian_matrix(p);
        for r in 0..3 {
            for c in 0..3 {
                m[r * 3 + c] = a[r][c];
            }
        }
    })
}

/// Bilinear form `h^2 sum c_p(u)^T M_p c_p(v)` with an arbitrary symmetric nodal matrix on the Hessian stack.
pub fn hessian_form<'a>(grid: &'a Grid, mask: &'a GridMask, mut matrix_at: impl FnMut(usize) -> [[f64; 3]; 3]) -> NodalForm<'a> {
    NodalForm::new(grid, mask, hessian_ops(grid), |p, m| {
        let a = matrix_at(p);
        for r in 0..3 {
            for c in 0..3 {
                m[r * 3 + c] = a[r][c];
            }
        }
    })
}

pub fn assemble_q0(grid: &Grid, mask: &GridMask) -> FormMatrix {
    FormMatrix { matrix: q0_form(grid, mask).assemble(), kind: FormKind::Q0, h: grid.h }
}

/// Rejects tensors whose quartic symbol is not positive at some support node.
pub fn assemble_q(grid: &Grid, mask: &GridMask, coeffs: &CoefficientField) -> Result<FormMatrix, AssemblyError> {
    let frozen = coeffs.freeze(grid);
    let form = q_form(grid, mask, &frozen);
    for &p in form.support() {
        if let Some(xi) = symbol_failure(&frozen.tensors[p]) {
            return Err(AssemblyError::NotElliptic { node: p, xi });
        }
    }
    Ok(FormMatrix { matrix: form.assemble(), kind: FormKind::Q, h: grid.h })
}

pub(crate) const PROBE_DIRECTIONS: usize = 180;

/// First unit direction (over a half-circle scan) where the quartic symbol is not positive.
pub(crate) fn symbol_failure(t: &crate::finsler::Tensor4) -> Option<[f64; 2]> {
    let c = t.quartic_coefficients();
    (0..PROBE_DIRECTIONS).find_map(|k| {
        let th = std::f64::consts::PI * k as f64 / PROBE_DIRECTIONS as f64;
        let xi = [th.cos(), th.sin()];
        (crate::finsler::eval_quartic(&c, xi[0], xi[1]) <= 0.0).then_some(xi)
    })
}

/// Node-wise weighted form with weights `d_n^{-power}`.
///
/// Gradient weights live on edges and use the mean of the two end-node distances.
pub fn weighted_form<'a>(
    grid: &'a Grid,
    mask: &'a GridMask,
    dist: &DistanceField,
    order: WeightOrder,
    power: f64,
) -> NodalForm<'a> {
    let inv_n = 1.0 / dist.n_reg as f64;
    let w = |d: f64| (d.max(0.0) + inv_n).powf(-power);
    match order {
        WeightOrder::Mass => NodalForm::new(grid, mask, vec![Stencil::identity()], |p, m| m[0] = w(dist.d(p))),
        WeightOrder::Hess => NodalForm::new(grid, mask, hessian_ops(grid), |p, m| {
            let wp = w(dist.d(p));
            m.iter_mut().for_each(|v| *v = 0.0);
            m[0] = wp;
            m[4] = 2.0 * wp;
            m[8] = wp;
        }),
        WeightOrder::Grad => NodalForm::new(grid, mask, vec![Stencil::forward_x(grid.h), Stencil::forward_y(grid.h)], |p, m| {
            let dp = dist.d(p).max(0.0);
            let edge = |q: Option<usize>| q.map_or(dp, |q| 0.5 * (dp + dist.d(q).max(0.0)));
            m[0] = w(edge(grid.offset(p, 1, 0)));
            m[1] = 0.0;
            m[2] = 0.0;
            m[3] = w(edge(grid.offset(p, 0, 1)));
        }),
    }
}

/// Unweighted `h^2 sum |grad_h u|^2` on forward edges.
pub fn assemble_dirichlet(grid: &Grid, mask: &GridMask) -> FormMatrix {
    let ops = vec![Stencil::forward_x(grid.h), Stencil::forward_y(grid.h)];
    let matrix = NodalForm::new(grid, mask, ops, |_, m| m.copy_from_slice(&[1.0, 0.0, 0.0, 1.0])).assemble();
    FormMatrix { matrix, kind: FormKind::WeightedGrad { power: 0.0, n_reg: 1 }, h: grid.h }
}

pub fn assemble_weighted(grid: &Grid, mask: &GridMask, dist: &DistanceField, order: WeightOrder, power: f64) -> FormMatrix {
    let n_reg = dist.n_reg;
    let matrix = weighted_form(grid, mask, dist, order, power).assemble();
    let kind = match order {
        WeightOrder::Mass => FormKind::WeightedMass { power, n_reg },
        WeightOrder::Grad => FormKind::WeightedGrad { power, n_reg },
        WeightOrder::Hess => FormKind::WeightedHess { power, n_reg },
    };
    FormMatrix { matrix, kind, h: grid.h }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::Metric;
    use crate::geometry::{build_grid, AnalyticDomain};

    fn single_node() -> (Grid, GridMask) {
        let grid = Grid { h: 0.1, origin: [0.0, 0.0], nx: 7, ny: 7 };
        let centre = grid.index(3, 3);
        let mask = GridMask::from_predicate(&grid, |n| n == centre);
        (grid, mask)
    }

    #[test]
    fn isolated_node_q0() {
        let (grid, mask) = single_node();
        let q0 = assemble_q0(&grid, &mask);
        let h2 = grid.h * grid.h;
        // centre (-4u/h^2)^2 plus four neighbours (u/h^2)^2, times h^2
        assert!((q0.matrix.get(0, 0) - 20.0 / h2).abs() < 1e-9 / h2);
    }

    #[test]
    fn isolated_node_hessian_route() {
        let (grid, mask) = single_node();
        let h2 = grid.h * grid.h;
        let q = assemble_q(&grid, &mask, &CoefficientField::product([[1.0, 0.0], [0.0, 1.0]])).unwrap();
        assert!((q.matrix.get(0, 0) - 20.0 / h2).abs() < 1e-9 / h2);
        let frob = hessian_form(&grid, &mask, |_| [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]]);
        // centre 8, edge neighbours 4 x 1, corners 4 x 2 x 1/16
        assert!((frob.bilinear(&[1.0], &[1.0]) - 12.5 / h2).abs() < 1e-9 / h2);
    }

    #[test]
    fn mass_forms() {
        let (grid, mask) = build_grid(&AnalyticDomain::disk(1.0), 0.125).unwrap();
        let dist = DistanceField::from_values(Metric::Euclidean, vec![0.0; grid.len()], 2);
        let m0 = assemble_weighted(&grid, &mask, &dist, WeightOrder::Mass, 0.0);
        let m4 = assemble_weighted(&grid, &mask, &dist, WeightOrder::Mass, 4.0);
        let h2 = grid.h * grid.h;
        for i in 0..mask.count() {
            assert_eq!(m0.matrix.get(i, i), h2);
            assert_eq!(m4.matrix.get(i, i), 16.0 * h2);
        }
        assert_eq!(m0.matrix.as_diagonal().map(|d| d.len()), Some(mask.count()));
    }

    #[test]
    fn bilaplacian_q_equals_q0_bitwise() {
        let (grid, mask) = build_grid(&AnalyticDomain::disk(1.0), 0.1).unwrap();
        let q = assemble_q(&grid, &mask, &CoefficientField::bilaplacian()).unwrap();
        let q0 = assemble_q0(&grid, &mask);
        assert_eq!(q.matrix, q0.matrix);
    }

    #[test]
    fn product_identity_matches_q0() {
        let (grid, mask) = build_grid(&AnalyticDomain::disk(1.0), 0.1).unwrap();
        let q = assemble_q(&grid, &mask, &CoefficientField::product([[1.0, 0.0], [0.0, 1.0]])).unwrap();
        let q0 = assemble_q0(&grid, &mask);
        let scale = 20.0 / (grid.h * grid.h);
        for i in 0..mask.count() {
            let (cols, vals) = q0.matrix.row(i);
            for (c, v) in cols.iter().zip(vals) {
                assert!((q.matrix.get(i, *c) - v).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn negative_symbol_is_not_elliptic() {
        let (grid, mask) = build_grid(&AnalyticDomain::disk(1.0), 0.1).unwrap();
        let bad = CoefficientField::diagonal([[-1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(assemble_q(&grid, &mask, &bad), Err(AssemblyError::NotElliptic { .. })));
    }

    #[test]
    fn zero_vector_gives_zero() {
        let (grid, mask) = build_grid(&AnalyticDomain::disk(1.0), 0.1).unwrap();
        let q0 = assemble_q0(&grid, &mask);
        assert_eq!(q0.quadratic(&vec![0.0; mask.count()]), 0.0);
    }
}
