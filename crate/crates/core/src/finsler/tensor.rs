use serde::{Deserialize, Serialize};

pub type Sym2 = [[f64; 2]; 2];

/// Symmetric 3x3 matrix acting on the Hessian components `(u_xx, u_xy, u_yy)`.
pub type HessianMatrix = [[f64; 3]; 3];

/// Fourth-order coefficient tensor `a_ijkl` in two dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tensor4 {
    pub a: [[[[f64; 2]; 2]; 2]; 2],
}

impl Tensor4 {
    pub fn zero() -> Self {
        Self { a: [[[[0.0; 2]; 2]; 2]; 2] }
    }

    /// `a_ijkl = delta_ij delta_kl`.
    pub fn bilaplacian() -> Self {
        Self::product(&[[1.0, 0.0], [0.0, 1.0]])
    }

    /// `a_ijkl = b_ij b_kl`.
    pub fn product(b: &Sym2) -> Self {
        let mut t = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        t.a[i][j][k][l] = b[i][j] * b[k][l];
                    }
                }
            }
        }
        t
    }

    /// `a_ijkl = delta_ij delta_kl a_ik`.
    pub fn diagonal(a: &Sym2) -> Self {
        let mut t = Self::zero();
        for i in 0..2 {
            for k in 0..2 {
                t.a[i][i][k][k] = a[i][k];
            }
        }
        t
    }

    /// Nodal matrix `M` with `sum a_ijkl H_ij H_kl = c^T M c`, `c = (H_11, H_12, H_22)`.
    pub fn hessian_matrix(&self) -> HessianMatrix {
        let a = &self.a;
        let m11 = a[0][0][0][0];
        let m12 = 2.0 * a[0][0][0][1];
        let m13 = a[0][0][1][1];
        let m22 = 4.0 * a[0][1][0][1];
        let m23 = 2.0 * a[0][1][1][1];
        let m33 = a[1][1][1][1];
        [[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]]
    }

    /// Inverse of [`Self::hessian_matrix`] onto fully symmetric tensors.
    pub fn from_hessian_matrix(m: &HessianMatrix) -> Self {
        let mut t = Self::zero();
        let idx = |c: usize| match c {
            0 => (0, 0),
            1 => (0, 1),
            _ => (1, 1),
        };
        let scale = [[1.0, 0.5, 1.0], [0.5, 0.25, 0.5], [1.0, 0.5, 1.0]];
        for p in 0..3 {
            for q in 0..3 {
                let v = m[p][q] * scale[p][q];
                let (i, j) = idx(p);
                let (k, l) = idx(q);
                for (ii, jj) in [(i, j), (j, i)] {
                    for (kk, ll) in [(k, l), (l, k)] {
                        t.a[ii][jj][kk][ll] = v;
                    }
                }
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = *self;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        t.a[i][j][k][l] += other.a[i][j][k][l];
                    }
                }
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut t = *self;
        t.a.iter_mut().flatten().flatten().flatten().for_each(|v| *v *= s);
        t
    }

    pub fn quartic(&self, xi: [f64; 2]) -> f64 {
        let c = self.quartic_coefficients();
        eval_quartic(&c, xi[0], xi[1])
    }

    /// Coefficients of `c0 x^4 + c1 x^3 y + c2 x^2 y^2 + c3 x y^3 + c4 y^4`.
    pub fn quartic_coefficients(&self) -> [f64; 5] {
        let m = self.hessian_matrix();
        [m[0][0], 2.0 * m[0][1], 2.0 * m[0][2] + m[1][1], 2.0 * m[1][2], m[2][2]]
    }

    /// Largest violation of the index symmetries.
    pub fn symmetry_defect(&self) -> f64 {
        let a = &self.a;
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let v = a[i][j][k][l];
                        worst = worst
                            .max((v - a[j][i][k][l]).abs())
                            .max((v - a[i][j][l][k]).abs())
                            .max((v - a[k][l][i][j]).abs());
                    }
                }
            }
        }
        worst
    }

    /// `sum a_ijkl xi_i xi_j eta_k eta_l - sum a_ijkl xi_i xi_k eta_j eta_l`, nonnegative under condition (ii).
    pub fn condition_ii_slack(&self, xi: [f64; 2], eta: [f64; 2]) -> f64 {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let v = self.a[i][j][k][l];
                        lhs += v * xi[i] * xi[k] * eta[j] * eta[l];
                        rhs += v * xi[i] * xi[j] * eta[k] * eta[l];
                    }
                }
            }
        }
        rhs - lhs
    }
}

#[inline]
pub fn eval_quartic(c: &[f64; 5], x: f64, y: f64) -> f64 {
    let x2 = x * x;
    let y2 = y * y;
    c[0] * x2 * x2 + c[1] * x2 * x * y + c[2] * x2 * y2 + c[3] * x * y2 * y + c[4] * y2 * y2
}

/// Spectral norm of a symmetric 3x3 matrix.
pub fn operator_norm(m: &HessianMatrix) -> f64 {
    let mat = nalgebra::Matrix3::from_fn(|i, j| m[i][j]);
    mat.symmetric_eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilaplacian_quartic_is_norm_to_fourth() {
        let t = Tensor4::bilaplacian();
        assert_eq!(t.quartic([3.0, 4.0]), 625.0);
        assert_eq!(t.hessian_matrix(), [[1.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 1.0]]);
    }

    #[test]
    fn product_quartic_is_square_of_quadratic() {
        let b = [[4.0, 0.0], [0.0, 1.0]];
        let t = Tensor4::product(&b);
        assert_eq!(t.quartic([1.0, 0.0]), 16.0);
        let (x, y) = (0.3, -1.7);
        let q = 4.0 * x * x + y * y;
        assert!((t.quartic([x, y]) - q * q).abs() < 1e-12);
    }

    #[test]
    fn hessian_matrix_roundtrip() {
        let m = [[1.0, 0.2, -0.3], [0.2, 0.7, 0.1], [-0.3, 0.1, 2.0]];
        let t = Tensor4::from_hessian_matrix(&m);
        assert_eq!(t.symmetry_defect(), 0.0);
        let back = t.hessian_matrix();
        for p in 0..3 {
            for q in 0..3 {
                assert!((back[p][q] - m[p][q]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hessian_matrix_reproduces_contraction() {
        let t = Tensor4::product(&[[2.0, 0.5], [0.5, 1.0]]);
        let h = [[0.3, -1.1], [-1.1, 0.9]];
        let mut direct = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        direct += t.a[i][j][k][l] * h[i][j] * h[k][l];
                    }
                }
            }
        }
        let c = [h[0][0], h[0][1], h[1][1]];
        let m = t.hessian_matrix();
        let mut via = 0.0;
        for p in 0..3 {
            for q in 0..3 {
                via += c[p] * m[p][q] * c[q];
            }
        }
        assert!((direct - via).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_of_identity() {
        let m = [[-1.5, 0.0, 0.0], [0.0, -1.5, 0.0], [0.0, 0.0, -1.5]];
        assert!((operator_norm(&m) - 1.5).abs() < 1e-14);
    }
}
