use crate::geometry::{Grid, GridMask};
use crate::sparse::CsrMatrix;

/// Finite-difference tap list `(di, dj, coefficient)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub taps: Vec<(i64, i64, f64)>,
}

impl Stencil {
    pub fn dxx(h: f64) -> Self {
        let c = 1.0 / (h * h);
        Self { taps: vec![(-1, 0, c), (0, 0, -2.0 * c), (1, 0, c)] }
    }

    pub fn dyy(h: f64) -> Self {
        let c = 1.0 / (h * h);
        Self { taps: vec![(0, -1, c), (0, 0, -2.0 * c), (0, 1, c)] }
    }

    /// Four-point cross difference.
    pub fn dxy(h: f64) -> Self {
        let c = 0.25 / (h * h);
        Self { taps: vec![(-1, -1, c), (1, -1, -c), (-1, 1, -c), (1, 1, c)] }
    }

    /// Five-point Laplacian.
    pub fn laplacian(h: f64) -> Self {
        let c = 1.0 / (h * h);
        Self { taps: vec![(0, -1, c), (-1, 0, c), (0, 0, -4.0 * c), (1, 0, c), (0, 1, c)] }
    }

    /// Forward difference in x, living on the edge `(p, p + e_x)`.
    pub fn forward_x(h: f64) -> Self {
        Self { taps: vec![(0, 0, -1.0 / h), (1, 0, 1.0 / h)] }
    }

    pub fn forward_y(h: f64) -> Self {
        Self { taps: vec![(0, 0, -1.0 / h), (0, 1, 1.0 / h)] }
    }

    pub fn identity() -> Self {
        Self { taps: vec![(0, 0, 1.0)] }
    }

    pub fn hessian(h: f64) -> Vec<Self> {
        vec![Self::dxx(h), Self::dxy(h), Self::dyy(h)]
    }
}

/// Quadratic form `h^2 sum_p c_p(u)^T M_p c_p(v)` where `c_p` stacks stencil outputs at node `p`.
///
/// Stencil reads outside the mask return zero; `p` runs over every node
/// whose stencils touch the mask, including exterior rings.
#[derive(Debug, Clone)]
pub struct NodalForm<'a> {
    grid: &'a Grid,
    mask: &'a GridMask,
    ops: Vec<Stencil>,
    support: Vec<usize>,
    mats: Vec<f64>,
}

impl<'a> NodalForm<'a> {
    /// `matrix_at(node, out)` fills the `k x k` nodal matrix (row major) for `k = ops.len()`.
    pub fn new(grid: &'a Grid, mask: &'a GridMask, ops: Vec<Stencil>, mut matrix_at: impl FnMut(usize, &mut [f64])) -> Self {
        let k = ops.len();
        let mut touched = vec![false; grid.len()];
        for &q in mask.nodes() {
            for op in &ops {
                for &(di, dj, _) in &op.taps {
                    if let Some(p) = grid.offset(q, -di, -dj) {
                        touched[p] = true;
                    }
                }
            }
        }
        let support: Vec<usize> = (0..grid.len()).filter(|&p| touched[p]).collect();
        let mut mats = vec![0.0; support.len() * k * k];
        for (s, &p) in support.iter().enumerate() {
            matrix_at(p, &mut mats[s * k * k..(s + 1) * k * k]);
        }
        Self { grid, mask, ops, support, mats }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn width(&self) -> usize {
        self.ops.len()
    }

    /// Stencil outputs at node `p` for a full grid vector.
    pub fn components(&self, p: usize, full: &[f64], out: &mut [f64]) {
        for (a, op) in self.ops.iter().enumerate() {
            let mut s = 0.0;
            for &(di, dj, c) in &op.taps {
                if let Some(q) = self.grid.offset(p, di, dj) {
                    s += c * full[q];
                }
            }
            out[a] = s;
        }
    }

    /// Node-by-node evaluation of the bilinear form on dof vectors.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let fu = self.mask.scatter(u);
        let fv = self.mask.scatter(v);
        self.bilinear_full(&fu, &fv)
    }

    /// Same on full grid vectors (entries outside the mask must be zero).
    pub fn bilinear_full(&self, fu: &[f64], fv: &[f64]) -> f64 {
        let k = self.ops.len();
        let mut cu = vec![0.0; k];
        let mut cv = vec![0.0; k];
        let mut total = 0.0;
        for (s, &p) in self.support.iter().enumerate() {
            self.components(p, fu, &mut cu);
            self.components(p, fv, &mut cv);
            let m = &self.mats[s * k * k..(s + 1) * k * k];
            let mut acc = 0.0;
            for a in 0..k {
                let mut r = 0.0;
                for b in 0..k {
                    r += m[a * k + b] * cv[b];
                }
                acc += cu[a] * r;
            }
            total += acc;
        }
        self.grid.h * self.grid.h * total
    }

    /// Sparse matrix of the form on the mask dofs.
    pub fn assemble(&self) -> CsrMatrix {
        let k = self.ops.len();
        let h2 = self.grid.h * self.grid.h;
        let mut trip = Vec::new();
        // (node, component coefficients) touched from the current support node
        let mut local: Vec<(usize, Vec<f64>)> = Vec::new();
        for (s, &p) in self.support.iter().enumerate() {
            local.clear();
            for (a, op) in self.ops.iter().enumerate() {
                for &(di, dj, c) in &op.taps {
                    let Some(q) = self.grid.offset(p, di, dj) else { continue };
                    let Some(dof) = self.mask.dof(q) else { continue };
                    match local.iter_mut().find(|e| e.0 == dof) {
                        Some(e) => e.1[a] += c,
                        None => {
                            let mut cv = vec![0.0; k];
                            cv[a] = c;
                            local.push((dof, cv));
                        }
                    }
                }
            }
            local.sort_by_key(|e| e.0);
            let m = &self.mats[s * k * k..(s + 1) * k * k];
            for x in 0..local.len() {
                let (dx, cx) = (&local[x].0, &local[x].1);
                for item in &local[x..] {
                    let (dy, cy) = (item.0, &item.1);
                    let mut acc = 0.0;
                    for a in 0..k {
                        if cx[a] == 0.0 {
                            continue;
                        }
                        let mut r = 0.0;
                        for b in 0..k {
                            r += m[a * k + b] * cy[b];
                        }
                        acc += cx[a] * r;
                    }
                    trip.push((*dx, dy, h2 * acc));
                }
            }
        }
        CsrMatrix::from_upper_triplets(self.mask.count(), trip)
    }
}
