use super::CsrMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("matrix is not positive definite (pivot {pivot} at row {row})")]
pub struct NotPositiveDefinite {
    pub row: usize,
    pub pivot: f64,
}

/// Cholesky factor `A = L L^T` stored by rows over the envelope of `A`.
///
/// Row `i` keeps `L[i][first[i]..=i]`; fill stays inside the profile, so grid
/// matrices numbered row by row cost `O(n w^2)` for half-bandwidth `w`.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self, NotPositiveDefinite> {
        let n = a.n();
        let mut first = Vec::with_capacity(n);
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            let (cols, _) = a.row(i);
            let f = cols.first().copied().unwrap_or(i).min(i);
            first.push(f);
            start.push(start[i] + (i - f + 1));
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            let fi = first[i];
            let (done, rest) = data.split_at_mut(start[i]);
            let row = &mut rest[..i - fi + 1];
            let (cols, vals) = a.row(i);
            for (c, v) in cols.iter().zip(vals) {
                if *c >= fi && *c <= i {
                    row[c - fi] = *v;
                }
            }
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let lj = &done[start[j]..start[j + 1]];
                let s = dot(&row[k0 - fi..j - fi], &lj[k0 - fj..j - fj]);
                row[j - fi] = (row[j - fi] - s) / lj[j - fj];
            }
            let s = dot(&row[..i - fi], &row[..i - fi]);
            let aii = row[i - fi];
            let d = aii - s;
            if !(d > 1e-14 * aii.abs()) || !d.is_finite() {
                return Err(NotPositiveDefinite { row: i, pivot: d });
            }
            row[i - fi] = d.sqrt();
        }
        Ok(Self { n, first, start, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries of the factor.
    pub fn stored(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s = dot(&row[..i - fi], &b[fi..i]);
            b[i] = (b[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let xi = b[i] / row[i - fi];
            b[i] = xi;
            for (bj, l) in b[fi..i].iter_mut().zip(&row[..i - fi]) {
                *bj -= l * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let p = 4 * k;
        acc[0] += a[p] * b[p];
        acc[1] += a[p + 1] * b[p + 1];
        acc[2] += a[p + 2] * b[p + 2];
        acc[3] += a[p + 3] * b[p + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for p in 4 * chunks..a.len() {
        s += a[p] * b[p];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_upper_triplets(n, t)
    }

    #[test]
    fn solves_tridiagonal_system() {
        let a = laplacian_1d(50);
        let x: Vec<f64> = (0..50).map(|k| (k as f64 * 0.3).sin()).collect();
        let b = a.matvec(&x);
        let f = EnvelopeCholesky::factor(&a).unwrap();
        let y = f.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-11);
        }
    }

    #[test]
    fn solves_with_ragged_envelope() {
        let rows = vec![
            vec![4.0, 0.0, 1.0, 0.0],
            vec![0.0, 3.0, 0.0, 0.5],
            vec![1.0, 0.0, 5.0, 1.0],
            vec![0.0, 0.5, 1.0, 2.0],
        ];
        let a = CsrMatrix::from_dense(&rows);
        let f = EnvelopeCholesky::factor(&a).unwrap();
        let b = [1.0, -2.0, 0.5, 3.0];
        let x = f.solve(&b);
        let r = a.matvec(&x);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert_eq!(EnvelopeCholesky::factor(&a).unwrap_err().row, 1);
    }
}
