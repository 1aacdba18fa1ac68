use std::io::{self, Write};

/// Square sparse matrix in compressed-row form with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a symmetric matrix from upper-triangle triplets `(i, j, v)` with `i <= j`.
    ///
    /// Duplicates are summed in input order and the mirrored entry receives the
    /// same value, so the result is symmetric bit for bit.
    pub fn from_upper_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by_key(|a| (a.0, a.1));
        let mut upper: Vec<(usize, usize, f64)> = Vec::with_capacity(trip.len());
        for (i, j, v) in trip {
            assert!(i <= j && j < n, "triplet ({i}, {j}) outside the upper triangle");
            match upper.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => upper.push((i, j, v)),
            }
        }
        let mut counts = vec![0usize; n];
        for &(i, j, _) in &upper {
            counts[i] += 1;
            if i != j {
                counts[j] += 1;
            }
        }
        let mut indptr = vec![0usize; n + 1];
        for i in 0..n {
            indptr[i + 1] = indptr[i] + counts[i];
        }
        let nnz = indptr[n];
        let mut indices = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        let mut fill = indptr.clone();
        // lower entries of row j come from rows i < j, visited in increasing i
        for &(i, j, v) in &upper {
            if i != j {
                let p = fill[j];
                indices[p] = i;
                values[p] = v;
                fill[j] += 1;
            }
            let p = fill[i];
            indices[p] = j;
            values[p] = v;
            fill[i] += 1;
        }
        let mut m = Self { n, indptr, indices, values };
        m.sort_rows();
        m
    }

    fn sort_rows(&mut self) {
        for i in 0..self.n {
            let (s, e) = (self.indptr[i], self.indptr[i + 1]);
            let mut row: Vec<(usize, f64)> = self.indices[s..e].iter().copied().zip(self.values[s..e].iter().copied()).collect();
            row.sort_by_key(|p| p.0);
            for (k, (c, v)) in row.into_iter().enumerate() {
                self.indices[s + k] = c;
                self.values[s + k] = v;
            }
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self { n, indptr: (0..=n).collect(), indices: (0..n).collect(), values: d.to_vec() }
    }

    pub fn identity(n: usize, scale: f64) -> Self {
        Self::diagonal(&vec![scale; n])
    }

    /// Dense symmetric matrix given row by row; zeros are dropped.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut trip = Vec::new();
        for i in 0..n {
            for j in i..n {
                if rows[i][j] != 0.0 {
                    trip.push((i, j, rows[i][j]));
                }
            }
        }
        Self::from_upper_triplets(n, trip)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[s..e], &self.values[s..e])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `Some(d)` when every stored entry sits on the diagonal.
    pub fn as_diagonal(&self) -> Option<Vec<f64>> {
        for i in 0..self.n {
            let (cols, _) = self.row(i);
            if cols.iter().any(|&c| c != i) {
                return None;
            }
        }
        Some(self.diag())
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                s += v * x[*c];
            }
            y[i] = s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut r = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                r += v * y[*c];
            }
            s += x[i] * r;
        }
        s
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &CsrMatrix, s: f64) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut indptr = vec![0usize; self.n + 1];
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let a = ca.get(p).copied().unwrap_or(usize::MAX);
                let b = cb.get(q).copied().unwrap_or(usize::MAX);
                if a == b {
                    indices.push(a);
                    values.push(va[p] + s * vb[q]);
                    p += 1;
                    q += 1;
                } else if a < b {
                    indices.push(a);
                    values.push(va[p]);
                    p += 1;
                } else {
                    indices.push(b);
                    values.push(s * vb[q]);
                    q += 1;
                }
            }
            indptr[i + 1] = indices.len();
        }
        Self { n: self.n, indptr, indices, values }
    }

    /// Rows and columns listed in `keep` (increasing), renumbered in order.
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        let mut new_of_old = vec![usize::MAX; self.n];
        for (k, &o) in keep.iter().enumerate() {
            new_of_old[o] = k;
        }
        let mut indptr = vec![0usize; keep.len() + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (k, &o) in keep.iter().enumerate() {
            let (cols, vals) = self.row(o);
            for (c, v) in cols.iter().zip(vals) {
                let nc = new_of_old[*c];
                if nc != usize::MAX {
                    indices.push(nc);
                    values.push(*v);
                }
            }
            indptr[k + 1] = indices.len();
        }
        Self { n: keep.len(), indptr, indices, values }
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(*c, i)).abs());
            }
        }
        worst
    }

    pub fn is_bitwise_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(c, v)| v.to_bits() == self.get(*c, i).to_bits())
        })
    }

    /// Gershgorin bound on the largest eigenvalue of `D^{-1} A` for a positive diagonal `D`.
    pub fn gershgorin_upper(&self, d: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| {
                let (_, vals) = self.row(i);
                vals.iter().map(|v| v.abs()).sum::<f64>() / d[i]
            })
            .fold(0.0f64, f64::max)
    }

    /// Coordinate triplets, one `row col value` line each, 0-based, 17 significant digits.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "% {} {} {}", self.n, self.n, self.nnz())?;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:.16e}", i, c, v)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix {
        CsrMatrix::from_upper_triplets(3, vec![(0, 0, 2.0), (0, 1, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 2, 2.0), (0, 1, 0.5)])
    }

    #[test]
    fn triplets_are_summed_and_mirrored() {
        let m = sample();
        assert_eq!(m.get(0, 1), -0.5);
        assert_eq!(m.get(1, 0), -0.5);
        assert!(m.is_bitwise_symmetric());
        assert_eq!(m.nnz(), 7);
    }

    #[test]
    fn matvec_and_bilinear() {
        let m = sample();
        let x = [1.0, 2.0, 3.0];
        assert_eq!(m.matvec(&x), vec![1.0, 0.5, 4.0]);
        assert_eq!(m.bilinear(&x, &x), 1.0 + 1.0 + 12.0);
    }

    #[test]
    fn submatrix_and_add() {
        let m = sample();
        let s = m.principal_submatrix(&[1, 2]);
        assert_eq!(s.get(0, 0), 2.0);
        assert_eq!(s.get(0, 1), -1.0);
        let sum = m.add_scaled(&CsrMatrix::identity(3, 1.0), 3.0);
        assert_eq!(sum.get(2, 2), 5.0);
        assert_eq!(sum.get(1, 2), -1.0);
    }

    #[test]
    fn triplet_export_format() {
        let mut buf = Vec::new();
        CsrMatrix::identity(2, 0.1).write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0 0 1.0000000000000001e-1");
        let v: f64 = text.lines().nth(2).unwrap().split(' ').nth(2).unwrap().parse().unwrap();
        assert_eq!(v, 0.1);
    }
}
