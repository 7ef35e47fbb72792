use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LinalgError;

/// Compressed-row sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl CsrMatrix {
    /// Builds a matrix from raw parts, checking the structural invariants.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if row_offsets.len() != n_rows + 1 || row_offsets[0] != 0 {
            return Err(LinalgError::InvalidStructure("row_offsets length".into()));
        }
        if col_indices.len() != values.len() || *row_offsets.last().unwrap() != values.len() {
            return Err(LinalgError::InvalidStructure("nnz mismatch".into()));
        }
        for r in 0..n_rows {
            if row_offsets[r] > row_offsets[r + 1] {
                return Err(LinalgError::InvalidStructure(format!("row_offsets decrease at row {r}")));
            }
            let cols = &col_indices[row_offsets[r]..row_offsets[r + 1]];
            if cols.iter().any(|&c| c >= n_cols) {
                return Err(LinalgError::InvalidStructure(format!("column out of range in row {r}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(LinalgError::InvalidStructure(format!("columns not strictly increasing in row {r}")));
            }
        }
        Ok(CsrMatrix { n_rows, n_cols, row_offsets, col_indices, values, symmetric: false })
    }

    /// Sums duplicate entries. Explicit zeros are kept.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            assert!(r < n_rows && c < n_cols, "triplet ({r},{c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        CsrMatrix { n_rows, n_cols, row_offsets, col_indices, values, symmetric: false }
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        let mut m = Self::from_triplets(n, n, &t);
        m.symmetric = true;
        m
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        let mut m = Self::from_triplets(d.len(), d.len(), &t);
        m.symmetric = true;
        m
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut t = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n_rows, n_cols, &t)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        self.symmetric = false;
        &mut self.values
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[r]..self.row_offsets[r + 1];
        self.col_indices[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_offsets[r]..self.row_offsets[r + 1];
        match self.col_indices[range.clone()].binary_search(&c) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.row(r).map(|(_, v)| v).sum()).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "matvec dimension mismatch");
        assert_eq!(y.len(), self.n_rows, "matvec dimension mismatch");
        for r in 0..self.n_rows {
            let mut acc = 0.0;
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            y[r] = acc;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// `a * self + b * other`; both must share the same sparsity pattern.
    pub fn linear_combination(&self, a: f64, other: &CsrMatrix, b: f64) -> CsrMatrix {
        assert!(
            self.row_offsets == other.row_offsets && self.col_indices == other.col_indices,
            "linear_combination requires identical patterns"
        );
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values,
            symmetric: self.symmetric && other.symmetric,
        }
    }

    /// Adds `d` to the diagonal. Every diagonal position must be stored.
    pub fn add_diagonal(&mut self, d: &[f64]) {
        let sym = self.symmetric;
        for (r, &dv) in d.iter().enumerate() {
            let range = self.row_offsets[r]..self.row_offsets[r + 1];
            let pos = self.col_indices[range.clone()].binary_search(&r).expect("diagonal entry not stored");
            self.values[range.start + pos] += dv;
        }
        self.symmetric = sym;
    }

    /// Keeps the rows and columns listed in `keep` (sorted), renumbered.
    pub fn submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n_cols.max(self.n_rows)];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_offsets = Vec::with_capacity(keep.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for &r in keep {
            for (c, v) in self.row(r) {
                if map[c] != usize::MAX {
                    col_indices.push(map[c]);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        CsrMatrix {
            n_rows: keep.len(),
            n_cols: keep.len(),
            row_offsets,
            col_indices,
            values,
            symmetric: self.symmetric,
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                t.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.n_cols, self.n_rows, &t)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for r in 0..self.n_rows {
            for (c, _) in self.row(r) {
                if c < r {
                    kl = kl.max(r - c);
                } else {
                    ku = ku.max(c - r);
                }
            }
        }
        (kl, ku)
    }

    pub fn is_symmetric_flagged(&self) -> bool {
        self.symmetric
    }

    /// Randomised symmetry check: `x·(Ay) = y·(Ax)` for five random pairs to
    /// 1e-12 relative. Sets the symmetry flag on success.
    pub fn certify_symmetric(&mut self) -> bool {
        if !self.is_square() {
            return false;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let n = self.n_rows;
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let xay = self.bilinear(&x, &y);
            let yax = self.bilinear(&y, &x);
            let scale = xay.abs().max(yax.abs()).max(f64::MIN_POSITIVE);
            if (xay - yax).abs() > 1e-12 * scale {
                self.symmetric = false;
                return false;
            }
        }
        self.symmetric = true;
        true
    }

    /// Interleaves a 2×2 block operator `[[a, b], [c, d]]` on `n` nodes into a
    /// `2n` system with unknown `2i + k` for block `k` of node `i`. All four
    /// blocks must share one sparsity pattern.
    pub fn interleave_blocks(blocks: [&CsrMatrix; 4]) -> CsrMatrix {
        let [a, b, c, d] = blocks;
        let n = a.n_rows;
        for m in [b, c, d] {
            assert!(m.row_offsets == a.row_offsets && m.col_indices == a.col_indices, "block patterns differ");
        }
        let mut row_offsets = Vec::with_capacity(2 * n + 1);
        let mut col_indices = Vec::with_capacity(4 * a.nnz());
        let mut values = Vec::with_capacity(4 * a.nnz());
        row_offsets.push(0);
        for i in 0..n {
            for (left, right) in [(a, b), (c, d)] {
                let range = a.row_offsets[i]..a.row_offsets[i + 1];
                for k in range {
                    let col = a.col_indices[k];
                    col_indices.push(2 * col);
                    values.push(left.values[k]);
                    col_indices.push(2 * col + 1);
                    values.push(right.values[k]);
                }
                row_offsets.push(col_indices.len());
            }
        }
        CsrMatrix { n_rows: 2 * n, n_cols: 2 * n, row_offsets, col_indices, values, symmetric: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = CsrMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 1, 2.0), (1, 2, 3.0), (0, 0, -1.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), 4.0);
        assert_eq!(m.get(0, 0), -1.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert!(CsrMatrix::from_parts(2, 3, m.row_offsets.clone(), m.col_indices.clone(), m.values.clone()).is_ok());
    }

    #[test]
    fn from_parts_rejects_bad_structure() {
        assert!(CsrMatrix::from_parts(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::from_parts(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::from_parts(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
    }

    #[test]
    fn symmetry_certification() {
        let mut s = CsrMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]);
        assert!(s.certify_symmetric());
        let mut a = CsrMatrix::from_dense(&[vec![2.0, -1.0], vec![0.5, 2.0]]);
        assert!(!a.certify_symmetric());
    }

    #[test]
    fn submatrix_and_interleave() {
        let m = CsrMatrix::from_dense(&[vec![1.0, 2.0, 0.0], vec![3.0, 4.0, 5.0], vec![0.0, 6.0, 7.0]]);
        let s = m.submatrix(&[0, 2]);
        assert_eq!(s.to_dense(), vec![vec![1.0, 0.0], vec![0.0, 7.0]]);
        let i = CsrMatrix::identity(2);
        let z = i.linear_combination(0.0, &i, 0.0);
        let big = CsrMatrix::interleave_blocks([&i, &z, &z, &i]);
        assert_eq!(big.to_dense(), CsrMatrix::identity(4).to_dense());
    }
}
