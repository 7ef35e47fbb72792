//! Banded LU factorisation with partial pivoting.
//!
//! Row `i` is stored densely over columns `[i - kl, i + kl + ku]`. Row
//! interchanges only ever move entries inside that window, so fill-in from
//! pivoting stays within the band. Multipliers stay where they were computed
//! and the row swaps are replayed on the right-hand side during the solve.

use super::{CsrMatrix, LinalgError, SolveMethod, SolveReport};

#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    fn slot(&self, row: usize, col: usize) -> usize {
        // col >= row - kl is guaranteed by the callers
        row * self.width + (col + self.kl - row)
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::DimensionMismatch(format!("{}x{} is not square", a.n_rows(), a.n_cols())));
        }
        let n = a.n_rows();
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu { n, kl, ku, width, data: vec![0.0; n * width], pivots: vec![0; n] };

        let mut col_max = vec![0.0f64; n];
        for r in 0..n {
            for (c, v) in a.row(r) {
                let s = lu.slot(r, c);
                lu.data[s] = v;
                col_max[c] = col_max[c].max(v.abs());
            }
        }

        let upper = kl + ku;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.slot(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.data[lu.slot(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best >= 1e-14 * col_max[k]) || best == 0.0 {
                return Err(LinalgError::Singular);
            }
            lu.pivots[k] = p;
            let last_col = (k + upper).min(n - 1);
            if p != k {
                for c in k..=last_col {
                    let (sk, sp) = (lu.slot(k, c), lu.slot(p, c));
                    lu.data.swap(sk, sp);
                }
            }
            let pivot = lu.data[lu.slot(k, k)];
            let len = last_col - k;
            let base_k = lu.slot(k, k + 1);
            for i in k + 1..=last_row {
                let si = lu.slot(i, k);
                let l = lu.data[si] / pivot;
                lu.data[si] = l;
                if l != 0.0 {
                    let base_i = lu.slot(i, k + 1);
                    // row i lies after row k in storage
                    let (head, tail) = lu.data.split_at_mut(base_i);
                    let src = &head[base_k..base_k + len];
                    for (x, y) in tail[..len].iter_mut().zip(src) {
                        *x -= l * y;
                    }
                }
            }
        }
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if b.len() != self.n {
            return Err(LinalgError::DimensionMismatch(format!("rhs {} vs system {}", b.len(), self.n)));
        }
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    x[i] -= self.data[self.slot(i, k)] * xk;
                }
            }
        }
        let upper = self.kl + self.ku;
        for k in (0..n).rev() {
            let mut acc = x[k];
            for c in k + 1..=(k + upper).min(n - 1) {
                acc -= self.data[self.slot(k, c)] * x[c];
            }
            x[k] = acc / self.data[self.slot(k, k)];
        }
        Ok(x)
    }
}

/// Solves `Ax = b` by banded LU with partial pivoting.
pub fn direct_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.n_rows() != b.len() {
        return Err(LinalgError::DimensionMismatch(format!("rhs {} vs system {}", b.len(), a.n_rows())));
    }
    BandedLu::factor(a)?.solve(b)
}

/// Direct solve plus a report carrying the Euclidean residual.
pub fn direct_solve_report(a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, SolveReport), LinalgError> {
    let x = direct_solve(a, b)?;
    let ax = a.matvec(&x);
    let res = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    Ok((x, SolveReport { iterations: 1, final_residual: res, target: f64::INFINITY, converged: true, method: SolveMethod::Direct }))
}
