//! Sparse storage and the linear solvers behind every implicit step.

mod cg;
mod csr;
mod lu;

use thiserror::Error;

pub use cg::{cg_solve, cg_solve_from, default_max_iter, Preconditioner};
pub use csr::CsrMatrix;
pub use lu::{direct_solve, direct_solve_report, BandedLu};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix not SPD")]
    NotSpd,
    #[error("singular system")]
    Singular,
    #[error("invalid mass matrix")]
    InvalidMassMatrix,
    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Cg,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Euclidean norm of `b - Ax` for the returned `x`.
    pub final_residual: f64,
    /// Absolute residual threshold the solve was asked to reach.
    pub target: f64,
    pub converged: bool,
    pub method: SolveMethod,
}

pub const DEFAULT_CG_TOL: f64 = 1e-10;

/// Row sums of a consistent mass matrix.
pub fn lump_mass(m: &CsrMatrix) -> Result<Vec<f64>, LinalgError> {
    let sums = m.row_sums();
    if sums.iter().any(|&s| s < 0.0 || !s.is_finite()) {
        return Err(LinalgError::InvalidMassMatrix);
    }
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lumping_diagonal_is_identity() {
        let m = CsrMatrix::from_diagonal(&[0.5, 2.0, 1.0]);
        assert_eq!(lump_mass(&m).unwrap(), vec![0.5, 2.0, 1.0]);
    }

    #[test]
    fn lumping_rejects_negative_rows() {
        let m = CsrMatrix::from_dense(&[vec![1.0, -3.0], vec![0.0, 1.0]]);
        assert_eq!(lump_mass(&m).unwrap_err(), LinalgError::InvalidMassMatrix);
    }

    #[test]
    fn single_cell_lumped_quarters() {
        let m = CsrMatrix::from_dense(&[
            vec![4.0 / 36.0, 2.0 / 36.0, 1.0 / 36.0, 2.0 / 36.0],
            vec![2.0 / 36.0, 4.0 / 36.0, 2.0 / 36.0, 1.0 / 36.0],
            vec![1.0 / 36.0, 2.0 / 36.0, 4.0 / 36.0, 2.0 / 36.0],
            vec![2.0 / 36.0, 1.0 / 36.0, 2.0 / 36.0, 4.0 / 36.0],
        ]);
        for v in lump_mass(&m).unwrap() {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }
}
