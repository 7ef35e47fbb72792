use super::SimError;
use crate::assembly::{mass_matrix, stiffness_matrix};
use crate::grid::Grid;
use crate::linalg::{direct_solve, LinalgError};

/// Elliptic smoothing of initial data: solves `(δK + M)φ_δ = Mφ₀` (discrete
/// `−δΔφ_δ + φ_δ = φ₀` with natural boundary conditions).
pub fn mollify_initial(grid: &Grid, phi0: &[f64], delta: f64) -> Result<Vec<f64>, SimError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(SimError::Linalg(LinalgError::InvalidArgument(format!("delta must lie in (0, 1], got {delta}"))));
    }
    if phi0.len() != grid.n_nodes() {
        return Err(SimError::WrongLength("phi0"));
    }
    let m = mass_matrix(grid);
    let a = stiffness_matrix(grid).linear_combination(delta, &m, 1.0);
    Ok(direct_solve(&a, &m.matvec(phi0))?)
}
