use super::{CsrMatrix, LinalgError, SolveMethod, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients from a zero initial guess.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    tol: f64,
    max_iter: usize,
    precond: Preconditioner,
) -> Result<(Vec<f64>, SolveReport), LinalgError> {
    cg_solve_from(a, b, vec![0.0; b.len()], tol, max_iter, precond)
}

/// Preconditioned conjugate gradients from the initial guess `x`. Stops when
/// `‖b − Ax‖₂ ≤ tol·‖b‖₂`.
pub fn cg_solve_from(
    a: &CsrMatrix,
    b: &[f64],
    mut x: Vec<f64>,
    tol: f64,
    max_iter: usize,
    precond: Preconditioner,
) -> Result<(Vec<f64>, SolveReport), LinalgError> {
    let n = b.len();
    if !a.is_square() || a.n_rows() != n || x.len() != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "matrix {}x{}, rhs {}, guess {}",
            a.n_rows(),
            a.n_cols(),
            n,
            x.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidArgument("tolerance must be positive".into()));
    }
    let b_norm = norm2(b);
    let target = tol * b_norm;
    if b_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveReport { iterations: 0, final_residual: 0.0, target, converged: true, method: SolveMethod::Cg },
        ));
    }

    let inv_diag: Vec<f64> = match precond {
        Preconditioner::None => vec![1.0; n],
        Preconditioner::Jacobi => a
            .diagonal()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect(),
    };

    let mut r = a.matvec(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    let mut res = norm2(&r);

    while res > target && iterations < max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(LinalgError::NotSpd);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        res = norm2(&r);
        if res <= target {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    // report the true residual, not the recurrence
    let ax = a.matvec(&x);
    let final_residual = norm2(&ax.iter().zip(b).map(|(ax, b)| b - ax).collect::<Vec<_>>());
    let converged = final_residual <= target;
    Ok((x, SolveReport { iterations, final_residual, target, converged, method: SolveMethod::Cg }))
}

/// Default CG iteration cap for a system of size `n`.
pub fn default_max_iter(n: usize) -> usize {
    10 * n.max(1)
}
