mod common;

use mechanochem::assembly::{mass_matrix, stiffness_matrix};
use mechanochem::grid::{build_grid, Edge, EdgeSet};
use mechanochem::linalg::{cg_solve, default_max_iter, direct_solve, lump_mass, CsrMatrix, LinalgError, Preconditioner};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn to_nalgebra(a: &CsrMatrix) -> DMatrix<f64> {
    let d = a.to_dense();
    DMatrix::from_fn(a.n_rows(), a.n_cols(), |r, c| d[r][c])
}

/// Random banded matrix with entries in [-1, 1]; `dominant` adds a diagonal
/// large enough for strict diagonal dominance.
fn banded(n: usize, band: usize, seed: u64, symmetric: bool, dominant: bool) -> CsrMatrix {
    let mut rng = common::rng(seed);
    let vals = common::random_vec(&mut rng, n * n, 1.0);
    let mut t = Vec::new();
    for r in 0..n {
        for c in r.saturating_sub(band)..(r + band + 1).min(n) {
            let v = if symmetric { vals[r.min(c) * n + r.max(c)] } else { vals[r * n + c] };
            t.push((r, c, v));
        }
        if dominant {
            t.push((r, r, (2 * band + 2) as f64));
        }
    }
    CsrMatrix::from_triplets(n, n, &t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lu_matches_dense_oracle(n in 1usize..40, band in 0usize..6, seed in 0u64..10_000) {
        let a = banded(n, band, seed, false, false);
        let b = common::random_vec(&mut common::rng(seed + 1), n, 1.0);
        let dense = to_nalgebra(&a);
        if let Some(x_ref) = dense.clone().lu().solve(&DVector::from_vec(b.clone())) {
            let cond_guard = dense.clone().svd(false, false).singular_values;
            let smin = cond_guard.min();
            prop_assume!(smin > 1e-6 * cond_guard.max());
            match direct_solve(&a, &b) {
                Ok(x) => {
                    let scale = x_ref.amax().max(1.0);
                    for (u, v) in x.iter().zip(x_ref.iter()) {
                        prop_assert!((u - v).abs() <= 1e-7 * scale);
                    }
                }
                Err(e) => prop_assert!(false, "direct solve failed: {e}"),
            }
        }
    }

    #[test]
    fn cg_and_lu_agree_on_spd(n in 2usize..60, band in 1usize..5, seed in 0u64..10_000) {
        let a = banded(n, band, seed, true, true);
        let b = common::random_vec(&mut common::rng(seed + 7), n, 1.0);
        let (x_cg, report) = cg_solve(&a, &b, 1e-12, default_max_iter(n), Preconditioner::Jacobi).unwrap();
        prop_assert!(report.converged);
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(report.final_residual <= 1e-12 * bn);
        let x_lu = direct_solve(&a, &b).unwrap();
        prop_assert!(common::max_abs_diff(&x_cg, &x_lu) <= 1e-9);
    }

    #[test]
    fn matvec_matches_dense(n in 1usize..30, band in 0usize..4, seed in 0u64..10_000) {
        let a = banded(n, band, seed, false, false);
        let x = common::random_vec(&mut common::rng(seed + 3), n, 2.0);
        let y = a.matvec(&x);
        let y_ref = to_nalgebra(&a) * DVector::from_vec(x);
        for (u, v) in y.iter().zip(y_ref.iter()) {
            prop_assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }
}

#[test]
fn operator_eigenvalues_against_dense_oracle() {
    // the Neumann stiffness has a one-dimensional kernel; K + M is SPD
    let grid = build_grid(5, 4, 1.0, 0.8, EdgeSet::of(&[Edge::Left])).unwrap();
    let k = to_nalgebra(&stiffness_matrix(&grid));
    let m = to_nalgebra(&mass_matrix(&grid));
    let ek = k.clone().symmetric_eigen().eigenvalues;
    let mut sorted: Vec<f64> = ek.iter().cloned().collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!(sorted[0].abs() < 1e-12);
    assert!(sorted[1] > 1e-6);
    let em = m.symmetric_eigen().eigenvalues;
    assert!(em.iter().all(|&v| v > 0.0));
}

#[test]
fn lumped_mass_is_positive_and_conserves_area() {
    let grid = build_grid(7, 3, 2.0, 0.5, EdgeSet::of(&[Edge::Bottom])).unwrap();
    let lumped = lump_mass(&mass_matrix(&grid)).unwrap();
    assert!(lumped.iter().all(|&v| v > 0.0));
    assert!((lumped.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn cg_rejects_indefinite_matrix() {
    let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
    let err = cg_solve(&a, &[0.0, 1.0], 1e-10, 10, Preconditioner::None).unwrap_err();
    assert_eq!(err, LinalgError::NotSpd);
}

#[test]
fn cg_reports_non_convergence() {
    let a = banded(50, 3, 2, true, true);
    let b = vec![1.0; 50];
    let (_, report) = cg_solve(&a, &b, 1e-14, 2, Preconditioner::None).unwrap();
    assert!(!report.converged);
    assert_eq!(report.iterations, 2);
    assert!(report.final_residual > report.target);
}
