mod common;

use std::f64::consts::PI;

use mechanochem::assembly::interpolate_fn;
use mechanochem::diagnostics::{bochner_l2_sq, energy_inequality_ledger, DiagnosticsRecord, Norms};
use mechanochem::grid::{build_grid, Edge, EdgeSet, Grid};
use mechanochem::linalg::direct_solve;
use mechanochem::steppers::mollify_initial;
use proptest::prelude::*;

fn grid(n: usize) -> Grid {
    build_grid(n, n, 1.0, 1.0, EdgeSet::of(&[Edge::Bottom])).unwrap()
}

#[test]
fn cosine_mode_dual_norm_ratio() {
    // cos(πx) is a Neumann eigenfunction: ‖f‖_*² = ‖f‖² / (1 + π²)
    let g = grid(32);
    let norms = Norms::new(&g);
    let f = interpolate_fn(&g, |x, _| (PI * x).cos());
    let ratio = norms.dual(&f).unwrap().powi(2) / norms.l2(&f).powi(2);
    let exact = 1.0 / (1.0 + PI * PI);
    assert!((ratio / exact - 1.0).abs() < 0.02, "ratio {ratio} vs {exact}");
}

#[test]
fn constants_have_equal_norms() {
    let g = build_grid(6, 4, 2.0, 1.0, EdgeSet::of(&[Edge::Left])).unwrap();
    let norms = Norms::new(&g);
    let f = vec![3.0; g.n_nodes()];
    let l2 = norms.l2(&f);
    assert!((l2 - 3.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!((norms.h1(&f) - l2).abs() < 1e-12);
    assert!((norms.dual(&f).unwrap() - l2).abs() < 1e-12);
}

#[test]
fn riesz_representative_solves_the_neumann_problem() {
    let g = grid(8);
    let norms = Norms::new(&g);
    let f = common::random_vec(&mut common::rng(1), g.n_nodes(), 1.0);
    let z = norms.riesz(&f).unwrap();
    let lhs: Vec<f64> = norms.stiffness.matvec(&z).iter().zip(norms.mass.matvec(&z)).map(|(a, b)| a + b).collect();
    assert!(common::max_abs_diff(&lhs, &norms.mass.matvec(&f)) < 1e-12);
}

#[test]
fn ledger_of_constant_records() {
    let recs: Vec<DiagnosticsRecord> = (0..5)
        .map(|k| DiagnosticsRecord {
            time: 0.1 * k as f64,
            phi_h1_norm: 1.0,
            psi_l1: 0.5,
            sigma_l2_norm: 2.0,
            u_h1_norm: 0.0,
            mu_h1_norm: 1.0,
            sigma_h1_norm: 3.0,
            ..Default::default()
        })
        .collect();
    let l = energy_inequality_ledger(&recs, 0.5, 2.0);
    assert!((l.sup_term - (1.0 + 0.5 + 2.0)).abs() < 1e-14);
    assert!((l.mu_integral - 0.4).abs() < 1e-14);
    assert!((l.sigma_integral - 3.6).abs() < 1e-14);
    assert!((l.ratio - l.lhs / 3.0).abs() < 1e-14);
    assert!(l.finite);
    assert!((bochner_l2_sq(&[0.0, 1.0], &[2.0, 100.0]) - 4.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interpolation_inequality(seed in 0u64..100_000, amp in 1e-3f64..1e3) {
        let g = grid(8);
        let norms = Norms::new(&g);
        let f = common::random_vec(&mut common::rng(seed), g.n_nodes(), amp);
        let l2 = norms.l2(&f).powi(2);
        let bound = norms.h1(&f) * norms.dual(&f).unwrap();
        prop_assert!(l2 <= bound * (1.0 + 1e-9));
        prop_assert!(norms.dual(&f).unwrap() <= norms.l2(&f) * (1.0 + 1e-12));
    }

    #[test]
    fn mollifier_estimates(seed in 0u64..100_000, delta in prop::sample::select(vec![1.0, 0.1, 1e-2, 1e-3])) {
        let g = grid(10);
        let norms = Norms::new(&g);
        let phi0 = common::random_vec(&mut common::rng(seed), g.n_nodes(), 1.0);
        let phi = mollify_initial(&g, &phi0, delta).unwrap();
        let (l2_0, grad_0) = (norms.l2(&phi0).powi(2), norms.grad_l2(&phi0).powi(2));
        let (l2, grad) = (norms.l2(&phi).powi(2), norms.grad_l2(&phi).powi(2));
        // discrete Laplacian M⁻¹Kφ
        let lap = direct_solve(&norms.mass, &norms.stiffness.matvec(&phi)).unwrap();
        let lap_sq = norms.l2(&lap).powi(2);
        prop_assert!(2.0 * delta * grad + l2 <= l2_0 + 1e-10);
        prop_assert!(2.0 * delta * lap_sq + grad <= grad_0 + 1e-10);
    }
}

#[test]
fn mollifier_keeps_constants() {
    let g = grid(6);
    for delta in [1.0, 0.3, 1e-3] {
        let phi = mollify_initial(&g, &vec![-0.4; g.n_nodes()], delta).unwrap();
        assert!(phi.iter().all(|v| (v + 0.4).abs() < 1e-12));
    }
}

#[test]
fn mollifier_converges_as_delta_shrinks() {
    let g = grid(16);
    let norms = Norms::new(&g);
    let phi0 = interpolate_fn(&g, |x, y| if (x - 0.5).powi(2) + (y - 0.5).powi(2) < 0.09 { 1.0 } else { -1.0 });
    let errs: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&d| {
            let phi = mollify_initial(&g, &phi0, d).unwrap();
            norms.l2(&phi.iter().zip(&phi0).map(|(a, b)| a - b).collect::<Vec<_>>())
        })
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn mollifier_smooths_a_checkerboard() {
    let g = grid(8);
    let norms = Norms::new(&g);
    let phi0: Vec<f64> = (0..g.n_nodes()).map(|k| if (k % 9 + k / 9) % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let phi = mollify_initial(&g, &phi0, 1.0).unwrap();
    assert!(norms.grad_l2(&phi) < norms.grad_l2(&phi0));
}

#[test]
fn mollifier_rejects_bad_delta() {
    let g = grid(4);
    let phi0 = vec![0.0; g.n_nodes()];
    assert!(mollify_initial(&g, &phi0, 0.0).is_err());
    assert!(mollify_initial(&g, &phi0, 1.5).is_err());
}
