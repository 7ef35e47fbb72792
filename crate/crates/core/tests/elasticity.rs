mod common;

use mechanochem::elasticity::{assemble_elasticity, potential_energy, strain_field, ElasticityError, TractionField};
use mechanochem::experiments::elastic_manufactured;
use mechanochem::grid::{build_grid, Edge, EdgeSet};
use mechanochem::materials::ElasticLaw;
use mechanochem::tensor::Tensor2;
use proptest::prelude::*;

fn test_law() -> ElasticLaw {
    ElasticLaw::new(1.5, 0.8, Tensor2::sym(0.02, -0.01, 0.005), Tensor2::sym(0.05, 0.03, -0.01)).unwrap()
}

#[test]
fn dense_oracle_agreement_on_4x4() {
    let mut rng = common::rng(11);
    for dirichlet in [EdgeSet::of(&[Edge::Bottom]), EdgeSet::of(&[Edge::Left, Edge::Top]), EdgeSet::all()] {
        let grid = build_grid(4, 4, 1.0, 1.5, dirichlet).unwrap();
        let law = test_law();
        let g = TractionField { per_edge: [[0.1, -0.2], [0.3, 0.05], [0.0, 0.4], [-0.2, 0.1]] };
        let phi = common::random_vec(&mut rng, grid.n_nodes(), 1.0);
        let mut sys = assemble_elasticity(&grid, &law, &g).unwrap();
        sys.tol = 1e-13;
        let (u, report) = sys.solve_from(&phi, None).unwrap();
        assert!(report.converged);
        let oracle = common::dense_oracle(&grid, &law, &g, &phi);
        let err = common::max_abs_diff(&u, &oracle);
        assert!(err < 1e-8, "max difference {err:e} with Γ_D = {dirichlet}");
    }
}

#[test]
fn energy_minimiser_against_random_perturbations() {
    let grid = build_grid(6, 6, 1.0, 1.0, EdgeSet::of(&[Edge::Left])).unwrap();
    let sys = assemble_elasticity(&grid, &test_law(), &TractionField::on_edge(Edge::Right, [0.2, -0.1])).unwrap();
    let mut rng = common::rng(5);
    let phi = common::random_vec(&mut rng, grid.n_nodes(), 1.0);
    let (u, _) = sys.solve_from(&phi, None).unwrap();
    let e0 = potential_energy(&grid, &sys, &phi, &u);
    for _ in 0..20 {
        let mut v = common::random_vec(&mut rng, u.len(), 1e-2);
        for d in grid.dirichlet_dofs() {
            v[d] = 0.0;
        }
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        assert!(potential_energy(&grid, &sys, &phi, &w) >= e0 - 1e-14);
    }
}

#[test]
fn manufactured_solution_order_two() {
    let r = elastic_manufactured(&[8, 16, 32, 64], 1.0, 1.0).unwrap();
    let slope = r.slope.unwrap();
    assert!((1.8..=2.2).contains(&slope), "slope {slope}");
    let err = r.column("err_l2").unwrap();
    assert!(err.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn manufactured_solution_with_stiff_lambda() {
    let r = elastic_manufactured(&[8, 16, 32], 4.0, 1.0).unwrap();
    let err = r.column("err_l2").unwrap();
    for w in err.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.7, "order {order}");
    }
}

#[test]
fn non_coercive_law_is_a_korn_violation() {
    let grid = build_grid(2, 2, 1.0, 1.0, EdgeSet::of(&[Edge::Bottom])).unwrap();
    let law = ElasticLaw { lame_lambda: 1.0, lame_mu: 0.0, ..ElasticLaw::default() };
    let err = assemble_elasticity(&grid, &law, &TractionField::zero()).unwrap_err();
    assert_eq!(err, ElasticityError::KornViolation);
    assert!(err.to_string().contains("Korn violation: check Γ_D"));
}

#[test]
fn zero_eigenstrain_gives_zero_displacement() {
    let grid = build_grid(4, 4, 1.0, 1.0, EdgeSet::of(&[Edge::Bottom])).unwrap();
    let law = ElasticLaw::new(1.0, 1.0, Tensor2::ZERO, Tensor2::ZERO).unwrap();
    let sys = assemble_elasticity(&grid, &law, &TractionField::zero()).unwrap();
    let (u, _) = sys.solve_from(&vec![0.3; grid.n_nodes()], None).unwrap();
    assert!(u.iter().all(|v| v.abs() < 1e-14));
    assert!(strain_field(&grid, &u).iter().all(|e| e.norm() < 1e-12));
}

#[test]
fn traction_superposition() {
    let grid = build_grid(5, 4, 1.0, 1.0, EdgeSet::of(&[Edge::Left])).unwrap();
    let law = test_law();
    let phi = vec![0.0; grid.n_nodes()];
    let zero = ElasticLaw { eigenstrain_offset: Tensor2::ZERO, eigenstrain_slope: Tensor2::ZERO, ..law };
    let g = TractionField::on_edge(Edge::Right, [1.0, 0.5]);
    let mut s1 = assemble_elasticity(&grid, &zero, &g).unwrap();
    let mut s2 = assemble_elasticity(&grid, &zero, &g.scaled(3.0)).unwrap();
    s1.tol = 1e-13;
    s2.tol = 1e-13;
    let (u1, _) = s1.solve_from(&phi, None).unwrap();
    let (u2, _) = s2.solve_from(&phi, None).unwrap();
    let scaled: Vec<f64> = u1.iter().map(|v| 3.0 * v).collect();
    assert!(common::max_abs_diff(&scaled, &u2) < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solution_has_zero_free_residual(seed in 0u64..1000, nx in 2usize..6, ny in 2usize..6) {
        let grid = build_grid(nx, ny, 1.0, 0.7, EdgeSet::of(&[Edge::Bottom, Edge::Right])).unwrap();
        let sys = assemble_elasticity(&grid, &test_law(), &TractionField::uniform([0.1, 0.2])).unwrap();
        let mut rng = common::rng(seed);
        let phi = common::random_vec(&mut rng, grid.n_nodes(), 1.0);
        let (u, _) = sys.solve_from(&phi, None).unwrap();
        let res = sys.residual(&phi, &u);
        let scale = sys.load(&phi).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for &d in &sys.free_dofs {
            prop_assert!(res[d].abs() <= 1e-8 * (1.0 + scale));
        }
        for d in grid.dirichlet_dofs() {
            prop_assert_eq!(u[d], 0.0);
        }
    }

    #[test]
    fn reduced_stiffness_is_symmetric(nx in 2usize..5, ny in 2usize..5, lambda in 0.1f64..5.0, mu in 0.1f64..5.0) {
        let grid = build_grid(nx, ny, 1.0, 1.0, EdgeSet::of(&[Edge::Top])).unwrap();
        let law = ElasticLaw::new(lambda, mu, Tensor2::ZERO, Tensor2::ZERO).unwrap();
        let sys = assemble_elasticity(&grid, &law, &TractionField::zero()).unwrap();
        let dense = sys.stiffness.to_dense();
        for r in 0..dense.len() {
            for c in 0..dense.len() {
                prop_assert!((dense[r][c] - dense[c][r]).abs() <= 1e-12 * (1.0 + dense[r][c].abs()));
            }
        }
    }
}
