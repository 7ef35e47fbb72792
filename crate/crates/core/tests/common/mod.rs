#![allow(dead_code)]

use mechanochem::elasticity::TractionField;
use mechanochem::experiments::{InitialNutrient, ScenarioSpec};
use mechanochem::grid::{BoundaryTag, Grid};
use mechanochem::materials::ElasticLaw;
use mechanochem::materials::RateTable;
use mechanochem::tensor::Tensor2;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Baseline with every source and coupling switched off: a pure
/// Cahn–Hilliard gradient flow with a stationary nutrient at `σ_B`.
pub fn gradient_flow(n: usize, steps: usize) -> ScenarioSpec {
    let mut s = ScenarioSpec::baseline().with_resolution(n);
    s.steps = steps;
    s.params.chi = 0.0;
    let src = &mut s.params.sources;
    src.lambda_p = RateTable::constant(0.0);
    src.lambda_a = RateTable::constant(0.0);
    src.lambda_c = RateTable::constant(0.0);
    src.supply = 0.0;
    s.params.elastic.eigenstrain_offset = Tensor2::ZERO;
    s.params.elastic.eigenstrain_slope = Tensor2::ZERO;
    s.initial_sigma = InitialNutrient::Constant(1.0);
    s
}

/// Baseline with the proliferation and apoptosis rates set to zero, so the
/// phase field conserves mass.
pub fn no_sources(n: usize, steps: usize) -> ScenarioSpec {
    let mut s = ScenarioSpec::baseline().with_resolution(n);
    s.steps = steps;
    s.params.sources.lambda_p = RateTable::constant(0.0);
    s.params.sources.lambda_a = RateTable::constant(0.0);
    s
}

/// 16², `dt = 0.01`, 100 steps: `T = 1` is long against every `β` swept.
pub fn quasistatic_spec() -> ScenarioSpec {
    let mut s = ScenarioSpec::baseline().with_resolution(16);
    s.dt = 1e-2;
    s.steps = 100;
    s
}

pub fn perturbation_spec(beta: f64) -> ScenarioSpec {
    let mut s = ScenarioSpec::baseline().with_resolution(16);
    s.params.beta = beta;
    s.steps = 100;
    s
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Vec<f64> {
    (0..n).map(|_| amp * rng.gen_range(-1.0..1.0)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Displacement by an independent dense assembly in Voigt notation
/// (engineering shear strain), solved with nalgebra's LU.
pub fn dense_oracle(grid: &Grid, law: &ElasticLaw, g: &TractionField, phi: &[f64]) -> Vec<f64> {
    let (l, m) = (law.lame_lambda, law.lame_mu);
    let d = DMatrix::from_row_slice(3, 3, &[l + 2.0 * m, l, 0.0, l, l + 2.0 * m, 0.0, 0.0, 0.0, m]);
    let voigt = |t: &Tensor2| DVector::from_vec(vec![t.0[0][0], t.0[1][1], 2.0 * t.0[0][1]]);
    let ndof = 2 * grid.n_nodes();
    let mut k = DMatrix::<f64>::zeros(ndof, ndof);
    let mut f = DVector::<f64>::zeros(ndof);
    let gp = 1.0 / 3f64.sqrt();
    let (hx, hy) = (grid.hx, grid.hy);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let nodes = [grid.node(i, j), grid.node(i + 1, j), grid.node(i + 1, j + 1), grid.node(i, j + 1)];
            let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
            for (xi, eta) in [(-gp, -gp), (gp, -gp), (gp, gp), (-gp, gp)] {
                let mut b = DMatrix::<f64>::zeros(3, 8);
                let mut phi_q = 0.0;
                for (a, (cx, cy)) in corners.iter().enumerate() {
                    let n = 0.25 * (1.0 + cx * xi) * (1.0 + cy * eta);
                    let dx = 0.25 * cx * (1.0 + cy * eta) * 2.0 / hx;
                    let dy = 0.25 * cy * (1.0 + cx * xi) * 2.0 / hy;
                    phi_q += n * phi[nodes[a]];
                    b[(0, 2 * a)] = dx;
                    b[(1, 2 * a + 1)] = dy;
                    b[(2, 2 * a)] = dy;
                    b[(2, 2 * a + 1)] = dx;
                }
                let w = 0.25 * hx * hy;
                let ke = b.transpose() * &d * &b * w;
                let eigen = voigt(&(law.eigenstrain_offset + law.eigenstrain_slope * phi_q));
                let fe = b.transpose() * (&d * eigen) * w;
                for a in 0..8 {
                    let ga = 2 * nodes[a / 2] + a % 2;
                    f[ga] += fe[a];
                    for c in 0..8 {
                        k[(ga, 2 * nodes[c / 2] + c % 2)] += ke[(a, c)];
                    }
                }
            }
        }
    }
    for face in grid.faces.iter().filter(|f| f.tag == BoundaryTag::Neumann) {
        let t = g.at(face.edge);
        for node in face.nodes {
            f[2 * node] += 0.5 * face.length * t[0];
            f[2 * node + 1] += 0.5 * face.length * t[1];
        }
    }
    let fixed = grid.dirichlet_dofs();
    let free: Vec<usize> = (0..ndof).filter(|d| !fixed.contains(d)).collect();
    let kr = DMatrix::from_fn(free.len(), free.len(), |r, c| k[(free[r], free[c])]);
    let fr = DVector::from_fn(free.len(), |r, _| f[free[r]]);
    let x = kr.lu().solve(&fr).expect("oracle system is regular");
    let mut u = vec![0.0; ndof];
    for (r, &dof) in free.iter().enumerate() {
        u[dof] = x[r];
    }
    u
}
