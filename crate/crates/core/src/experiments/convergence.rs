use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::sweep::{diff, loglog_slope, ExperimentError, SweepResult};
use super::ScenarioSpec;
use crate::assembly::interpolate_fn;
use crate::diagnostics::Norms;
use crate::elasticity::{assemble_elasticity, TractionField};
use crate::grid::{build_grid, EdgeSet, Grid};
use crate::materials::ElasticLaw;
use crate::steppers::{FieldState, SimError};
use crate::tensor::Tensor2;

/// How the time step follows the mesh: `dt = dt₀·(n₀/n)^p` with `p` 0, 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtRule {
    Fixed,
    Linear,
    Quadratic,
}

impl DtRule {
    fn power(self) -> i32 {
        match self {
            DtRule::Fixed => 0,
            DtRule::Linear => 1,
            DtRule::Quadratic => 2,
        }
    }
}

impl FromStr for DtRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed" => Ok(DtRule::Fixed),
            "linear" => Ok(DtRule::Linear),
            "quadratic" => Ok(DtRule::Quadratic),
            other => Err(format!("unknown dt rule '{other}'")),
        }
    }
}

impl fmt::Display for DtRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DtRule::Fixed => "fixed",
            DtRule::Linear => "linear",
            DtRule::Quadratic => "quadratic",
        })
    }
}

fn check_grids(grids: &[usize]) -> Result<(), ExperimentError> {
    if grids.len() < 3 {
        return Err(ExperimentError::InvalidInput("need at least three grids".into()));
    }
    if grids[0] == 0 {
        return Err(ExperimentError::InvalidInput("grid size must be positive".into()));
    }
    for w in grids.windows(2) {
        if w[1] != w[0] && w[1] != 2 * w[0] {
            return Err(ExperimentError::InvalidInput(format!("grid {} does not refine {} by 2", w[1], w[0])));
        }
    }
    Ok(())
}

/// Values of a fine-grid nodal field at the nodes of a coarser grid.
pub fn restrict(fine: &Grid, coarse: &Grid, values: &[f64], components: usize) -> Vec<f64> {
    let rx = fine.nx / coarse.nx;
    let ry = fine.ny / coarse.ny;
    let mut out = Vec::with_capacity(coarse.n_nodes() * components);
    for j in 0..=coarse.ny {
        for i in 0..=coarse.nx {
            let node = fine.node(i * rx, j * ry);
            for c in 0..components {
                out.push(values[components * node + c]);
            }
        }
    }
    out
}

fn split_components(u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (u.iter().step_by(2).cloned().collect(), u.iter().skip(1).step_by(2).cloned().collect())
}

fn vector_l2(norms: &Norms, u: &[f64]) -> f64 {
    let (a, b) = split_components(u);
    (norms.l2(&a).powi(2) + norms.l2(&b).powi(2)).sqrt()
}

/// Self-convergence: every grid runs to the same final time and its final
/// fields are compared with the finest run restricted to it.
pub fn convergence_study(spec: &ScenarioSpec, grids: &[usize], dt_rule: DtRule) -> Result<SweepResult, ExperimentError> {
    check_grids(grids)?;
    let t_final = spec.final_time();
    let n0 = grids[0] as f64;
    let runs: Vec<Result<(Grid, f64, FieldState), ExperimentError>> = grids
        .par_iter()
        .map(|&n| {
            let tag = format!("n={n}");
            let dt = spec.dt * (n0 / n as f64).powi(dt_rule.power());
            let steps = (t_final / dt).round().max(1.0) as usize;
            let mut s = spec.with_resolution(n);
            s.dt = t_final / steps as f64;
            s.steps = steps;
            let run = || -> Result<(Grid, f64, FieldState), SimError> {
                let sc = s.build()?;
                let (state, _) = sc.sim.run(&sc.phi0, &sc.sigma0, s.dt, steps, None)?;
                Ok((sc.sim.grid, s.dt, state))
            };
            run().map_err(|source| ExperimentError::Run { tag, source })
        })
        .collect();
    let mut finished = Vec::with_capacity(runs.len());
    for r in runs {
        finished.push(r?);
    }
    let (fine_grid, _, fine) = finished.last().expect("at least three grids");
    let mut rows = Vec::new();
    for (n, (grid, dt, state)) in grids.iter().zip(&finished).take(grids.len() - 1) {
        let norms = Norms::new(grid);
        let phi = restrict(fine_grid, grid, &fine.phi, 1);
        let sigma = restrict(fine_grid, grid, &fine.sigma, 1);
        let u = restrict(fine_grid, grid, &fine.u, 2);
        rows.push(vec![
            *n as f64,
            *dt,
            norms.l2(&diff(&state.phi, &phi)),
            norms.l2(&diff(&state.sigma, &sigma)),
            vector_l2(&norms, &diff(&state.u, &u)),
        ]);
    }
    let mut scalars = Vec::new();
    for w in rows.windows(2) {
        for (k, name) in [(2, "phi"), (3, "sigma"), (4, "u")] {
            let order = if w[0][k] > 0.0 && w[1][k] > 0.0 && w[1][0] > w[0][0] {
                (w[0][k] / w[1][k]).ln() / (w[1][0] / w[0][0]).ln()
            } else {
                f64::NAN
            };
            scalars.push((format!("order_{name}_{}", w[1][0] as usize), order));
        }
    }
    let h: Vec<f64> = rows.iter().map(|r| 1.0 / r[0]).collect();
    let e: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    Ok(SweepResult {
        parameter: "n".into(),
        columns: vec!["dt".into(), "err_phi".into(), "err_sigma".into(), "err_u".into()],
        rows,
        slope: loglog_slope(&h, &e),
        scalars,
        flags: vec![("finite".into(), finished.iter().all(|f| f.2.is_finite()))],
        notes: vec![format!("reference grid {}, dt rule {dt_rule}", grids[grids.len() - 1])],
    })
}

fn manufactured_u(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}

/// Clamped unit square, `u₁ = u₂ = sin πx sin πy`, no eigenstrain; returns
/// the L² error of the computed displacement for each grid.
pub fn elastic_manufactured(grids: &[usize], lame_lambda: f64, lame_mu: f64) -> Result<SweepResult, ExperimentError> {
    if grids.len() < 3 {
        return Err(ExperimentError::InvalidInput("need at least three grids".into()));
    }
    let law = ElasticLaw::new(lame_lambda, lame_mu, Tensor2::default(), Tensor2::default())
        .map_err(|e| ExperimentError::Setup(SimError::Hypothesis(e)))?;
    let mut rows = Vec::new();
    for &n in grids {
        let run = || -> Result<f64, SimError> {
            let grid = build_grid(n, n, 1.0, 1.0, EdgeSet::all())?;
            let mut sys = assemble_elasticity(&grid, &law, &TractionField::zero())?;
            let lm = (lame_lambda + lame_mu) * PI * PI;
            let coef = (3.0 * lame_mu + lame_lambda) * PI * PI;
            let f = interpolate_fn(&grid, |x, y| coef * manufactured_u(x, y) - lm * (PI * x).cos() * (PI * y).cos());
            let nodal: Vec<f64> = f.iter().flat_map(|v| [*v, *v]).collect();
            sys.set_body_force(&grid, &nodal);
            let (u, _) = sys.solve_from(&vec![0.0; grid.n_nodes()], None)?;
            Ok(l2_error_fine(&grid, &u))
        };
        let err = run().map_err(|source| ExperimentError::Run { tag: format!("n={n}"), source })?;
        rows.push(vec![n as f64, 1.0 / n as f64, err]);
    }
    let slope = loglog_slope(&rows.iter().map(|r| r[1]).collect::<Vec<_>>(), &rows.iter().map(|r| r[2]).collect::<Vec<_>>());
    Ok(SweepResult {
        parameter: "n".into(),
        columns: vec!["h".into(), "err_l2".into()],
        rows,
        slope,
        scalars: Vec::new(),
        flags: vec![("order_in_band".into(), slope.is_some_and(|s| (1.8..=2.2).contains(&s)))],
        notes: Vec::new(),
    })
}

/// `‖u_h − u‖_{L²}` with the 3×3 rule against the exact field.
fn l2_error_fine(grid: &Grid, u: &[f64]) -> f64 {
    let quad = &grid.quad_fine;
    let det = grid.det_j();
    let mut acc = 0.0;
    for cell in 0..grid.n_cells() {
        let nodes = grid.cell_nodes(cell);
        for q in 0..quad.len() {
            let p = grid.map_point(cell, quad.points[q]);
            let exact = manufactured_u(p[0], p[1]);
            for c in 0..2 {
                let uh: f64 = (0..4).map(|a| quad.shape_values[q][a] * u[2 * nodes[a] + c]).sum();
                acc += quad.weights[q] * det * (uh - exact).powi(2);
            }
        }
    }
    acc.sqrt()
}
