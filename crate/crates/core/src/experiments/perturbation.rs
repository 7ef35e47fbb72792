use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::sweep::{diff, loglog_slope, run_trajectory, ExperimentError, SweepResult, Trajectory};
use super::{Scenario, ScenarioSpec};
use crate::diagnostics::Norms;
use crate::elasticity::{vector_h1_sq, TractionField};
use crate::grid::{BoundaryTag, Grid};
use crate::materials::ScalarData;
use crate::steppers::{BoundaryData, Simulation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbTarget {
    Phi0,
    Sigma0,
    G,
    SigmaB,
    SigmaC,
}

impl FromStr for PerturbTarget {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phi0" => Ok(PerturbTarget::Phi0),
            "sigma0" => Ok(PerturbTarget::Sigma0),
            "g" => Ok(PerturbTarget::G),
            "sigma_b" => Ok(PerturbTarget::SigmaB),
            "sigma_c" => Ok(PerturbTarget::SigmaC),
            other => Err(format!("unknown perturbation target '{other}'")),
        }
    }
}

impl fmt::Display for PerturbTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PerturbTarget::Phi0 => "phi0",
            PerturbTarget::Sigma0 => "sigma0",
            PerturbTarget::G => "g",
            PerturbTarget::SigmaB => "sigma_b",
            PerturbTarget::SigmaC => "sigma_c",
        };
        f.write_str(s)
    }
}

/// Norm family of the estimate: `L2` measures φ and μ in L² with the
/// displacement in `L^∞(X)`; `Dual` uses the (H¹)′ norm for φ and μ with the
/// displacement in `L²(X)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DependenceNorm {
    L2,
    Dual,
}

impl FromStr for DependenceNorm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" => Ok(DependenceNorm::L2),
            "dual" => Ok(DependenceNorm::Dual),
            other => Err(format!("unknown norm branch '{other}'")),
        }
    }
}

impl fmt::Display for DependenceNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DependenceNorm::L2 => "l2",
            DependenceNorm::Dual => "dual",
        })
    }
}

/// Smooth bump of unit height centred at 70 % of the width, mid-height.
pub fn perturbation_bump(grid: &Grid) -> Vec<f64> {
    let c = [0.7 * grid.lx, 0.5 * grid.ly];
    let w = 0.1 * grid.lx.min(grid.ly);
    grid.node_coords
        .iter()
        .map(|p| (-((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / (2.0 * w * w)).exp())
        .collect()
}

/// Unit traction perturbation direction on Γ_N.
fn traction_direction() -> TractionField {
    TractionField::uniform([1.0, 0.0])
}

struct Perturbed {
    sim: Simulation,
    phi0: Vec<f64>,
    sigma0: Vec<f64>,
}

fn perturb(base: &Scenario, spec: &ScenarioSpec, target: PerturbTarget, delta: f64) -> Result<Perturbed, ExperimentError> {
    let grid = &base.sim.grid;
    let bump = perturbation_bump(grid);
    let mut params = spec.params.clone();
    let mut phi0 = base.phi0.clone();
    let mut sigma0 = base.sigma0.clone();
    match target {
        PerturbTarget::Phi0 => {
            for (p, b) in phi0.iter_mut().zip(&bump) {
                *p += delta * b;
            }
        }
        PerturbTarget::Sigma0 => {
            for (s, b) in sigma0.iter_mut().zip(&bump) {
                *s *= 1.0 - delta * b;
            }
        }
        PerturbTarget::G => {
            let d = traction_direction();
            for (g, e) in params.traction.per_edge.iter_mut().zip(&d.per_edge) {
                g[0] += delta * e[0];
                g[1] += delta * e[1];
            }
        }
        PerturbTarget::SigmaB => {
            params.sigma_b = match params.sigma_b {
                BoundaryData::Constant(v) => BoundaryData::Constant(v * (1.0 - delta)),
                BoundaryData::PerEdge(v) => BoundaryData::PerEdge(v.map(|x| x * (1.0 - delta))),
            };
        }
        PerturbTarget::SigmaC => {
            params.sources.sigma_c = match &params.sources.sigma_c {
                ScalarData::Constant(v) => ScalarData::Constant(v * (1.0 - delta)),
                ScalarData::Nodal(v) => ScalarData::Nodal(v.iter().map(|x| x * (1.0 - delta)).collect()),
            };
        }
    }
    let sim = Simulation::new(grid.clone(), params)?;
    Ok(Perturbed { sim, phi0, sigma0 })
}

/// Left and right sides of the continuous-dependence estimate for one pair
/// of runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceTerms {
    pub lhs: f64,
    pub rhs: f64,
}

fn data_difference(base: &Scenario, pert: &Perturbed, norms: &Norms, beta: f64, t_final: f64, branch: DependenceNorm) -> Result<f64, ExperimentError> {
    let grid = &base.sim.grid;
    let dphi0 = diff(&pert.phi0, &base.phi0);
    let phi_term = match branch {
        DependenceNorm::L2 => norms.l2(&dphi0).powi(2),
        DependenceNorm::Dual => norms.dual(&dphi0).map_err(crate::steppers::SimError::from)?.powi(2),
    };
    let dsigma0 = diff(&pert.sigma0, &base.sigma0);
    let p1 = &base.sim.params;
    let p2 = &pert.sim.params;
    let mut g_sq = 0.0;
    for face in grid.faces.iter().filter(|f| f.tag == BoundaryTag::Neumann) {
        let a = p1.traction.at(face.edge);
        let b = p2.traction.at(face.edge);
        g_sq += face.length * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2));
    }
    let sb_sq: f64 = grid.faces.iter().map(|f| f.length * (p1.sigma_b.at(f.edge) - p2.sigma_b.at(f.edge)).powi(2)).sum();
    let sc_sq = norms.l2(&diff(&pert.sim.sigma_c, &base.sim.sigma_c)).powi(2);
    Ok(phi_term + beta * norms.l2(&dsigma0).powi(2) + g_sq + t_final * (sb_sq + sc_sq))
}

fn solution_difference(a: &Trajectory, b: &Trajectory, norms: &Norms, beta: f64, branch: DependenceNorm) -> Result<f64, ExperimentError> {
    let n = a.times.len();
    let mut sup_phi = 0f64;
    let mut sup_sigma = 0f64;
    let mut sup_u = 0f64;
    let mut int_phi = 0.0;
    let mut int_sigma = 0.0;
    let mut int_mu = 0.0;
    let mut int_u = 0.0;
    for k in 0..n {
        let dphi = diff(&a.phi[k], &b.phi[k]);
        let dsig = diff(&a.sigma[k], &b.sigma[k]);
        let dmu = diff(&a.mu[k], &b.mu[k]);
        let du = diff(&a.u[k], &b.u[k]);
        let u_sq = vector_h1_sq(&norms.stiffness, &norms.mass, &du);
        let (phi_x, mu_x) = match branch {
            DependenceNorm::L2 => (norms.l2(&dphi).powi(2), norms.l2(&dmu).powi(2)),
            DependenceNorm::Dual => (
                norms.dual(&dphi).map_err(crate::steppers::SimError::from)?.powi(2),
                norms.dual(&dmu).map_err(crate::steppers::SimError::from)?.powi(2),
            ),
        };
        sup_phi = sup_phi.max(phi_x);
        sup_sigma = sup_sigma.max(norms.l2(&dsig).powi(2));
        sup_u = sup_u.max(u_sq);
        if k + 1 < n {
            let dt = a.times[k + 1] - a.times[k];
            int_phi += dt * norms.h1(&dphi).powi(2);
            int_sigma += dt * norms.h1(&dsig).powi(2);
            int_mu += dt * mu_x;
            int_u += dt * u_sq;
        }
    }
    let u_term = match branch {
        DependenceNorm::L2 => sup_u,
        DependenceNorm::Dual => int_u,
    };
    Ok(sup_phi + int_phi + beta * sup_sigma + int_sigma + u_term + int_mu)
}

fn check_inputs(spec: &ScenarioSpec) -> Result<(), ExperimentError> {
    spec.params.check_continuous_dependence().map_err(|e| ExperimentError::Hypotheses(e.to_string()))
}

/// Both sides of the estimate for a single perturbation size.
pub fn perturbation_terms(spec: &ScenarioSpec, delta: f64, target: PerturbTarget, branch: DependenceNorm) -> Result<DependenceTerms, ExperimentError> {
    check_inputs(spec)?;
    let base = spec.build()?;
    let norms = Norms::new(&base.sim.grid);
    let reference = run_trajectory(&base.sim, &base.phi0, &base.sigma0, spec.dt, spec.steps)?;
    terms_against(spec, &base, &reference, &norms, delta, target, branch)
}

fn terms_against(
    spec: &ScenarioSpec,
    base: &Scenario,
    reference: &Trajectory,
    norms: &Norms,
    delta: f64,
    target: PerturbTarget,
    branch: DependenceNorm,
) -> Result<DependenceTerms, ExperimentError> {
    let tag = format!("{target} delta={delta}");
    let pert = perturb(base, spec, target, delta).map_err(|e| match e {
        ExperimentError::Setup(source) => ExperimentError::Run { tag: tag.clone(), source },
        other => other,
    })?;
    let traj = run_trajectory(&pert.sim, &pert.phi0, &pert.sigma0, spec.dt, spec.steps)
        .map_err(|source| ExperimentError::Run { tag, source })?;
    let beta = spec.params.beta;
    let lhs = solution_difference(&traj, reference, norms, beta, branch)?;
    let rhs = data_difference(base, &pert, norms, beta, spec.final_time(), branch)?;
    Ok(DependenceTerms { lhs, rhs })
}

/// Runs the baseline and one perturbed simulation per δ and compares the two
/// sides of the continuous-dependence estimate.
pub fn perturbation_study(
    spec: &ScenarioSpec,
    deltas: &[f64],
    target: PerturbTarget,
    branch: DependenceNorm,
) -> Result<SweepResult, ExperimentError> {
    check_inputs(spec)?;
    let positive: Vec<f64> = deltas.iter().cloned().filter(|d| *d > 0.0).collect();
    if deltas.len() < 3 || positive.len() < 2 {
        return Err(ExperimentError::InvalidInput("need at least three perturbation sizes".into()));
    }
    let span = positive.iter().cloned().fold(0.0, f64::max) / positive.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < 100.0 * (1.0 - 1e-12) {
        return Err(ExperimentError::InvalidInput("perturbation sizes must span at least two decades".into()));
    }
    let base = spec.build()?;
    let norms = Norms::new(&base.sim.grid);
    let reference = run_trajectory(&base.sim, &base.phi0, &base.sigma0, spec.dt, spec.steps)
        .map_err(|source| ExperimentError::Run { tag: "baseline".into(), source })?;
    let terms: Vec<Result<DependenceTerms, ExperimentError>> = deltas
        .par_iter()
        .map(|&d| terms_against(spec, &base, &reference, &norms, d, target, branch))
        .collect();
    let mut rows = Vec::with_capacity(deltas.len());
    for (d, t) in deltas.iter().zip(terms) {
        let t = t?;
        let ratio = if t.rhs > 0.0 { t.lhs / t.rhs } else { 0.0 };
        rows.push(vec![*d, t.lhs, t.rhs, ratio, t.lhs.sqrt()]);
    }
    let with_data: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] > 0.0).collect();
    let slope = loglog_slope(&with_data.iter().map(|r| r[0]).collect::<Vec<_>>(), &with_data.iter().map(|r| r[4]).collect::<Vec<_>>());
    let ratios: Vec<f64> = with_data.iter().map(|r| r[3]).collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let slope_ok = slope.is_some_and(|s| (0.9..=1.1).contains(&s));
    Ok(SweepResult {
        parameter: "delta".into(),
        columns: vec!["lhs".into(), "rhs".into(), "ratio".into(), "sqrt_lhs".into()],
        rows,
        slope,
        scalars: vec![("max_ratio".into(), max_ratio), ("min_ratio".into(), min_ratio)],
        flags: vec![("finite".into(), ratios.iter().all(|r| r.is_finite())), ("slope_in_band".into(), slope_ok)],
        notes: vec![format!("target {target}, {branch} branch, beta = {}", spec.params.beta)],
    })
}
