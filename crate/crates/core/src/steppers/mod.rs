//! Time integration: staggered elasticity → nutrient → Cahn–Hilliard steps.

mod cahn_hilliard;
mod mollify;
mod nutrient;
mod params;

use thiserror::Error;

use crate::assembly;
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::elasticity::{assemble_elasticity, strain_field, ElasticityError, ElasticitySystem};
use crate::grid::{BoundarySubset, Grid, GridError};
use crate::linalg::{lump_mass, CsrMatrix, LinalgError};
use crate::materials::{MaterialError, ScalarData};
use crate::tensor::Tensor2;

pub use cahn_hilliard::NewtonReport;
pub use mollify::mollify_initial;
pub use params::{BoundaryData, ModelParams};

pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 50;
pub const MAX_HALVINGS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Hypothesis(#[from] MaterialError),
    #[error("quasi-static nutrient system singular")]
    NutrientSingular,
    #[error("(A6): initial nutrient must satisfy 0 <= sigma0 <= M = {bound}, got range [{min}, {max}]")]
    InitialBounds { min: f64, max: f64, bound: f64 },
    #[error("Newton failed to converge after {} iterations (residual history: {})", .0.len(), fmt_history(.0))]
    NewtonFailed(Vec<f64>),
    #[error("Newton stagnation")]
    NewtonStagnation(Vec<f64>),
    #[error("{0} has wrong length")]
    WrongLength(&'static str),
    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Elasticity(#[from] ElasticityError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: Box<SimError> },
    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<SimError> },
}

fn fmt_history(h: &[f64]) -> String {
    h.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(", ")
}

impl SimError {
    fn at_stage(self, stage: &'static str) -> SimError {
        SimError::Stage { stage, source: Box::new(self) }
    }
}

/// Fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub time: f64,
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Displacement, node-major `2 * node + component`.
    pub u: Vec<f64>,
    /// Strain of `u` at the 2×2 Gauss points.
    pub strain: Vec<Tensor2>,
}

impl FieldState {
    pub fn is_finite(&self) -> bool {
        self.phi.iter().chain(&self.mu).chain(&self.sigma).chain(&self.u).all(|v| v.is_finite())
    }
}

/// Counters and balances from one coupled step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepInfo {
    pub newton_iters: usize,
    pub linear_iters: usize,
    /// `∫U` of the discrete source used in the phase-field equation.
    pub source_integral: f64,
    pub newton_history: Vec<f64>,
}

/// Grid, parameters and the time-independent operators of one simulation.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub grid: Grid,
    pub params: ModelParams,
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub lumped: Vec<f64>,
    /// Lumped boundary mass on Γ (per-node face-length weights).
    pub gamma_weights: Vec<f64>,
    /// `∫_Γ σ_B N_i` with the lumped boundary rule.
    pub sigma_b_load: Vec<f64>,
    pub sigma_c: Vec<f64>,
    pub elastic: ElasticitySystem,
    /// `E*:𝒞E*`.
    pub coupling_stiffness: f64,
    pub(crate) const_mobility_stiffness: Option<CsrMatrix>,
}

impl Simulation {
    pub fn new(grid: Grid, params: ModelParams) -> Result<Self, SimError> {
        params.validate()?;
        let n = grid.n_nodes();
        if let ScalarData::Nodal(v) = &params.sources.sigma_c {
            if v.len() != n {
                return Err(SimError::WrongLength("sigma_c"));
            }
        }
        let mass = assembly::mass_matrix(&grid);
        let stiffness = assembly::stiffness_matrix(&grid);
        let lumped = lump_mass(&mass)?;
        let (_, gamma_weights) = grid.boundary_mass_terms(BoundarySubset::AllGamma);
        let mut sigma_b_load = vec![0.0; n];
        for f in &grid.faces {
            let v = 0.5 * f.length * params.sigma_b.at(f.edge);
            sigma_b_load[f.nodes[0]] += v;
            sigma_b_load[f.nodes[1]] += v;
        }
        let sigma_c = params.sources.sigma_c.to_nodal(n);
        let elastic = assemble_elasticity(&grid, &params.elastic, &params.traction)?;
        let coupling_stiffness = params.elastic.coupling_stiffness();
        let const_mobility_stiffness = match params.mobility {
            crate::materials::MobilityLaw::Constant(m) => {
                let mut k = stiffness.clone();
                k.scale(m);
                Some(k)
            }
            _ => None,
        };
        Ok(Simulation {
            grid,
            params,
            mass,
            stiffness,
            lumped,
            gamma_weights,
            sigma_b_load,
            sigma_c,
            elastic,
            coupling_stiffness,
            const_mobility_stiffness,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes()
    }

    /// Tightens the displacement solver tolerance (relative CG residual).
    pub fn set_elastic_tol(&mut self, tol: f64) {
        self.elastic.tol = tol;
    }

    /// Initial state: displacement from the elastic equilibrium for `phi0`,
    /// chemical potential by L² projection of the variational derivative.
    pub fn initial_state(&self, phi0: &[f64], sigma0: &[f64]) -> Result<FieldState, SimError> {
        let n = self.n_nodes();
        if phi0.len() != n {
            return Err(SimError::WrongLength("phi0"));
        }
        if sigma0.len() != n {
            return Err(SimError::WrongLength("sigma0"));
        }
        let (u, _) = self.elastic.solve_from(phi0, None).map_err(|e| SimError::from(e).at_stage("elasticity"))?;
        let strain = strain_field(&self.grid, &u);
        let mu = self.project_potential(phi0, sigma0, &strain)?;
        Ok(FieldState { time: 0.0, phi: phi0.to_vec(), mu, sigma: sigma0.to_vec(), u, strain })
    }

    /// Checks `0 ≤ σ₀ ≤ M`.
    pub fn check_initial_nutrient(&self, sigma0: &[f64]) -> Result<(), SimError> {
        let bound = self.params.sigma_bound();
        let min = sigma0.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = sigma0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(min >= 0.0 && max <= bound) {
            return Err(SimError::InitialBounds { min, max, bound });
        }
        Ok(())
    }

    /// One staggered step: displacement with the old phase field, then the
    /// nutrient, then the Cahn–Hilliard system with both updated.
    pub fn coupled_step(&self, state: &FieldState, dt: f64) -> Result<(FieldState, StepInfo), SimError> {
        if !(dt > 0.0) {
            return Err(SimError::InvalidTimeStep(dt));
        }
        let t_new = state.time + dt;
        let (u_new, el_report) = self
            .elastic
            .solve_from(&state.phi, Some(&state.u))
            .map_err(|e| SimError::from(e).at_stage("elasticity"))?;
        let strain_new = strain_field(&self.grid, &u_new);
        let sigma_new = self.nutrient_step(&state.phi, &state.sigma, dt, t_new).map_err(|e| e.at_stage("nutrient"))?;
        let ch = self.ch_step(state, &sigma_new, &strain_new, dt, t_new).map_err(|e| e.at_stage("cahn-hilliard"))?;
        let info = StepInfo {
            newton_iters: ch.report.iterations,
            linear_iters: el_report.iterations + 1 + ch.report.iterations,
            source_integral: ch.source_integral,
            newton_history: ch.report.history.clone(),
        };
        let next = FieldState { time: t_new, phi: ch.phi, mu: ch.mu, sigma: sigma_new, u: u_new, strain: strain_new };
        Ok((next, info))
    }

    /// Runs `n_steps` coupled steps from `(phi0, sigma0)`, returning the
    /// final state and one diagnostics record per time level.
    pub fn run(
        &self,
        phi0: &[f64],
        sigma0: &[f64],
        dt: f64,
        n_steps: usize,
        mut hook: Option<&mut dyn FnMut(usize, &FieldState, &DiagnosticsRecord)>,
    ) -> Result<(FieldState, Vec<DiagnosticsRecord>), SimError> {
        self.check_initial_nutrient(sigma0)?;
        if !(dt > 0.0) {
            return Err(SimError::InvalidTimeStep(dt));
        }
        let mut state = self.initial_state(phi0, sigma0)?;
        let first = diagnostics::record(self, &state, &StepInfo::default());
        if let Some(h) = hook.as_mut() {
            h(0, &state, &first);
        }
        let mut records = Vec::with_capacity(n_steps + 1);
        records.push(first);
        for step in 1..=n_steps {
            let (next, info) =
                self.coupled_step(&state, dt).map_err(|e| SimError::AtStep { step, source: Box::new(e) })?;
            state = next;
            let rec = diagnostics::record(self, &state, &info);
            if let Some(h) = hook.as_mut() {
                h(step, &state, &rec);
            }
            records.push(rec);
        }
        Ok((state, records))
    }
}

/// Free-function form of [`Simulation::run`].
pub fn run_simulation(
    grid: &Grid,
    params: &ModelParams,
    phi0: &[f64],
    sigma0: &[f64],
    dt: f64,
    n_steps: usize,
    hook: Option<&mut dyn FnMut(usize, &FieldState, &DiagnosticsRecord)>,
) -> Result<(FieldState, Vec<DiagnosticsRecord>), SimError> {
    Simulation::new(grid.clone(), params.clone())?.run(phi0, sigma0, dt, n_steps, hook)
}
