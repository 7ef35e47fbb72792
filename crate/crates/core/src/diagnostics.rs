//! Energies, norms and the per-step ledger of a simulation.

use crate::assembly::{integrate_points, interpolate_at, mass_matrix, stiffness_matrix};
use crate::elasticity::{elastic_energy, vector_h1_sq};
use crate::grid::Grid;
use crate::linalg::{direct_solve, CsrMatrix, LinalgError};
use crate::steppers::{FieldState, Simulation, StepInfo};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub total_energy: f64,
    pub ginzburg_landau: f64,
    pub nutrient: f64,
    pub elastic: f64,
    pub mass: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub grad_mu_norm: f64,
    pub sigma_h1_norm: f64,
    pub newton_iters: usize,
    pub linear_iters: usize,
    pub phi_h1_norm: f64,
    pub psi_l1: f64,
    pub sigma_l2_norm: f64,
    pub u_h1_norm: f64,
    pub mu_l2_norm: f64,
    pub mu_h1_norm: f64,
    /// `∫U` used in the step that produced this state; zero initially.
    pub source_integral: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub ginzburg_landau: f64,
    pub nutrient: f64,
    pub elastic: f64,
    pub total: f64,
    pub psi_l1: f64,
}

/// Mass and stiffness matrices for norm evaluation.
#[derive(Debug, Clone)]
pub struct Norms {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
}

impl Norms {
    pub fn new(grid: &Grid) -> Self {
        Norms { mass: mass_matrix(grid), stiffness: stiffness_matrix(grid) }
    }

    pub fn l2(&self, f: &[f64]) -> f64 {
        self.mass.quad_form(f).max(0.0).sqrt()
    }

    pub fn grad_l2(&self, f: &[f64]) -> f64 {
        self.stiffness.quad_form(f).max(0.0).sqrt()
    }

    pub fn h1(&self, f: &[f64]) -> f64 {
        (self.mass.quad_form(f) + self.stiffness.quad_form(f)).max(0.0).sqrt()
    }

    /// Riesz representative `z` of `f`: `(K + M)z = Mf`.
    pub fn riesz(&self, f: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let a = self.stiffness.linear_combination(1.0, &self.mass, 1.0);
        direct_solve(&a, &self.mass.matvec(f))
    }

    /// `‖f‖_*` with `‖f‖_*² = (Mf)·z`.
    pub fn dual(&self, f: &[f64]) -> Result<f64, LinalgError> {
        let z = self.riesz(f)?;
        let mf = self.mass.matvec(f);
        Ok(mf.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
    }
}

pub fn l2_norm(grid: &Grid, f: &[f64]) -> f64 {
    Norms::new(grid).l2(f)
}

pub fn h1_norm(grid: &Grid, f: &[f64]) -> f64 {
    Norms::new(grid).h1(f)
}

pub fn dual_norm(grid: &Grid, f: &[f64]) -> Result<f64, LinalgError> {
    Norms::new(grid).dual(f)
}

/// `∫ψ(φ_h)` on the 3×3 Gauss rule.
fn psi_integral(sim: &Simulation, phi: &[f64]) -> f64 {
    let quad = &sim.grid.quad_fine;
    let vals: Vec<f64> = interpolate_at(&sim.grid, quad, phi).iter().map(|&p| sim.params.potential.psi(p)).collect();
    integrate_points(&sim.grid, quad, &vals)
}

pub fn total_energy(sim: &Simulation, state: &FieldState) -> EnergyParts {
    let p = &sim.params;
    let psi_l1 = psi_integral(sim, &state.phi);
    let ginzburg_landau = 0.5 * p.epsilon * sim.stiffness.quad_form(&state.phi) + psi_l1 / p.epsilon;
    let nutrient = if p.beta == 0.0 { 0.0 } else { 0.5 * p.beta * sim.mass.quad_form(&state.sigma) };
    let elastic = elastic_energy(&sim.grid, &p.elastic, &state.phi, &state.u);
    EnergyParts { ginzburg_landau, nutrient, elastic, total: ginzburg_landau + nutrient + elastic, psi_l1 }
}

pub fn record(sim: &Simulation, state: &FieldState, info: &StepInfo) -> DiagnosticsRecord {
    let e = total_energy(sim, state);
    let (m, k) = (&sim.mass, &sim.stiffness);
    let ones = vec![1.0; state.phi.len()];
    let sq = |f: &[f64]| (m.quad_form(f).max(0.0), k.quad_form(f).max(0.0));
    let (phi_l2, phi_grad) = sq(&state.phi);
    let (mu_l2, mu_grad) = sq(&state.mu);
    let (sig_l2, sig_grad) = sq(&state.sigma);
    DiagnosticsRecord {
        time: state.time,
        total_energy: e.total,
        ginzburg_landau: e.ginzburg_landau,
        nutrient: e.nutrient,
        elastic: e.elastic,
        mass: m.bilinear(&ones, &state.phi),
        sigma_min: state.sigma.iter().cloned().fold(f64::INFINITY, f64::min),
        sigma_max: state.sigma.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        grad_mu_norm: mu_grad.sqrt(),
        sigma_h1_norm: (sig_l2 + sig_grad).sqrt(),
        newton_iters: info.newton_iters,
        linear_iters: info.linear_iters,
        phi_h1_norm: (phi_l2 + phi_grad).sqrt(),
        psi_l1: e.psi_l1,
        sigma_l2_norm: sig_l2.sqrt(),
        u_h1_norm: vector_h1_sq(k, m, &state.u).max(0.0).sqrt(),
        mu_l2_norm: mu_l2.sqrt(),
        mu_h1_norm: (mu_l2 + mu_grad).sqrt(),
        source_integral: info.source_integral,
    }
}

/// Left-endpoint rule for `∫₀ᵀ v(t)² dt` on the record times.
pub fn bochner_l2_sq(times: &[f64], values: &[f64]) -> f64 {
    times.windows(2).zip(values).map(|(t, v)| (t[1] - t[0]) * v * v).sum()
}

/// `∫₀ᵀ ‖·‖² dt` of a per-record norm.
pub fn l2h1_accumulate(records: &[DiagnosticsRecord], norm: impl Fn(&DiagnosticsRecord) -> f64) -> f64 {
    let times: Vec<f64> = records.iter().map(|r| r.time).collect();
    let values: Vec<f64> = records.iter().map(norm).collect();
    bochner_l2_sq(&times, &values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLedger {
    /// `sup_t (‖φ‖²_{H¹} + ‖ψ(φ)‖_{L¹} + β‖σ‖² + ‖u‖²_{H¹})`.
    pub sup_term: f64,
    pub mu_integral: f64,
    pub sigma_integral: f64,
    pub lhs: f64,
    pub ratio: f64,
    pub finite: bool,
}

pub fn energy_inequality_ledger(records: &[DiagnosticsRecord], beta: f64, sigma0_l2: f64) -> EnergyLedger {
    let sup_term = records
        .iter()
        .map(|r| r.phi_h1_norm.powi(2) + r.psi_l1 + beta * r.sigma_l2_norm.powi(2) + r.u_h1_norm.powi(2))
        .fold(0.0, f64::max);
    let mu_integral = l2h1_accumulate(records, |r| r.mu_h1_norm);
    let sigma_integral = l2h1_accumulate(records, |r| r.sigma_h1_norm);
    let lhs = sup_term + mu_integral + sigma_integral;
    let ratio = lhs / (1.0 + beta * sigma0_l2 * sigma0_l2);
    EnergyLedger { sup_term, mu_integral, sigma_integral, lhs, ratio, finite: lhs.is_finite() && ratio.is_finite() }
}

pub const SIGMA_BOUND_TOL: f64 = 1e-12;

/// `0 ≤ σ ≤ M` node-wise to 1e-12; returns the worst exceedance.
pub fn sigma_bounds_check(sigma: &[f64], bound: f64) -> (bool, f64) {
    let min = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = sigma.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let violation = 0f64.max(-min).max(max - bound);
    (violation <= SIGMA_BOUND_TOL, violation)
}
