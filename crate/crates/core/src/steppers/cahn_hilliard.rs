//! Convex-splitting Cahn–Hilliard step solved by damped Newton.
//!
//! Unknowns are interleaved per node, `φ_i ↦ 2i` and `μ_i ↦ 2i + 1`. The
//! residual is
//!
//! ```text
//! R₁ = M(φ − φ_old) + dt K_m μ − dt b_U
//! R₂ = Mμ − εKφ − ε⁻¹F₁(φ) − ε⁻¹M ψ₂′(φ_old) + χMσ − b_W − c_E Mφ
//! ```
//!
//! where `F₁(φ)_i = ∫ψ₁′(φ_h)N_i` (3×3 Gauss, exact for the quartic),
//! `b_W + c_E Mφ = ∫W_,φ(φ_h, ℰ(u))N_i` and `K_m` is the lagged mobility
//! stiffness.

use super::{FieldState, SimError, Simulation, MAX_HALVINGS, NEWTON_MAX_ITER, NEWTON_TOL};
use crate::assembly::{interpolate_at, load_from_points, weighted_mass, weighted_stiffness};
use crate::linalg::{BandedLu, CsrMatrix};
use crate::materials::truncate_g;
use crate::tensor::Tensor2;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// `‖R‖∞` at the initial guess and after every accepted iterate.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ChStep {
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
    pub report: NewtonReport,
    pub source_integral: f64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Simulation {
    /// Mobility stiffness with the mobility frozen at the old state.
    pub fn mobility_stiffness(&self, phi_old: &[f64], strain_old: &[Tensor2]) -> CsrMatrix {
        if let Some(k) = &self.const_mobility_stiffness {
            return k.clone();
        }
        let quad = &self.grid.quad;
        let phi_q = interpolate_at(&self.grid, quad, phi_old);
        let coeff: Vec<f64> = phi_q
            .iter()
            .zip(strain_old)
            .map(|(p, e)| self.params.mobility.eval(&self.params.elastic.stress_unchecked(*p, e)))
            .collect();
        weighted_stiffness(&self.grid, Some(&coeff))
    }

    /// Tumour source `U` at the 2×2 Gauss points, with or without the
    /// nutrient truncation.
    pub fn source_points(&self, t: f64, phi_old: &[f64], sigma: &[f64], strain: &[Tensor2], truncate: bool) -> Vec<f64> {
        let quad = &self.grid.quad;
        let src = &self.params.sources;
        let law = &self.params.elastic;
        let (cap_b, cap_c) = self.params.truncation_caps();
        let phi_q = interpolate_at(&self.grid, quad, phi_old);
        let sigma_q = interpolate_at(&self.grid, quad, sigma);
        phi_q
            .iter()
            .zip(&sigma_q)
            .zip(strain)
            .map(|((&p, &s), e)| {
                let s = if truncate { truncate_g(s, cap_b, cap_c) } else { s };
                src.source_u_with_stress(t, p, s, &law.stress_unchecked(p, e))
            })
            .collect()
    }

    /// `b_W` of the chemical-potential equation: `−∫𝒞(ℰ(u) − Ê):E* N_i`.
    fn elastic_potential_load(&self, strain: &[Tensor2]) -> Vec<f64> {
        let law = &self.params.elastic;
        let vals: Vec<f64> = strain
            .iter()
            .map(|e| -law.apply(&(*e - law.eigenstrain_offset)).ddot(&law.eigenstrain_slope))
            .collect();
        load_from_points(&self.grid, &self.grid.quad, &vals)
    }

    /// `∫ψ₁′(φ_h)N_i` and, if asked, the matrix `∫ψ₁″(φ_h)N_iN_j`.
    fn convex_terms(&self, phi: &[f64], jacobian: bool) -> (Vec<f64>, Option<CsrMatrix>) {
        let quad = &self.grid.quad_fine;
        let split = &self.params.potential;
        let phi_q = interpolate_at(&self.grid, quad, phi);
        let evals: Vec<_> = phi_q.iter().map(|&p| split.eval(p)).collect();
        let d1: Vec<f64> = evals.iter().map(|e| e.psi1_prime).collect();
        let f1 = load_from_points(&self.grid, quad, &d1);
        let j1 = jacobian.then(|| {
            let d2: Vec<f64> = evals.iter().map(|e| e.psi1_second).collect();
            weighted_mass(&self.grid, quad, &d2)
        });
        (f1, j1)
    }

    /// Chemical potential consistent with `(phi, sigma)` and the given strain,
    /// by L² projection.
    pub(crate) fn project_potential(&self, phi: &[f64], sigma: &[f64], strain: &[Tensor2]) -> Result<Vec<f64>, SimError> {
        let p = &self.params;
        let (f1, _) = self.convex_terms(phi, false);
        let kphi = self.stiffness.matvec(phi);
        let mphi = self.mass.matvec(phi);
        let msig = self.mass.matvec(sigma);
        let bw = self.elastic_potential_load(strain);
        let slope = p.potential.psi2_slope();
        let rhs: Vec<f64> = (0..phi.len())
            .map(|i| {
                p.epsilon * kphi[i] + (f1[i] + slope * mphi[i]) / p.epsilon - p.chi * msig[i]
                    + bw[i]
                    + self.coupling_stiffness * mphi[i]
            })
            .collect();
        Ok(crate::linalg::direct_solve(&self.mass, &rhs)?)
    }

    /// Advances `(φ, μ)` given the new nutrient and displacement strain.
    pub fn ch_step(
        &self,
        old: &FieldState,
        sigma_new: &[f64],
        strain_new: &[Tensor2],
        dt: f64,
        t_new: f64,
    ) -> Result<ChStep, SimError> {
        if !(dt > 0.0) {
            return Err(SimError::InvalidTimeStep(dt));
        }
        let p = &self.params;
        let n = self.n_nodes();
        let eps = p.epsilon;
        let ce = self.coupling_stiffness;

        let km = self.mobility_stiffness(&old.phi, &old.strain);
        let u_q = self.source_points(t_new, &old.phi, sigma_new, strain_new, true);
        let b_u = load_from_points(&self.grid, &self.grid.quad, &u_q);
        let source_integral: f64 = b_u.iter().sum();
        let bw = self.elastic_potential_load(strain_new);
        let mphi_old = self.mass.matvec(&old.phi);
        let msig = self.mass.matvec(sigma_new);
        let slope = p.potential.psi2_slope();

        // constant parts of R₁ and R₂
        let r1c: Vec<f64> = (0..n).map(|i| -mphi_old[i] - dt * b_u[i]).collect();
        let r2c: Vec<f64> = (0..n).map(|i| -slope * mphi_old[i] / eps + p.chi * msig[i] - bw[i]).collect();

        let residual = |phi: &[f64], mu: &[f64]| -> Vec<f64> {
            let (f1, _) = self.convex_terms(phi, false);
            let mphi = self.mass.matvec(phi);
            let kphi = self.stiffness.matvec(phi);
            let mmu = self.mass.matvec(mu);
            let kmu = km.matvec(mu);
            let mut r = vec![0.0; 2 * n];
            for i in 0..n {
                r[2 * i] = mphi[i] + dt * kmu[i] + r1c[i];
                r[2 * i + 1] = mmu[i] - eps * kphi[i] - f1[i] / eps - ce * mphi[i] + r2c[i];
            }
            r
        };

        let mut km_dt = km.clone();
        km_dt.scale(dt);
        let mut phi = old.phi.clone();
        let mut mu = old.mu.clone();
        let mut r = residual(&phi, &mu);
        let mut history = vec![inf_norm(&r)];
        let mut iterations = 0;
        while inf_norm(&r) > NEWTON_TOL {
            if iterations == NEWTON_MAX_ITER {
                return Err(SimError::NewtonFailed(history));
            }
            iterations += 1;
            let (_, j1) = self.convex_terms(&phi, true);
            let c = self.stiffness.linear_combination(-eps, &j1.expect("jacobian requested"), -1.0 / eps);
            let c = c.linear_combination(1.0, &self.mass, -ce);
            let jac = CsrMatrix::interleave_blocks([&self.mass, &km_dt, &c, &self.mass]);
            let lu = BandedLu::factor(&jac)?;
            let neg: Vec<f64> = r.iter().map(|v| -v).collect();
            let delta = lu.solve(&neg)?;

            let r_norm = l2(&r);
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let tphi: Vec<f64> = (0..n).map(|i| phi[i] + lambda * delta[2 * i]).collect();
                let tmu: Vec<f64> = (0..n).map(|i| mu[i] + lambda * delta[2 * i + 1]).collect();
                let tr = residual(&tphi, &tmu);
                if l2(&tr) < r_norm || inf_norm(&tr) <= NEWTON_TOL {
                    accepted = Some((tphi, tmu, tr));
                    break;
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((tphi, tmu, tr)) => {
                    phi = tphi;
                    mu = tmu;
                    r = tr;
                    history.push(inf_norm(&r));
                }
                None => return Err(SimError::NewtonStagnation(history)),
            }
        }
        Ok(ChStep { phi, mu, report: NewtonReport { iterations, history }, source_integral })
    }
}
