use super::{SimError, Simulation};
use crate::linalg::{direct_solve, LinalgError};

impl Simulation {
    /// Implicit nutrient update with lumped mass and lumped Robin term:
    ///
    /// `[(β/dt)M_L + K + κR_L + (λ_c h(φ_old) + B)M_L] σ = (β/dt)M_L σ_old + B M_L σ_c + κ r_B`.
    ///
    /// On square cells the matrix is an M-matrix and `0 ≤ σ ≤ M` is
    /// propagated from `σ_old`.
    pub fn nutrient_step(&self, phi_old: &[f64], sigma_old: &[f64], dt: f64, t_new: f64) -> Result<Vec<f64>, SimError> {
        self.nutrient_solve(self.params.beta, phi_old, sigma_old, dt, t_new)
    }

    /// Quasi-static nutrient profile for the phase field `phi` at time `t`.
    pub fn quasi_static_nutrient(&self, phi: &[f64], t: f64) -> Result<Vec<f64>, SimError> {
        self.nutrient_solve(0.0, phi, &vec![0.0; phi.len()], 1.0, t)
    }

    fn nutrient_solve(&self, beta: f64, phi_old: &[f64], sigma_old: &[f64], dt: f64, t_new: f64) -> Result<Vec<f64>, SimError> {
        let p = &self.params;
        let src = &p.sources;
        if beta == 0.0 && src.supply == 0.0 && p.kappa == 0.0 {
            return Err(SimError::NutrientSingular);
        }
        if beta > 0.0 && !(dt > 0.0) {
            return Err(SimError::InvalidTimeStep(dt));
        }
        let n = self.n_nodes();
        if phi_old.len() != n || sigma_old.len() != n {
            return Err(SimError::WrongLength("nutrient input"));
        }
        let rate = if beta > 0.0 { beta / dt } else { 0.0 };
        let lambda_c = src.lambda_c.at(t_new);
        let mut a = self.stiffness.clone();
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let ml = self.lumped[i];
            diag[i] = rate * ml + p.kappa * self.gamma_weights[i] + (lambda_c * src.h(phi_old[i]) + src.supply) * ml;
            rhs[i] = rate * ml * sigma_old[i] + src.supply * ml * self.sigma_c[i] + p.kappa * self.sigma_b_load[i];
        }
        a.add_diagonal(&diag);
        direct_solve(&a, &rhs).map_err(|e| match e {
            LinalgError::Singular => SimError::NutrientSingular,
            other => SimError::Linalg(other),
        })
    }
}
