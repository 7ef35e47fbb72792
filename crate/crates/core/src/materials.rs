//! Constitutive laws: the double-well split, mobility, linear elasticity with
//! a Vegard eigenstrain, tumour and nutrient source terms, and the nutrient
//! truncation.

use thiserror::Error;

use crate::tensor::Tensor2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("strain tensor must be symmetric")]
    AsymmetricTensor,
    #[error("({label}): {message}")]
    Hypothesis { label: &'static str, message: String },
}

fn hypothesis(label: &'static str, message: impl Into<String>) -> MaterialError {
    MaterialError::Hypothesis { label, message: message.into() }
}

// ---------------------------------------------------------------------------
// potential

/// `ψ(s) = (s² − 1)²` split as `ψ₁ = s⁴ + 1` (convex) and `ψ₂ = −2s²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PotentialSplit {
    #[default]
    Quartic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiEval {
    pub psi: f64,
    pub psi1_prime: f64,
    pub psi1_second: f64,
    pub psi2_prime: f64,
}

impl PotentialSplit {
    pub fn eval(&self, s: f64) -> PsiEval {
        match self {
            PotentialSplit::Quartic => {
                let s2 = s * s;
                PsiEval {
                    psi: (s2 - 1.0) * (s2 - 1.0),
                    psi1_prime: 4.0 * s2 * s,
                    psi1_second: 12.0 * s2,
                    psi2_prime: -4.0 * s,
                }
            }
        }
    }

    pub fn psi(&self, s: f64) -> f64 {
        self.eval(s).psi
    }

    pub fn psi1(&self, s: f64) -> f64 {
        match self {
            PotentialSplit::Quartic => s.powi(4) + 1.0,
        }
    }

    pub fn psi2(&self, s: f64) -> f64 {
        match self {
            PotentialSplit::Quartic => -2.0 * s * s,
        }
    }

    /// Constant slope of the (linear) concave derivative, `ψ₂′(s) = slope·s`.
    pub fn psi2_slope(&self) -> f64 {
        match self {
            PotentialSplit::Quartic => -4.0,
        }
    }

    /// Bound on `|ψ₂″|`.
    pub fn c1(&self) -> f64 {
        match self {
            PotentialSplit::Quartic => 4.0,
        }
    }
}

pub fn psi_eval(split: &PotentialSplit, s: f64) -> PsiEval {
    split.eval(s)
}

// ---------------------------------------------------------------------------
// mobility

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobilityLaw {
    Constant(f64),
    /// `m = C₂ + (C₃ − C₂) / (1 + |S|²)` with `S` the stress.
    StressGated { min: f64, max: f64 },
}

impl Default for MobilityLaw {
    fn default() -> Self {
        MobilityLaw::Constant(1.0)
    }
}

impl MobilityLaw {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            MobilityLaw::Constant(m) => (m, m),
            MobilityLaw::StressGated { min, max } => (min, max),
        }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        let (c2, c3) = self.bounds();
        if !(c2 > 0.0 && c3 >= c2 && c3.is_finite()) {
            return Err(hypothesis("A3", format!("mobility bounds need 0 < C2 <= C3, got C2={c2}, C3={c3}")));
        }
        Ok(())
    }

    pub fn eval(&self, stress: &Tensor2) -> f64 {
        match *self {
            MobilityLaw::Constant(m) => m,
            MobilityLaw::StressGated { min, max } => {
                let s2 = stress.ddot(stress);
                min + (max - min) / (1.0 + s2)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, MobilityLaw::Constant(_))
    }
}

// ---------------------------------------------------------------------------
// elasticity

/// Isotropic constant stiffness with Vegard eigenstrain `Ē(s) = Ê + E*·s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticLaw {
    pub lame_lambda: f64,
    pub lame_mu: f64,
    pub eigenstrain_offset: Tensor2,
    pub eigenstrain_slope: Tensor2,
}

impl Default for ElasticLaw {
    fn default() -> Self {
        ElasticLaw { lame_lambda: 1.0, lame_mu: 1.0, eigenstrain_offset: Tensor2::ZERO, eigenstrain_slope: Tensor2::ZERO }
    }
}

impl ElasticLaw {
    pub fn new(lame_lambda: f64, lame_mu: f64, offset: Tensor2, slope: Tensor2) -> Result<Self, MaterialError> {
        let law = ElasticLaw { lame_lambda, lame_mu, eigenstrain_offset: offset, eigenstrain_slope: slope };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        if !(self.lame_mu > 0.0 && self.lame_lambda + self.lame_mu > 0.0 && self.lame_lambda.is_finite() && self.lame_mu.is_finite()) {
            return Err(hypothesis(
                "A4",
                format!("elasticity tensor not coercive: need mu > 0 and lambda + mu > 0, got lambda={}, mu={}", self.lame_lambda, self.lame_mu),
            ));
        }
        if !self.eigenstrain_offset.is_symmetric() || !self.eigenstrain_slope.is_symmetric() {
            return Err(hypothesis("B1", "eigenstrain tensors must be symmetric"));
        }
        Ok(())
    }

    pub fn eigenstrain(&self, s: f64) -> Tensor2 {
        self.eigenstrain_offset + self.eigenstrain_slope * s
    }

    /// `𝒞E = λ tr(E) I + 2μ E`.
    pub fn apply(&self, e: &Tensor2) -> Tensor2 {
        Tensor2::identity() * (self.lame_lambda * e.trace()) + *e * (2.0 * self.lame_mu)
    }

    /// Coercivity constant `C₄` on symmetric tensors (Frobenius norm).
    pub fn c4(&self) -> f64 {
        (2.0 * self.lame_mu).min(2.0 * (self.lame_lambda + self.lame_mu))
    }

    /// Operator norm of `𝒞` on symmetric tensors.
    pub fn c_max(&self) -> f64 {
        (2.0 * self.lame_mu).abs().max((2.0 * (self.lame_lambda + self.lame_mu)).abs())
    }

    /// Growth constant `C₅` with `|W| + |W_,φ| ≤ C₅(1 + s² + |E|²)` and
    /// `|W_,E| ≤ C₅(1 + |s| + |E|)`.
    pub fn c5(&self) -> f64 {
        let c = self.c_max();
        let a = self.eigenstrain_offset.norm();
        let b = self.eigenstrain_slope.norm();
        let m = 1f64.max(a).max(b);
        c * (1.5 * m * m + 2.0 * b * m).max(m)
    }

    /// `E*:𝒞E*`, the constant `∂W_,φ/∂s`.
    pub fn coupling_stiffness(&self) -> f64 {
        let e = self.eigenstrain_slope;
        self.apply(&e).ddot(&e)
    }

    fn check(strain: &Tensor2) -> Result<(), MaterialError> {
        if strain.is_symmetric() {
            Ok(())
        } else {
            Err(MaterialError::AsymmetricTensor)
        }
    }

    pub fn energy(&self, s: f64, strain: &Tensor2) -> Result<f64, MaterialError> {
        Self::check(strain)?;
        Ok(self.energy_unchecked(s, strain))
    }

    pub fn stress(&self, s: f64, strain: &Tensor2) -> Result<Tensor2, MaterialError> {
        Self::check(strain)?;
        Ok(self.stress_unchecked(s, strain))
    }

    pub fn w_phi(&self, s: f64, strain: &Tensor2) -> Result<f64, MaterialError> {
        Self::check(strain)?;
        Ok(self.w_phi_unchecked(s, strain))
    }

    pub(crate) fn energy_unchecked(&self, s: f64, strain: &Tensor2) -> f64 {
        let d = *strain - self.eigenstrain(s);
        0.5 * d.ddot(&self.apply(&d))
    }

    pub(crate) fn stress_unchecked(&self, s: f64, strain: &Tensor2) -> Tensor2 {
        self.apply(&(*strain - self.eigenstrain(s)))
    }

    pub(crate) fn w_phi_unchecked(&self, s: f64, strain: &Tensor2) -> f64 {
        -self.stress_unchecked(s, strain).ddot(&self.eigenstrain_slope)
    }
}

pub fn elastic_energy_w(law: &ElasticLaw, s: f64, strain: &Tensor2) -> Result<f64, MaterialError> {
    law.energy(s, strain)
}

pub fn stress_w_e(law: &ElasticLaw, s: f64, strain: &Tensor2) -> Result<Tensor2, MaterialError> {
    law.stress(s, strain)
}

pub fn w_phi(law: &ElasticLaw, s: f64, strain: &Tensor2) -> Result<f64, MaterialError> {
    law.w_phi(s, strain)
}

// ---------------------------------------------------------------------------
// sources

/// Piecewise-constant rate with left-continuous lookup: the value on
/// `(t_k, t_{k+1}]` is `v_k`, and `v_0` is used up to and including `t_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub breakpoints: Vec<(f64, f64)>,
}

impl RateTable {
    pub fn constant(v: f64) -> Self {
        RateTable { breakpoints: vec![(0.0, v)] }
    }

    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self, MaterialError> {
        if breakpoints.is_empty() {
            return Err(hypothesis("A5", "rate table is empty"));
        }
        if breakpoints.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(hypothesis("A5", "rate table times must increase"));
        }
        let t = RateTable { breakpoints };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        if self.breakpoints.iter().any(|&(_, v)| !(v >= 0.0) || !v.is_finite()) {
            return Err(hypothesis("A5", "rates must be non-negative"));
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> f64 {
        let mut value = self.breakpoints[0].1;
        for &(tk, vk) in &self.breakpoints {
            if tk < t {
                value = vk;
            } else {
                break;
            }
        }
        value
    }

    pub fn max(&self) -> f64 {
        self.breakpoints.iter().map(|b| b.1).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.breakpoints.iter().all(|b| b.1 == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseKind {
    One,
    ClampedLinear,
}

/// Constant or nodal scalar data.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarData {
    Constant(f64),
    Nodal(Vec<f64>),
}

impl ScalarData {
    pub fn at(&self, node: usize) -> f64 {
        match self {
            ScalarData::Constant(v) => *v,
            ScalarData::Nodal(v) => v[node],
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            ScalarData::Constant(v) => v.abs(),
            ScalarData::Nodal(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            ScalarData::Constant(v) => *v,
            ScalarData::Nodal(v) => v.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn to_nodal(&self, n: usize) -> Vec<f64> {
        match self {
            ScalarData::Constant(v) => vec![*v; n],
            ScalarData::Nodal(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceLaw {
    pub lambda_p: RateTable,
    pub lambda_a: RateTable,
    pub lambda_c: RateTable,
    /// Capillary supply rate `B`.
    pub supply: f64,
    pub sigma_c: ScalarData,
    pub f_kind: ResponseKind,
    pub h_kind: ResponseKind,
    pub k_kind: ResponseKind,
}

impl Default for SourceLaw {
    fn default() -> Self {
        SourceLaw {
            lambda_p: RateTable::constant(0.0),
            lambda_a: RateTable::constant(0.0),
            lambda_c: RateTable::constant(0.0),
            supply: 0.0,
            sigma_c: ScalarData::Constant(0.0),
            f_kind: ResponseKind::ClampedLinear,
            h_kind: ResponseKind::ClampedLinear,
            k_kind: ResponseKind::ClampedLinear,
        }
    }
}

impl SourceLaw {
    pub fn validate(&self) -> Result<(), MaterialError> {
        self.lambda_p.validate()?;
        self.lambda_a.validate()?;
        self.lambda_c.validate()?;
        if !(self.supply >= 0.0) || !self.supply.is_finite() {
            return Err(hypothesis("A1", format!("B must be non-negative, got {}", self.supply)));
        }
        let ok = match &self.sigma_c {
            ScalarData::Constant(v) => *v >= 0.0 && v.is_finite(),
            ScalarData::Nodal(v) => v.iter().all(|x| *x >= 0.0 && x.is_finite()),
        };
        if !ok {
            return Err(hypothesis("A5", "sigma_c must be non-negative and bounded"));
        }
        Ok(())
    }

    /// Proliferation response, `|f| ≤ 1`.
    pub fn f(&self, s: f64) -> f64 {
        match self.f_kind {
            ResponseKind::One => 1.0,
            ResponseKind::ClampedLinear => (0.5 * (1.0 + s)).clamp(0.0, 1.0),
        }
    }

    /// Consumption response, `0 ≤ h ≤ 1`.
    pub fn h(&self, s: f64) -> f64 {
        match self.h_kind {
            ResponseKind::One => 1.0,
            ResponseKind::ClampedLinear => (0.5 * (1.0 + s)).clamp(0.0, 1.0),
        }
    }

    /// Apoptosis response, `|k| ≤ 1`.
    pub fn k(&self, s: f64) -> f64 {
        match self.k_kind {
            ResponseKind::One => 1.0,
            ResponseKind::ClampedLinear => s.clamp(-1.0, 1.0),
        }
    }

    /// Common Lipschitz constant of `f`, `h`, `k`.
    pub fn lipschitz(&self) -> f64 {
        1.0
    }

    /// `U = λ_p f(φ) σ / (1 + |W_,E|) − λ_a k(φ)`; the stress magnitude is the
    /// Frobenius norm.
    pub fn source_u(&self, law: &ElasticLaw, t: f64, phi: f64, sigma: f64, strain: &Tensor2) -> Result<f64, MaterialError> {
        let stress = law.stress(phi, strain)?;
        Ok(self.source_u_with_stress(t, phi, sigma, &stress))
    }

    pub(crate) fn source_u_with_stress(&self, t: f64, phi: f64, sigma: f64, stress: &Tensor2) -> f64 {
        self.lambda_p.at(t) * self.f(phi) * sigma / (1.0 + stress.norm()) - self.lambda_a.at(t) * self.k(phi)
    }

    /// `S = −λ_c h(φ) σ + B(σ_c − σ)` with `σ_c` supplied by the caller.
    pub fn source_s(&self, t: f64, phi: f64, sigma: f64, sigma_c: f64) -> f64 {
        -self.lambda_c.at(t) * self.h(phi) * sigma + self.supply * (sigma_c - sigma)
    }
}

pub fn source_u(srcs: &SourceLaw, law: &ElasticLaw, t: f64, phi: f64, sigma: f64, strain: &Tensor2) -> Result<f64, MaterialError> {
    srcs.source_u(law, t, phi, sigma, strain)
}

/// Nutrient source at a constant capillary level.
pub fn source_s(srcs: &SourceLaw, t: f64, phi: f64, sigma: f64) -> f64 {
    srcs.source_s(t, phi, sigma, srcs.sigma_c.at(0))
}

/// `g(s) = max(0, min(s, sB_max, sc_max))`.
pub fn truncate_g(s: f64, sb_max: f64, sc_max: f64) -> f64 {
    s.min(sb_max).min(sc_max).max(0.0)
}
