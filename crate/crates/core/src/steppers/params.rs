use crate::elasticity::TractionField;
use crate::grid::{Edge, Grid};
use crate::materials::{ElasticLaw, MaterialError, MobilityLaw, PotentialSplit, ScalarData, SourceLaw};

/// Boundary nutrient level, constant or per rectangle edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryData {
    Constant(f64),
    PerEdge([f64; 4]),
}

impl Default for BoundaryData {
    fn default() -> Self {
        BoundaryData::Constant(0.0)
    }
}

impl BoundaryData {
    pub fn at(&self, edge: Edge) -> f64 {
        match self {
            BoundaryData::Constant(v) => *v,
            BoundaryData::PerEdge(v) => v[edge.index()],
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            BoundaryData::Constant(v) => v.abs(),
            BoundaryData::PerEdge(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            BoundaryData::Constant(v) => *v,
            BoundaryData::PerEdge(v) => v.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    /// `‖σ_B‖²_{L²(Γ)}`.
    pub fn l2_sq(&self, grid: &Grid) -> f64 {
        grid.faces.iter().map(|f| f.length * self.at(f.edge).powi(2)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub epsilon: f64,
    pub chi: f64,
    pub beta: f64,
    pub kappa: f64,
    pub sigma_b: BoundaryData,
    pub potential: PotentialSplit,
    pub mobility: MobilityLaw,
    pub elastic: ElasticLaw,
    pub sources: SourceLaw,
    pub traction: TractionField,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            epsilon: 0.05,
            chi: 0.0,
            beta: 1.0,
            kappa: 1.0,
            sigma_b: BoundaryData::Constant(1.0),
            potential: PotentialSplit::Quartic,
            mobility: MobilityLaw::Constant(1.0),
            elastic: ElasticLaw::default(),
            sources: SourceLaw { sigma_c: ScalarData::Constant(1.0), ..SourceLaw::default() },
            traction: TractionField::zero(),
        }
    }
}

fn err(label: &'static str, message: impl Into<String>) -> MaterialError {
    MaterialError::Hypothesis { label, message: message.into() }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), MaterialError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(err("A1", format!("epsilon must be positive, got {}", self.epsilon)));
        }
        for (name, v) in [("chi", self.chi), ("beta", self.beta), ("kappa", self.kappa)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(err("A1", format!("{name} must be non-negative, got {v}")));
            }
        }
        self.sources.validate()?;
        if self.beta == 0.0 && self.sources.supply + self.kappa <= 0.0 {
            return Err(err("A1", "beta=0 requires B+kappa>0"));
        }
        let sb_ok = match self.sigma_b {
            BoundaryData::Constant(v) => v >= 0.0 && v.is_finite(),
            BoundaryData::PerEdge(v) => v.iter().all(|x| *x >= 0.0 && x.is_finite()),
        };
        if !sb_ok {
            return Err(err("A5", "sigma_B must be non-negative and bounded"));
        }
        self.mobility.validate()?;
        self.elastic.validate()?;
        let t = &self.traction;
        if t.per_edge.iter().flatten().any(|v| !v.is_finite()) {
            return Err(err("A1", "traction must be finite"));
        }
        Ok(())
    }

    /// The nutrient bound `M = max(‖σ_c‖∞, ‖σ_B‖∞)`.
    pub fn sigma_bound(&self) -> f64 {
        self.sources.sigma_c.sup().max(self.sigma_b.sup())
    }

    /// Caps of the truncation; a cap whose data never enters the nutrient
    /// equation (`κ = 0` for σ_B, `B = 0` for σ_c) is inactive.
    pub fn truncation_caps(&self) -> (f64, f64) {
        let sb = if self.kappa > 0.0 { self.sigma_b.sup() } else { f64::INFINITY };
        let sc = if self.sources.supply > 0.0 { self.sources.sigma_c.sup() } else { f64::INFINITY };
        (sb, sc)
    }

    /// Hypotheses of the continuous-dependence estimates: constant mobility,
    /// Vegard eigenstrain with a constant isotropic tensor.
    pub fn check_continuous_dependence(&self) -> Result<(), MaterialError> {
        if !self.mobility.is_constant() || self.elastic.validate().is_err() {
            return Err(err("C1", "continuous-dependence hypotheses not met"));
        }
        Ok(())
    }
}
