use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elasticity::TractionField;
use crate::grid::{build_grid, Edge, EdgeSet, Grid, GridError};
use crate::materials::{ElasticLaw, MobilityLaw, RateTable, ResponseKind, ScalarData, SourceLaw};
use crate::steppers::{mollify_initial, BoundaryData, ModelParams, SimError, Simulation};
use crate::tensor::Tensor2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub dirichlet: EdgeSet,
}

impl GridSpec {
    pub fn unit_square(n: usize, dirichlet: EdgeSet) -> Self {
        GridSpec { nx: n, ny: n, lx: 1.0, ly: 1.0, dirichlet }
    }

    pub fn build(&self) -> Result<Grid, GridError> {
        build_grid(self.nx, self.ny, self.lx, self.ly, self.dirichlet)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialField {
    Constant(f64),
    /// Tumour disc `φ = −tanh((r − R)/w)`; `width = None` uses `√2 ε`.
    Disc { center: [f64; 2], radius: f64, width: Option<f64> },
    /// Uniform noise `mean + amplitude·U(−1, 1)` per node.
    Random { mean: f64, amplitude: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialNutrient {
    Constant(f64),
    /// Quasi-static profile for the initial phase field.
    QuasiStatic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub grid: GridSpec,
    pub params: ModelParams,
    pub dt: f64,
    pub steps: usize,
    pub initial_phi: InitialField,
    /// Elliptic smoothing of the initial phase field; zero disables it.
    pub mollify_delta: f64,
    pub initial_sigma: InitialNutrient,
}

/// A built simulation with its initial data.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub sim: Simulation,
    pub phi0: Vec<f64>,
    pub sigma0: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
}

pub fn initial_phi(grid: &Grid, field: &InitialField, epsilon: f64) -> Vec<f64> {
    match field {
        InitialField::Constant(c) => vec![*c; grid.n_nodes()],
        InitialField::Disc { center, radius, width } => {
            let w = width.unwrap_or(std::f64::consts::SQRT_2 * epsilon);
            grid.node_coords
                .iter()
                .map(|p| {
                    let r = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
                    -((r - radius) / w).tanh()
                })
                .collect()
        }
        InitialField::Random { mean, amplitude, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..grid.n_nodes()).map(|_| mean + amplitude * rng.gen_range(-1.0..1.0)).collect()
        }
    }
}

impl ScenarioSpec {
    /// Unit square, 32², ε = 0.05, tumour disc of radius 0.2 at the centre,
    /// `σ_B = σ_c = 1`, Vegard coupling on, clamped bottom edge.
    pub fn baseline() -> Self {
        let params = ModelParams {
            epsilon: 0.05,
            chi: 0.5,
            beta: 1.0,
            kappa: 1.0,
            sigma_b: BoundaryData::Constant(1.0),
            mobility: MobilityLaw::Constant(1.0),
            elastic: ElasticLaw {
                lame_lambda: 1.0,
                lame_mu: 1.0,
                eigenstrain_offset: Tensor2::diag(0.05, 0.05),
                eigenstrain_slope: Tensor2::diag(0.05, 0.05),
            },
            sources: SourceLaw {
                lambda_p: RateTable::constant(1.0),
                lambda_a: RateTable::constant(0.5),
                lambda_c: RateTable::constant(2.0),
                supply: 1.0,
                sigma_c: ScalarData::Constant(1.0),
                f_kind: ResponseKind::ClampedLinear,
                h_kind: ResponseKind::ClampedLinear,
                k_kind: ResponseKind::ClampedLinear,
            },
            traction: TractionField::zero(),
            ..ModelParams::default()
        };
        ScenarioSpec {
            grid: GridSpec::unit_square(32, EdgeSet::of(&[Edge::Bottom])),
            params,
            dt: 1e-3,
            steps: 200,
            initial_phi: InitialField::Disc { center: [0.5, 0.5], radius: 0.2, width: None },
            mollify_delta: 0.0,
            initial_sigma: InitialNutrient::QuasiStatic,
        }
    }

    /// Same scenario on an `n × n` grid.
    pub fn with_resolution(&self, n: usize) -> Self {
        let mut s = self.clone();
        s.grid.nx = n;
        s.grid.ny = n;
        s
    }

    pub fn final_time(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn build(&self) -> Result<Scenario, SimError> {
        let grid = self.grid.build()?;
        let mut phi0 = initial_phi(&grid, &self.initial_phi, self.params.epsilon);
        if self.mollify_delta > 0.0 {
            phi0 = mollify_initial(&grid, &phi0, self.mollify_delta)?;
        }
        let sim = Simulation::new(grid, self.params.clone())?;
        let sigma0 = match self.initial_sigma {
            InitialNutrient::Constant(v) => vec![v; sim.n_nodes()],
            InitialNutrient::QuasiStatic => sim.quasi_static_nutrient(&phi0, 0.0)?,
        };
        Ok(Scenario { sim, phi0, sigma0, dt: self.dt, steps: self.steps })
    }
}
