//! INI-style run configuration.
//!
//! Sections hold flat `key = value` pairs; `#` starts a comment. Unknown
//! sections and keys are rejected. Omitted keys take the defaults of the
//! baseline scenario.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::elasticity::TractionField;
use crate::experiments::{DependenceNorm, DtRule, GridSpec, InitialField, InitialNutrient, PerturbTarget, ScenarioSpec};
use crate::grid::{Edge, EdgeSet};
use crate::materials::{MaterialError, MobilityLaw, PotentialSplit, RateTable, ResponseKind, ScalarData};
use crate::steppers::BoundaryData;
use crate::tensor::Tensor2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key '{key}' in [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: duplicate key '{section}.{key}'")]
    DuplicateKey { line: usize, section: String, key: String },
    #[error("line {line}: {section}.{key}: {message}")]
    InvalidValue { line: usize, section: String, key: String, message: String },
    #[error("{keys}: {source}")]
    Validation { keys: &'static str, source: MaterialError },
}

impl ConfigError {
    /// Whether the error is a violated model hypothesis rather than a
    /// malformed file.
    pub fn is_validation(&self) -> bool {
        matches!(self, ConfigError::Validation { .. })
    }
}

const SECTIONS: [(&str, &[&str]); 9] = [
    ("grid", &["nx", "ny", "lx", "ly", "dirichlet"]),
    ("time", &["dt", "steps"]),
    (
        "model",
        &[
            "epsilon",
            "chi",
            "beta",
            "mobility",
            "mobility_value",
            "mobility_min",
            "mobility_max",
            "phi0",
            "phi0_value",
            "phi0_center",
            "phi0_radius",
            "phi0_width",
            "phi0_mean",
            "phi0_amplitude",
            "phi0_seed",
            "mollify_delta",
        ],
    ),
    ("potential", &["kind"]),
    (
        "elasticity",
        &["lambda", "mu", "eigenstrain_offset", "eigenstrain_slope", "traction_left", "traction_right", "traction_bottom", "traction_top"],
    ),
    ("nutrient", &["kappa", "sigma_b", "sigma0"]),
    ("sources", &["lambda_p", "lambda_a", "lambda_c", "supply", "sigma_c", "f", "h", "k"]),
    ("output", &["dir", "snapshot_every", "diagnostics"]),
    ("experiment", &["betas", "deltas", "target", "norm", "grids", "dt_rule"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write a VTK snapshot every this many steps; zero disables snapshots.
    pub snapshot_every: usize,
    pub diagnostics: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub betas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub target: PerturbTarget,
    pub norm: DependenceNorm,
    pub grids: Vec<usize>,
    pub dt_rule: DtRule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub output: OutputConfig,
    pub experiment: ExperimentConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: ScenarioSpec::baseline(),
            output: OutputConfig { dir: PathBuf::from("output"), snapshot_every: 0, diagnostics: "diagnostics.csv".into() },
            experiment: ExperimentConfig {
                betas: vec![1.0, 0.5, 0.25, 0.125, 0.0],
                deltas: vec![1e-1, 1e-2, 1e-3, 1e-4],
                target: PerturbTarget::Phi0,
                norm: DependenceNorm::L2,
                grids: vec![8, 16, 32],
                dt_rule: DtRule::Linear,
            },
        }
    }
}

struct Entry {
    value: String,
    line: usize,
}

type Sections = BTreeMap<String, BTreeMap<String, Entry>>;

fn tokenize(text: &str) -> Result<Sections, ConfigError> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax { line, message: format!("malformed section header '{content}'") })?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(ConfigError::UnknownSection { line, name: name.to_string() });
            }
            sections.entry(name.to_string()).or_default();
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, message: format!("expected 'key = value', got '{content}'") })?;
        let key = key.trim();
        let section = current.clone().ok_or_else(|| ConfigError::Syntax { line, message: "key outside of any section".into() })?;
        let allowed = SECTIONS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey { line, section, key: key.to_string() });
        }
        let table = sections.get_mut(&section).expect("section registered");
        if table.contains_key(key) {
            return Err(ConfigError::DuplicateKey { line, section, key: key.to_string() });
        }
        table.insert(key.to_string(), Entry { value: value.trim().to_string(), line });
    }
    Ok(sections)
}

struct Reader<'a> {
    sections: &'a Sections,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|t| t.get(key))
    }

    fn get<T>(&self, section: &str, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(e) => parse(&e.value).map(Some).map_err(|message| ConfigError::InvalidValue {
                line: e.line,
                section: section.to_string(),
                key: key.to_string(),
                message,
            }),
        }
    }

    fn set<T>(&self, section: &str, key: &str, target: &mut T, parse: impl Fn(&str) -> Result<T, String>) -> Result<(), ConfigError> {
        if let Some(v) = self.get(section, key, parse)? {
            *target = v;
        }
        Ok(())
    }
}

fn real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, got '{s}'"))?;
    if !v.is_finite() {
        return Err(format!("expected a finite number, got '{s}'"));
    }
    Ok(v)
}

fn count(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, got '{s}'"))
}

fn reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|p| real(p.trim())).collect()
}

fn counts(s: &str) -> Result<Vec<usize>, String> {
    s.split(',').map(|p| count(p.trim())).collect()
}

fn fixed<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v = reals(s)?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn tensor(s: &str) -> Result<Tensor2, String> {
    fixed::<4>(s).map(Tensor2::from_row_major)
}

/// `v` for a constant rate or `t0:v0, t1:v1, ...` for a piecewise table.
fn rate(s: &str) -> Result<RateTable, String> {
    if !s.contains(':') {
        return Ok(RateTable::constant(real(s)?));
    }
    let mut bp = Vec::new();
    for part in s.split(',') {
        let (t, v) = part.split_once(':').ok_or_else(|| format!("expected 'time:value', got '{}'", part.trim()))?;
        bp.push((real(t.trim())?, real(v.trim())?));
    }
    if bp.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err("rate table times must increase".into());
    }
    Ok(RateTable { breakpoints: bp })
}

fn response(s: &str) -> Result<ResponseKind, String> {
    match s {
        "one" => Ok(ResponseKind::One),
        "clamped_linear" => Ok(ResponseKind::ClampedLinear),
        other => Err(format!("expected 'one' or 'clamped_linear', got '{other}'")),
    }
}

fn word(s: &str) -> Result<String, String> {
    Ok(s.to_string())
}

fn provenance(err: &MaterialError) -> &'static str {
    let msg = err.to_string();
    let table: [(&str, &'static str); 13] = [
        ("epsilon", "model.epsilon"),
        ("chi must", "model.chi"),
        ("beta=0", "model.beta, nutrient.kappa, sources.supply"),
        ("beta must", "model.beta"),
        ("kappa must", "nutrient.kappa"),
        ("rate", "sources.lambda_p, sources.lambda_a, sources.lambda_c"),
        ("B must", "sources.supply"),
        ("sigma_c", "sources.sigma_c"),
        ("sigma_B", "nutrient.sigma_b"),
        ("mobility", "model.mobility"),
        ("elasticity tensor", "elasticity.lambda, elasticity.mu"),
        ("eigenstrain", "elasticity.eigenstrain_offset, elasticity.eigenstrain_slope"),
        ("traction", "elasticity.traction"),
    ];
    table.iter().find(|(needle, _)| msg.contains(needle)).map(|(_, k)| *k).unwrap_or("config")
}

fn parse_sections(sections: &Sections) -> Result<RunConfig, ConfigError> {
    let r = Reader { sections };
    let mut cfg = RunConfig::default();
    let sc = &mut cfg.scenario;

    let g = &mut sc.grid;
    r.set("grid", "nx", &mut g.nx, count)?;
    r.set("grid", "ny", &mut g.ny, count)?;
    r.set("grid", "lx", &mut g.lx, real)?;
    r.set("grid", "ly", &mut g.ly, real)?;
    r.set("grid", "dirichlet", &mut g.dirichlet, |s| EdgeSet::parse(s).map_err(|e| e.to_string()))?;

    r.set("time", "dt", &mut sc.dt, real)?;
    r.set("time", "steps", &mut sc.steps, count)?;

    let p = &mut sc.params;
    r.set("model", "epsilon", &mut p.epsilon, real)?;
    r.set("model", "chi", &mut p.chi, real)?;
    r.set("model", "beta", &mut p.beta, real)?;
    let kind = r.get("model", "mobility", word)?.unwrap_or_else(|| "constant".into());
    p.mobility = match kind.as_str() {
        "constant" => MobilityLaw::Constant(r.get("model", "mobility_value", real)?.unwrap_or(1.0)),
        "stress_gated" => MobilityLaw::StressGated {
            min: r.get("model", "mobility_min", real)?.unwrap_or(0.5),
            max: r.get("model", "mobility_max", real)?.unwrap_or(1.0),
        },
        other => {
            let e = r.raw("model", "mobility").expect("present");
            return Err(ConfigError::InvalidValue {
                line: e.line,
                section: "model".into(),
                key: "mobility".into(),
                message: format!("expected 'constant' or 'stress_gated', got '{other}'"),
            });
        }
    };
    let phi_kind = r.get("model", "phi0", word)?.unwrap_or_else(|| "disc".into());
    sc.initial_phi = match phi_kind.as_str() {
        "constant" => InitialField::Constant(r.get("model", "phi0_value", real)?.unwrap_or(0.0)),
        "disc" => InitialField::Disc {
            center: r.get("model", "phi0_center", fixed::<2>)?.unwrap_or([0.5, 0.5]),
            radius: r.get("model", "phi0_radius", real)?.unwrap_or(0.2),
            width: r.get("model", "phi0_width", |s| if s == "auto" { Ok(None) } else { real(s).map(Some) })?.flatten(),
        },
        "random" => InitialField::Random {
            mean: r.get("model", "phi0_mean", real)?.unwrap_or(0.0),
            amplitude: r.get("model", "phi0_amplitude", real)?.unwrap_or(0.1),
            seed: r.get("model", "phi0_seed", |s| s.parse::<u64>().map_err(|_| format!("expected a seed, got '{s}'")))?.unwrap_or(0),
        },
        other => {
            let e = r.raw("model", "phi0").expect("present");
            return Err(ConfigError::InvalidValue {
                line: e.line,
                section: "model".into(),
                key: "phi0".into(),
                message: format!("expected 'constant', 'disc' or 'random', got '{other}'"),
            });
        }
    };
    r.set("model", "mollify_delta", &mut sc.mollify_delta, real)?;

    r.set("potential", "kind", &mut p.potential, |s| match s {
        "quartic" => Ok(PotentialSplit::Quartic),
        other => Err(format!("unsupported potential '{other}'")),
    })?;

    let el = &mut p.elastic;
    r.set("elasticity", "lambda", &mut el.lame_lambda, real)?;
    r.set("elasticity", "mu", &mut el.lame_mu, real)?;
    r.set("elasticity", "eigenstrain_offset", &mut el.eigenstrain_offset, tensor)?;
    r.set("elasticity", "eigenstrain_slope", &mut el.eigenstrain_slope, tensor)?;
    let mut traction = TractionField::zero();
    for edge in Edge::ALL {
        let key = format!("traction_{}", edge.name());
        r.set("elasticity", &key, &mut traction.per_edge[edge.index()], fixed::<2>)?;
    }
    p.traction = traction;

    r.set("nutrient", "kappa", &mut p.kappa, real)?;
    r.set("nutrient", "sigma_b", &mut p.sigma_b, |s| {
        let v = reals(s)?;
        match v.len() {
            1 => Ok(BoundaryData::Constant(v[0])),
            4 => Ok(BoundaryData::PerEdge([v[0], v[1], v[2], v[3]])),
            n => Err(format!("expected 1 or 4 numbers (left, right, bottom, top), got {n}")),
        }
    })?;
    r.set("nutrient", "sigma0", &mut sc.initial_sigma, |s| {
        if s == "quasistatic" {
            Ok(InitialNutrient::QuasiStatic)
        } else {
            real(s).map(InitialNutrient::Constant)
        }
    })?;

    let src = &mut p.sources;
    r.set("sources", "lambda_p", &mut src.lambda_p, rate)?;
    r.set("sources", "lambda_a", &mut src.lambda_a, rate)?;
    r.set("sources", "lambda_c", &mut src.lambda_c, rate)?;
    r.set("sources", "supply", &mut src.supply, real)?;
    r.set("sources", "sigma_c", &mut src.sigma_c, |s| real(s).map(ScalarData::Constant))?;
    r.set("sources", "f", &mut src.f_kind, response)?;
    r.set("sources", "h", &mut src.h_kind, response)?;
    r.set("sources", "k", &mut src.k_kind, response)?;

    let out = &mut cfg.output;
    r.set("output", "dir", &mut out.dir, |s| Ok(PathBuf::from(s)))?;
    r.set("output", "snapshot_every", &mut out.snapshot_every, count)?;
    r.set("output", "diagnostics", &mut out.diagnostics, word)?;

    let ex = &mut cfg.experiment;
    r.set("experiment", "betas", &mut ex.betas, reals)?;
    r.set("experiment", "deltas", &mut ex.deltas, reals)?;
    r.set("experiment", "target", &mut ex.target, |s| s.parse())?;
    r.set("experiment", "norm", &mut ex.norm, |s| s.parse())?;
    r.set("experiment", "grids", &mut ex.grids, counts)?;
    r.set("experiment", "dt_rule", &mut ex.dt_rule, |s| s.parse())?;

    cfg.validate()?;
    Ok(cfg)
}

/// Parses configuration text.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    parse_sections(&tokenize(text)?)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_config_str(&text)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn rate_text(r: &RateTable) -> String {
    if r.breakpoints.len() == 1 && r.breakpoints[0].0 == 0.0 {
        return r.breakpoints[0].1.to_string();
    }
    r.breakpoints.iter().map(|(t, v)| format!("{t}:{v}")).collect::<Vec<_>>().join(", ")
}

fn response_text(k: ResponseKind) -> &'static str {
    match k {
        ResponseKind::One => "one",
        ResponseKind::ClampedLinear => "clamped_linear",
    }
}

impl RunConfig {
    /// Re-checks every model hypothesis, naming the offending keys.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let sc = &self.scenario;
        let grid_err = |message: String| ConfigError::Validation {
            keys: "grid",
            source: MaterialError::Hypothesis { label: "A1", message },
        };
        if sc.grid.nx == 0 || sc.grid.ny == 0 || !(sc.grid.lx > 0.0) || !(sc.grid.ly > 0.0) {
            return Err(grid_err("grid needs positive cell counts and side lengths".into()));
        }
        if sc.grid.dirichlet.is_empty() {
            return Err(grid_err("Γ_D must have positive measure".into()));
        }
        if !(sc.dt > 0.0) {
            return Err(ConfigError::Validation {
                keys: "time.dt",
                source: MaterialError::Hypothesis { label: "A1", message: format!("time step must be positive, got {}", sc.dt) },
            });
        }
        if !(sc.mollify_delta >= 0.0 && sc.mollify_delta <= 1.0) {
            return Err(ConfigError::Validation {
                keys: "model.mollify_delta",
                source: MaterialError::Hypothesis { label: "A6", message: format!("mollifier delta must lie in [0, 1], got {}", sc.mollify_delta) },
            });
        }
        sc.params.validate().map_err(|source| ConfigError::Validation { keys: provenance(&source), source })
    }

    /// Canonical text form; parsing it gives back an equal configuration.
    pub fn serialize(&self) -> String {
        let sc = &self.scenario;
        let p = &sc.params;
        let mut s = String::new();
        let g = &sc.grid;
        let _ = writeln!(s, "[grid]\nnx = {}\nny = {}\nlx = {}\nly = {}\ndirichlet = {}\n", g.nx, g.ny, g.lx, g.ly, g.dirichlet);
        let _ = writeln!(s, "[time]\ndt = {}\nsteps = {}\n", sc.dt, sc.steps);
        let _ = writeln!(s, "[model]\nepsilon = {}\nchi = {}\nbeta = {}", p.epsilon, p.chi, p.beta);
        match p.mobility {
            MobilityLaw::Constant(m) => {
                let _ = writeln!(s, "mobility = constant\nmobility_value = {m}");
            }
            MobilityLaw::StressGated { min, max } => {
                let _ = writeln!(s, "mobility = stress_gated\nmobility_min = {min}\nmobility_max = {max}");
            }
        }
        match &sc.initial_phi {
            InitialField::Constant(v) => {
                let _ = writeln!(s, "phi0 = constant\nphi0_value = {v}");
            }
            InitialField::Disc { center, radius, width } => {
                let w = width.map_or("auto".to_string(), |w| w.to_string());
                let _ = writeln!(s, "phi0 = disc\nphi0_center = {}\nphi0_radius = {radius}\nphi0_width = {w}", join(center));
            }
            InitialField::Random { mean, amplitude, seed } => {
                let _ = writeln!(s, "phi0 = random\nphi0_mean = {mean}\nphi0_amplitude = {amplitude}\nphi0_seed = {seed}");
            }
        }
        let _ = writeln!(s, "mollify_delta = {}\n", sc.mollify_delta);
        let _ = writeln!(s, "[potential]\nkind = quartic\n");
        let el = &p.elastic;
        let _ = writeln!(
            s,
            "[elasticity]\nlambda = {}\nmu = {}\neigenstrain_offset = {}\neigenstrain_slope = {}",
            el.lame_lambda,
            el.lame_mu,
            join(&el.eigenstrain_offset.to_row_major()),
            join(&el.eigenstrain_slope.to_row_major())
        );
        for edge in Edge::ALL {
            let _ = writeln!(s, "traction_{} = {}", edge.name(), join(&p.traction.at(edge)));
        }
        s.push('\n');
        let sb = match p.sigma_b {
            BoundaryData::Constant(v) => v.to_string(),
            BoundaryData::PerEdge(v) => join(&v),
        };
        let s0 = match sc.initial_sigma {
            InitialNutrient::QuasiStatic => "quasistatic".to_string(),
            InitialNutrient::Constant(v) => v.to_string(),
        };
        let _ = writeln!(s, "[nutrient]\nkappa = {}\nsigma_b = {sb}\nsigma0 = {s0}\n", p.kappa);
        let src = &p.sources;
        let sigma_c = match &src.sigma_c {
            ScalarData::Constant(v) => *v,
            ScalarData::Nodal(v) => v.iter().cloned().fold(0.0, f64::max),
        };
        let _ = writeln!(
            s,
            "[sources]\nlambda_p = {}\nlambda_a = {}\nlambda_c = {}\nsupply = {}\nsigma_c = {}\nf = {}\nh = {}\nk = {}\n",
            rate_text(&src.lambda_p),
            rate_text(&src.lambda_a),
            rate_text(&src.lambda_c),
            src.supply,
            sigma_c,
            response_text(src.f_kind),
            response_text(src.h_kind),
            response_text(src.k_kind)
        );
        let out = &self.output;
        let _ = writeln!(
            s,
            "[output]\ndir = {}\nsnapshot_every = {}\ndiagnostics = {}\n",
            out.dir.display(),
            out.snapshot_every,
            out.diagnostics
        );
        let ex = &self.experiment;
        let grids: Vec<String> = ex.grids.iter().map(|n| n.to_string()).collect();
        let _ = write!(
            s,
            "[experiment]\nbetas = {}\ndeltas = {}\ntarget = {}\nnorm = {}\ngrids = {}\ndt_rule = {}\n",
            join(&ex.betas),
            join(&ex.deltas),
            ex.target,
            ex.norm,
            grids.join(", "),
            ex.dt_rule
        );
        s
    }
}

impl GridSpec {
    /// Grid section of the canonical form, for summaries.
    pub fn describe(&self) -> String {
        format!("{}x{} on [0, {}] x [0, {}], clamped {}", self.nx, self.ny, self.lx, self.ly, self.dirichlet)
    }
}
