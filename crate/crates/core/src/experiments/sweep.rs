use std::fmt::Write as _;

use thiserror::Error;

use crate::diagnostics::DiagnosticsRecord;
use crate::steppers::{SimError, Simulation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("run {tag}: {source}")]
    Run { tag: String, source: SimError },
    #[error(transparent)]
    Setup(#[from] SimError),
    #[error("invalid study input: {0}")]
    InvalidInput(String),
    #[error("continuous-dependence hypotheses not met: {0}")]
    Hypotheses(String),
}

/// Outcome of a parameter sweep. The first column of every row is the swept
/// parameter.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub parameter: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Fitted log-log slope, present when at least three points qualify.
    pub slope: Option<f64>,
    pub scalars: Vec<(String, f64)>,
    pub flags: Vec<(String, bool)>,
    pub notes: Vec<String>,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if name == self.parameter {
            return Some(self.rows.iter().map(|r| r[0]).collect());
        }
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx + 1]).collect())
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn flag(&self, name: &str) -> Option<bool> {
        self.flags.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.parameter);
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sweep over {} ({} rows)", self.parameter, self.rows.len());
        match self.slope {
            Some(s) => {
                let _ = writeln!(out, "log-log slope: {s:.6}");
            }
            None => {
                let _ = writeln!(out, "log-log slope: undefined");
            }
        }
        for (k, v) in &self.scalars {
            let _ = writeln!(out, "{k}: {v:.6e}");
        }
        for (k, v) in &self.flags {
            let _ = writeln!(out, "{k}: {}", if *v { "pass" } else { "fail" });
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

/// Shared number format of every text output: 17 significant digits.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Least-squares slope of `log y` against `log x` over points with both
/// coordinates positive; `None` with fewer than three such points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// All time levels of one run.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub records: Vec<DiagnosticsRecord>,
}

pub fn run_trajectory(sim: &Simulation, phi0: &[f64], sigma0: &[f64], dt: f64, steps: usize) -> Result<Trajectory, SimError> {
    let mut traj = Trajectory::default();
    let mut hook = |_: usize, s: &crate::steppers::FieldState, _: &DiagnosticsRecord| {
        traj.times.push(s.time);
        traj.phi.push(s.phi.clone());
        traj.mu.push(s.mu.clone());
        traj.sigma.push(s.sigma.clone());
        traj.u.push(s.u.clone());
    };
    let (_, records) = sim.run(phi0, sigma0, dt, steps, Some(&mut hook))?;
    traj.records = records;
    Ok(traj)
}

pub(crate) fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
