use rayon::prelude::*;

use super::sweep::{diff, loglog_slope, run_trajectory, ExperimentError, SweepResult, Trajectory};
use super::ScenarioSpec;
use crate::diagnostics::{bochner_l2_sq, Norms};
use crate::steppers::Simulation;

/// Runs the scenario for every β in `betas` from shared initial data and
/// measures `e(β) = ‖σ_β − σ_0‖_{L²(0,T;H¹)}` against the β = 0 run.
pub fn quasistatic_sweep(spec: &ScenarioSpec, betas: &[f64]) -> Result<SweepResult, ExperimentError> {
    if !betas.contains(&0.0) {
        return Err(ExperimentError::InvalidInput("beta list must contain 0".into()));
    }
    let positive: Vec<f64> = betas.iter().cloned().filter(|b| *b > 0.0).collect();
    if positive.len() < 3 {
        return Err(ExperimentError::InvalidInput("beta list needs at least three positive values".into()));
    }
    if betas.iter().any(|b| !(*b >= 0.0)) {
        return Err(ExperimentError::InvalidInput("beta values must be non-negative".into()));
    }
    let base = spec.build()?;
    let runs: Vec<Result<Trajectory, ExperimentError>> = betas
        .par_iter()
        .map(|&beta| {
            let tag = format!("beta={beta}");
            let mut params = spec.params.clone();
            params.beta = beta;
            let sim = Simulation::new(base.sim.grid.clone(), params)
                .map_err(|source| ExperimentError::Run { tag: tag.clone(), source })?;
            run_trajectory(&sim, &base.phi0, &base.sigma0, spec.dt, spec.steps).map_err(|source| ExperimentError::Run { tag, source })
        })
        .collect();
    let mut trajectories = Vec::with_capacity(runs.len());
    for r in runs {
        trajectories.push(r?);
    }
    let limit_idx = betas.iter().position(|b| *b == 0.0).expect("checked above");
    let limit = &trajectories[limit_idx];
    let norms = Norms::new(&base.sim.grid);

    let mut rows = Vec::with_capacity(betas.len());
    for (beta, traj) in betas.iter().zip(&trajectories) {
        let h1: Vec<f64> = traj.sigma.iter().zip(&limit.sigma).map(|(a, b)| norms.h1(&diff(a, b))).collect();
        let e = bochner_l2_sq(&traj.times, &h1).sqrt();
        let final_l2 = norms.l2(&diff(traj.sigma.last().unwrap(), limit.sigma.last().unwrap()));
        rows.push(vec![*beta, e, final_l2]);
    }
    let e_pos: Vec<(f64, f64)> = rows.iter().filter(|r| r[0] > 0.0).map(|r| (r[0], r[1])).collect();
    let monotone = e_pos.windows(2).all(|w| w[0].0 > w[1].0 && w[1].1 < w[0].1);
    let finite = rows.iter().all(|r| r[1].is_finite());
    // differences at round-off level carry no rate information
    let limit_scale = limit.sigma.iter().map(|s| norms.h1(s)).fold(1.0, f64::max) * limit.times.last().copied().unwrap_or(0.0).sqrt();
    let fit: Vec<&(f64, f64)> = e_pos.iter().filter(|p| p.1 > 1e-12 * limit_scale).collect();
    let slope = loglog_slope(&fit.iter().map(|p| p.0).collect::<Vec<_>>(), &fit.iter().map(|p| p.1).collect::<Vec<_>>());
    Ok(SweepResult {
        parameter: "beta".into(),
        columns: vec!["e_l2h1".into(), "final_l2".into()],
        rows,
        slope,
        scalars: Vec::new(),
        flags: vec![("finite".into(), finite), ("strictly_decreasing".into(), monotone)],
        notes: vec![
            "the limit is compared along the whole beta sequence, which presumes the quasi-static limit is unique (constant mobility)".into(),
        ],
    })
}
