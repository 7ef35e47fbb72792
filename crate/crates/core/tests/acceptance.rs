//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use mechanochem::assembly::interpolate_fn;
use mechanochem::cli::run_cli;
use mechanochem::diagnostics::{energy_inequality_ledger, l2_norm, sigma_bounds_check, Norms};
use mechanochem::elasticity::{assemble_elasticity, potential_energy, TractionField};
use mechanochem::experiments::{elastic_manufactured, perturbation_study, quasistatic_sweep, DependenceNorm, InitialNutrient, PerturbTarget, ScenarioSpec};
use mechanochem::grid::{build_grid, Edge, EdgeSet};
use mechanochem::linalg::direct_solve;
use mechanochem::materials::ElasticLaw;
use mechanochem::steppers::{mollify_initial, FieldState};
use mechanochem::tensor::Tensor2;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn mass_balance() -> Outcome {
    let start = Instant::now();
    let sc = ScenarioSpec::baseline().build().map_err(|e| e.to_string())?;
    let (_, recs) = sc.sim.run(&sc.phi0, &sc.sigma0, sc.dt, sc.steps, None).map_err(|e| e.to_string())?;
    let defect = recs
        .windows(2)
        .map(|w| ((w[1].mass - w[0].mass) - sc.dt * w[1].source_integral).abs() / (1.0 + w[0].mass.abs()))
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let sc = common::no_sources(32, 200).build().map_err(|e| e.to_string())?;
    let (_, recs) = sc.sim.run(&sc.phi0, &sc.sigma0, sc.dt, sc.steps, None).map_err(|e| e.to_string())?;
    let drift = (recs.last().unwrap().mass - recs[0].mass).abs();
    check(
        defect <= 1e-10 && drift <= 1e-9 && within(elapsed, 30),
        format!("max relative defect {defect:.2e}, sourceless drift {drift:.2e}, baseline {:.1} s", elapsed.as_secs_f64()),
    )
}

fn comparison_principle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0f64;
    for beta in [0.0, 0.1, 1.0] {
        let mut spec = ScenarioSpec::baseline();
        spec.params.beta = beta;
        spec.initial_sigma = InitialNutrient::Constant(0.0);
        let sc = spec.build().map_err(|e| e.to_string())?;
        let bound = sc.sim.params.sigma_bound();
        let mut hook = |_: usize, s: &FieldState, _: &_| worst = worst.max(sigma_bounds_check(&s.sigma, bound).1);
        sc.sim.run(&sc.phi0, &sc.sigma0, sc.dt, 200, Some(&mut hook)).map_err(|e| e.to_string())?;
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-12 && within(elapsed, 120), format!("worst violation {worst:.2e}, {:.1} s", elapsed.as_secs_f64()))
}

fn energy_dissipation() -> Outcome {
    let sc = common::gradient_flow(32, 100).build().map_err(|e| e.to_string())?;
    let (_, recs) = sc.sim.run(&sc.phi0, &sc.sigma0, sc.dt, sc.steps, None).map_err(|e| e.to_string())?;
    let worst = recs
        .windows(2)
        .map(|w| (w[1].total_energy - w[0].total_energy) / w[0].total_energy.abs().max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    check(worst <= 1e-12, format!("largest relative increase {worst:.2e} over {} steps", recs.len() - 1))
}

fn energy_ledger() -> Outcome {
    let mut ratios = Vec::new();
    for beta in [1.0, 0.5, 0.25, 0.1] {
        let mut spec = ScenarioSpec::baseline();
        spec.params.beta = beta;
        let sc = spec.build().map_err(|e| e.to_string())?;
        let (_, recs) = sc.sim.run(&sc.phi0, &sc.sigma0, sc.dt, sc.steps, None).map_err(|e| e.to_string())?;
        let ledger = energy_inequality_ledger(&recs, beta, l2_norm(&sc.sim.grid, &sc.sigma0));
        if !ledger.finite {
            return Err(format!("non-finite ledger at beta {beta}"));
        }
        ratios.push(ledger.ratio);
    }
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    check(max / min <= 3.0, format!("ratios {ratios:.4?}, max/min {:.3}", max / min))
}

fn quasistatic_limit() -> Outcome {
    let start = Instant::now();
    let r = quasistatic_sweep(&common::quasistatic_spec(), &[1.0, 0.5, 0.25, 0.125, 0.0]).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let e = r.column("e_l2h1").unwrap();
    let slope = r.slope.unwrap_or(f64::NAN);
    check(
        r.flag("strictly_decreasing") == Some(true) && slope >= 0.8 && within(elapsed, 180),
        format!("e {:.3?}, slope {slope:.3}, {:.1} s", &e[..4], elapsed.as_secs_f64()),
    )
}

fn continuous_dependence() -> Outcome {
    let start = Instant::now();
    let deltas = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut slopes = Vec::new();
    let mut max_ratios = Vec::new();
    for beta in [1.0, 0.1] {
        let r = perturbation_study(&common::perturbation_spec(beta), &deltas, PerturbTarget::Phi0, DependenceNorm::L2)
            .map_err(|e| e.to_string())?;
        if r.flag("finite") != Some(true) {
            return Err(format!("non-finite terms at beta {beta}"));
        }
        slopes.push(r.slope.unwrap_or(f64::NAN));
        max_ratios.push(r.scalar("max_ratio").unwrap());
    }
    let elapsed = start.elapsed();
    let spread = max_ratios[0].max(max_ratios[1]) / max_ratios[0].min(max_ratios[1]);
    check(
        slopes.iter().all(|s| (0.9..=1.1).contains(s)) && spread <= 3.0 && within(elapsed, 240),
        format!("slopes {slopes:.3?}, max ratios {max_ratios:.2?}, beta spread {spread:.3}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn elasticity() -> Outcome {
    let law = ElasticLaw::new(1.5, 0.8, Tensor2::sym(0.02, -0.01, 0.005), Tensor2::sym(0.05, 0.03, -0.01)).map_err(|e| e.to_string())?;
    let mut rng = common::rng(11);
    let mut oracle_err = 0f64;
    for dirichlet in [EdgeSet::of(&[Edge::Bottom]), EdgeSet::of(&[Edge::Left, Edge::Top]), EdgeSet::all()] {
        let grid = build_grid(4, 4, 1.0, 1.5, dirichlet).map_err(|e| e.to_string())?;
        let g = TractionField { per_edge: [[0.1, -0.2], [0.3, 0.05], [0.0, 0.4], [-0.2, 0.1]] };
        let phi = common::random_vec(&mut rng, grid.n_nodes(), 1.0);
        let mut sys = assemble_elasticity(&grid, &law, &g).map_err(|e| e.to_string())?;
        sys.tol = 1e-13;
        let (u, _) = sys.solve_from(&phi, None).map_err(|e| e.to_string())?;
        oracle_err = oracle_err.max(common::max_abs_diff(&u, &common::dense_oracle(&grid, &law, &g, &phi)));
    }

    let order = elastic_manufactured(&[8, 16, 32, 64], 1.0, 1.0).map_err(|e| e.to_string())?.slope.unwrap_or(f64::NAN);

    let grid = build_grid(6, 6, 1.0, 1.0, EdgeSet::of(&[Edge::Left])).map_err(|e| e.to_string())?;
    let sys = assemble_elasticity(&grid, &law, &TractionField::on_edge(Edge::Right, [0.2, -0.1])).map_err(|e| e.to_string())?;
    let phi = common::random_vec(&mut rng, grid.n_nodes(), 1.0);
    let (u, _) = sys.solve_from(&phi, None).map_err(|e| e.to_string())?;
    let e0 = potential_energy(&grid, &sys, &phi, &u);
    let mut lower = 0;
    for _ in 0..20 {
        let mut v = common::random_vec(&mut rng, u.len(), 1e-2);
        for d in grid.dirichlet_dofs() {
            v[d] = 0.0;
        }
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        if potential_energy(&grid, &sys, &phi, &w) < e0 - 1e-14 {
            lower += 1;
        }
    }
    check(
        oracle_err <= 1e-8 && (1.8..=2.2).contains(&order) && lower == 0,
        format!("oracle error {oracle_err:.2e}, manufactured order {order:.3}, {lower}/20 perturbations lowered the energy"),
    )
}

fn dual_norm() -> Outcome {
    let grid = build_grid(8, 8, 1.0, 1.0, EdgeSet::of(&[Edge::Bottom])).map_err(|e| e.to_string())?;
    let norms = Norms::new(&grid);
    let mut rng = common::rng(2024);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..100 {
        let amp = 10f64.powi(k % 7 - 3);
        let f = common::random_vec(&mut rng, grid.n_nodes(), amp);
        let dual = norms.dual(&f).map_err(|e| e.to_string())?;
        let excess = norms.l2(&f).powi(2) / (norms.h1(&f) * dual) - 1.0;
        worst = worst.max(excess);
    }
    let g32 = build_grid(32, 32, 1.0, 1.0, EdgeSet::of(&[Edge::Bottom])).map_err(|e| e.to_string())?;
    let n32 = Norms::new(&g32);
    let f = interpolate_fn(&g32, |x, _| (PI * x).cos());
    let ratio = n32.dual(&f).map_err(|e| e.to_string())?.powi(2) / n32.l2(&f).powi(2);
    let rel = (ratio * (1.0 + PI * PI) - 1.0).abs();
    check(worst <= 1e-9 && rel <= 0.02, format!("worst relative slack {worst:.2e}, cosine-mode error {:.3}%", 100.0 * rel))
}

fn mollifier() -> Outcome {
    let grid = build_grid(10, 10, 1.0, 1.0, EdgeSet::of(&[Edge::Bottom])).map_err(|e| e.to_string())?;
    let norms = Norms::new(&grid);
    let mut rng = common::rng(99);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let phi0 = common::random_vec(&mut rng, grid.n_nodes(), 1.0);
        for delta in [1.0, 1e-2] {
            let phi = mollify_initial(&grid, &phi0, delta).map_err(|e| e.to_string())?;
            let lap = direct_solve(&norms.mass, &norms.stiffness.matvec(&phi)).map_err(|e| e.to_string())?;
            let a = 2.0 * delta * norms.grad_l2(&phi).powi(2) + norms.l2(&phi).powi(2) - norms.l2(&phi0).powi(2);
            let b = 2.0 * delta * norms.l2(&lap).powi(2) + norms.grad_l2(&phi).powi(2) - norms.grad_l2(&phi0).powi(2);
            worst = worst.max(a).max(b);
        }
    }
    check(worst <= 1e-10, format!("largest excess {worst:.2e} over 40 cases"))
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/baseline.ini");
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = tmp.path().join(format!("t{threads}"));
        let args = ["mechanochem", "run", "--config", config.to_str().unwrap(), "--output", out.to_str().unwrap(), "--threads", threads];
        let code = run_cli(args.iter().map(|s| s.to_string()));
        if code != 0 {
            return Err(format!("run with {threads} threads exited with {code}"));
        }
        outputs.push(read_outputs(&out));
    }
    let vtk = outputs[0].iter().filter(|(n, _)| n.ends_with(".vtk")).count();
    check(
        outputs[0] == outputs[1] && vtk > 0 && outputs[0].iter().any(|(n, _)| n == "diagnostics.csv"),
        format!("{} files compared ({vtk} snapshots)", outputs[0].len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("mass balance", mass_balance),
        ("comparison principle", comparison_principle),
        ("energy dissipation", energy_dissipation),
        ("energy inequality", energy_ledger),
        ("quasi-static limit", quasistatic_limit),
        ("continuous dependence", continuous_dependence),
        ("elasticity", elasticity),
        ("dual norm", dual_norm),
        ("mollifier", mollifier),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
