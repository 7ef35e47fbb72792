//! Diagnostics CSV, legacy-VTK snapshots and sweep reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::DiagnosticsRecord;
use crate::experiments::{format_number, SweepResult};
use crate::grid::Grid;
use crate::steppers::FieldState;

pub const DIAGNOSTIC_COLUMNS: [&str; 19] = [
    "time",
    "total_energy",
    "ginzburg_landau",
    "nutrient",
    "elastic",
    "mass",
    "sigma_min",
    "sigma_max",
    "grad_mu_norm",
    "sigma_h1_norm",
    "newton_iters",
    "linear_iters",
    "phi_h1_norm",
    "psi_l1",
    "sigma_l2_norm",
    "u_h1_norm",
    "mu_l2_norm",
    "mu_h1_norm",
    "source_integral",
];

fn record_cells(r: &DiagnosticsRecord) -> [String; 19] {
    let f = format_number;
    [
        f(r.time),
        f(r.total_energy),
        f(r.ginzburg_landau),
        f(r.nutrient),
        f(r.elastic),
        f(r.mass),
        f(r.sigma_min),
        f(r.sigma_max),
        f(r.grad_mu_norm),
        f(r.sigma_h1_norm),
        r.newton_iters.to_string(),
        r.linear_iters.to_string(),
        f(r.phi_h1_norm),
        f(r.psi_l1),
        f(r.sigma_l2_norm),
        f(r.u_h1_norm),
        f(r.mu_l2_norm),
        f(r.mu_h1_norm),
        f(r.source_integral),
    ]
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = DIAGNOSTIC_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&record_cells(r).join(","));
        out.push('\n');
    }
    out
}

pub fn write_diagnostics_csv(records: &[DiagnosticsRecord], path: &Path) -> std::io::Result<()> {
    if records.is_empty() {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "no diagnostics records"));
    }
    fs::write(path, diagnostics_csv(records))
}

/// Legacy ASCII VTK structured grid with the nodal fields of `state`.
pub fn vtk_string(grid: &Grid, state: &FieldState) -> String {
    let n = grid.n_nodes();
    let mut s = String::with_capacity(n * 200);
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "mechanochem state t={}", format_number(state.time));
    s.push_str("ASCII\nDATASET STRUCTURED_GRID\n");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", grid.nx + 1, grid.ny + 1);
    let _ = writeln!(s, "POINTS {n} double");
    for p in &grid.node_coords {
        let _ = writeln!(s, "{} {} {}", format_number(p[0]), format_number(p[1]), format_number(0.0));
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    for (name, values) in [("phi", &state.phi), ("mu", &state.mu), ("sigma", &state.sigma)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in values.iter() {
            s.push_str(&format_number(*v));
            s.push('\n');
        }
    }
    s.push_str("VECTORS displacement double\n");
    for k in 0..n {
        let _ = writeln!(s, "{} {} {}", format_number(state.u[2 * k]), format_number(state.u[2 * k + 1]), format_number(0.0));
    }
    s
}

pub fn write_vtk(grid: &Grid, state: &FieldState, path: &Path) -> std::io::Result<()> {
    fs::write(path, vtk_string(grid, state))
}

pub fn snapshot_name(step: usize) -> String {
    format!("state_{step:05}.vtk")
}

/// Writes `<stem>.csv` and `<stem>.txt` into `dir`.
pub fn write_sweep(result: &SweepResult, dir: &Path, stem: &str) -> std::io::Result<()> {
    fs::write(dir.join(format!("{stem}.csv")), result.to_csv())?;
    fs::write(dir.join(format!("{stem}.txt")), result.summary())
}
