//! Scalar Q1 assembly on a [`Grid`]: mass and stiffness operators, weighted
//! variants, quadrature-point interpolation and load vectors.
//!
//! Quadrature-point arrays are cell-major: entry `cell * nq + q`.

use crate::grid::{ElementQuadrature, Grid};
use crate::linalg::CsrMatrix;

fn empty_operator(grid: &Grid) -> CsrMatrix {
    let p = &grid.pattern;
    let n = grid.n_nodes();
    CsrMatrix::from_parts(n, n, p.row_offsets.clone(), p.col_indices.clone(), vec![0.0; p.col_indices.len()])
        .expect("grid pattern is a valid CSR structure")
}

/// Assembles `Σ_cells Σ_q w_q |J| c_q k(a, b)` where `kernel` receives the
/// cell, the quadrature index, and writes the 4×4 local contribution scaled by
/// the weight it is given.
fn assemble_with<F>(grid: &Grid, quad: &ElementQuadrature, mut kernel: F) -> CsrMatrix
where
    F: FnMut(usize, usize, f64, &mut [[f64; 4]; 4]),
{
    let mut m = empty_operator(grid);
    let det = grid.det_j();
    {
        let values = m.values_mut();
        let mut local = [[0.0; 4]; 4];
        for cell in 0..grid.n_cells() {
            local.iter_mut().for_each(|r| *r = [0.0; 4]);
            for q in 0..quad.len() {
                kernel(cell, q, quad.weights[q] * det, &mut local);
            }
            let slots = &grid.pattern.cell_slots[cell];
            for a in 0..4 {
                for b in 0..4 {
                    values[slots[4 * a + b]] += local[a][b];
                }
            }
        }
    }
    m.certify_symmetric();
    m
}

/// Consistent mass matrix `(N_i, N_j)`.
pub fn mass_matrix(grid: &Grid) -> CsrMatrix {
    let quad = &grid.quad;
    assemble_with(grid, quad, |_, q, w, local| {
        let n = &quad.shape_values[q];
        for a in 0..4 {
            for b in 0..4 {
                local[a][b] += w * n[a] * n[b];
            }
        }
    })
}

/// Stiffness matrix `(∇N_i, ∇N_j)`.
pub fn stiffness_matrix(grid: &Grid) -> CsrMatrix {
    weighted_stiffness(grid, None)
}

/// Stiffness with a coefficient sampled at the 2×2 Gauss points.
pub fn weighted_stiffness(grid: &Grid, coeff: Option<&[f64]>) -> CsrMatrix {
    let quad = &grid.quad;
    let nq = quad.len();
    if let Some(c) = coeff {
        assert_eq!(c.len(), grid.n_cells() * nq, "coefficient array has wrong length");
    }
    assemble_with(grid, quad, |cell, q, w, local| {
        let g = grid.physical_gradients(&quad.shape_gradients[q]);
        let c = coeff.map_or(1.0, |c| c[cell * nq + q]);
        for a in 0..4 {
            for b in 0..4 {
                local[a][b] += w * c * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
            }
        }
    })
}

/// Mass matrix weighted by a coefficient given at the points of `quad`.
pub fn weighted_mass(grid: &Grid, quad: &ElementQuadrature, coeff: &[f64]) -> CsrMatrix {
    let nq = quad.len();
    assert_eq!(coeff.len(), grid.n_cells() * nq, "coefficient array has wrong length");
    assemble_with(grid, quad, |cell, q, w, local| {
        let n = &quad.shape_values[q];
        let c = coeff[cell * nq + q];
        for a in 0..4 {
            for b in 0..4 {
                local[a][b] += w * c * n[a] * n[b];
            }
        }
    })
}

/// Values of a nodal field at the points of `quad`.
pub fn interpolate_at(grid: &Grid, quad: &ElementQuadrature, nodal: &[f64]) -> Vec<f64> {
    assert_eq!(nodal.len(), grid.n_nodes());
    let nq = quad.len();
    let mut out = Vec::with_capacity(grid.n_cells() * nq);
    for cell in 0..grid.n_cells() {
        let nodes = grid.cell_nodes(cell);
        for q in 0..nq {
            let n = &quad.shape_values[q];
            out.push((0..4).map(|a| n[a] * nodal[nodes[a]]).sum());
        }
    }
    out
}

/// Load vector `(f, N_i)` for `f` sampled at the points of `quad`.
pub fn load_from_points(grid: &Grid, quad: &ElementQuadrature, values: &[f64]) -> Vec<f64> {
    let nq = quad.len();
    assert_eq!(values.len(), grid.n_cells() * nq);
    let det = grid.det_j();
    let mut out = vec![0.0; grid.n_nodes()];
    for cell in 0..grid.n_cells() {
        let nodes = grid.cell_nodes(cell);
        for q in 0..nq {
            let w = quad.weights[q] * det * values[cell * nq + q];
            let n = &quad.shape_values[q];
            for a in 0..4 {
                out[nodes[a]] += w * n[a];
            }
        }
    }
    out
}

/// `∫ f` for `f` sampled at the points of `quad`.
pub fn integrate_points(grid: &Grid, quad: &ElementQuadrature, values: &[f64]) -> f64 {
    let nq = quad.len();
    let det = grid.det_j();
    let mut total = 0.0;
    for cell in 0..grid.n_cells() {
        let mut cell_sum = 0.0;
        for q in 0..nq {
            cell_sum += quad.weights[q] * values[cell * nq + q];
        }
        total += det * cell_sum;
    }
    total
}

/// Nodal interpolant of a function of position.
pub fn interpolate_fn<F: Fn(f64, f64) -> f64>(grid: &Grid, f: F) -> Vec<f64> {
    grid.node_coords.iter().map(|p| f(p[0], p[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, EdgeSet};

    fn unit(n: usize) -> Grid {
        build_grid(n, n, 1.0, 1.0, EdgeSet::all()).unwrap()
    }

    #[test]
    fn single_cell_mass_matches_closed_form() {
        let g = build_grid(2, 2, 2.0, 2.0, EdgeSet::all()).unwrap();
        let m = mass_matrix(&g);
        // lower-left cell of area 1 contributes alone to node 0
        let closed = [4.0, 2.0, 1.0, 2.0].map(|v| v / 36.0);
        let nodes = g.cell_nodes(0);
        for b in 0..4 {
            assert!((m.get(nodes[0], nodes[b]) - closed[b]).abs() < 1e-15);
        }
    }

    #[test]
    fn single_cell_stiffness_square() {
        let g = build_grid(2, 2, 0.3, 0.3, EdgeSet::all()).unwrap();
        let k = stiffness_matrix(&g);
        let nodes = g.cell_nodes(0);
        let closed = [4.0, -1.0, -2.0, -1.0].map(|v| v / 6.0);
        for b in 0..4 {
            assert!((k.get(nodes[0], nodes[b]) - closed[b]).abs() < 1e-14);
        }
    }

    #[test]
    fn partition_of_unity_integral() {
        let g = build_grid(7, 5, 1.3, 0.9, EdgeSet::all()).unwrap();
        let m = mass_matrix(&g);
        let ones = vec![1.0; g.n_nodes()];
        let area = m.quad_form(&ones);
        assert!(((area - 1.3 * 0.9) / (1.3 * 0.9)).abs() < 1e-13);
        let k = stiffness_matrix(&g);
        assert!(k.matvec(&ones).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn linear_function_norms() {
        let g = unit(8);
        let f = interpolate_fn(&g, |x, _| x);
        let m = mass_matrix(&g);
        let k = stiffness_matrix(&g);
        assert!((m.quad_form(&f) - 1.0 / 3.0).abs() < 1e-13);
        assert!((k.quad_form(&f) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn load_and_integration_agree() {
        let g = unit(4);
        let vals: Vec<f64> = (0..g.n_cells() * 4).map(|i| (i as f64 * 0.37).sin()).collect();
        let load = load_from_points(&g, &g.quad, &vals);
        let total: f64 = load.iter().sum();
        assert!((total - integrate_points(&g, &g.quad, &vals)).abs() < 1e-14);
    }

    #[test]
    fn weighted_operators_reduce_to_plain_ones() {
        let g = unit(3);
        let ones2 = vec![1.0; g.n_cells() * 4];
        let ones3 = vec![1.0; g.n_cells() * 9];
        let a = weighted_stiffness(&g, Some(&ones2));
        let b = stiffness_matrix(&g);
        let c = weighted_mass(&g, &g.quad_fine, &ones3);
        let d = mass_matrix(&g);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-14);
        }
        for (x, y) in c.values().iter().zip(d.values()) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
