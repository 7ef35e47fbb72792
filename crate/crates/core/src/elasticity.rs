//! Quasi-static linear elasticity with a Vegard eigenstrain.
//!
//! Displacements are vector Q1 fields stored node-major: DOF `2 * node + c`
//! for component `c`. Dirichlet DOFs (homogeneous) are removed from the
//! system, so the reduced stiffness acts only on the free DOFs. Inhomogeneous
//! clamping `u = f` on Γ_D can be handled by solving for `w = u − f` with the
//! corresponding extra load.

use thiserror::Error;

use crate::assembly;
use crate::grid::{gauss_legendre, BoundaryTag, Edge, Grid};
use crate::linalg::{cg_solve_from, default_max_iter, CsrMatrix, LinalgError, Preconditioner, SolveReport, DEFAULT_CG_TOL};
use crate::materials::ElasticLaw;
use crate::tensor::Tensor2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElasticityError {
    #[error("Korn violation: check Γ_D")]
    KornViolation,
    #[error("displacement solve did not converge after {} iterations (residual {:.3e})", .0.iterations, .0.final_residual)]
    NotConverged(SolveReport),
    #[error("field has wrong length: expected {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Constant traction per rectangle edge; only values on Γ_N edges are used.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TractionField {
    pub per_edge: [[f64; 2]; 4],
}

impl TractionField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn uniform(g: [f64; 2]) -> Self {
        TractionField { per_edge: [g; 4] }
    }

    pub fn on_edge(edge: Edge, g: [f64; 2]) -> Self {
        let mut t = Self::default();
        t.per_edge[edge.index()] = g;
        t
    }

    pub fn at(&self, edge: Edge) -> [f64; 2] {
        self.per_edge[edge.index()]
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut t = *self;
        for g in &mut t.per_edge {
            g[0] *= s;
            g[1] *= s;
        }
        t
    }

    /// `‖g‖_{L²(Γ_N)}`.
    pub fn l2_norm(&self, grid: &Grid) -> f64 {
        grid.faces
            .iter()
            .filter(|f| f.tag == BoundaryTag::Neumann)
            .map(|f| {
                let g = self.at(f.edge);
                f.length * (g[0] * g[0] + g[1] * g[1])
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct ElasticitySystem {
    pub n_nodes: usize,
    /// Sorted free DOF indices into the full `2 * n_nodes` vector.
    pub free_dofs: Vec<usize>,
    /// Reduced stiffness on the free DOFs.
    pub stiffness: CsrMatrix,
    /// Full stiffness before Dirichlet elimination.
    pub full_stiffness: CsrMatrix,
    /// Traction load `∫_{Γ_N} g·η`, full length.
    pub load_base: Vec<f64>,
    /// `∫ 𝒞Ê : ∇η`, full length.
    pub eigen_offset: Vec<f64>,
    /// Maps nodal φ to `∫ φ_h 𝒞E* : ∇η`; `2N × N`.
    pub eigenstrain_coupling: CsrMatrix,
    /// Nodal body force for manufactured-solution checks; zero otherwise.
    pub body_force_hook: Option<Vec<f64>>,
    pub law: ElasticLaw,
    pub tol: f64,
}

/// Symmetric gradient of the basis function `N_a e_c`.
fn basis_strain(grad: [f64; 2], c: usize) -> Tensor2 {
    let mut t = Tensor2::ZERO;
    t.0[c][0] += 0.5 * grad[0];
    t.0[c][1] += 0.5 * grad[1];
    t.0[0][c] += 0.5 * grad[0];
    t.0[1][c] += 0.5 * grad[1];
    t
}

/// Vector stiffness `∫ 𝒞ℰ(N_b e_d) : ℰ(N_a e_c)` on all DOFs.
pub fn vector_stiffness(grid: &Grid, law: &ElasticLaw) -> CsrMatrix {
    let quad = &grid.quad;
    let det = grid.det_j();
    let mut triplets = Vec::with_capacity(grid.n_cells() * 64);
    for cell in 0..grid.n_cells() {
        let nodes = grid.cell_nodes(cell);
        let mut local = [[0.0; 8]; 8];
        for q in 0..quad.len() {
            let g = grid.physical_gradients(&quad.shape_gradients[q]);
            let w = quad.weights[q] * det;
            for b in 0..8 {
                let sb = law.apply(&basis_strain(g[b / 2], b % 2));
                for a in 0..8 {
                    local[a][b] += w * sb.ddot(&basis_strain(g[a / 2], a % 2));
                }
            }
        }
        for a in 0..8 {
            for b in 0..8 {
                triplets.push((2 * nodes[a / 2] + a % 2, 2 * nodes[b / 2] + b % 2, local[a][b]));
            }
        }
    }
    let mut k = CsrMatrix::from_triplets(2 * grid.n_nodes(), 2 * grid.n_nodes(), &triplets);
    k.certify_symmetric();
    k
}

/// Vector mass matrix applied to a nodal vector field.
pub fn vector_mass_apply(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let m = assembly::mass_matrix(grid);
    let n = grid.n_nodes();
    let mut out = vec![0.0; 2 * n];
    for c in 0..2 {
        let comp: Vec<f64> = (0..n).map(|i| f[2 * i + c]).collect();
        for (i, v) in m.matvec(&comp).into_iter().enumerate() {
            out[2 * i + c] = v;
        }
    }
    out
}

fn traction_load(grid: &Grid, g: &TractionField) -> Vec<f64> {
    let (xg, wg) = gauss_legendre(2);
    let mut load = vec![0.0; 2 * grid.n_nodes()];
    for face in grid.faces.iter().filter(|f| f.tag == BoundaryTag::Neumann) {
        let t = g.at(face.edge);
        for (x, w) in xg.iter().zip(&wg) {
            let phi = [0.5 * (1.0 - x), 0.5 * (1.0 + x)];
            for a in 0..2 {
                for c in 0..2 {
                    load[2 * face.nodes[a] + c] += w * 0.5 * face.length * phi[a] * t[c];
                }
            }
        }
    }
    load
}

pub fn assemble_elasticity(grid: &Grid, law: &ElasticLaw, traction_g: &TractionField) -> Result<ElasticitySystem, ElasticityError> {
    if law.c4() <= 0.0 {
        return Err(ElasticityError::KornViolation);
    }
    let n = grid.n_nodes();
    let full = vector_stiffness(grid, law);
    let dirichlet = grid.dirichlet_dofs();
    let mut is_fixed = vec![false; 2 * n];
    for &d in &dirichlet {
        is_fixed[d] = true;
    }
    let free_dofs: Vec<usize> = (0..2 * n).filter(|&d| !is_fixed[d]).collect();
    let mut stiffness = full.submatrix(&free_dofs);
    if stiffness.diagonal().iter().any(|&d| !(d > 0.0)) || !stiffness.certify_symmetric() {
        return Err(ElasticityError::KornViolation);
    }

    let quad = &grid.quad;
    let det = grid.det_j();
    let c_off = law.apply(&law.eigenstrain_offset);
    let c_slope = law.apply(&law.eigenstrain_slope);
    let mut eigen_offset = vec![0.0; 2 * n];
    let mut triplets = Vec::with_capacity(grid.n_cells() * 32);
    for cell in 0..grid.n_cells() {
        let nodes = grid.cell_nodes(cell);
        let mut local = [[0.0; 4]; 8];
        for q in 0..quad.len() {
            let g = grid.physical_gradients(&quad.shape_gradients[q]);
            let nv = &quad.shape_values[q];
            let w = quad.weights[q] * det;
            for a in 0..8 {
                let ea = basis_strain(g[a / 2], a % 2);
                eigen_offset[2 * nodes[a / 2] + a % 2] += w * c_off.ddot(&ea);
                let s = w * c_slope.ddot(&ea);
                for b in 0..4 {
                    local[a][b] += s * nv[b];
                }
            }
        }
        for a in 0..8 {
            for b in 0..4 {
                triplets.push((2 * nodes[a / 2] + a % 2, nodes[b], local[a][b]));
            }
        }
    }
    let eigenstrain_coupling = CsrMatrix::from_triplets(2 * n, n, &triplets);

    Ok(ElasticitySystem {
        n_nodes: n,
        free_dofs,
        stiffness,
        full_stiffness: full,
        load_base: traction_load(grid, traction_g),
        eigen_offset,
        eigenstrain_coupling,
        body_force_hook: None,
        law: *law,
        tol: DEFAULT_CG_TOL,
    })
}

impl ElasticitySystem {
    /// Full-length right-hand side for the given nodal φ.
    pub fn load(&self, phi: &[f64]) -> Vec<f64> {
        let coupled = self.eigenstrain_coupling.matvec(phi);
        let mut b: Vec<f64> = (0..2 * self.n_nodes).map(|i| self.load_base[i] + self.eigen_offset[i] + coupled[i]).collect();
        if let Some(f) = &self.body_force_hook {
            for (bi, fi) in b.iter_mut().zip(f) {
                *bi += fi;
            }
        }
        b
    }

    /// Sets the body force from nodal values of a vector function.
    pub fn set_body_force(&mut self, grid: &Grid, nodal: &[f64]) {
        self.body_force_hook = Some(vector_mass_apply(grid, nodal));
    }

    /// Residual of the weak equation against every basis function, full
    /// length; Dirichlet entries are reaction forces.
    pub fn residual(&self, phi: &[f64], u: &[f64]) -> Vec<f64> {
        let ku = self.full_stiffness.matvec(u);
        ku.iter().zip(self.load(phi)).map(|(a, b)| a - b).collect()
    }

    fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; 2 * self.n_nodes];
        for (&d, &v) in self.free_dofs.iter().zip(reduced) {
            u[d] = v;
        }
        u
    }

    pub fn solve_from(&self, phi: &[f64], guess: Option<&[f64]>) -> Result<(Vec<f64>, SolveReport), ElasticityError> {
        if phi.len() != self.n_nodes {
            return Err(ElasticityError::WrongLength { expected: self.n_nodes, got: phi.len() });
        }
        let full_b = self.load(phi);
        let b: Vec<f64> = self.free_dofs.iter().map(|&d| full_b[d]).collect();
        let x0 = match guess {
            Some(g) => self.free_dofs.iter().map(|&d| g[d]).collect(),
            None => vec![0.0; b.len()],
        };
        let (x, report) = cg_solve_from(&self.stiffness, &b, x0, self.tol, default_max_iter(b.len()), Preconditioner::Jacobi)
            .map_err(|e| match e {
                LinalgError::NotSpd => ElasticityError::KornViolation,
                other => ElasticityError::Linalg(other),
            })?;
        if !report.converged {
            return Err(ElasticityError::NotConverged(report));
        }
        Ok((self.expand(&x), report))
    }
}

pub fn solve_displacement(sys: &ElasticitySystem, phi: &[f64]) -> Result<(Vec<f64>, SolveReport), ElasticityError> {
    sys.solve_from(phi, None)
}

/// Symmetric strain at the points of `quad`, cell-major.
pub fn strain_at(grid: &Grid, quad: &crate::grid::ElementQuadrature, u: &[f64]) -> Vec<Tensor2> {
    assert_eq!(u.len(), 2 * grid.n_nodes());
    let mut out = Vec::with_capacity(grid.n_cells() * quad.len());
    for cell in 0..grid.n_cells() {
        let nodes = grid.cell_nodes(cell);
        for q in 0..quad.len() {
            let g = grid.physical_gradients(&quad.shape_gradients[q]);
            let mut du = [[0.0; 2]; 2];
            for a in 0..4 {
                for c in 0..2 {
                    for k in 0..2 {
                        du[c][k] += u[2 * nodes[a] + c] * g[a][k];
                    }
                }
            }
            let off = 0.5 * (du[0][1] + du[1][0]);
            out.push(Tensor2::sym(du[0][0], du[1][1], off));
        }
    }
    out
}

/// Strain at the 2×2 Gauss points.
pub fn strain_field(grid: &Grid, u: &[f64]) -> Vec<Tensor2> {
    strain_at(grid, &grid.quad, u)
}

/// `∫ W(φ_h, ℰ(u))`, exact for Q1 data under 2×2 Gauss.
pub fn elastic_energy(grid: &Grid, law: &ElasticLaw, phi: &[f64], u: &[f64]) -> f64 {
    let quad = &grid.quad;
    let strain = strain_at(grid, quad, u);
    let phi_q = assembly::interpolate_at(grid, quad, phi);
    let w: Vec<f64> = phi_q.iter().zip(&strain).map(|(p, e)| law.energy_unchecked(*p, e)).collect();
    assembly::integrate_points(grid, quad, &w)
}

/// Discrete potential energy `∫W − ∫_{Γ_N} g·u − ∫ f·u`.
pub fn potential_energy(grid: &Grid, sys: &ElasticitySystem, phi: &[f64], u: &[f64]) -> f64 {
    let mut e = elastic_energy(grid, &sys.law, phi, u);
    let work: f64 = sys.load_base.iter().zip(u).map(|(a, b)| a * b).sum();
    e -= work;
    if let Some(f) = &sys.body_force_hook {
        e -= f.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
    }
    e
}

/// Vector H¹ norm squared `Σ_c u_cᵀ(K + M)u_c` given the scalar operators.
pub fn vector_h1_sq(k: &CsrMatrix, m: &CsrMatrix, u: &[f64]) -> f64 {
    let n = k.n_rows();
    (0..2)
        .map(|c| {
            let comp: Vec<f64> = (0..n).map(|i| u[2 * i + c]).collect();
            k.quad_form(&comp) + m.quad_form(&comp)
        })
        .sum()
}
