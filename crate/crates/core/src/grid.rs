//! Structured rectangular Q1 mesh.
//!
//! Nodes are numbered `i + j * (nx + 1)` with `x` varying fastest. Cells are
//! numbered `i + j * nx`; the four local nodes of a cell run counter-clockwise
//! from the lower-left corner. Boundary faces are grouped per rectangle edge
//! and every face carries exactly one tag.

use std::fmt;

use thiserror::Error;

use crate::linalg::CsrMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("Γ_D must have positive measure")]
    EmptyDirichlet,
    #[error("invalid grid size: {0}")]
    InvalidSize(String),
    #[error("unknown edge selector '{0}'")]
    UnknownEdge(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    pub fn index(self) -> usize {
        match self {
            Edge::Left => 0,
            Edge::Right => 1,
            Edge::Bottom => 2,
            Edge::Top => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Edge::Left => "left",
            Edge::Right => "right",
            Edge::Bottom => "bottom",
            Edge::Top => "top",
        }
    }
}

/// A union of rectangle edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct EdgeSet([bool; 4]);

impl EdgeSet {
    pub fn empty() -> Self {
        EdgeSet([false; 4])
    }

    pub fn all() -> Self {
        EdgeSet([true; 4])
    }

    pub fn of(edges: &[Edge]) -> Self {
        let mut set = EdgeSet::empty();
        for &e in edges {
            set.0[e.index()] = true;
        }
        set
    }

    pub fn contains(&self, edge: Edge) -> bool {
        self.0[edge.index()]
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        EdgeSet([!self.0[0], !self.0[1], !self.0[2], !self.0[3]])
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        Edge::ALL.into_iter().filter(move |e| self.contains(*e))
    }

    /// Parses a comma-separated list such as `left,right`. `none` and the
    /// empty string give the empty set; `all` gives every edge.
    pub fn parse(text: &str) -> Result<Self, GridError> {
        let text = text.trim();
        if text.is_empty() || text == "none" {
            return Ok(EdgeSet::empty());
        }
        if text == "all" {
            return Ok(EdgeSet::all());
        }
        let mut set = EdgeSet::empty();
        for part in text.split(',') {
            let edge = match part.trim() {
                "left" => Edge::Left,
                "right" => Edge::Right,
                "bottom" => Edge::Bottom,
                "top" => Edge::Top,
                other => return Err(GridError::UnknownEdge(other.to_string())),
            };
            set.0[edge.index()] = true;
        }
        Ok(set)
    }
}

impl fmt::Display for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "none");
        }
        let names: Vec<&str> = self.iter().map(Edge::name).collect();
        write!(f, "{}", names.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySubset {
    /// The whole boundary Γ (the nutrient Robin condition).
    AllGamma,
    /// The traction part Γ_N.
    GammaN,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFace {
    pub edge: Edge,
    pub nodes: [usize; 2],
    pub length: f64,
    pub tag: BoundaryTag,
}

/// 1-D Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (3.0f64 / 5.0).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let s = (6.0f64 / 5.0).sqrt();
            let a = ((3.0 - 2.0 * s) / 7.0).sqrt();
            let b = ((3.0 + 2.0 * s) / 7.0).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        _ => panic!("Gauss-Legendre rule with {n} points not tabulated"),
    }
}

/// Reference coordinates of the four local nodes.
pub const LOCAL_NODES: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

pub fn shape_values(xi: f64, eta: f64) -> [f64; 4] {
    let mut n = [0.0; 4];
    for (a, p) in LOCAL_NODES.iter().enumerate() {
        n[a] = 0.25 * (1.0 + p[0] * xi) * (1.0 + p[1] * eta);
    }
    n
}

/// Gradients with respect to the reference coordinates.
pub fn shape_gradients(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    let mut g = [[0.0; 2]; 4];
    for (a, p) in LOCAL_NODES.iter().enumerate() {
        g[a][0] = 0.25 * p[0] * (1.0 + p[1] * eta);
        g[a][1] = 0.25 * p[1] * (1.0 + p[0] * xi);
    }
    g
}

/// Tensor-product Gauss rule on the reference cell [-1, 1]² with the Q1
/// basis tabulated at its points.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementQuadrature {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub shape_values: Vec<[f64; 4]>,
    pub shape_gradients: Vec<[[f64; 2]; 4]>,
}

impl ElementQuadrature {
    pub fn gauss(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push([x[i], x[j]]);
                weights.push(w[i] * w[j]);
            }
        }
        let shape_values = points.iter().map(|p| shape_values(p[0], p[1])).collect();
        let shape_gradients = points.iter().map(|p| shape_gradients(p[0], p[1])).collect();
        ElementQuadrature { points, weights, shape_values, shape_gradients }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// CSR structure of the scalar Q1 operator plus, for every cell, the slot in
/// `values` that each local (row, col) pair scatters into.
#[derive(Debug, Clone)]
pub struct ScalarPattern {
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub cell_slots: Vec<[usize; 16]>,
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub hx: f64,
    pub hy: f64,
    pub node_coords: Vec<[f64; 2]>,
    pub faces: Vec<BoundaryFace>,
    pub dirichlet_edges: EdgeSet,
    /// 2×2 Gauss rule used by every bilinear-form assembly.
    pub quad: ElementQuadrature,
    /// 3×3 Gauss rule for the quartic potential terms.
    pub quad_fine: ElementQuadrature,
    pub pattern: ScalarPattern,
}

pub fn build_grid(
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    dirichlet: EdgeSet,
) -> Result<Grid, GridError> {
    Grid::new(nx, ny, lx, ly, dirichlet)
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, dirichlet: EdgeSet) -> Result<Self, GridError> {
        if nx < 2 || ny < 2 {
            return Err(GridError::InvalidSize(format!("need nx, ny >= 2, got {nx}x{ny}")));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(GridError::InvalidSize(format!("edge lengths must be positive, got {lx}x{ly}")));
        }
        if dirichlet.is_empty() {
            return Err(GridError::EmptyDirichlet);
        }
        let hx = lx / nx as f64;
        let hy = ly / ny as f64;
        if ((hx - hy) / hx).abs() > 1e-12 {
            log::warn!("non-square cells ({hx} x {hy}): the nutrient comparison principle is not guaranteed");
        }

        let mut node_coords = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                node_coords.push([i as f64 * hx, j as f64 * hy]);
            }
        }

        let node = |i: usize, j: usize| i + j * (nx + 1);
        let tag = |e: Edge| {
            if dirichlet.contains(e) {
                BoundaryTag::Dirichlet
            } else {
                BoundaryTag::Neumann
            }
        };
        let mut faces = Vec::with_capacity(2 * (nx + ny));
        for i in 0..nx {
            faces.push(BoundaryFace { edge: Edge::Bottom, nodes: [node(i, 0), node(i + 1, 0)], length: hx, tag: tag(Edge::Bottom) });
        }
        for j in 0..ny {
            faces.push(BoundaryFace { edge: Edge::Right, nodes: [node(nx, j), node(nx, j + 1)], length: hy, tag: tag(Edge::Right) });
        }
        for i in 0..nx {
            faces.push(BoundaryFace { edge: Edge::Top, nodes: [node(i, ny), node(i + 1, ny)], length: hx, tag: tag(Edge::Top) });
        }
        for j in 0..ny {
            faces.push(BoundaryFace { edge: Edge::Left, nodes: [node(0, j), node(0, j + 1)], length: hy, tag: tag(Edge::Left) });
        }

        let pattern = build_pattern(nx, ny);
        Ok(Grid {
            nx,
            ny,
            lx,
            ly,
            hx,
            hy,
            node_coords,
            faces,
            dirichlet_edges: dirichlet,
            quad: ElementQuadrature::gauss(2),
            quad_fine: ElementQuadrature::gauss(3),
            pattern,
        })
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i + j * (self.nx + 1)
    }

    pub fn cell_nodes(&self, cell: usize) -> [usize; 4] {
        cell_nodes(self.nx, cell)
    }

    /// Lower-left corner of a cell.
    pub fn cell_origin(&self, cell: usize) -> [f64; 2] {
        let (i, j) = (cell % self.nx, cell / self.nx);
        [i as f64 * self.hx, j as f64 * self.hy]
    }

    /// Physical coordinates of a reference point inside `cell`.
    pub fn map_point(&self, cell: usize, xi: [f64; 2]) -> [f64; 2] {
        let o = self.cell_origin(cell);
        [o[0] + 0.5 * (xi[0] + 1.0) * self.hx, o[1] + 0.5 * (xi[1] + 1.0) * self.hy]
    }

    /// Jacobian determinant of the reference-to-cell map.
    pub fn det_j(&self) -> f64 {
        0.25 * self.hx * self.hy
    }

    /// Converts reference gradients into physical gradients.
    pub fn physical_gradients(&self, g: &[[f64; 2]; 4]) -> [[f64; 2]; 4] {
        let sx = 2.0 / self.hx;
        let sy = 2.0 / self.hy;
        let mut out = [[0.0; 2]; 4];
        for a in 0..4 {
            out[a] = [g[a][0] * sx, g[a][1] * sy];
        }
        out
    }

    pub fn is_square_cells(&self) -> bool {
        ((self.hx - self.hy) / self.hx).abs() <= 1e-12
    }

    pub fn n_dirichlet_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.tag == BoundaryTag::Dirichlet).count()
    }

    pub fn n_neumann_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.tag == BoundaryTag::Neumann).count()
    }

    /// Per-node flag: does the node lie on a Dirichlet face.
    pub fn dirichlet_nodes(&self) -> Vec<bool> {
        let mut on = vec![false; self.n_nodes()];
        for f in self.faces.iter().filter(|f| f.tag == BoundaryTag::Dirichlet) {
            on[f.nodes[0]] = true;
            on[f.nodes[1]] = true;
        }
        on
    }

    /// Sorted displacement DOF indices (`2 * node + component`) on Γ_D.
    pub fn dirichlet_dofs(&self) -> Vec<usize> {
        self.dirichlet_nodes()
            .iter()
            .enumerate()
            .filter(|(_, &on)| on)
            .flat_map(|(n, _)| [2 * n, 2 * n + 1])
            .collect()
    }

    pub fn faces_in(&self, subset: BoundarySubset) -> impl Iterator<Item = &BoundaryFace> {
        self.faces.iter().filter(move |f| match subset {
            BoundarySubset::AllGamma => true,
            BoundarySubset::GammaN => f.tag == BoundaryTag::Neumann,
        })
    }

    /// Consistent boundary mass matrix on the requested part of Γ (two-point
    /// Gauss per face) and the lumped per-node face-length weights.
    pub fn boundary_mass_terms(&self, subset: BoundarySubset) -> (CsrMatrix, Vec<f64>) {
        let n = self.n_nodes();
        let (xg, wg) = gauss_legendre(2);
        let mut triplets = Vec::new();
        let mut weights = vec![0.0; n];
        for face in self.faces_in(subset) {
            let half = 0.5 * face.length;
            let mut local = [[0.0; 2]; 2];
            for (x, w) in xg.iter().zip(&wg) {
                let phi = [0.5 * (1.0 - x), 0.5 * (1.0 + x)];
                for a in 0..2 {
                    for b in 0..2 {
                        local[a][b] += w * half * phi[a] * phi[b];
                    }
                }
            }
            for a in 0..2 {
                weights[face.nodes[a]] += half;
                for b in 0..2 {
                    triplets.push((face.nodes[a], face.nodes[b], local[a][b]));
                }
            }
        }
        (CsrMatrix::from_triplets(n, n, &triplets), weights)
    }

    /// Total length of the faces in `subset`.
    pub fn boundary_measure(&self, subset: BoundarySubset) -> f64 {
        self.faces_in(subset).map(|f| f.length).sum()
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }
}

fn cell_nodes(nx: usize, cell: usize) -> [usize; 4] {
    let (i, j) = (cell % nx, cell / nx);
    let n0 = i + j * (nx + 1);
    let n3 = i + (j + 1) * (nx + 1);
    [n0, n0 + 1, n3 + 1, n3]
}

fn build_pattern(nx: usize, ny: usize) -> ScalarPattern {
    let nnx = nx + 1;
    let n = nnx * (ny + 1);
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(9 * n);
    row_offsets.push(0);
    for node in 0..n {
        let (i, j) = ((node % nnx) as isize, (node / nnx) as isize);
        for dj in -1..=1 {
            for di in -1..=1 {
                let (ii, jj) = (i + di, j + dj);
                if ii >= 0 && jj >= 0 && ii <= nx as isize && jj <= ny as isize {
                    col_indices.push(ii as usize + jj as usize * nnx);
                }
            }
        }
        row_offsets.push(col_indices.len());
    }
    let mut cell_slots = Vec::with_capacity(nx * ny);
    for cell in 0..nx * ny {
        let nodes = cell_nodes(nx, cell);
        let mut slots = [0usize; 16];
        for a in 0..4 {
            let row = nodes[a];
            let cols = &col_indices[row_offsets[row]..row_offsets[row + 1]];
            for b in 0..4 {
                let pos = cols.binary_search(&nodes[b]).expect("cell neighbour missing from pattern");
                slots[4 * a + b] = row_offsets[row] + pos;
            }
        }
        cell_slots.push(slots);
    }
    ScalarPattern { row_offsets, col_indices, cell_slots }
}
