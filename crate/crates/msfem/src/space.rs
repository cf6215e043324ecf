//! Global finite element spaces on the structured mesh.
//!
//! `ScalarSpace` hosts the complex wave function (Dirichlet boundary),
//! `VectorSpace` the real vector potential (vanishing tangential trace).
//! Degree-r Lagrange nodes live on the uniform (M·r+1)³ grid; a cell's dofs
//! are its 4 vertices (r = 1) plus its 6 edge midpoints (r = 2), in the
//! reference element's node order.

use crate::elements::{ReferenceElement, TET_EDGES};
use crate::mesh::{Mesh, NormalSet};
use num_complex::Complex64;
use std::sync::Arc;

/// Scalar Lagrange space with homogeneous Dirichlet boundary dofs flagged.
pub struct ScalarSpace {
    pub mesh: Arc<Mesh>,
    pub degree: usize,
    pub element: ReferenceElement,
    /// Physical coordinates of every dof node.
    pub node_coords: Vec<[f64; 3]>,
    /// Cell → node connectivity, `element.n_nodes()` entries per cell.
    pub connectivity: Vec<Vec<usize>>,
    /// True for dofs whose node lies on ∂Ω.
    pub dirichlet: Vec<bool>,
    /// Boundary classification of every node.
    pub node_normals: Vec<NormalSet>,
}

/// Vector Lagrange space; dof index = 3·node + component.
pub struct VectorSpace {
    pub mesh: Arc<Mesh>,
    pub degree: usize,
    pub element: ReferenceElement,
    pub node_coords: Vec<[f64; 3]>,
    pub connectivity: Vec<Vec<usize>>,
    /// True for (node, component) dofs zeroed by the tangential constraint.
    pub constrained: Vec<bool>,
    pub node_normals: Vec<NormalSet>,
}

/// Node grid and connectivity shared by both space kinds.
fn build_nodes(
    mesh: &Mesh,
    degree: usize,
) -> (Vec<[f64; 3]>, Vec<Vec<usize>>, Vec<NormalSet>) {
    let m = mesh.m;
    let n = m * degree + 1; // nodes per axis
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let spacing = 1.0 / ((n - 1) as f64);

    let mut coords = Vec::with_capacity(n * n * n);
    let mut normals = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                coords.push([i as f64 * spacing, j as f64 * spacing, k as f64 * spacing]);
                let mut set = NormalSet::EMPTY;
                for (axis, v) in [(0, i), (1, j), (2, k)] {
                    if v == 0 {
                        set = set.with(axis, -1);
                    }
                    if v == n - 1 {
                        set = set.with(axis, 1);
                    }
                }
                normals.push(set);
            }
        }
    }

    // mesh vertex -> node grid index (vertex grid scaled by degree)
    let nv = m + 1;
    let vert_grid = |v: usize| {
        let i = v / (nv * nv);
        let j = (v / nv) % nv;
        let k = v % nv;
        [i * degree, j * degree, k * degree]
    };

    let mut connectivity = Vec::with_capacity(mesh.n_cells());
    for tet in &mesh.cells {
        let g: Vec<[usize; 3]> = tet.iter().map(|&v| vert_grid(v)).collect();
        let mut conn = Vec::with_capacity(if degree == 1 { 4 } else { 10 });
        for gv in &g {
            conn.push(idx(gv[0], gv[1], gv[2]));
        }
        if degree == 2 {
            for [a, b] in TET_EDGES {
                let mid = [
                    (g[a][0] + g[b][0]) / 2,
                    (g[a][1] + g[b][1]) / 2,
                    (g[a][2] + g[b][2]) / 2,
                ];
                conn.push(idx(mid[0], mid[1], mid[2]));
            }
        }
        connectivity.push(conn);
    }

    (coords, connectivity, normals)
}

impl ScalarSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Arc<Self> {
        let (node_coords, connectivity, node_normals) = build_nodes(&mesh, degree);
        let dirichlet = node_normals.iter().map(|s| !s.is_empty()).collect();
        Arc::new(ScalarSpace {
            element: ReferenceElement::new(degree),
            mesh,
            degree,
            node_coords,
            connectivity,
            dirichlet,
            node_normals,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.node_coords.len()
    }
}

impl VectorSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Arc<Self> {
        let (node_coords, connectivity, node_normals) = build_nodes(&mesh, degree);
        let mut constrained = vec![false; 3 * node_coords.len()];
        for (node, set) in node_normals.iter().enumerate() {
            // A×n = 0 on a face with normal ±e_a zeroes the components ≠ a;
            // nodes on several faces accumulate the union (all three for
            // edge and corner nodes).
            let axes: Vec<usize> = set.axes().collect();
            if axes.is_empty() {
                continue;
            }
            for comp in 0..3 {
                let tangential_somewhere = axes.iter().any(|&a| a != comp);
                if tangential_somewhere {
                    constrained[3 * node + comp] = true;
                }
            }
        }
        Arc::new(VectorSpace {
            element: ReferenceElement::new(degree),
            mesh,
            degree,
            node_coords,
            connectivity,
            constrained,
            node_normals,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.node_coords.len()
    }
}

/// Complex scalar FE function (coefficients = nodal values).
#[derive(Clone)]
pub struct ScalarField {
    pub space: Arc<ScalarSpace>,
    pub coeffs: Vec<Complex64>,
}

/// Real vector FE function; coefficient layout matches the space (3·node+c).
#[derive(Clone)]
pub struct VectorField {
    pub space: Arc<VectorSpace>,
    pub coeffs: Vec<f64>,
}

/// Nodal interpolant clipped to the homogeneous Dirichlet space.
pub fn interpolate_scalar(
    space: &Arc<ScalarSpace>,
    f: impl Fn([f64; 3]) -> Complex64,
) -> ScalarField {
    let mut field = interpolate_scalar_free(space, f);
    for (i, &on_boundary) in space.dirichlet.iter().enumerate() {
        if on_boundary {
            field.coeffs[i] = Complex64::new(0.0, 0.0);
        }
    }
    field
}

/// Plain nodal interpolant without boundary treatment.
pub fn interpolate_scalar_free(
    space: &Arc<ScalarSpace>,
    f: impl Fn([f64; 3]) -> Complex64,
) -> ScalarField {
    let coeffs = space.node_coords.iter().map(|&x| f(x)).collect();
    ScalarField {
        space: space.clone(),
        coeffs,
    }
}

/// Nodal interpolant with the tangential boundary constraints applied.
pub fn interpolate_vector(
    space: &Arc<VectorSpace>,
    g: impl Fn([f64; 3]) -> [f64; 3],
) -> VectorField {
    let mut field = interpolate_vector_free(space, g);
    for (i, &c) in space.constrained.iter().enumerate() {
        if c {
            field.coeffs[i] = 0.0;
        }
    }
    field
}

/// Plain nodal vector interpolant without constraints.
pub fn interpolate_vector_free(
    space: &Arc<VectorSpace>,
    g: impl Fn([f64; 3]) -> [f64; 3],
) -> VectorField {
    let mut coeffs = vec![0.0; space.n_dofs()];
    for (node, &x) in space.node_coords.iter().enumerate() {
        let v = g(x);
        coeffs[3 * node] = v[0];
        coeffs[3 * node + 1] = v[1];
        coeffs[3 * node + 2] = v[2];
    }
    VectorField {
        space: space.clone(),
        coeffs,
    }
}

impl ScalarField {
    pub fn zero(space: &Arc<ScalarSpace>) -> Self {
        ScalarField {
            space: space.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); space.n_dofs()],
        }
    }

    /// Value at a reference point of a cell.
    pub fn eval(&self, cell: usize, r: [f64; 3]) -> Complex64 {
        let basis = self.space.element.eval_basis(r);
        let conn = &self.space.connectivity[cell];
        let mut v = Complex64::new(0.0, 0.0);
        for (a, &n) in conn.iter().enumerate() {
            v += self.coeffs[n] * basis[a];
        }
        v
    }

    /// Physical-space gradient at a reference point of a cell.
    pub fn eval_gradient(&self, cell: usize, r: [f64; 3]) -> [Complex64; 3] {
        let grads = self.space.element.eval_gradients(r);
        let geo = &self.space.mesh.geometry[cell];
        let conn = &self.space.connectivity[cell];
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (a, &n) in conn.iter().enumerate() {
            let g = map_gradient(&geo.inv_jac_t, grads[a]);
            for d in 0..3 {
                out[d] += self.coeffs[n] * g[d];
            }
        }
        out
    }

    /// Value at an arbitrary physical point.
    pub fn eval_at(&self, x: [f64; 3]) -> Complex64 {
        let (cell, r) = self.space.mesh.locate(x);
        self.eval(cell, r)
    }
}

impl VectorField {
    pub fn zero(space: &Arc<VectorSpace>) -> Self {
        VectorField {
            space: space.clone(),
            coeffs: vec![0.0; space.n_dofs()],
        }
    }

    pub fn eval(&self, cell: usize, r: [f64; 3]) -> [f64; 3] {
        let basis = self.space.element.eval_basis(r);
        let conn = &self.space.connectivity[cell];
        let mut v = [0.0; 3];
        for (a, &n) in conn.iter().enumerate() {
            for c in 0..3 {
                v[c] += self.coeffs[3 * n + c] * basis[a];
            }
        }
        v
    }

    /// Component-wise physical gradient: out[c][d] = ∂_d A_c.
    pub fn eval_jacobian(&self, cell: usize, r: [f64; 3]) -> [[f64; 3]; 3] {
        let grads = self.space.element.eval_gradients(r);
        let geo = &self.space.mesh.geometry[cell];
        let conn = &self.space.connectivity[cell];
        let mut out = [[0.0; 3]; 3];
        for (a, &n) in conn.iter().enumerate() {
            let g = map_gradient(&geo.inv_jac_t, grads[a]);
            for c in 0..3 {
                for d in 0..3 {
                    out[c][d] += self.coeffs[3 * n + c] * g[d];
                }
            }
        }
        out
    }

    pub fn eval_at(&self, x: [f64; 3]) -> [f64; 3] {
        let (cell, r) = self.space.mesh.locate(x);
        self.eval(cell, r)
    }

    /// Linear combination a·self + b·other (same space).
    pub fn combine(&self, a: f64, other: &VectorField, b: f64) -> VectorField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        VectorField {
            space: self.space.clone(),
            coeffs,
        }
    }
}

/// Push a reference gradient through the inverse transposed Jacobian.
pub fn map_gradient(inv_jac_t: &[[f64; 3]; 3], g: [f64; 3]) -> [f64; 3] {
    [
        inv_jac_t[0][0] * g[0] + inv_jac_t[0][1] * g[1] + inv_jac_t[0][2] * g[2],
        inv_jac_t[1][0] * g[0] + inv_jac_t[1][1] * g[1] + inv_jac_t[1][2] * g[2],
        inv_jac_t[2][0] * g[0] + inv_jac_t[2][1] * g[1] + inv_jac_t[2][2] * g[2],
    ]
}
