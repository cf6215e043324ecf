//! Assembly of every integral form in the discrete scheme: mass matrices,
//! the magnetic form D(A,v) = γ(∇·A,∇·v) + (∇×A,∇×v), the covariant form
//! B(A;ψ,φ) = ((i∇+A)ψ, (i∇+A)φ), the probability current load, the
//! density-weighted vector mass, and right-hand-side loads.
//!
//! Matrices are assembled on the unconstrained spaces; boundary conditions
//! are imposed afterwards with `CsrMatrix::apply_constraints`. Quadrature
//! degrees: 2r for constant-coefficient forms, min(4r, 6) for forms whose
//! coefficients are themselves discrete fields.

use crate::elements::{quadrature_for, QuadratureRule};
use crate::linalg::{CsrMatrix, SparsityPattern};
use crate::space::{map_gradient, ScalarField, ScalarSpace, VectorField, VectorSpace};
use num_complex::Complex64;
use std::sync::Arc;

/// Reference basis values and gradients tabulated at a rule's points.
struct BasisTable {
    n_qp: usize,
    n_nodes: usize,
    /// vals[q * n_nodes + a]
    vals: Vec<f64>,
    /// ref_grads[q * n_nodes + a]
    ref_grads: Vec<[f64; 3]>,
}

impl BasisTable {
    fn new(element: &crate::elements::ReferenceElement, rule: &QuadratureRule) -> Self {
        let n_nodes = element.n_nodes();
        let n_qp = rule.points.len();
        let mut vals = Vec::with_capacity(n_qp * n_nodes);
        let mut ref_grads = Vec::with_capacity(n_qp * n_nodes);
        for &p in &rule.points {
            vals.extend(element.eval_basis(p));
            ref_grads.extend(element.eval_gradients(p));
        }
        BasisTable {
            n_qp,
            n_nodes,
            vals,
            ref_grads,
        }
    }
}

/// Shared context for all assembly calls: spaces, penalty factor γ, constant
/// potential V₀, quadrature rules and cached sparsity patterns.
pub struct FormContext {
    pub scalar: Arc<ScalarSpace>,
    pub vector: Arc<VectorSpace>,
    pub gamma: f64,
    pub v0: f64,
    rule_low: QuadratureRule,
    rule_high: QuadratureRule,
    tab_low: BasisTable,
    tab_high: BasisTable,
    pub scalar_pattern: Arc<SparsityPattern>,
    /// Vector pattern with full 3×3 component blocks (curl/div coupling).
    pub vector_full_pattern: Arc<SparsityPattern>,
    /// Vector pattern with component-diagonal blocks (mass-type forms).
    pub vector_slim_pattern: Arc<SparsityPattern>,
}

impl FormContext {
    pub fn new(scalar: Arc<ScalarSpace>, vector: Arc<VectorSpace>, gamma: f64, v0: f64) -> Self {
        assert!(Arc::ptr_eq(&scalar.mesh, &vector.mesh), "spaces must share a mesh");
        assert_eq!(scalar.degree, vector.degree);
        assert!(gamma > 0.0, "penalty factor must be positive");
        let r = scalar.degree;
        let rule_low = quadrature_for(2 * r).expect("low-order rule");
        let rule_high = quadrature_for((4 * r).min(6)).expect("high-order rule");
        let tab_low = BasisTable::new(&scalar.element, &rule_low);
        let tab_high = BasisTable::new(&scalar.element, &rule_high);

        let scalar_pattern = node_adjacency_pattern(&scalar);
        let vector_full_pattern = expand_pattern(&scalar_pattern, true);
        let vector_slim_pattern = expand_pattern(&scalar_pattern, false);

        FormContext {
            scalar,
            vector,
            gamma,
            v0,
            rule_low,
            rule_high,
            tab_low,
            tab_high,
            scalar_pattern,
            vector_full_pattern,
            vector_slim_pattern,
        }
    }

    fn mesh(&self) -> &crate::mesh::Mesh {
        &self.scalar.mesh
    }
}

fn node_adjacency_pattern(space: &ScalarSpace) -> Arc<SparsityPattern> {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); space.n_dofs()];
    for conn in &space.connectivity {
        for &a in conn {
            for &b in conn {
                adj[a].push(b as u32);
            }
        }
    }
    SparsityPattern::from_adjacency(adj)
}

/// Expand a node pattern to vector dofs (3·node + comp); `full` couples all
/// nine component pairs, otherwise only matching components.
fn expand_pattern(node_pattern: &SparsityPattern, full: bool) -> Arc<SparsityPattern> {
    let n = node_pattern.n;
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); 3 * n];
    for row in 0..n {
        let cols = &node_pattern.col_idx[node_pattern.row_ptr[row]..node_pattern.row_ptr[row + 1]];
        for c in 0..3usize {
            let out = &mut adj[3 * row + c];
            for &col in cols {
                if full {
                    for d in 0..3u32 {
                        out.push(3 * col + d);
                    }
                } else {
                    out.push(3 * col + c as u32);
                }
            }
        }
    }
    SparsityPattern::from_adjacency(adj)
}

/// Scratch holding physical gradients per (qp, node) for one cell.
struct CellScratch {
    grads: Vec<[f64; 3]>,
}

impl CellScratch {
    fn new(tab: &BasisTable) -> Self {
        CellScratch {
            grads: vec![[0.0; 3]; tab.n_qp * tab.n_nodes],
        }
    }

    fn load(&mut self, tab: &BasisTable, inv_jac_t: &[[f64; 3]; 3]) {
        for (dst, src) in self.grads.iter_mut().zip(&tab.ref_grads) {
            *dst = map_gradient(inv_jac_t, *src);
        }
    }
}

// ---------------------------------------------------------------------------
// scalar-space matrices
// ---------------------------------------------------------------------------

/// L² mass matrix on the scalar space.
pub fn scalar_mass(ctx: &FormContext) -> CsrMatrix<f64> {
    let tab = &ctx.tab_low;
    let mut m = CsrMatrix::zeros(&ctx.scalar_pattern);
    let mesh = ctx.mesh();
    for (cell, conn) in ctx.scalar.connectivity.iter().enumerate() {
        let det = mesh.geometry[cell].det;
        for q in 0..tab.n_qp {
            let w = ctx.rule_low.weights[q] * det;
            let vals = &tab.vals[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            for (a, &na) in conn.iter().enumerate() {
                for (b, &nb) in conn.iter().enumerate() {
                    m.add_at(na, nb, w * vals[a] * vals[b]);
                }
            }
        }
    }
    m
}

/// Stiffness matrix (∇ψ, ∇φ) on the scalar space.
pub fn scalar_stiffness(ctx: &FormContext) -> CsrMatrix<f64> {
    let tab = &ctx.tab_low;
    let mut m = CsrMatrix::zeros(&ctx.scalar_pattern);
    let mesh = ctx.mesh();
    let mut scratch = CellScratch::new(tab);
    for (cell, conn) in ctx.scalar.connectivity.iter().enumerate() {
        let geo = &mesh.geometry[cell];
        scratch.load(tab, &geo.inv_jac_t);
        for q in 0..tab.n_qp {
            let w = ctx.rule_low.weights[q] * geo.det;
            let g = &scratch.grads[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            for (a, &na) in conn.iter().enumerate() {
                for (b, &nb) in conn.iter().enumerate() {
                    let dot = g[a][0] * g[b][0] + g[a][1] * g[b][1] + g[a][2] * g[b][2];
                    m.add_at(na, nb, w * dot);
                }
            }
        }
    }
    m
}

/// Scalar mass weighted by |A(x)|² for a discrete vector field A.
pub fn weighted_scalar_mass(ctx: &FormContext, a_field: &VectorField) -> CsrMatrix<f64> {
    let tab = &ctx.tab_high;
    let mut m = CsrMatrix::zeros(&ctx.scalar_pattern);
    let mesh = ctx.mesh();
    for (cell, conn) in ctx.scalar.connectivity.iter().enumerate() {
        let det = mesh.geometry[cell].det;
        let vconn = &ctx.vector.connectivity[cell];
        for q in 0..tab.n_qp {
            let vals = &tab.vals[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let av = eval_vector_local(a_field, vconn, vals);
            let weight = av[0] * av[0] + av[1] * av[1] + av[2] * av[2];
            let w = ctx.rule_high.weights[q] * det * weight;
            for (a, &na) in conn.iter().enumerate() {
                for (b, &nb) in conn.iter().enumerate() {
                    m.add_at(na, nb, w * vals[a] * vals[b]);
                }
            }
        }
    }
    m
}

/// The antisymmetric covariant coupling C_ij = ∫ A·(∇ψ_j φ_i − ψ_j ∇φ_i);
/// the covariant form decomposes as B(A) = stiffness + |A|²-mass + i·C.
pub fn covariant_coupling(ctx: &FormContext, a_field: &VectorField) -> CsrMatrix<f64> {
    let tab = &ctx.tab_high;
    let mut m = CsrMatrix::zeros(&ctx.scalar_pattern);
    let mesh = ctx.mesh();
    let mut scratch = CellScratch::new(tab);
    for (cell, conn) in ctx.scalar.connectivity.iter().enumerate() {
        let geo = &mesh.geometry[cell];
        scratch.load(tab, &geo.inv_jac_t);
        let vconn = &ctx.vector.connectivity[cell];
        for q in 0..tab.n_qp {
            let vals = &tab.vals[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let g = &scratch.grads[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let av = eval_vector_local(a_field, vconn, vals);
            let w = ctx.rule_high.weights[q] * geo.det;
            for (a, &na) in conn.iter().enumerate() {
                for (b, &nb) in conn.iter().enumerate() {
                    // row a = test, col b = trial
                    let dot = av[0] * (g[b][0] * vals[a] - vals[b] * g[a][0])
                        + av[1] * (g[b][1] * vals[a] - vals[b] * g[a][1])
                        + av[2] * (g[b][2] * vals[a] - vals[b] * g[a][2]);
                    m.add_at(na, nb, w * dot);
                }
            }
        }
    }
    m
}

/// The covariant (minimal-coupling) form B(A;·,·) as a complex matrix,
/// evaluated from its definition ((i∇+A)ψ, (i∇+A)φ) at quadrature points.
/// The result is Hermitian: (Bψ,ψ) is real for every discrete ψ.
pub fn covariant_form(ctx: &FormContext, a_field: &VectorField) -> CsrMatrix<Complex64> {
    let tab = &ctx.tab_high;
    let mut m = CsrMatrix::zeros(&ctx.scalar_pattern);
    let mesh = ctx.mesh();
    let mut scratch = CellScratch::new(tab);
    let i_unit = Complex64::new(0.0, 1.0);
    for (cell, conn) in ctx.scalar.connectivity.iter().enumerate() {
        let geo = &mesh.geometry[cell];
        scratch.load(tab, &geo.inv_jac_t);
        let vconn = &ctx.vector.connectivity[cell];
        for q in 0..tab.n_qp {
            let vals = &tab.vals[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let g = &scratch.grads[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let av = eval_vector_local(a_field, vconn, vals);
            let w = ctx.rule_high.weights[q] * geo.det;
            for (a, &na) in conn.iter().enumerate() {
                for (b, &nb) in conn.iter().enumerate() {
                    // ((i∇+A)N_b) · conj((i∇+A)N_a), componentwise
                    let mut acc = Complex64::new(0.0, 0.0);
                    for c in 0..3 {
                        let trial = i_unit * g[b][c] + av[c] * vals[b];
                        let test = -i_unit * g[a][c] + av[c] * vals[a];
                        acc += trial * test;
                    }
                    m.add_at(na, nb, acc * w);
                }
            }
        }
    }
    m
}

// ---------------------------------------------------------------------------
// vector-space matrices
// ---------------------------------------------------------------------------

/// L² mass matrix on the vector space (component diagonal).
pub fn vector_mass(ctx: &FormContext) -> CsrMatrix<f64> {
    let tab = &ctx.tab_low;
    let mut m = CsrMatrix::zeros(&ctx.vector_slim_pattern);
    let mesh = ctx.mesh();
    for (cell, conn) in ctx.vector.connectivity.iter().enumerate() {
        let det = mesh.geometry[cell].det;
        for q in 0..tab.n_qp {
            let w = ctx.rule_low.weights[q] * det;
            let vals = &tab.vals[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            for (a, &na) in conn.iter().enumerate() {
                for (b, &nb) in conn.iter().enumerate() {
                    let v = w * vals[a] * vals[b];
                    for c in 0..3 {
                        m.add_at(3 * na + c, 3 * nb + c, v);
                    }
                }
            }
        }
    }
    m
}

/// Magnetic form D(A,v) = γ(∇·A,∇·v) + (∇×A,∇×v) on the vector space.
pub fn magnetic_form(ctx: &FormContext) -> CsrMatrix<f64> {
    let tab = &ctx.tab_low;
    let mut m = CsrMatrix::zeros(&ctx.vector_full_pattern);
    let mesh = ctx.mesh();
    let mut scratch = CellScratch::new(tab);
    let gamma = ctx.gamma;
    for (cell, conn) in ctx.vector.connectivity.iter().enumerate() {
        let geo = &mesh.geometry[cell];
        scratch.load(tab, &geo.inv_jac_t);
        for q in 0..tab.n_qp {
            let w = ctx.rule_low.weights[q] * geo.det;
            let g = &scratch.grads[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            for (a, &na) in conn.iter().enumerate() {
                for (b, &nb) in conn.iter().enumerate() {
                    let gdot = g[a][0] * g[b][0] + g[a][1] * g[b][1] + g[a][2] * g[b][2];
                    for c in 0..3 {
                        for d in 0..3 {
                            // div(N_b e_d)·div(N_a e_c) = g_b[d] g_a[c]
                            // curl(N_b e_d)·curl(N_a e_c) = (g_a·g_b)δ_cd − g_b[c] g_a[d]
                            let div_part = g[b][d] * g[a][c];
                            let curl_part =
                                if c == d { gdot } else { 0.0 } - g[b][c] * g[a][d];
                            m.add_at(3 * na + c, 3 * nb + d, w * (gamma * div_part + curl_part));
                        }
                    }
                }
            }
        }
    }
    m
}

/// Vector mass weighted by the density |Ψ(x)|² of a discrete wave function.
pub fn density_mass(ctx: &FormContext, psi: &ScalarField) -> CsrMatrix<f64> {
    let tab = &ctx.tab_high;
    let mut m = CsrMatrix::zeros(&ctx.vector_slim_pattern);
    let mesh = ctx.mesh();
    for (cell, conn) in ctx.vector.connectivity.iter().enumerate() {
        let det = mesh.geometry[cell].det;
        let sconn = &ctx.scalar.connectivity[cell];
        for q in 0..tab.n_qp {
            let vals = &tab.vals[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let psi_q = eval_scalar_local(psi, sconn, vals);
            let w = ctx.rule_high.weights[q] * det * psi_q.norm_sqr();
            for (a, &na) in conn.iter().enumerate() {
                for (b, &nb) in conn.iter().enumerate() {
                    let v = w * vals[a] * vals[b];
                    for c in 0..3 {
                        m.add_at(3 * na + c, 3 * nb + c, v);
                    }
                }
            }
        }
    }
    m
}

// ---------------------------------------------------------------------------
// load vectors
// ---------------------------------------------------------------------------

/// Probability current density f(Ψ,Ψ) = (i/2)(Ψ*∇Ψ − Ψ∇Ψ*) evaluated from a
/// discrete field's value and gradient; real valued pointwise.
pub fn current_density(value: Complex64, grad: &[Complex64; 3]) -> [f64; 3] {
    // (i/2)(Ψ*∇Ψ − Ψ∇Ψ*) = −Im(Ψ* ∇Ψ)
    [
        -(value.conj() * grad[0]).im,
        -(value.conj() * grad[1]).im,
        -(value.conj() * grad[2]).im,
    ]
}

/// Load vector (f(Ψ,Ψ), v) on the vector space; exactly real by construction.
pub fn current_load(ctx: &FormContext, psi: &ScalarField) -> Vec<f64> {
    let tab = &ctx.tab_high;
    let mesh = ctx.mesh();
    let mut out = vec![0.0; ctx.vector.n_dofs()];
    let mut scratch = CellScratch::new(tab);
    for (cell, sconn) in ctx.scalar.connectivity.iter().enumerate() {
        let geo = &mesh.geometry[cell];
        scratch.load(tab, &geo.inv_jac_t);
        let vconn = &ctx.vector.connectivity[cell];
        for q in 0..tab.n_qp {
            let vals = &tab.vals[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let g = &scratch.grads[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let psi_q = eval_scalar_local(psi, sconn, vals);
            let mut grad_q = [Complex64::new(0.0, 0.0); 3];
            for (a, &na) in sconn.iter().enumerate() {
                for c in 0..3 {
                    grad_q[c] += psi.coeffs[na] * g[a][c];
                }
            }
            let f = current_density(psi_q, &grad_q);
            let w = ctx.rule_high.weights[q] * geo.det;
            for (a, &na) in vconn.iter().enumerate() {
                for c in 0..3 {
                    out[3 * na + c] += w * f[c] * vals[a];
                }
            }
        }
    }
    out
}

/// Load vector (g, v) for a pointwise source on the vector space.
pub fn vector_load(ctx: &FormContext, g: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
    let tab = &ctx.tab_high;
    let mesh = ctx.mesh();
    let mut out = vec![0.0; ctx.vector.n_dofs()];
    for (cell, conn) in ctx.vector.connectivity.iter().enumerate() {
        let geo = &mesh.geometry[cell];
        for (q, &p) in ctx.rule_high.points.iter().enumerate() {
            let vals = &tab.vals[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let x = mesh.map_point(cell, p);
            let gv = g(x);
            let w = ctx.rule_high.weights[q] * geo.det;
            for (a, &na) in conn.iter().enumerate() {
                for c in 0..3 {
                    out[3 * na + c] += w * gv[c] * vals[a];
                }
            }
        }
    }
    out
}

/// Load vector (f, φ) for a pointwise complex source on the scalar space.
pub fn scalar_load(ctx: &FormContext, f: impl Fn([f64; 3]) -> Complex64) -> Vec<Complex64> {
    let tab = &ctx.tab_high;
    let mesh = ctx.mesh();
    let mut out = vec![Complex64::new(0.0, 0.0); ctx.scalar.n_dofs()];
    for (cell, conn) in ctx.scalar.connectivity.iter().enumerate() {
        let geo = &mesh.geometry[cell];
        for (q, &p) in ctx.rule_high.points.iter().enumerate() {
            let vals = &tab.vals[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let x = mesh.map_point(cell, p);
            let fv = f(x);
            let w = ctx.rule_high.weights[q] * geo.det;
            for (a, &na) in conn.iter().enumerate() {
                out[na] += fv * (w * vals[a]);
            }
        }
    }
    out
}

/// Weak charge-integral source: −γ(S − ∇·A₀, ∇·v), where S is a nodal scalar
/// field accumulating ∫₀ᵗ ρ dτ and ∇·A₀ is supplied pointwise. This is the
/// integrated-by-parts form of the gradient source γ∇(S − ∇·A₀); the
/// boundary term vanishes for data with ρ = 0 and ∇·A₀ = 0 on ∂Ω.
pub fn charge_source_load(
    ctx: &FormContext,
    s_nodal: &[f64],
    div_a0: impl Fn([f64; 3]) -> f64,
) -> Vec<f64> {
    assert_eq!(s_nodal.len(), ctx.scalar.n_dofs());
    let tab = &ctx.tab_high;
    let mesh = ctx.mesh();
    let mut out = vec![0.0; ctx.vector.n_dofs()];
    let mut scratch = CellScratch::new(tab);
    for (cell, sconn) in ctx.scalar.connectivity.iter().enumerate() {
        let geo = &mesh.geometry[cell];
        scratch.load(tab, &geo.inv_jac_t);
        let vconn = &ctx.vector.connectivity[cell];
        for (q, &p) in ctx.rule_high.points.iter().enumerate() {
            let vals = &tab.vals[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let g = &scratch.grads[q * tab.n_nodes..(q + 1) * tab.n_nodes];
            let mut s_q = 0.0;
            for (a, &na) in sconn.iter().enumerate() {
                s_q += s_nodal[na] * vals[a];
            }
            let x = mesh.map_point(cell, p);
            let w = -ctx.gamma * (s_q - div_a0(x)) * ctx.rule_high.weights[q] * geo.det;
            for (a, &na) in vconn.iter().enumerate() {
                for c in 0..3 {
                    // ∇·(N_a e_c) = ∂_c N_a
                    out[3 * na + c] += w * g[a][c];
                }
            }
        }
    }
    out
}

#[inline]
fn eval_scalar_local(psi: &ScalarField, conn: &[usize], vals: &[f64]) -> Complex64 {
    let mut v = Complex64::new(0.0, 0.0);
    for (a, &n) in conn.iter().enumerate() {
        v += psi.coeffs[n] * vals[a];
    }
    v
}

#[inline]
fn eval_vector_local(field: &VectorField, conn: &[usize], vals: &[f64]) -> [f64; 3] {
    let mut v = [0.0; 3];
    for (a, &n) in conn.iter().enumerate() {
        for c in 0..3 {
            v[c] += field.coeffs[3 * n + c] * vals[a];
        }
    }
    v
}
