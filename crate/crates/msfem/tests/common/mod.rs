#![allow(dead_code)]

//! Brute-force dense integration oracle, written independently of the
//! library's assembly path: its own barycentric basis formulas, its own
//! per-cell geometry computed from raw vertex coordinates, dense matrices,
//! and constraint handling by explicit row/column surgery. Quadrature point
//! data is shared so that entries of non-polynomial integrands agree to
//! roundoff.

use msfem::elements::QuadratureRule;
use msfem::mesh::Mesh;
use msfem::space::{ScalarSpace, VectorSpace};
use num_complex::Complex64;

pub const Z: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Dense oracle basis: value of every Lagrange shape function at a
/// reference point, hand-written from the barycentric closed forms.
pub fn oracle_basis(degree: usize, p: [f64; 3]) -> Vec<f64> {
    let l = [1.0 - p[0] - p[1] - p[2], p[0], p[1], p[2]];
    match degree {
        1 => l.to_vec(),
        2 => {
            let mut v = Vec::with_capacity(10);
            for i in 0..4 {
                v.push(l[i] * (2.0 * l[i] - 1.0));
            }
            for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                v.push(4.0 * l[a] * l[b]);
            }
            v
        }
        _ => panic!("oracle supports degrees 1 and 2"),
    }
}

/// Reference gradients of the oracle basis.
pub fn oracle_basis_grad(degree: usize, p: [f64; 3]) -> Vec<[f64; 3]> {
    let l = [1.0 - p[0] - p[1] - p[2], p[0], p[1], p[2]];
    let dl = [
        [-1.0, -1.0, -1.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];
    match degree {
        1 => dl.to_vec(),
        2 => {
            let mut g = Vec::with_capacity(10);
            for i in 0..4 {
                let f = 4.0 * l[i] - 1.0;
                g.push([dl[i][0] * f, dl[i][1] * f, dl[i][2] * f]);
            }
            for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                g.push([
                    4.0 * (dl[a][0] * l[b] + dl[b][0] * l[a]),
                    4.0 * (dl[a][1] * l[b] + dl[b][1] * l[a]),
                    4.0 * (dl[a][2] * l[b] + dl[b][2] * l[a]),
                ]);
            }
            g
        }
        _ => panic!("oracle supports degrees 1 and 2"),
    }
}

/// Per-cell affine geometry computed from the four vertex coordinates.
pub struct OracleCell {
    pub origin: [f64; 3],
    pub jac: [[f64; 3]; 3],
    pub inv_jac_t: [[f64; 3]; 3],
    pub det: f64,
}

pub fn oracle_cell(mesh: &Mesh, cell: usize) -> OracleCell {
    let tet = &mesh.cells[cell];
    let p0 = mesh.vertices[tet[0]];
    let cols: Vec<[f64; 3]> = (1..4)
        .map(|k| {
            let p = mesh.vertices[tet[k]];
            [p[0] - p0[0], p[1] - p0[1], p[2] - p0[2]]
        })
        .collect();
    let jac = [
        [cols[0][0], cols[1][0], cols[2][0]],
        [cols[0][1], cols[1][1], cols[2][1]],
        [cols[0][2], cols[1][2], cols[2][2]],
    ];
    let det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
        - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
        + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
    let inv = [
        [
            (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1]) / det,
            (jac[0][2] * jac[2][1] - jac[0][1] * jac[2][2]) / det,
            (jac[0][1] * jac[1][2] - jac[0][2] * jac[1][1]) / det,
        ],
        [
            (jac[1][2] * jac[2][0] - jac[1][0] * jac[2][2]) / det,
            (jac[0][0] * jac[2][2] - jac[0][2] * jac[2][0]) / det,
            (jac[0][2] * jac[1][0] - jac[0][0] * jac[1][2]) / det,
        ],
        [
            (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]) / det,
            (jac[0][1] * jac[2][0] - jac[0][0] * jac[2][1]) / det,
            (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]) / det,
        ],
    ];
    let inv_jac_t = [
        [inv[0][0], inv[1][0], inv[2][0]],
        [inv[0][1], inv[1][1], inv[2][1]],
        [inv[0][2], inv[1][2], inv[2][2]],
    ];
    OracleCell {
        origin: p0,
        jac,
        inv_jac_t,
        det,
    }
}

impl OracleCell {
    pub fn map(&self, p: [f64; 3]) -> [f64; 3] {
        let mut x = self.origin;
        for r in 0..3 {
            x[r] += self.jac[r][0] * p[0] + self.jac[r][1] * p[1] + self.jac[r][2] * p[2];
        }
        x
    }

    pub fn push_grad(&self, g: [f64; 3]) -> [f64; 3] {
        let m = &self.inv_jac_t;
        [
            m[0][0] * g[0] + m[0][1] * g[1] + m[0][2] * g[2],
            m[1][0] * g[0] + m[1][1] * g[1] + m[1][2] * g[2],
            m[2][0] * g[0] + m[2][1] * g[1] + m[2][2] * g[2],
        ]
    }
}

/// Evaluation context at one quadrature point of one cell.
pub struct QpData {
    pub x: [f64; 3],
    /// quadrature weight × |det J|
    pub w: f64,
    pub vals: Vec<f64>,
    pub grads: Vec<[f64; 3]>,
}

pub fn qp_data(mesh: &Mesh, degree: usize, rule: &QuadratureRule, cell: usize) -> Vec<QpData> {
    let geo = oracle_cell(mesh, cell);
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(&p, &w)| QpData {
            x: geo.map(p),
            w: w * geo.det,
            vals: oracle_basis(degree, p),
            grads: oracle_basis_grad(degree, p)
                .into_iter()
                .map(|g| geo.push_grad(g))
                .collect(),
        })
        .collect()
}

pub struct DenseForms<'a> {
    pub mesh: &'a Mesh,
    pub scalar: &'a ScalarSpace,
    pub vector: &'a VectorSpace,
    pub gamma: f64,
    pub rule_low: QuadratureRule,
    pub rule_high: QuadratureRule,
}

impl<'a> DenseForms<'a> {
    pub fn new(scalar: &'a ScalarSpace, vector: &'a VectorSpace, gamma: f64) -> Self {
        let r = scalar.degree;
        DenseForms {
            mesh: &scalar.mesh,
            scalar,
            vector,
            gamma,
            rule_low: msfem::elements::quadrature_for(2 * r).unwrap(),
            rule_high: msfem::elements::quadrature_for((4 * r).min(6)).unwrap(),
        }
    }

    fn n_s(&self) -> usize {
        self.scalar.n_dofs()
    }

    fn n_v(&self) -> usize {
        self.vector.n_dofs()
    }

    /// Evaluate a complex coefficient field and its gradient at a qp.
    fn eval_scalar(
        &self,
        coeffs: &[Complex64],
        cell: usize,
        qp: &QpData,
    ) -> (Complex64, [Complex64; 3]) {
        let conn = &self.scalar.connectivity[cell];
        let mut v = Z;
        let mut g = [Z; 3];
        for (a, &n) in conn.iter().enumerate() {
            v += coeffs[n] * qp.vals[a];
            for d in 0..3 {
                g[d] += coeffs[n] * qp.grads[a][d];
            }
        }
        (v, g)
    }

    fn eval_vector(&self, coeffs: &[f64], cell: usize, qp: &QpData) -> [f64; 3] {
        let conn = &self.vector.connectivity[cell];
        let mut v = [0.0; 3];
        for (a, &n) in conn.iter().enumerate() {
            for c in 0..3 {
                v[c] += coeffs[3 * n + c] * qp.vals[a];
            }
        }
        v
    }

    pub fn scalar_mass(&self) -> Vec<Vec<f64>> {
        let n = self.n_s();
        let mut m = vec![vec![0.0; n]; n];
        for cell in 0..self.mesh.n_cells() {
            let conn = &self.scalar.connectivity[cell];
            for qp in qp_data(self.mesh, self.scalar.degree, &self.rule_low, cell) {
                for (a, &na) in conn.iter().enumerate() {
                    for (b, &nb) in conn.iter().enumerate() {
                        m[na][nb] += qp.w * qp.vals[a] * qp.vals[b];
                    }
                }
            }
        }
        m
    }

    pub fn scalar_stiffness(&self) -> Vec<Vec<f64>> {
        let n = self.n_s();
        let mut m = vec![vec![0.0; n]; n];
        for cell in 0..self.mesh.n_cells() {
            let conn = &self.scalar.connectivity[cell];
            for qp in qp_data(self.mesh, self.scalar.degree, &self.rule_low, cell) {
                for (a, &na) in conn.iter().enumerate() {
                    for (b, &nb) in conn.iter().enumerate() {
                        let dot = qp.grads[a][0] * qp.grads[b][0]
                            + qp.grads[a][1] * qp.grads[b][1]
                            + qp.grads[a][2] * qp.grads[b][2];
                        m[na][nb] += qp.w * dot;
                    }
                }
            }
        }
        m
    }

    /// B(A; trial, test) from the definition, row = test index.
    pub fn covariant(&self, a_coeffs: &[f64]) -> Vec<Vec<Complex64>> {
        let n = self.n_s();
        let i = Complex64::new(0.0, 1.0);
        let mut m = vec![vec![Z; n]; n];
        for cell in 0..self.mesh.n_cells() {
            let conn = &self.scalar.connectivity[cell];
            for qp in qp_data(self.mesh, self.scalar.degree, &self.rule_high, cell) {
                let av = self.eval_vector(a_coeffs, cell, &qp);
                for (a, &na) in conn.iter().enumerate() {
                    for (b, &nb) in conn.iter().enumerate() {
                        let mut acc = Z;
                        for c in 0..3 {
                            let trial = i * qp.grads[b][c] + av[c] * qp.vals[b];
                            let test = (i * qp.grads[a][c] + av[c] * qp.vals[a]).conj();
                            acc += trial * test;
                        }
                        m[na][nb] += acc * qp.w;
                    }
                }
            }
        }
        m
    }

    pub fn weighted_scalar_mass(&self, a_coeffs: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n_s();
        let mut m = vec![vec![0.0; n]; n];
        for cell in 0..self.mesh.n_cells() {
            let conn = &self.scalar.connectivity[cell];
            for qp in qp_data(self.mesh, self.scalar.degree, &self.rule_high, cell) {
                let av = self.eval_vector(a_coeffs, cell, &qp);
                let wgt = av[0] * av[0] + av[1] * av[1] + av[2] * av[2];
                for (a, &na) in conn.iter().enumerate() {
                    for (b, &nb) in conn.iter().enumerate() {
                        m[na][nb] += qp.w * wgt * qp.vals[a] * qp.vals[b];
                    }
                }
            }
        }
        m
    }

    pub fn coupling(&self, a_coeffs: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n_s();
        let mut m = vec![vec![0.0; n]; n];
        for cell in 0..self.mesh.n_cells() {
            let conn = &self.scalar.connectivity[cell];
            for qp in qp_data(self.mesh, self.scalar.degree, &self.rule_high, cell) {
                let av = self.eval_vector(a_coeffs, cell, &qp);
                for (a, &na) in conn.iter().enumerate() {
                    for (b, &nb) in conn.iter().enumerate() {
                        let mut dot = 0.0;
                        for c in 0..3 {
                            dot += av[c] * (qp.grads[b][c] * qp.vals[a] - qp.vals[b] * qp.grads[a][c]);
                        }
                        m[na][nb] += qp.w * dot;
                    }
                }
            }
        }
        m
    }

    pub fn vector_mass(&self) -> Vec<Vec<f64>> {
        let n = self.n_v();
        let mut m = vec![vec![0.0; n]; n];
        for cell in 0..self.mesh.n_cells() {
            let conn = &self.vector.connectivity[cell];
            for qp in qp_data(self.mesh, self.vector.degree, &self.rule_low, cell) {
                for (a, &na) in conn.iter().enumerate() {
                    for (b, &nb) in conn.iter().enumerate() {
                        for c in 0..3 {
                            m[3 * na + c][3 * nb + c] += qp.w * qp.vals[a] * qp.vals[b];
                        }
                    }
                }
            }
        }
        m
    }

    /// D via explicit div and curl of the component basis fields.
    pub fn magnetic(&self) -> Vec<Vec<f64>> {
        let n = self.n_v();
        let mut m = vec![vec![0.0; n]; n];
        for cell in 0..self.mesh.n_cells() {
            let conn = &self.vector.connectivity[cell];
            for qp in qp_data(self.mesh, self.vector.degree, &self.rule_low, cell) {
                for (a, &na) in conn.iter().enumerate() {
                    for (b, &nb) in conn.iter().enumerate() {
                        for c in 0..3 {
                            for d in 0..3 {
                                // basis (a,c) = N_a e_c: div = ∂_c N_a,
                                // curl = ∇N_a × e_c
                                let div_a = qp.grads[a][c];
                                let div_b = qp.grads[b][d];
                                let curl_a = cross(qp.grads[a], c);
                                let curl_b = cross(qp.grads[b], d);
                                let val = self.gamma * div_a * div_b
                                    + curl_a[0] * curl_b[0]
                                    + curl_a[1] * curl_b[1]
                                    + curl_a[2] * curl_b[2];
                                m[3 * na + c][3 * nb + d] += qp.w * val;
                            }
                        }
                    }
                }
            }
        }
        m
    }

    pub fn density_mass(&self, psi: &[Complex64]) -> Vec<Vec<f64>> {
        let n = self.n_v();
        let mut m = vec![vec![0.0; n]; n];
        for cell in 0..self.mesh.n_cells() {
            let conn = &self.vector.connectivity[cell];
            for qp in qp_data(self.mesh, self.vector.degree, &self.rule_high, cell) {
                let (v, _) = self.eval_scalar(psi, cell, &qp);
                let wgt = v.norm_sqr();
                for (a, &na) in conn.iter().enumerate() {
                    for (b, &nb) in conn.iter().enumerate() {
                        for c in 0..3 {
                            m[3 * na + c][3 * nb + c] += qp.w * wgt * qp.vals[a] * qp.vals[b];
                        }
                    }
                }
            }
        }
        m
    }

    /// (f(Ψ,Ψ), v) with f = (i/2)(Ψ*∇Ψ − Ψ∇Ψ*) evaluated in complex
    /// arithmetic and verified real.
    pub fn current_load(&self, psi: &[Complex64]) -> Vec<f64> {
        let n = self.n_v();
        let half_i = Complex64::new(0.0, 0.5);
        let mut out = vec![0.0; n];
        for cell in 0..self.mesh.n_cells() {
            let conn = &self.vector.connectivity[cell];
            for qp in qp_data(self.mesh, self.vector.degree, &self.rule_high, cell) {
                let (v, g) = self.eval_scalar(psi, cell, &qp);
                for c in 0..3 {
                    let f = half_i * (v.conj() * g[c] - v * g[c].conj());
                    assert!(f.im.abs() <= 1e-13 * (1.0 + f.re.abs()));
                    for (a, &na) in conn.iter().enumerate() {
                        out[3 * na + c] += qp.w * f.re * qp.vals[a];
                    }
                }
            }
        }
        out
    }

    pub fn vector_load(&self, g: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
        let n = self.n_v();
        let mut out = vec![0.0; n];
        for cell in 0..self.mesh.n_cells() {
            let conn = &self.vector.connectivity[cell];
            for qp in qp_data(self.mesh, self.vector.degree, &self.rule_high, cell) {
                let gv = g(qp.x);
                for (a, &na) in conn.iter().enumerate() {
                    for c in 0..3 {
                        out[3 * na + c] += qp.w * gv[c] * qp.vals[a];
                    }
                }
            }
        }
        out
    }

    pub fn scalar_load(&self, f: impl Fn([f64; 3]) -> Complex64) -> Vec<Complex64> {
        let n = self.n_s();
        let mut out = vec![Z; n];
        for cell in 0..self.mesh.n_cells() {
            let conn = &self.scalar.connectivity[cell];
            for qp in qp_data(self.mesh, self.scalar.degree, &self.rule_high, cell) {
                let fv = f(qp.x);
                for (a, &na) in conn.iter().enumerate() {
                    out[na] += fv * (qp.w * qp.vals[a]);
                }
            }
        }
        out
    }

    pub fn charge_load(&self, s_nodal: &[f64], div_a0: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        let n = self.n_v();
        let mut out = vec![0.0; n];
        for cell in 0..self.mesh.n_cells() {
            let sconn = &self.scalar.connectivity[cell];
            let vconn = &self.vector.connectivity[cell];
            for qp in qp_data(self.mesh, self.scalar.degree, &self.rule_high, cell) {
                let mut s = 0.0;
                for (a, &na) in sconn.iter().enumerate() {
                    s += s_nodal[na] * qp.vals[a];
                }
                let factor = -self.gamma * (s - div_a0(qp.x)) * qp.w;
                for (a, &na) in vconn.iter().enumerate() {
                    for c in 0..3 {
                        out[3 * na + c] += factor * qp.grads[a][c];
                    }
                }
            }
        }
        out
    }
}

fn cross(g: [f64; 3], c: usize) -> [f64; 3] {
    // ∇N × e_c
    match c {
        0 => [0.0, g[2], -g[1]],
        1 => [-g[2], 0.0, g[0]],
        _ => [g[1], -g[0], 0.0],
    }
}

/// Zero rows/cols of constrained dofs and place 1 on their diagonal.
pub fn apply_constraints_dense_c(m: &mut [Vec<Complex64>], constrained: &[bool]) {
    let n = m.len();
    for i in 0..n {
        if constrained[i] {
            for j in 0..n {
                m[i][j] = Z;
                m[j][i] = Z;
            }
            m[i][i] = Complex64::new(1.0, 0.0);
        }
    }
}


/// Deterministic xorshift for reproducible random trials.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn uniform(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn centered(&mut self) -> f64 {
        self.uniform() - 0.5
    }

    pub fn complex(&mut self) -> Complex64 {
        Complex64::new(self.centered(), self.centered())
    }
}

pub fn max_abs_diff_r(dense: &[Vec<f64>], get: impl Fn(usize, usize) -> f64) -> f64 {
    let n = dense.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((dense[i][j] - get(i, j)).abs());
        }
    }
    worst
}

pub fn max_abs_diff_c(dense: &[Vec<Complex64>], get: impl Fn(usize, usize) -> Complex64) -> f64 {
    let n = dense.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((dense[i][j] - get(i, j)).norm());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// shared criterion bodies (used by both the oracle and acceptance suites)
// ---------------------------------------------------------------------------

use msfem::assembly::{
    self, covariant_coupling, covariant_form, current_load, density_mass, magnetic_form,
    scalar_load, scalar_mass, scalar_stiffness, vector_load, vector_mass, weighted_scalar_mass,
};
use msfem::build_unit_cube_mesh;
use msfem::config::SimulationConfig;
use msfem::linalg::lu_solve_complex;
use msfem::mms;
use msfem::space::{ScalarField, VectorField};
use msfem::stepper::{MaxwellSource, Problem, Simulation};
use std::sync::Arc;

pub fn test_context(m: usize, degree: usize, gamma: f64) -> assembly::FormContext {
    let mesh = Arc::new(build_unit_cube_mesh(m).unwrap());
    let scalar = ScalarSpace::new(mesh.clone(), degree);
    let vector = VectorSpace::new(mesh, degree);
    assembly::FormContext::new(scalar, vector, gamma, 0.0)
}

pub fn random_fields(ctx: &assembly::FormContext, seed: u64) -> (ScalarField, VectorField) {
    let mut rng = TestRng(seed);
    let mut psi = ScalarField::zero(&ctx.scalar);
    for c in psi.coeffs.iter_mut() {
        *c = rng.complex();
    }
    let mut a = VectorField::zero(&ctx.vector);
    for v in a.coeffs.iter_mut() {
        *v = rng.centered();
    }
    (psi, a)
}

/// Worst entrywise gap of every assembled operator against the dense oracle
/// on the M = 1 mesh, per operator name.
pub fn operator_gaps_m1(degree: usize) -> Vec<(&'static str, f64)> {
    let gamma = 1.3;
    let ctx = test_context(1, degree, gamma);
    let oracle = DenseForms::new(&ctx.scalar, &ctx.vector, gamma);
    let (psi, a) = random_fields(&ctx, 0x11d7 + degree as u64);

    let mut gaps = Vec::new();
    let m_s = scalar_mass(&ctx);
    gaps.push(("scalar mass", max_abs_diff_r(&oracle.scalar_mass(), |i, j| m_s.get(i, j))));
    let s_s = scalar_stiffness(&ctx);
    gaps.push(("stiffness", max_abs_diff_r(&oracle.scalar_stiffness(), |i, j| s_s.get(i, j))));
    let m_v = vector_mass(&ctx);
    gaps.push(("vector mass", max_abs_diff_r(&oracle.vector_mass(), |i, j| m_v.get(i, j))));
    let d = magnetic_form(&ctx);
    gaps.push(("magnetic form", max_abs_diff_r(&oracle.magnetic(), |i, j| d.get(i, j))));
    let b = covariant_form(&ctx, &a);
    gaps.push(("covariant form", max_abs_diff_c(&oracle.covariant(&a.coeffs), |i, j| b.get(i, j))));
    let wm = weighted_scalar_mass(&ctx, &a);
    gaps.push((
        "weighted mass",
        max_abs_diff_r(&oracle.weighted_scalar_mass(&a.coeffs), |i, j| wm.get(i, j)),
    ));
    let cp = covariant_coupling(&ctx, &a);
    gaps.push(("coupling", max_abs_diff_r(&oracle.coupling(&a.coeffs), |i, j| cp.get(i, j))));
    let m_rho = density_mass(&ctx, &psi);
    gaps.push((
        "density mass",
        max_abs_diff_r(&oracle.density_mass(&psi.coeffs), |i, j| m_rho.get(i, j)),
    ));

    let vec_gap = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max)
    };
    gaps.push((
        "current load",
        vec_gap(&current_load(&ctx, &psi), &oracle.current_load(&psi.coeffs)),
    ));
    let g_fn = |x: [f64; 3]| [x[0] * x[1], (x[2] * 3.0).sin(), 1.0 - x[0]];
    gaps.push(("vector load", vec_gap(&vector_load(&ctx, g_fn), &oracle.vector_load(g_fn))));
    let f_fn = |x: [f64; 3]| Complex64::new(x[0].cos(), x[1] - x[2]);
    let sl = scalar_load(&ctx, f_fn);
    let slo = oracle.scalar_load(f_fn);
    gaps.push((
        "scalar load",
        sl.iter()
            .zip(&slo)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max),
    ));
    let mut rng = TestRng(77);
    let s_nodal: Vec<f64> = (0..ctx.scalar.n_dofs()).map(|_| rng.centered()).collect();
    let div_a0 = |x: [f64; 3]| x[0] - 0.5 * x[2];
    gaps.push((
        "charge load",
        vec_gap(
            &assembly::charge_source_load(&ctx, &s_nodal, div_a0),
            &oracle.charge_load(&s_nodal, div_a0),
        ),
    ));
    gaps
}

/// One full time step (Maxwell then Schrödinger) of the production path
/// against a dense re-derivation solved by LU. Returns the worst coefficient
/// gaps (Maxwell, Schrödinger).
pub fn one_step_gaps(m: usize, degree: usize) -> (f64, f64) {
    let mut config = SimulationConfig::default();
    config.mesh_m = m;
    config.fe_degree = degree;
    config.dt = 0.02;
    config.t_final = 0.02;
    config.gamma = 1.0;
    config.v0 = 2.0;

    let exact = Arc::new(mms::example52());
    let e_g = exact.clone();
    let e_f = exact.clone();
    let e_psi = exact.clone();
    let e_a = exact.clone();
    let e_at = exact.clone();
    let problem = Problem {
        name: "oracle".to_string(),
        psi0: Box::new(move |x| (e_psi.psi)(x, 0.0)),
        a0: Box::new(move |x| (e_a.a)(x, 0.0)),
        a1: Box::new(move |x| (e_at.a_t)(x, 0.0)),
        maxwell_source: MaxwellSource::Analytic(Box::new(move |x, t| e_g.source_g(x, t))),
        schrodinger_source: Some(Box::new(move |x, t| e_f.source_f(x, t))),
    };

    let sim = Simulation::new(&config, problem).unwrap();
    let (state, _) = sim.initialize().unwrap();
    let (a_new, _) = sim.maxwell_step(&state, None).unwrap();
    let (psi_new, _, _) = sim.schrodinger_step(&state, &a_new).unwrap();

    let oracle = DenseForms::new(&sim.ctx.scalar, &sim.ctx.vector, config.gamma);
    let dt = state.dt;
    let n_v = sim.ctx.vector.n_dofs();
    let n_s = sim.ctx.scalar.n_dofs();

    let m_v = oracle.vector_mass();
    let d = oracle.magnetic();
    let m_rho = oracle.density_mass(&state.psi.coeffs);

    let mut lhs = vec![vec![Z; n_v]; n_v];
    for i in 0..n_v {
        for j in 0..n_v {
            lhs[i][j] = Complex64::new(
                m_v[i][j] / (dt * dt) + 0.5 * d[i][j] + 0.25 * m_rho[i][j],
                0.0,
            );
        }
    }
    let g0 = oracle.vector_load(|x| exact.source_g(x, 0.0));
    let cur = oracle.current_load(&state.psi.coeffs);
    let mut rhs = vec![Z; n_v];
    for i in 0..n_v {
        let mut acc = g0[i] - cur[i];
        for j in 0..n_v {
            acc += m_v[i][j] / (dt * dt) * (2.0 * state.a.coeffs[j] - state.a_prev.coeffs[j]);
            acc -= 0.5 * d[i][j] * state.a_prev.coeffs[j];
            acc -= 0.25 * m_rho[i][j] * (2.0 * state.a.coeffs[j] + state.a_prev.coeffs[j]);
        }
        rhs[i] = Complex64::new(acc, 0.0);
    }
    apply_constraints_dense_c(&mut lhs, &sim.ctx.vector.constrained);
    for (i, &c) in sim.ctx.vector.constrained.iter().enumerate() {
        if c {
            rhs[i] = Z;
        }
    }
    let a_dense = lu_solve_complex(&lhs, &rhs).unwrap();
    let maxwell_gap = a_new
        .coeffs
        .iter()
        .zip(&a_dense)
        .map(|(x, y)| (x - y.re).abs().max(y.im.abs()))
        .fold(0.0f64, f64::max);

    let abar: Vec<f64> = a_new
        .coeffs
        .iter()
        .zip(&state.a.coeffs)
        .map(|(x, y)| 0.5 * (x + y))
        .collect();
    let b = oracle.covariant(&abar);
    let m_s = oracle.scalar_mass();
    let mfac = Complex64::new(0.5 * config.v0, -1.0 / dt);
    let mut lhs = vec![vec![Z; n_s]; n_s];
    for i in 0..n_s {
        for j in 0..n_s {
            lhs[i][j] = 0.25 * b[i][j] + mfac * m_s[i][j];
        }
    }
    let fload = oracle.scalar_load(|x| exact.source_f(x, 0.5 * dt));
    let mut rhs = vec![Z; n_s];
    for i in 0..n_s {
        let mut acc = fload[i];
        for j in 0..n_s {
            acc += (Complex64::new(-0.5 * config.v0, -1.0 / dt) * m_s[i][j] - 0.25 * b[i][j])
                * state.psi.coeffs[j];
        }
        rhs[i] = acc;
    }
    apply_constraints_dense_c(&mut lhs, &sim.ctx.scalar.dirichlet);
    for (i, &c) in sim.ctx.scalar.dirichlet.iter().enumerate() {
        if c {
            rhs[i] = Z;
        }
    }
    let psi_dense = lu_solve_complex(&lhs, &rhs).unwrap();
    let schrodinger_gap = psi_new
        .coeffs
        .iter()
        .zip(&psi_dense)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0f64, f64::max);

    (maxwell_gap, schrodinger_gap)
}

/// Worst entrywise defect of B(A) = stiffness + |A|²-mass + i·coupling over
/// random trials (the three pieces assembled by independent routines).
pub fn decomposition_identity_worst(trials: u64) -> f64 {
    let ctx = test_context(2, 1, 1.3);
    let stiff = scalar_stiffness(&ctx);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let (_, a) = random_fields(&ctx, 0xabc0 + trial);
        let b = covariant_form(&ctx, &a);
        let wmass = weighted_scalar_mass(&ctx, &a);
        let coup = covariant_coupling(&ctx, &a);
        let p = &b.pattern;
        for row in 0..b.n() {
            for pos in p.row_ptr[row]..p.row_ptr[row + 1] {
                let col = p.col_idx[pos] as usize;
                let expect = Complex64::new(
                    stiff.get(row, col) + wmass.get(row, col),
                    coup.get(row, col),
                );
                worst = worst.max((b.values[pos] - expect).norm());
            }
        }
    }
    worst
}

/// Worst relative defect of the covariant difference identity over random
/// trials, right side evaluated by direct quadrature.
pub fn difference_identity_worst(trials: u64) -> f64 {
    let ctx = test_context(2, 1, 1.3);
    let oracle = DenseForms::new(&ctx.scalar, &ctx.vector, ctx.gamma);
    let half_i = Complex64::new(0.0, 0.5);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let (psi, a) = random_fields(&ctx, 0x5eed + trial);
        let (phi, a_hat) = random_fields(&ctx, 0xfeed ^ (trial.wrapping_mul(7919)));

        let b1 = covariant_form(&ctx, &a);
        let b2 = covariant_form(&ctx, &a_hat);
        let b1psi = b1.matvec_alloc(&psi.coeffs);
        let b2psi = b2.matvec_alloc(&psi.coeffs);
        let lhs: Complex64 = phi
            .coeffs
            .iter()
            .zip(b1psi.iter().zip(&b2psi))
            .map(|(p, (x, y))| p.conj() * (x - y))
            .sum();

        let mut rhs = Z;
        for cell in 0..ctx.scalar.mesh.n_cells() {
            for qp in qp_data(&ctx.scalar.mesh, ctx.scalar.degree, &oracle.rule_high, cell) {
                let conn = &ctx.scalar.connectivity[cell];
                let mut psi_v = Z;
                let mut phi_v = Z;
                let mut psi_g = [Z; 3];
                let mut phi_g = [Z; 3];
                for (i, &n) in conn.iter().enumerate() {
                    psi_v += psi.coeffs[n] * qp.vals[i];
                    phi_v += phi.coeffs[n] * qp.vals[i];
                    for dd in 0..3 {
                        psi_g[dd] += psi.coeffs[n] * qp.grads[i][dd];
                        phi_g[dd] += phi.coeffs[n] * qp.grads[i][dd];
                    }
                }
                let vconn = &ctx.vector.connectivity[cell];
                let mut av = [0.0; 3];
                let mut ahv = [0.0; 3];
                for (i, &n) in vconn.iter().enumerate() {
                    for c in 0..3 {
                        av[c] += a.coeffs[3 * n + c] * qp.vals[i];
                        ahv[c] += a_hat.coeffs[3 * n + c] * qp.vals[i];
                    }
                }
                for c in 0..3 {
                    let diff = av[c] - ahv[c];
                    let sum = av[c] + ahv[c];
                    let f = half_i * (phi_v.conj() * psi_g[c] - psi_v * phi_g[c].conj());
                    rhs += qp.w * (sum * psi_v * phi_v.conj() + 2.0 * f) * diff;
                }
            }
        }
        let denom = lhs.norm().max(rhs.norm()).max(1e-30);
        worst = worst.max((lhs - rhs).norm() / denom);
    }
    worst
}
