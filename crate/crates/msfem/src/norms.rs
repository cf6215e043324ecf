//! Quadrature evaluation of field norms and errors against closed forms.
//!
//! Uses a rule of degree min(2r+2, 6) so the measured convergence orders are
//! not polluted by the norm evaluation itself.

use crate::elements::quadrature_for;
use crate::space::{map_gradient, ScalarField, VectorField};
use num_complex::Complex64;

/// Squared norm pieces of a complex scalar error e = Ψ_h − Ψ.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScalarNorms {
    pub l2_sq: f64,
    pub h1_semi_sq: f64,
}

impl ScalarNorms {
    pub fn l2(&self) -> f64 {
        self.l2_sq.sqrt()
    }
    pub fn h1_semi(&self) -> f64 {
        self.h1_semi_sq.sqrt()
    }
    pub fn h1(&self) -> f64 {
        (self.l2_sq + self.h1_semi_sq).sqrt()
    }
}

/// Squared norm pieces of a vector error E = A_h − A in the H¹_t-equivalent
/// seminorm split.
#[derive(Clone, Copy, Debug, Default)]
pub struct VectorNorms {
    pub l2_sq: f64,
    pub div_sq: f64,
    pub curl_sq: f64,
}

impl VectorNorms {
    pub fn l2(&self) -> f64 {
        self.l2_sq.sqrt()
    }
    pub fn div(&self) -> f64 {
        self.div_sq.sqrt()
    }
    pub fn curl(&self) -> f64 {
        self.curl_sq.sqrt()
    }
    /// Combined norm sqrt(L2² + div² + curl²), equivalent to the H¹ norm on
    /// the tangential-trace-free space.
    pub fn ht1(&self) -> f64 {
        (self.l2_sq + self.div_sq + self.curl_sq).sqrt()
    }
}

/// ‖Ψ_h − Ψ‖ pieces; pass zero closures to measure plain field norms.
pub fn scalar_error_norms(
    field: &ScalarField,
    exact: impl Fn([f64; 3]) -> Complex64,
    exact_grad: impl Fn([f64; 3]) -> [Complex64; 3],
) -> ScalarNorms {
    let space = &field.space;
    let mesh = &space.mesh;
    let rule = quadrature_for((2 * space.degree + 2).min(6)).expect("norm rule");
    let n_nodes = space.element.n_nodes();
    let vals: Vec<f64> = rule
        .points
        .iter()
        .flat_map(|&p| space.element.eval_basis(p))
        .collect();
    let ref_grads: Vec<[f64; 3]> = rule
        .points
        .iter()
        .flat_map(|&p| space.element.eval_gradients(p))
        .collect();

    let mut out = ScalarNorms::default();
    for (cell, conn) in space.connectivity.iter().enumerate() {
        let geo = &mesh.geometry[cell];
        for (q, &p) in rule.points.iter().enumerate() {
            let w = rule.weights[q] * geo.det;
            let x = mesh.map_point(cell, p);
            let mut v = Complex64::new(0.0, 0.0);
            let mut g = [Complex64::new(0.0, 0.0); 3];
            for (a, &n) in conn.iter().enumerate() {
                let c = field.coeffs[n];
                v += c * vals[q * n_nodes + a];
                let pg = map_gradient(&geo.inv_jac_t, ref_grads[q * n_nodes + a]);
                for d in 0..3 {
                    g[d] += c * pg[d];
                }
            }
            let ev = v - exact(x);
            let eg = exact_grad(x);
            out.l2_sq += w * ev.norm_sqr();
            for d in 0..3 {
                out.h1_semi_sq += w * (g[d] - eg[d]).norm_sqr();
            }
        }
    }
    out
}

/// ‖A_h − A‖ pieces; pass zero closures to measure plain field norms.
pub fn vector_error_norms(
    field: &VectorField,
    exact: impl Fn([f64; 3]) -> [f64; 3],
    exact_div: impl Fn([f64; 3]) -> f64,
    exact_curl: impl Fn([f64; 3]) -> [f64; 3],
) -> VectorNorms {
    let space = &field.space;
    let mesh = &space.mesh;
    let rule = quadrature_for((2 * space.degree + 2).min(6)).expect("norm rule");
    let n_nodes = space.element.n_nodes();
    let vals: Vec<f64> = rule
        .points
        .iter()
        .flat_map(|&p| space.element.eval_basis(p))
        .collect();
    let ref_grads: Vec<[f64; 3]> = rule
        .points
        .iter()
        .flat_map(|&p| space.element.eval_gradients(p))
        .collect();

    let mut out = VectorNorms::default();
    for (cell, conn) in space.connectivity.iter().enumerate() {
        let geo = &mesh.geometry[cell];
        for (q, &p) in rule.points.iter().enumerate() {
            let w = rule.weights[q] * geo.det;
            let x = mesh.map_point(cell, p);
            let mut v = [0.0f64; 3];
            let mut jac = [[0.0f64; 3]; 3]; // jac[c][d] = ∂_d A_c
            for (a, &n) in conn.iter().enumerate() {
                let nv = vals[q * n_nodes + a];
                let pg = map_gradient(&geo.inv_jac_t, ref_grads[q * n_nodes + a]);
                for c in 0..3 {
                    let coeff = field.coeffs[3 * n + c];
                    v[c] += coeff * nv;
                    for d in 0..3 {
                        jac[c][d] += coeff * pg[d];
                    }
                }
            }
            let div = jac[0][0] + jac[1][1] + jac[2][2];
            let curl = [
                jac[2][1] - jac[1][2],
                jac[0][2] - jac[2][0],
                jac[1][0] - jac[0][1],
            ];
            let xv = exact(x);
            let xd = exact_div(x);
            let xc = exact_curl(x);
            for c in 0..3 {
                out.l2_sq += w * (v[c] - xv[c]) * (v[c] - xv[c]);
                out.curl_sq += w * (curl[c] - xc[c]) * (curl[c] - xc[c]);
            }
            out.div_sq += w * (div - xd) * (div - xd);
        }
    }
    out
}

/// Plain norms of a scalar field.
pub fn scalar_field_norms(field: &ScalarField) -> ScalarNorms {
    scalar_error_norms(
        field,
        |_| Complex64::new(0.0, 0.0),
        |_| [Complex64::new(0.0, 0.0); 3],
    )
}

/// Plain norms of a vector field.
pub fn vector_field_norms(field: &VectorField) -> VectorNorms {
    vector_error_norms(field, |_| [0.0; 3], |_| 0.0, |_| [0.0; 3])
}
