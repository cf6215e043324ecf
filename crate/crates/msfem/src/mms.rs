//! Manufactured solutions: closed-form (Ψ, A) pairs with hand-coded
//! derivatives, the sources they induce in the strong form, a
//! finite-difference residual gate that must pass before any convergence
//! study is trusted, and the empirical-order-of-convergence harness.

use crate::config::{effective_steps, SimulationConfig};
use crate::norms::{scalar_error_norms, vector_error_norms};
use crate::space::{ScalarField, VectorField};
use crate::stepper::{MaxwellSource, Problem, Simulation, StepError};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::sync::Arc;

type CFn = Box<dyn Fn([f64; 3], f64) -> Complex64 + Send + Sync>;
type CGradFn = Box<dyn Fn([f64; 3], f64) -> [Complex64; 3] + Send + Sync>;
type VFn = Box<dyn Fn([f64; 3], f64) -> [f64; 3] + Send + Sync>;
type RFn = Box<dyn Fn([f64; 3], f64) -> f64 + Send + Sync>;

/// A closed-form solution pair with every derivative the sources need.
pub struct ExactSolution {
    pub gamma: f64,
    pub v0: f64,
    /// Natural final time of the reference setup.
    pub t_final: f64,
    pub psi: CFn,
    pub psi_t: CFn,
    pub grad_psi: CGradFn,
    pub laplacian_psi: CFn,
    pub a: VFn,
    pub a_t: VFn,
    pub a_tt: VFn,
    pub div_a: RFn,
    pub grad_div_a: VFn,
    pub curl_a: VFn,
    pub curl_curl_a: VFn,
}

impl ExactSolution {
    /// Probability current f(Ψ,Ψ) = (i/2)(Ψ*∇Ψ − Ψ∇Ψ*) = −Im(Ψ*∇Ψ).
    pub fn current(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let v = (self.psi)(x, t);
        let g = (self.grad_psi)(x, t);
        [
            -(v.conj() * g[0]).im,
            -(v.conj() * g[1]).im,
            -(v.conj() * g[2]).im,
        ]
    }

    /// Schrödinger source: f = −iΨ_t + ½(i∇+A)²Ψ + V₀Ψ, with
    /// (i∇+A)²Ψ = −ΔΨ + i(∇·A)Ψ + 2iA·∇Ψ + |A|²Ψ.
    pub fn source_f(&self, x: [f64; 3], t: f64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let psi = (self.psi)(x, t);
        let psi_t = (self.psi_t)(x, t);
        let grad = (self.grad_psi)(x, t);
        let lap = (self.laplacian_psi)(x, t);
        let a = (self.a)(x, t);
        let div_a = (self.div_a)(x, t);
        let a_dot_grad = a[0] * grad[0] + a[1] * grad[1] + a[2] * grad[2];
        let a_sq = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
        -i * psi_t + 0.5 * (-lap + i * div_a * psi + 2.0 * i * a_dot_grad + a_sq * psi)
            + self.v0 * psi
    }

    /// Maxwell source: g = A_tt + ∇×∇×A − γ∇(∇·A) + f(Ψ,Ψ) + |Ψ|²A.
    pub fn source_g(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let a_tt = (self.a_tt)(x, t);
        let cc = (self.curl_curl_a)(x, t);
        let gd = (self.grad_div_a)(x, t);
        let cur = self.current(x, t);
        let a = (self.a)(x, t);
        let rho = (self.psi)(x, t).norm_sqr();
        let mut g = [0.0; 3];
        for c in 0..3 {
            g[c] = a_tt[c] + cc[c] - self.gamma * gd[c] + cur[c] + rho * a[c];
        }
        g
    }
}

/// The polynomial-exponential plus double-frequency standing-wave pair used
/// by the convergence tables: γ = 1, V₀ = 5, T = 4 on the unit cube.
pub fn example52() -> ExactSolution {
    use std::f64::consts::PI;

    let p = |s: f64| s * (1.0 - s);
    let dp = |s: f64| 1.0 - 2.0 * s;

    // Ψ = c1(t) E(x) P(x) + c2(t) S2(x)
    let c1 = |t: f64| 20.0 * Complex64::new(0.0, t).exp() * (1.0 + 3.0 * t * t);
    let c1_t = |t: f64| {
        20.0 * Complex64::new(0.0, t).exp()
            * (Complex64::new(0.0, 1.0) * (1.0 + 3.0 * t * t) + 6.0 * t)
    };
    let c2 = |t: f64| 5.0 * Complex64::new(0.0, PI * t).exp();
    let c2_t = |t: f64| 5.0 * Complex64::new(0.0, PI) * Complex64::new(0.0, PI * t).exp();

    let e = |x: [f64; 3]| ((x[0] + x[1] + x[2]) / 5.0).exp();
    let poly = move |x: [f64; 3]| p(x[0]) * p(x[1]) * p(x[2]);
    let dpoly = move |x: [f64; 3], j: usize| {
        let mut v = dp(x[j]);
        for d in 0..3 {
            if d != j {
                v *= p(x[d]);
            }
        }
        v
    };
    let s2 =
        |x: [f64; 3]| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin() * (2.0 * PI * x[2]).sin();
    let ds2 = |x: [f64; 3], j: usize| {
        let mut v = 2.0 * PI * (2.0 * PI * x[j]).cos();
        for d in 0..3 {
            if d != j {
                v *= (2.0 * PI * x[d]).sin();
            }
        }
        v
    };

    let psi = move |x: [f64; 3], t: f64| c1(t) * (e(x) * poly(x)) + c2(t) * s2(x);
    let psi_t = move |x: [f64; 3], t: f64| c1_t(t) * (e(x) * poly(x)) + c2_t(t) * s2(x);
    let grad_psi = move |x: [f64; 3], t: f64| {
        let ev = e(x);
        let a1 = c1(t);
        let a2 = c2(t);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for j in 0..3 {
            out[j] = a1 * (ev * (poly(x) / 5.0 + dpoly(x, j))) + a2 * ds2(x, j);
        }
        out
    };
    let laplacian_psi = move |x: [f64; 3], t: f64| {
        // Δ(EP) = E[3P/25 + (2/5)ΣP_j + ΣP_jj], P_jj = −2·Π_{d≠j} p(x_d)
        let ev = e(x);
        let pv = poly(x);
        let mut sum_dp = 0.0;
        let mut sum_ddp = 0.0;
        for j in 0..3 {
            sum_dp += dpoly(x, j);
            let mut other = -2.0;
            for d in 0..3 {
                if d != j {
                    other *= p(x[d]);
                }
            }
            sum_ddp += other;
        }
        let lap_ep = ev * (3.0 * pv / 25.0 + 0.4 * sum_dp + sum_ddp);
        c1(t) * lap_ep + c2(t) * (-12.0 * PI * PI * s2(x))
    };

    // A = sin(πt) A_{2π} + cos(πt) A_π, where the pattern A_κ is the
    // gradient field ∇S_κ / κ (curl free, ∇(∇·A_κ) = −3κ²A_κ)
    let pattern = |x: [f64; 3], k: f64| {
        [
            (k * x[0]).cos() * (k * x[1]).sin() * (k * x[2]).sin(),
            (k * x[0]).sin() * (k * x[1]).cos() * (k * x[2]).sin(),
            (k * x[0]).sin() * (k * x[1]).sin() * (k * x[2]).cos(),
        ]
    };
    let sprod = |x: [f64; 3], k: f64| (k * x[0]).sin() * (k * x[1]).sin() * (k * x[2]).sin();

    let two_pi = 2.0 * PI;
    let a = move |x: [f64; 3], t: f64| {
        let p2 = pattern(x, two_pi);
        let p1 = pattern(x, PI);
        let (s, c) = (PI * t).sin_cos();
        [
            s * p2[0] + c * p1[0],
            s * p2[1] + c * p1[1],
            s * p2[2] + c * p1[2],
        ]
    };
    let a_t = move |x: [f64; 3], t: f64| {
        let p2 = pattern(x, two_pi);
        let p1 = pattern(x, PI);
        let (s, c) = (PI * t).sin_cos();
        [
            PI * (c * p2[0] - s * p1[0]),
            PI * (c * p2[1] - s * p1[1]),
            PI * (c * p2[2] - s * p1[2]),
        ]
    };
    let a_tt = move |x: [f64; 3], t: f64| {
        let v = a(x, t);
        [-PI * PI * v[0], -PI * PI * v[1], -PI * PI * v[2]]
    };
    let div_a = move |x: [f64; 3], t: f64| {
        let (s, c) = (PI * t).sin_cos();
        -3.0 * two_pi * s * sprod(x, two_pi) - 3.0 * PI * c * sprod(x, PI)
    };
    let grad_div_a = move |x: [f64; 3], t: f64| {
        let p2 = pattern(x, two_pi);
        let p1 = pattern(x, PI);
        let (s, c) = (PI * t).sin_cos();
        let k2 = -3.0 * two_pi * two_pi * s;
        let k1 = -3.0 * PI * PI * c;
        [
            k2 * p2[0] + k1 * p1[0],
            k2 * p2[1] + k1 * p1[1],
            k2 * p2[2] + k1 * p1[2],
        ]
    };

    ExactSolution {
        gamma: 1.0,
        v0: 5.0,
        t_final: 4.0,
        psi: Box::new(psi),
        psi_t: Box::new(psi_t),
        grad_psi: Box::new(grad_psi),
        laplacian_psi: Box::new(laplacian_psi),
        a: Box::new(a),
        a_t: Box::new(a_t),
        a_tt: Box::new(a_tt),
        div_a: Box::new(div_a),
        grad_div_a: Box::new(grad_div_a),
        curl_a: Box::new(|_, _| [0.0; 3]),
        curl_curl_a: Box::new(|_, _| [0.0; 3]),
    }
}

/// Wrap an exact solution as a runnable problem: initial data at t = 0 and
/// both manufactured sources.
pub fn manufactured_problem(exact: Arc<ExactSolution>) -> Problem {
    let e1 = exact.clone();
    let e2 = exact.clone();
    let e3 = exact.clone();
    let e4 = exact.clone();
    let e5 = exact.clone();
    Problem {
        name: "manufactured".to_string(),
        psi0: Box::new(move |x| (e1.psi)(x, 0.0)),
        a0: Box::new(move |x| (e2.a)(x, 0.0)),
        a1: Box::new(move |x| (e3.a_t)(x, 0.0)),
        maxwell_source: MaxwellSource::Analytic(Box::new(move |x, t| e4.source_g(x, t))),
        schrodinger_source: Some(Box::new(move |x, t| e5.source_f(x, t))),
    }
}

// ---------------------------------------------------------------------------
// finite-difference residual gate
// ---------------------------------------------------------------------------

#[derive(Debug, thiserror::Error)]
#[error(
    "manufactured source residual gate failed at x = {x:?}, t = {t}: \
     {which} residual {residual:.3e} exceeds {tol:.1e} × scale {scale:.3e}"
)]
pub struct SourceGateError {
    pub x: [f64; 3],
    pub t: f64,
    pub which: &'static str,
    pub residual: f64,
    pub scale: f64,
    pub tol: f64,
}

/// Verify the stored sources against the strong form using finite
/// differences of the closed forms only. Catches any hand-derivation error
/// before a convergence study can silently measure the wrong problem.
pub fn verify_sources(
    exact: &ExactSolution,
    n_samples: usize,
    tol: f64,
) -> Result<(), SourceGateError> {
    // small enough that second-order truncation of the (2π)⁴-scaled fourth
    // derivatives stays well under tol, large enough to keep the second
    // differences free of roundoff
    let delta = 5e-4;
    let mut rng_state = 0x853c49e6748fea9bu64;
    let mut uniform = move || {
        rng_state = rng_state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((rng_state >> 33) as f64) / (1u64 << 31) as f64
    };

    for _ in 0..n_samples {
        let x = [
            0.1 + 0.8 * uniform(),
            0.1 + 0.8 * uniform(),
            0.1 + 0.8 * uniform(),
        ];
        let t = 0.1 + 1.9 * uniform();

        check_schrodinger_residual(exact, x, t, delta, tol)?;
        check_maxwell_residual(exact, x, t, delta, tol)?;
    }
    Ok(())
}

fn check_schrodinger_residual(
    exact: &ExactSolution,
    x: [f64; 3],
    t: f64,
    d: f64,
    tol: f64,
) -> Result<(), SourceGateError> {
    let psi = |x: [f64; 3], t: f64| (exact.psi)(x, t);
    let shift = |x: [f64; 3], j: usize, s: f64| {
        let mut y = x;
        y[j] += s;
        y
    };

    let v = psi(x, t);
    let psi_t = (psi(x, t + d) - psi(x, t - d)) / (2.0 * d);
    let mut lap = Complex64::new(0.0, 0.0);
    let mut grad = [Complex64::new(0.0, 0.0); 3];
    for j in 0..3 {
        let fp = psi(shift(x, j, d), t);
        let fm = psi(shift(x, j, -d), t);
        lap += (fp - 2.0 * v + fm) / (d * d);
        grad[j] = (fp - fm) / (2.0 * d);
    }
    let a = (exact.a)(x, t);
    let mut div_a = 0.0;
    for j in 0..3 {
        div_a += ((exact.a)(shift(x, j, d), t)[j] - (exact.a)(shift(x, j, -d), t)[j]) / (2.0 * d);
    }
    let i = Complex64::new(0.0, 1.0);
    let a_dot_grad = a[0] * grad[0] + a[1] * grad[1] + a[2] * grad[2];
    let a_sq = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    let lhs = -i * psi_t
        + 0.5 * (-lap + i * div_a * v + 2.0 * i * a_dot_grad + a_sq * v)
        + exact.v0 * v;
    let f = exact.source_f(x, t);
    let residual = (lhs - f).norm();
    let scale = psi_t.norm() + 0.5 * lap.norm() + exact.v0 * v.norm() + f.norm() + 1.0;
    if residual > tol * scale {
        return Err(SourceGateError {
            x,
            t,
            which: "Schrödinger",
            residual,
            scale,
            tol,
        });
    }
    Ok(())
}

fn check_maxwell_residual(
    exact: &ExactSolution,
    x: [f64; 3],
    t: f64,
    d: f64,
    tol: f64,
) -> Result<(), SourceGateError> {
    let a_fn = |x: [f64; 3], t: f64| (exact.a)(x, t);
    let shift = |x: [f64; 3], j: usize, s: f64| {
        let mut y = x;
        y[j] += s;
        y
    };

    let a0 = a_fn(x, t);
    let mut a_tt = [0.0; 3];
    {
        let ap = a_fn(x, t + d);
        let am = a_fn(x, t - d);
        for c in 0..3 {
            a_tt[c] = (ap[c] - 2.0 * a0[c] + am[c]) / (d * d);
        }
    }
    // second spatial derivatives: hess[c][i][k] = ∂_i ∂_k A_c
    let mut hess = [[[0.0f64; 3]; 3]; 3];
    for i in 0..3 {
        let ap = a_fn(shift(x, i, d), t);
        let am = a_fn(shift(x, i, -d), t);
        for c in 0..3 {
            hess[c][i][i] = (ap[c] - 2.0 * a0[c] + am[c]) / (d * d);
        }
        for k in (i + 1)..3 {
            let app = a_fn(shift(shift(x, i, d), k, d), t);
            let apm = a_fn(shift(shift(x, i, d), k, -d), t);
            let amp = a_fn(shift(shift(x, i, -d), k, d), t);
            let amm = a_fn(shift(shift(x, i, -d), k, -d), t);
            for c in 0..3 {
                let v = (app[c] - apm[c] - amp[c] + amm[c]) / (4.0 * d * d);
                hess[c][i][k] = v;
                hess[c][k][i] = v;
            }
        }
    }
    // ∇(∇·A)_i = Σ_k ∂_i∂_k A_k; ΔA_i = Σ_d ∂_d²A_i; ∇×∇×A = ∇(∇·A) − ΔA
    let mut grad_div = [0.0; 3];
    let mut lap = [0.0; 3];
    for i in 0..3 {
        for k in 0..3 {
            grad_div[i] += hess[k][i][k];
            lap[i] += hess[i][k][k];
        }
    }
    let psi_v = (exact.psi)(x, t);
    let mut current = [0.0; 3];
    for j in 0..3 {
        let gp = ((exact.psi)(shift(x, j, d), t) - (exact.psi)(shift(x, j, -d), t)) / (2.0 * d);
        current[j] = -(psi_v.conj() * gp).im;
    }
    let rho = psi_v.norm_sqr();
    let g = exact.source_g(x, t);
    for c in 0..3 {
        let curl_curl = grad_div[c] - lap[c];
        let lhs = a_tt[c] + curl_curl - exact.gamma * grad_div[c] + current[c] + rho * a0[c];
        let residual = (lhs - g[c]).abs();
        let scale = a_tt[c].abs()
            + curl_curl.abs()
            + exact.gamma * grad_div[c].abs()
            + current[c].abs()
            + rho * a0[c].abs()
            + g[c].abs()
            + 1.0;
        if residual > tol * scale {
            return Err(SourceGateError {
                x,
                t,
                which: "Maxwell",
                residual,
                scale,
                tol,
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// error norms and the convergence study
// ---------------------------------------------------------------------------

/// Discretization errors at one report time, in the table's norm split.
#[derive(Clone, Copy, Debug)]
pub struct ErrorReport {
    pub psi_l2: f64,
    pub psi_h1_semi: f64,
    /// sqrt(L2² + |·|²_{H¹}).
    pub psi_h1: f64,
    pub a_l2: f64,
    pub a_div: f64,
    pub a_curl: f64,
    /// sqrt(L2² + div² + curl²), the H¹_t-equivalent norm.
    pub a_h1: f64,
}

/// Quadrature errors of the discrete pair against the exact solution at t.
pub fn compute_errors(
    psi: &ScalarField,
    a: &VectorField,
    exact: &ExactSolution,
    t: f64,
) -> ErrorReport {
    let sn = scalar_error_norms(psi, |x| (exact.psi)(x, t), |x| (exact.grad_psi)(x, t));
    let vn = vector_error_norms(
        a,
        |x| (exact.a)(x, t),
        |x| (exact.div_a)(x, t),
        |x| (exact.curl_a)(x, t),
    );
    ErrorReport {
        psi_l2: sn.l2(),
        psi_h1_semi: sn.h1_semi(),
        psi_h1: sn.h1(),
        a_l2: vn.l2(),
        a_div: vn.div(),
        a_curl: vn.curl(),
        a_h1: vn.ht1(),
    }
}

/// Time-step selection rule for a study.
#[derive(Clone, Copy, Debug)]
pub enum DtRule {
    /// Δt = h.
    MatchH,
    /// Δt = √h.
    SqrtH,
    /// A fixed requested Δt.
    Fixed(f64),
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub degree: usize,
    pub grid: Vec<usize>,
    pub dt_rule: DtRule,
    /// Report times; must be uniformly spaced multiples of the first one.
    pub report_times: Vec<f64>,
    pub solver_rtol: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct StudyRow {
    pub m: usize,
    pub h: f64,
    pub dt: f64,
    pub t: f64,
    pub errors: ErrorReport,
}

#[derive(Clone, Debug)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    pub grid: Vec<usize>,
    pub report_times: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error(transparent)]
    Gate(#[from] SourceGateError),
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("bad study configuration: {0}")]
    BadConfig(String),
}

/// Run the refinement study for a manufactured solution. Refuses to run
/// (returns the gate error) if the stored sources fail the finite-difference
/// strong-form check.
pub fn convergence_study(
    exact: Arc<ExactSolution>,
    study: &StudyConfig,
) -> Result<StudyTable, StudyError> {
    verify_sources(&exact, 20, 1e-4)?;
    if study.grid.len() < 2 {
        return Err(StudyError::BadConfig(
            "need at least two grid levels".to_string(),
        ));
    }
    let spacing = *study
        .report_times
        .first()
        .ok_or_else(|| StudyError::BadConfig("need at least one report time".to_string()))?;
    for (j, &t) in study.report_times.iter().enumerate() {
        let expect = spacing * (j + 1) as f64;
        if (t - expect).abs() > 1e-9 * expect {
            return Err(StudyError::BadConfig(format!(
                "report times must be uniform multiples of the first ({spacing}); got {t}"
            )));
        }
    }
    let t_final = *study.report_times.last().unwrap();

    let mut rows = Vec::new();
    for &m in &study.grid {
        let h = 1.0 / m as f64;
        let dt_req = match study.dt_rule {
            DtRule::MatchH => h,
            DtRule::SqrtH => h.sqrt(),
            DtRule::Fixed(v) => v,
        };
        // anchor the ceil rule to the report spacing so every report time
        // is hit exactly
        let steps_per_report = effective_steps(spacing, dt_req);
        let dt = spacing / steps_per_report as f64;

        let mut config = SimulationConfig::default();
        config.mesh_m = m;
        config.fe_degree = study.degree;
        config.dt = dt;
        config.t_final = t_final;
        config.gamma = exact.gamma;
        config.v0 = exact.v0;
        config.solver_rtol = study.solver_rtol;
        config.problem = "example52".to_string();

        let sim = Simulation::new(&config, manufactured_problem(exact.clone()))?;
        let exact_ref = exact.clone();
        let mut level_rows = Vec::new();
        sim.run(|state, _| {
            if state.k > 0 && state.k % steps_per_report == 0 {
                let errors = compute_errors(&state.psi, &state.a, &exact_ref, state.t);
                level_rows.push(StudyRow {
                    m,
                    h,
                    dt,
                    t: state.t,
                    errors,
                });
            }
        })?;
        rows.extend(level_rows);
    }

    Ok(StudyTable {
        rows,
        grid: study.grid.clone(),
        report_times: study.report_times.clone(),
    })
}

impl StudyTable {
    /// Orders between consecutive grid levels at a report time:
    /// EOC = log(e_coarse/e_fine) / log(h_coarse/h_fine).
    pub fn eoc_at(&self, t: f64, norm: impl Fn(&ErrorReport) -> f64) -> Vec<f64> {
        let rows: Vec<&StudyRow> = self
            .rows
            .iter()
            .filter(|r| (r.t - t).abs() < 1e-9)
            .collect();
        rows.windows(2)
            .map(|w| {
                let (c, f) = (w[0], w[1]);
                (norm(&c.errors) / norm(&f.errors)).ln() / (c.h / f.h).ln()
            })
            .collect()
    }

    /// CSV table; EOC columns compare with the previous grid level at the
    /// same report time, blank for the coarsest level.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "M,h,dt,t,errA_L2,errA_div,errA_curl,errA_H1,errPsi_L2,errPsi_H1semi,errPsi_H1,eocA_L2,eocA_H1,eocPsi_L2,eocPsi_H1\n",
        );
        for row in &self.rows {
            let level = self.grid.iter().position(|&m| m == row.m);
            let prev = level.and_then(|l| l.checked_sub(1)).and_then(|lp| {
                self.rows
                    .iter()
                    .find(|r| (r.t - row.t).abs() < 1e-9 && r.m == self.grid[lp])
            });
            let eoc = |cur: f64, get: &dyn Fn(&ErrorReport) -> f64| -> String {
                match prev {
                    Some(p) => {
                        let order = (get(&p.errors) / cur).ln() / (p.h / row.h).ln();
                        format!("{order:.4}")
                    }
                    None => String::new(),
                }
            };
            let e = &row.errors;
            let _ = writeln!(
                out,
                "{},{:.17e},{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{},{},{}",
                row.m,
                row.h,
                row.dt,
                row.t,
                e.a_l2,
                e.a_div,
                e.a_curl,
                e.a_h1,
                e.psi_l2,
                e.psi_h1_semi,
                e.psi_h1,
                eoc(e.a_l2, &|r| r.a_l2),
                eoc(e.a_h1, &|r| r.a_h1),
                eoc(e.psi_l2, &|r| r.psi_l2),
                eoc(e.psi_h1, &|r| r.psi_h1),
            );
        }
        out
    }
}
