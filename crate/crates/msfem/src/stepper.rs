//! The decoupled Crank–Nicolson time loop.
//!
//! With the window quantities ∂U^k = (U^k−U^{k−1})/Δt, ∂²U^k = second
//! difference, Ū^k = (U^k+U^{k−1})/2 and Ũ^k = (U^k+U^{k−2})/2, each step
//! solves two linear systems in turn:
//!
//! Maxwell (uses only Ψ^{k−1}, so it runs first):
//!   [(1/Δt²)M_v + ½D + ¼M_ρ] A^k = (g^{k−1},v) − (f(Ψ^{k−1},Ψ^{k−1}),v)
//!       + (1/Δt²)M_v(2A^{k−1} − A^{k−2}) − ½D A^{k−2} − ¼M_ρ(2A^{k−1} + A^{k−2}),
//!   where M_ρ is the |Ψ^{k−1}|²-weighted vector mass; the left side is SPD.
//!
//! Schrödinger (needs Ā^k = (A^k+A^{k−1})/2):
//!   [(−i/Δt)M + ¼B(Ā^k) + (V₀/2)M] Ψ^k
//!       = [(−i/Δt)M − ¼B(Ā^k) − (V₀/2)M] Ψ^{k−1} + (f_src^{k−1/2}, φ).
//!
//! Choosing the test function Ψ̄^k in the Schrödinger update shows that the
//! discrete mass ‖Ψ^k‖² is conserved exactly; with zero Maxwell source the
//! discrete energy functional is conserved as well. Both properties hold up
//! to solver tolerance and are exercised by the integration tests.

use crate::assembly::{
    charge_source_load, covariant_form, current_load, density_mass, magnetic_form, scalar_load,
    scalar_mass, vector_load, vector_mass, FormContext,
};
use crate::config::SimulationConfig;
use crate::linalg::{solve_complex, solve_spd, CsrMatrix, SolveError, SolveOpts, SolveReport};
use crate::mesh::build_unit_cube_mesh;
use crate::norms::{scalar_field_norms, vector_field_norms};
use crate::space::{
    interpolate_scalar, interpolate_vector, ScalarField, ScalarSpace, VectorField, VectorSpace,
};
use num_complex::Complex64;
use std::sync::Arc;

pub type ScalarFn = Box<dyn Fn([f64; 3]) -> Complex64 + Send + Sync>;
pub type VectorFn = Box<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;
pub type TimeScalarFn = Box<dyn Fn([f64; 3], f64) -> Complex64 + Send + Sync>;
pub type TimeVectorFn = Box<dyn Fn([f64; 3], f64) -> [f64; 3] + Send + Sync>;
pub type RealFn = Box<dyn Fn([f64; 3]) -> f64 + Send + Sync>;

/// Right-hand side of the Maxwell equation.
pub enum MaxwellSource {
    /// g ≡ 0.
    None,
    /// A known vector source g(x,t), evaluated at t_{k−1}.
    Analytic(TimeVectorFn),
    /// The charge-integral reduction: g = γ∇(∫₀ᵗρ dτ − ∇·A₀), realized
    /// weakly as −γ(S − ∇·A₀, ∇·v) with S built by Taylor subintervals.
    ChargeIntegral {
        /// ∇·A₀ evaluated pointwise (analytic where available).
        div_a0: RealFn,
    },
}

/// A complete problem description: initial data plus sources.
pub struct Problem {
    pub name: String,
    pub psi0: ScalarFn,
    pub a0: VectorFn,
    pub a1: VectorFn,
    pub maxwell_source: MaxwellSource,
    /// Scalar source on the Schrödinger side (manufactured solutions);
    /// evaluated at the half step t_{k−1/2} to keep second order.
    pub schrodinger_source: Option<TimeScalarFn>,
}

impl Problem {
    /// Zero data, zero sources.
    pub fn trivial() -> Self {
        Problem {
            name: "custom".to_string(),
            psi0: Box::new(|_| Complex64::new(0.0, 0.0)),
            a0: Box::new(|_| [0.0; 3]),
            a1: Box::new(|_| [0.0; 3]),
            maxwell_source: MaxwellSource::None,
            schrodinger_source: None,
        }
    }
}

/// The stepping window {Ψ^k, Ψ^{k−1}, A^k, A^{k−1}, A^{k−2}}.
pub struct FieldState {
    pub k: usize,
    pub t: f64,
    pub dt: f64,
    pub psi: ScalarField,
    pub psi_prev: ScalarField,
    pub a: VectorField,
    pub a_prev: VectorField,
    pub a_prev2: VectorField,
}

/// Per-step diagnostics: conserved quantities, field norms, solver reports.
#[derive(Clone, Debug)]
pub struct DiagnosticsRow {
    pub k: usize,
    pub t: f64,
    /// ‖Ψ^k‖²_{L²}.
    pub mass: f64,
    /// Discrete energy ½B(Ā^k;Ψ^k,Ψ^k) + ¼D(A^k,A^k) + ¼D(A^{k−1},A^{k−1})
    /// + V₀‖Ψ^k‖² + ½‖∂A^k‖².
    pub energy: f64,
    pub psi_h1: f64,
    pub a_ht1: f64,
    pub maxwell: Option<SolveReport>,
    pub schrodinger: Option<SolveReport>,
}

#[derive(Debug, thiserror::Error)]
pub enum StepError {
    #[error("Maxwell solve failed at step {step}: {source}")]
    Maxwell {
        step: usize,
        #[source]
        source: SolveError,
    },
    #[error("Schrödinger solve failed at step {step}: {source}")]
    Schrodinger {
        step: usize,
        #[source]
        source: SolveError,
    },
    #[error("initialization solve failed: {source}")]
    Initialization {
        #[source]
        source: SolveError,
    },
}

/// Taylor accumulator for S(x,t) ≈ ∫₀ᵗ ρ(x,τ) dτ on nodal values.
///
/// Per subinterval (t_{j}, t_{j+1}]:
/// S^{j+1} = S^j + Δt·ρ^j + ½Δt²·ρ_t^j, with ρ_t^0 supplied from the
/// equation of motion at t = 0 and later anchors using the backward
/// difference (ρ^j − ρ^{j−1})/Δt.
pub struct ChargeIntegralSource {
    dt: f64,
    s: Vec<f64>,
    rho_prev: Option<Vec<f64>>,
    rho_prev2: Option<Vec<f64>>,
    rho_t0: Option<Vec<f64>>,
    anchor: usize,
}

impl ChargeIntegralSource {
    pub fn new(n: usize, dt: f64) -> Self {
        ChargeIntegralSource {
            dt,
            s: vec![0.0; n],
            rho_prev: None,
            rho_prev2: None,
            rho_t0: None,
            anchor: 0,
        }
    }

    /// Install ρ(·,0) and ρ_t(·,0).
    pub fn set_initial(&mut self, rho0: Vec<f64>, rho_t0: Vec<f64>) {
        assert_eq!(rho0.len(), self.s.len());
        assert_eq!(rho_t0.len(), self.s.len());
        self.rho_prev = Some(rho0);
        self.rho_t0 = Some(rho_t0);
    }

    /// Advance one subinterval, supplying ρ at the new anchor.
    pub fn advance(&mut self, rho_next: Vec<f64>) {
        let rho_prev = self
            .rho_prev
            .as_ref()
            .expect("charge integral advanced with empty history");
        assert_eq!(rho_next.len(), self.s.len());
        let dt = self.dt;
        if self.anchor == 0 {
            let rho_t0 = self.rho_t0.as_ref().expect("missing initial density rate");
            for i in 0..self.s.len() {
                self.s[i] += dt * rho_prev[i] + 0.5 * dt * dt * rho_t0[i];
            }
        } else {
            let rho_prev2 = self.rho_prev2.as_ref().unwrap();
            for i in 0..self.s.len() {
                let rho_t = (rho_prev[i] - rho_prev2[i]) / dt;
                self.s[i] += dt * rho_prev[i] + 0.5 * dt * dt * rho_t;
            }
        }
        self.rho_prev2 = self.rho_prev.take();
        self.rho_prev = Some(rho_next);
        self.anchor += 1;
    }

    /// S at the latest completed anchor.
    pub fn integral(&self) -> &[f64] {
        &self.s
    }
}

/// One configured simulation: spaces, constant matrices and the time loop.
pub struct Simulation {
    pub ctx: FormContext,
    pub problem: Problem,
    pub dt: f64,
    pub n_steps: usize,
    pub opts: SolveOpts,
    /// Keep A^k ≡ A^{k−1} (diagnostic mode; isolates the Schrödinger step).
    pub freeze_maxwell: bool,
    mass_s: CsrMatrix<f64>,
    mass_v: CsrMatrix<f64>,
    dmat: CsrMatrix<f64>,
}

/// Everything a finished run returns.
pub struct RunSummary {
    pub rows: Vec<DiagnosticsRow>,
    pub final_state: FieldState,
}

impl Simulation {
    pub fn new(config: &SimulationConfig, problem: Problem) -> Result<Self, crate::mesh::MeshError> {
        let mesh = Arc::new(build_unit_cube_mesh(config.mesh_m)?);
        let scalar = ScalarSpace::new(mesh.clone(), config.fe_degree);
        let vector = VectorSpace::new(mesh, config.fe_degree);
        let ctx = FormContext::new(scalar, vector, config.gamma, config.v0);
        let mass_s = scalar_mass(&ctx);
        let mass_v = vector_mass(&ctx);
        let dmat = magnetic_form(&ctx);
        let n_steps = config.effective_steps();
        Ok(Simulation {
            mass_s,
            mass_v,
            dmat,
            ctx,
            problem,
            dt: config.t_final / n_steps as f64,
            n_steps,
            opts: SolveOpts {
                rtol: config.solver_rtol,
                max_iter_factor: config.solver_max_iter_factor,
            },
            freeze_maxwell: false,
        })
    }

    /// Interpolate initial data: Ψ⁰ = I_hΨ₀, A⁰ = π_hA₀,
    /// A^{−1} = A⁰ − Δt·π_hA₁.
    pub fn initialize(&self) -> Result<(FieldState, Option<ChargeIntegralSource>), StepError> {
        let psi0 = interpolate_scalar(&self.ctx.scalar, &self.problem.psi0);
        let a0 = interpolate_vector(&self.ctx.vector, &self.problem.a0);
        let a1 = interpolate_vector(&self.ctx.vector, &self.problem.a1);
        let a_minus1 = a0.combine(1.0, &a1, -self.dt);

        let charge = match &self.problem.maxwell_source {
            MaxwellSource::ChargeIntegral { .. } => {
                Some(self.init_charge_integral(&psi0, &a0)?)
            }
            _ => None,
        };

        let state = FieldState {
            k: 0,
            t: 0.0,
            dt: self.dt,
            psi_prev: psi0.clone(),
            psi: psi0,
            a_prev2: a_minus1.clone(),
            a_prev: a_minus1,
            a: a0,
        };
        Ok((state, charge))
    }

    /// ρ(·,0) nodally and ρ_t(·,0) = 2 Im(Ψ₀* w) with M w = (½B(A⁰)+V₀M)Ψ⁰,
    /// the discrete weak form of the equation of motion at t = 0.
    fn init_charge_integral(
        &self,
        psi0: &ScalarField,
        a0: &VectorField,
    ) -> Result<ChargeIntegralSource, StepError> {
        let n = self.ctx.scalar.n_dofs();
        let rho0: Vec<f64> = psi0.coeffs.iter().map(|c| c.norm_sqr()).collect();

        let b0 = covariant_form(&self.ctx, a0);
        let mpsi = self.mass_s.matvec_complex(&psi0.coeffs);
        let bpsi = b0.matvec_alloc(&psi0.coeffs);
        let mut rhs: Vec<Complex64> = (0..n)
            .map(|i| 0.5 * bpsi[i] + self.ctx.v0 * mpsi[i])
            .collect();
        let mut mass_c = self.mass_s.clone();
        mass_c.apply_constraints(&self.ctx.scalar.dirichlet, 1.0);
        for (i, &d) in self.ctx.scalar.dirichlet.iter().enumerate() {
            if d {
                rhs[i] = Complex64::new(0.0, 0.0);
            }
        }
        let re: Vec<f64> = rhs.iter().map(|c| c.re).collect();
        let im: Vec<f64> = rhs.iter().map(|c| c.im).collect();
        let (wre, _) = solve_spd(&mass_c, &re, self.opts)
            .map_err(|source| StepError::Initialization { source })?;
        let (wim, _) = solve_spd(&mass_c, &im, self.opts)
            .map_err(|source| StepError::Initialization { source })?;

        let rho_t0: Vec<f64> = (0..n)
            .map(|i| {
                let w = Complex64::new(wre[i], wim[i]);
                2.0 * (psi0.coeffs[i].conj() * w).im
            })
            .collect();

        let mut charge = ChargeIntegralSource::new(n, self.dt);
        charge.set_initial(rho0, rho_t0);
        Ok(charge)
    }

    /// Maxwell update: returns A^k from the window at k−1. `charge_integral`
    /// supplies S(·,t_{k−1}) when the charge-integral source is active.
    pub fn maxwell_step(
        &self,
        state: &FieldState,
        charge_integral: Option<&[f64]>,
    ) -> Result<(VectorField, SolveReport), StepError> {
        let step = state.k + 1;
        let dt = self.dt;
        let inv_dt2 = 1.0 / (dt * dt);
        let n = self.ctx.vector.n_dofs();

        let m_rho = density_mass(&self.ctx, &state.psi);

        let mut lhs = self.dmat.clone();
        lhs.scale(0.5);
        lhs.add_scaled(&self.mass_v, inv_dt2);
        lhs.add_scaled(&m_rho, 0.25);

        // source term (g^{k−1}, v)
        let mut rhs = match &self.problem.maxwell_source {
            MaxwellSource::None => vec![0.0; n],
            MaxwellSource::Analytic(g) => {
                let t_prev = state.t;
                vector_load(&self.ctx, |x| g(x, t_prev))
            }
            MaxwellSource::ChargeIntegral { div_a0 } => {
                let s = charge_integral.expect("charge-integral source requires S history");
                charge_source_load(&self.ctx, s, div_a0)
            }
        };

        // − (f(Ψ^{k−1},Ψ^{k−1}), v)
        let fcur = current_load(&self.ctx, &state.psi);
        for i in 0..n {
            rhs[i] -= fcur[i];
        }
        // + (1/Δt²) M_v (2A^{k−1} − A^{k−2})
        let tmp = state.a.combine(2.0, &state.a_prev, -1.0);
        let mv = self.mass_v.matvec_alloc(&tmp.coeffs);
        for i in 0..n {
            rhs[i] += inv_dt2 * mv[i];
        }
        // − ½ D A^{k−2}
        let dv = self.dmat.matvec_alloc(&state.a_prev.coeffs);
        for i in 0..n {
            rhs[i] -= 0.5 * dv[i];
        }
        // − ¼ M_ρ (2A^{k−1} + A^{k−2})
        let tmp = state.a.combine(2.0, &state.a_prev, 1.0);
        let mrv = m_rho.matvec_alloc(&tmp.coeffs);
        for i in 0..n {
            rhs[i] -= 0.25 * mrv[i];
        }

        lhs.apply_constraints(&self.ctx.vector.constrained, 1.0);
        for (i, &c) in self.ctx.vector.constrained.iter().enumerate() {
            if c {
                rhs[i] = 0.0;
            }
        }

        let (coeffs, report) =
            solve_spd(&lhs, &rhs, self.opts).map_err(|source| StepError::Maxwell { step, source })?;
        Ok((
            VectorField {
                space: self.ctx.vector.clone(),
                coeffs,
            },
            report,
        ))
    }

    /// Schrödinger update: returns Ψ^k given the fresh A^k, together with
    /// the assembled B(Ā^k) (reused by the energy diagnostic).
    pub fn schrodinger_step(
        &self,
        state: &FieldState,
        a_new: &VectorField,
    ) -> Result<(ScalarField, CsrMatrix<Complex64>, SolveReport), StepError> {
        let step = state.k + 1;
        let dt = self.dt;
        let n = self.ctx.scalar.n_dofs();
        let abar = a_new.combine(0.5, &state.a, 0.5);
        let bbar = covariant_form(&self.ctx, &abar);

        // L = ¼B + (V₀/2 − i/Δt) M
        let mut lhs = bbar.clone();
        lhs.scale(Complex64::new(0.25, 0.0));
        lhs.add_scaled_real(&self.mass_s, Complex64::new(0.5 * self.ctx.v0, -1.0 / dt));

        // rhs = (−i/Δt − V₀/2) MΨ^{k−1} − ¼BΨ^{k−1} + (f_src^{k−1/2}, φ)
        let mpsi = self.mass_s.matvec_complex(&state.psi.coeffs);
        let bpsi = bbar.matvec_alloc(&state.psi.coeffs);
        let mfac = Complex64::new(-0.5 * self.ctx.v0, -1.0 / dt);
        let mut rhs: Vec<Complex64> = (0..n).map(|i| mfac * mpsi[i] - 0.25 * bpsi[i]).collect();
        if let Some(src) = &self.problem.schrodinger_source {
            let t_mid = state.t + 0.5 * dt;
            let load = scalar_load(&self.ctx, |x| src(x, t_mid));
            for i in 0..n {
                rhs[i] += load[i];
            }
        }

        lhs.apply_constraints(&self.ctx.scalar.dirichlet, Complex64::new(1.0, 0.0));
        for (i, &d) in self.ctx.scalar.dirichlet.iter().enumerate() {
            if d {
                rhs[i] = Complex64::new(0.0, 0.0);
            }
        }

        let (coeffs, report) = solve_complex(&lhs, &rhs, self.opts)
            .map_err(|source| StepError::Schrodinger { step, source })?;
        Ok((
            ScalarField {
                space: self.ctx.scalar.clone(),
                coeffs,
            },
            bbar,
            report,
        ))
    }

    /// Mass, energy and H¹ norms for the current window. `bbar` must be
    /// B(Ā^k) for the window's (A^k, A^{k−1}).
    pub fn compute_diagnostics(
        &self,
        state: &FieldState,
        bbar: &CsrMatrix<Complex64>,
        maxwell: Option<SolveReport>,
        schrodinger: Option<SolveReport>,
    ) -> DiagnosticsRow {
        let psi = &state.psi.coeffs;
        let mpsi = self.mass_s.matvec_complex(psi);
        let mass_c: Complex64 = psi.iter().zip(&mpsi).map(|(p, m)| p.conj() * m).sum();
        let bpsi = bbar.matvec_alloc(psi);
        let bquad: Complex64 = psi.iter().zip(&bpsi).map(|(p, b)| p.conj() * b).sum();
        debug_assert!(bquad.im.abs() <= 1e-10 * bquad.re.abs().max(1.0));

        let da: Vec<f64> = state
            .a
            .coeffs
            .iter()
            .zip(&state.a_prev.coeffs)
            .map(|(&x, &y)| (x - y) / state.dt)
            .collect();
        let mda = self.mass_v.matvec_alloc(&da);
        let kinetic: f64 = da.iter().zip(&mda).map(|(x, y)| x * y).sum();
        let d_now = quad_form(&self.dmat, &state.a.coeffs);
        let d_prev = quad_form(&self.dmat, &state.a_prev.coeffs);

        let mass = mass_c.re;
        let energy =
            0.5 * bquad.re + 0.25 * d_now + 0.25 * d_prev + self.ctx.v0 * mass + 0.5 * kinetic;

        let psi_norms = scalar_field_norms(&state.psi);
        let a_norms = vector_field_norms(&state.a);

        DiagnosticsRow {
            k: state.k,
            t: state.t,
            mass,
            energy,
            psi_h1: psi_norms.h1(),
            a_ht1: a_norms.ht1(),
            maxwell,
            schrodinger,
        }
    }

    /// Run the full loop; `on_step` sees every state (including k = 0)
    /// right after its diagnostics row is computed.
    pub fn run(
        &self,
        mut on_step: impl FnMut(&FieldState, &DiagnosticsRow),
    ) -> Result<RunSummary, StepError> {
        let (mut state, mut charge) = self.initialize()?;
        let mut rows = Vec::with_capacity(self.n_steps + 1);

        let abar0 = state.a.combine(0.5, &state.a_prev, 0.5);
        let b0 = covariant_form(&self.ctx, &abar0);
        let row0 = self.compute_diagnostics(&state, &b0, None, None);
        on_step(&state, &row0);
        rows.push(row0);

        for k in 1..=self.n_steps {
            let (a_new, maxwell_report) = if self.freeze_maxwell {
                (
                    state.a.clone(),
                    SolveReport {
                        iterations: 0,
                        relative_residual: 0.0,
                        converged: true,
                    },
                )
            } else {
                self.maxwell_step(&state, charge.as_ref().map(|c| c.integral()))?
            };
            let (psi_new, bbar, schrodinger_report) = self.schrodinger_step(&state, &a_new)?;

            state = FieldState {
                k,
                t: k as f64 * self.dt,
                dt: self.dt,
                psi_prev: std::mem::replace(&mut state.psi, ScalarField::zero(&self.ctx.scalar)),
                psi: psi_new,
                a_prev2: std::mem::replace(&mut state.a_prev, VectorField::zero(&self.ctx.vector)),
                a_prev: std::mem::replace(&mut state.a, VectorField::zero(&self.ctx.vector)),
                a: a_new,
            };

            if let Some(c) = charge.as_mut() {
                let rho: Vec<f64> = state.psi.coeffs.iter().map(|v| v.norm_sqr()).collect();
                c.advance(rho);
            }

            let row = self.compute_diagnostics(
                &state,
                &bbar,
                Some(maxwell_report),
                Some(schrodinger_report),
            );
            on_step(&state, &row);
            rows.push(row);
        }

        Ok(RunSummary {
            rows,
            final_state: state,
        })
    }
}

fn quad_form(m: &CsrMatrix<f64>, x: &[f64]) -> f64 {
    let mx = m.matvec_alloc(x);
    x.iter().zip(&mx).map(|(a, b)| a * b).sum()
}
