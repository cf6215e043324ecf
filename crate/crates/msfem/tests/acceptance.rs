//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see the lines for passing
//! criteria as well).
//!
//! 1. mass conservation over a charge-integral-sourced run
//! 2. discrete energy conservation with zero Maxwell source
//! 3. H¹ convergence orders, quadratic elements, Δt = h
//! 4. H¹ convergence orders, linear elements, Δt = √h
//! 5. dense-oracle equivalence of all operators and one full step
//! 6. covariant-form decomposition and difference identities
//! 7. manufactured-source residual gate (and the study refusing on failure)
//! 8. long-run stability envelope under a rotating external current

mod common;

use msfem::config::SimulationConfig;
use msfem::mms::{self, DtRule, StudyConfig};
use msfem::norms::vector_error_norms;
use msfem::presets;
use msfem::stepper::Simulation;
use std::sync::Arc;

fn verdict(n: usize, name: &str, pass: bool, details: &str) {
    println!(
        "acceptance {n} ({name}): {} — {details}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {n} ({name}) failed: {details}");
}

fn preset_config(id: &str) -> SimulationConfig {
    let mut config = SimulationConfig::default();
    presets::apply_preset_defaults(&mut config, id).unwrap();
    config
}

#[test]
fn acceptance_1_mass_conservation() {
    // example51 at M=8, r=1, dt=0.0025, T=0.1 (40 steps)
    let mut config = preset_config("example51");
    config.mesh_m = 8;
    config.t_final = 0.1;
    let problem = presets::build_problem(&config).unwrap();
    let sim = Simulation::new(&config, problem).unwrap();
    assert_eq!(sim.n_steps, 40);
    let summary = sim.run(|_, _| {}).unwrap();
    let m0 = summary.rows[0].mass;
    let drift = summary
        .rows
        .iter()
        .map(|r| (r.mass - m0).abs() / m0)
        .fold(0.0f64, f64::max);
    verdict(
        1,
        "mass conservation",
        drift <= 1e-8,
        &format!("max relative mass drift {drift:.3e} over 40 steps (tolerance 1e-8)"),
    );
}

#[test]
fn acceptance_2_energy_conservation_zero_source() {
    // example51 initial data, g = 0, V0 = 0, M = 8, 50 steps
    let mut config = preset_config("conservation");
    config.mesh_m = 8;
    config.t_final = 50.0 * config.dt;
    let problem = presets::build_problem(&config).unwrap();
    let sim = Simulation::new(&config, problem).unwrap();
    assert_eq!(sim.n_steps, 50);
    let summary = sim.run(|_, _| {}).unwrap();
    let e0 = summary.rows[0].energy;
    let drift = summary
        .rows
        .iter()
        .map(|r| (r.energy - e0).abs() / e0.abs())
        .fold(0.0f64, f64::max);
    verdict(
        2,
        "energy conservation",
        drift <= 1e-8,
        &format!("max relative energy drift {drift:.3e} over 50 steps (tolerance 1e-8)"),
    );
}

fn eoc_details(
    table: &mms::StudyTable,
    psi_band: (f64, f64),
    a_band: (f64, f64),
) -> (bool, String) {
    let t = *table.report_times.last().unwrap();
    let psi = table.eoc_at(t, |e| e.psi_h1);
    let a = table.eoc_at(t, |e| e.a_h1);
    let in_band = |v: &[f64], lo: f64, hi: f64| v.iter().all(|&x| x >= lo && x <= hi);
    let pass = in_band(&psi, psi_band.0, psi_band.1) && in_band(&a, a_band.0, a_band.1);
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    (
        pass,
        format!(
            "EOC(Psi_H1) = [{}], EOC(A_H1) = [{}], band [{}, {}]",
            fmt(&psi),
            fmt(&a),
            psi_band.0,
            psi_band.1
        ),
    )
}

#[test]
fn acceptance_3_convergence_quadratic_elements() {
    let study = StudyConfig {
        degree: 2,
        grid: vec![4, 8, 16],
        dt_rule: DtRule::MatchH,
        report_times: vec![1.0],
        solver_rtol: 1e-10,
    };
    let table = mms::convergence_study(Arc::new(mms::example52()), &study).unwrap();
    let (pass, details) = eoc_details(&table, (1.7, 2.2), (1.7, 2.2));
    verdict(3, "quadratic-element convergence", pass, &details);
}

#[test]
fn acceptance_4_convergence_linear_elements() {
    let study = StudyConfig {
        degree: 1,
        grid: vec![4, 8, 16],
        dt_rule: DtRule::SqrtH,
        report_times: vec![1.0],
        solver_rtol: 1e-10,
    };
    let table = mms::convergence_study(Arc::new(mms::example52()), &study).unwrap();
    let (pass, details) = eoc_details(&table, (0.8, 1.2), (0.8, 1.2));
    verdict(4, "linear-element convergence", pass, &details);
}

#[test]
fn acceptance_5_dense_oracle_equivalence() {
    let mut worst_op = 0.0f64;
    let mut worst_name = "";
    for degree in [1, 2] {
        for (name, gap) in common::operator_gaps_m1(degree) {
            if gap > worst_op {
                worst_op = gap;
                worst_name = name;
            }
        }
    }
    let (mw1, sc1) = common::one_step_gaps(1, 2);
    let (mw2, sc2) = common::one_step_gaps(2, 1);
    let worst_step = mw1.max(sc1).max(mw2).max(sc2);
    verdict(
        5,
        "dense-oracle equivalence",
        worst_op <= 1e-12 && worst_step <= 1e-9,
        &format!(
            "worst operator entry gap {worst_op:.2e} ({worst_name}; tolerance 1e-12), \
             worst one-step gap {worst_step:.2e} (tolerance 1e-9)"
        ),
    );
}

#[test]
fn acceptance_6_covariant_form_identities() {
    let decomposition = common::decomposition_identity_worst(100);
    let difference = common::difference_identity_worst(100);
    verdict(
        6,
        "covariant-form identities",
        decomposition <= 1e-12 && difference <= 1e-10,
        &format!(
            "decomposition worst {decomposition:.2e} (tolerance 1e-12), \
             difference worst {difference:.2e} relative (tolerance 1e-10), 100 trials each"
        ),
    );
}

#[test]
fn acceptance_7_source_residual_gate() {
    let ok = mms::verify_sources(&mms::example52(), 20, 1e-4).is_ok();

    // the study must refuse to run when the gate fails
    let mut broken = mms::example52();
    broken.grad_div_a = Box::new(|_, _| [0.0; 3]);
    let refused = matches!(
        mms::convergence_study(
            Arc::new(broken),
            &StudyConfig {
                degree: 1,
                grid: vec![2, 4],
                dt_rule: DtRule::MatchH,
                report_times: vec![0.5],
                solver_rtol: 1e-8,
            },
        ),
        Err(mms::StudyError::Gate(_))
    );
    verdict(
        7,
        "manufactured-source gate",
        ok && refused,
        &format!(
            "20 samples at 1e-4 relative: {}; study refuses on sabotaged sources: {}",
            if ok { "clean" } else { "residual too large" },
            refused
        ),
    );
}

#[test]
fn acceptance_8_stability_envelope() {
    // example53 at M=8: T=10, dt=0.0025 (4000 steps), rotating source
    let mut config = preset_config("example53");
    config.mesh_m = 8;
    let problem = presets::build_problem(&config).unwrap();
    let sim = Simulation::new(&config, problem).unwrap();
    assert_eq!(sim.n_steps, 4000);

    let summary = sim.run(|_, _| {}).unwrap();
    let all_converged = summary.rows.iter().all(|r| {
        r.maxwell.map_or(true, |s| s.converged) && r.schrodinger.map_or(true, |s| s.converged)
    });

    let median = |mut v: Vec<f64>| -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let psi_norms: Vec<f64> = summary.rows.iter().map(|r| r.psi_h1).collect();
    let a_norms: Vec<f64> = summary.rows.iter().map(|r| r.a_ht1).collect();
    let psi_max = psi_norms.iter().cloned().fold(0.0f64, f64::max);
    let a_max = a_norms.iter().cloned().fold(0.0f64, f64::max);
    let psi_med = median(psi_norms);
    let a_med = median(a_norms);
    let finite = psi_max.is_finite() && a_max.is_finite();
    let bounded = psi_max <= 10.0 * psi_med && a_max <= 10.0 * a_med;

    // energy stays within the source-driven envelope: |G| ≤ 10(|G0| + T² max‖g‖²)
    let e0 = summary.rows[0].energy;
    let g_norm_sq_max = {
        // ‖g(t)‖² over Ω by quadrature of the known source at each report step
        let problem_g = |t: f64| {
            let phase = 1.5 * std::f64::consts::PI.powi(2) * t;
            let g = [10.0 * phase.sin(), 10.0 * phase.sin(), 10.0 * phase.cos()];
            // constant in space: ‖g‖² = |g|²·|Ω|
            g[0] * g[0] + g[1] * g[1] + g[2] * g[2]
        };
        summary
            .rows
            .iter()
            .map(|r| problem_g(r.t))
            .fold(0.0f64, f64::max)
    };
    let t_final = config.t_final;
    let scale = e0.abs() + t_final * t_final * g_norm_sq_max;
    let energy_bounded = summary
        .rows
        .iter()
        .all(|r| r.energy.abs() <= 10.0 * scale);

    verdict(
        8,
        "stability envelope",
        finite && bounded && all_converged && energy_bounded,
        &format!(
            "max/median H¹ norms: Psi {psi_max:.3e}/{psi_med:.3e}, A {a_max:.3e}/{a_med:.3e} \
             (bound 10×); all solver reports converged: {all_converged}; \
             |energy| ≤ 10×(|G0| + T²max‖g‖²) = {:.3e}: {energy_bounded}",
            10.0 * scale
        ),
    );
}

/// Extended run at reference-table resolution (several minutes; opt in with
/// `--ignored`). Quadratic elements at M = 25, Δt = h, t = 1.0: the combined
/// vector-potential error lands within a factor 1.5 of 3.377e-2, and the two
/// finest desk pairs have settled.
#[test]
#[ignore = "several-minute extended run; not part of the desk-scale gate"]
fn extended_reference_scale_anchor() {
    let exact = Arc::new(mms::example52());
    let mut config = SimulationConfig::default();
    config.mesh_m = 25;
    config.fe_degree = 2;
    config.dt = 0.04;
    config.t_final = 1.0;
    config.gamma = exact.gamma;
    config.v0 = exact.v0;
    let sim = Simulation::new(&config, mms::manufactured_problem(exact.clone())).unwrap();
    let summary = sim.run(|_, _| {}).unwrap();
    let e = mms::compute_errors(
        &summary.final_state.psi,
        &summary.final_state.a,
        &exact,
        1.0,
    );
    let reference = 3.3770e-2;
    let ratio = (e.a_h1 / reference).max(reference / e.a_h1);
    println!("extended anchor: errA_H1 = {:.4e} (reference {reference:.4e}, ratio {ratio:.2})", e.a_h1);
    assert!(ratio <= 1.5, "errA_H1 {:.4e} too far from {reference:.4e}", e.a_h1);
}

#[test]
fn stability_across_refinement() {
    // H¹ norms stay bounded as the mesh refines at fixed T (short horizon)
    let mut maxima = Vec::new();
    for m in [4usize, 8, 16] {
        let mut config = preset_config("example53");
        config.mesh_m = m;
        config.dt = 0.01;
        config.t_final = 0.5;
        let problem = presets::build_problem(&config).unwrap();
        let sim = Simulation::new(&config, problem).unwrap();
        let summary = sim.run(|_, _| {}).unwrap();
        let psi_max = summary.rows.iter().map(|r| r.psi_h1).fold(0.0f64, f64::max);
        let a_max = summary.rows.iter().map(|r| r.a_ht1).fold(0.0f64, f64::max);
        maxima.push((m, psi_max, a_max));
    }
    for w in maxima.windows(2) {
        let (m0, p0, a0) = w[0];
        let (m1, p1, a1) = w[1];
        assert!(
            p1 <= 3.0 * p0 + 1.0 && a1 <= 3.0 * a0 + 1.0,
            "norm growth under refinement {m0}->{m1}: Psi {p0:.3e}->{p1:.3e}, A {a0:.3e}->{a1:.3e}"
        );
    }
    // l2/div/curl split stays sane on the finest level
    let mut config = preset_config("example53");
    config.mesh_m = 16;
    config.dt = 0.01;
    config.t_final = 0.2;
    let problem = presets::build_problem(&config).unwrap();
    let sim = Simulation::new(&config, problem).unwrap();
    let summary = sim.run(|_, _| {}).unwrap();
    let n = vector_error_norms(&summary.final_state.a, |_| [0.0; 3], |_| 0.0, |_| [0.0; 3]);
    assert!(n.ht1().is_finite());
}
