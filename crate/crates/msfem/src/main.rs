//! Command-line driver: run simulations, convergence studies, and list the
//! problem presets.
//!
//! Exit codes: 0 success, 1 requested check failed, 2 configuration error,
//! 3 runtime (solver or I/O) error.

use clap::{Args, Parser, Subcommand};
use msfem::config::SimulationConfig;
use msfem::mms::{self, DtRule, StudyConfig};
use msfem::output::{emit_vtk, write_diagnostics_csv, write_text, LineSampler};
use msfem::presets;
use msfem::stepper::Simulation;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "msfem",
    about = "Crank-Nicolson Lagrange finite element solver for the \
             time-dependent Maxwell-Schrödinger system on the unit cube"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-step a configured problem and emit diagnostics
    Run(RunArgs),
    /// Refinement study against the manufactured solution
    Converge(ConvergeArgs),
    /// List problem presets
    PresetList,
}

#[derive(Args)]
struct CommonConfig {
    /// Problem preset (see preset-list)
    #[arg(long)]
    preset: Option<String>,
    /// Configuration file in flat key=value form
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. --set solver.rtol=1e-11
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Subcubes per axis (mesh.M)
    #[arg(long = "M")]
    mesh_m: Option<usize>,
    /// Element degree 1 or 2 (fe.degree)
    #[arg(long)]
    degree: Option<usize>,
    /// Time step (time.dt)
    #[arg(long)]
    dt: Option<f64>,
    /// Final time (time.T)
    #[arg(long = "T")]
    t_final: Option<f64>,
    /// Penalty factor (physics.gamma)
    #[arg(long)]
    gamma: Option<f64>,
    /// Constant potential (physics.V0)
    #[arg(long = "V0")]
    v0: Option<f64>,
    /// Solver relative tolerance (solver.rtol)
    #[arg(long)]
    rtol: Option<f64>,
}

impl CommonConfig {
    fn build(&self) -> Result<SimulationConfig, String> {
        let mut config = SimulationConfig::default();
        if let Some(preset) = &self.preset {
            presets::apply_preset_defaults(&mut config, preset).map_err(|e| e.to_string())?;
        }
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            config.apply_text(&text).map_err(|e| e.to_string())?;
        }
        for pair in &self.sets {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| format!("--set expects KEY=VALUE, got {pair:?}"))?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| e.to_string())?;
        }
        if let Some(m) = self.mesh_m {
            config.mesh_m = m;
        }
        if let Some(d) = self.degree {
            config.fe_degree = d;
        }
        if let Some(dt) = self.dt {
            config.dt = dt;
        }
        if let Some(t) = self.t_final {
            config.t_final = t;
        }
        if let Some(g) = self.gamma {
            config.gamma = g;
        }
        if let Some(v) = self.v0 {
            config.v0 = v;
        }
        if let Some(r) = self.rtol {
            config.solver_rtol = r;
        }
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Diagnostics CSV path (overrides output.csv_path)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Emit a VTK snapshot every N steps (overrides output.vtk_every)
    #[arg(long)]
    vtk_every: Option<usize>,
    /// Prefix for VTK snapshot files
    #[arg(long, default_value = "snapshot")]
    vtk_prefix: String,
    /// Density line-sample CSV along the main diagonal
    #[arg(long)]
    line_csv: Option<PathBuf>,
    /// Density probe CSV at the three reference points
    #[arg(long)]
    probes_csv: Option<PathBuf>,
    /// Conservation checks to enforce (mass, energy); failure exits nonzero
    #[arg(long = "check")]
    checks: Vec<String>,
    /// Relative drift tolerance for --check
    #[arg(long, default_value_t = 1e-8)]
    check_tol: f64,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: CommonConfig,
    /// Comma-separated mesh sizes, e.g. 4,8,16
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<usize>,
    /// Time-step rule: h, sqrt-h, or fixed:<dt>
    #[arg(long)]
    dt_rule: Option<String>,
    /// Comma-separated report times (uniformly spaced multiples of the first)
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
    /// Write the study table to this CSV path (also printed to stdout)
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::Converge(args) => converge_command(args),
        Command::PresetList => {
            for p in presets::PRESETS {
                println!("{:<14} {}", p.id, p.summary);
            }
            ExitCode::SUCCESS
        }
    }
}

fn run_command(args: RunArgs) -> ExitCode {
    let mut config = match args.common.build() {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Some(csv) = &args.csv {
        config.csv_path = csv.display().to_string();
    }
    if let Some(v) = args.vtk_every {
        config.vtk_every = v;
    }
    for check in &args.checks {
        if check != "mass" && check != "energy" {
            eprintln!("configuration error: unknown --check {check:?} (mass, energy)");
            return ExitCode::from(2);
        }
    }

    let problem = match presets::build_problem(&config) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let sim = match Simulation::new(&config, problem) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };

    println!("# effective configuration");
    print!("{}", config.serialize());
    println!(
        "# effective dt = {} ({} steps to T = {})",
        sim.dt, sim.n_steps, config.t_final
    );

    let mut sampler = LineSampler::new(config.line_samples.max(2));
    let want_lines = args.line_csv.is_some() || args.probes_csv.is_some();
    let vtk_every = config.vtk_every;
    let vtk_prefix = args.vtk_prefix.clone();
    let mesh = sim.ctx.scalar.mesh.clone();
    let mut vtk_error: Option<msfem::output::OutputError> = None;

    let summary = sim.run(|state, row| {
        if want_lines {
            sampler.sample(state.t, &state.psi);
        }
        if vtk_every > 0 && state.k % vtk_every == 0 && vtk_error.is_none() {
            let path = PathBuf::from(format!("{vtk_prefix}_{:06}.vtk", state.k));
            if let Err(e) = emit_vtk(&path, &mesh, &state.psi, &state.a, "msfem snapshot") {
                vtk_error = Some(e);
            }
        }
        if state.k % 50 == 0 {
            eprintln!(
                "step {:>6}  t = {:<10.6}  mass = {:.12e}  energy = {:.12e}",
                state.k, state.t, row.mass, row.energy
            );
        }
    });

    let summary = match summary {
        Ok(s) => s,
        Err(e) => {
            eprintln!("runtime error: {e}");
            return ExitCode::from(3);
        }
    };
    if let Some(e) = vtk_error {
        eprintln!("runtime error: {e}");
        return ExitCode::from(3);
    }

    if !config.csv_path.is_empty() {
        if let Err(e) = write_diagnostics_csv(&PathBuf::from(&config.csv_path), &summary.rows) {
            eprintln!("runtime error: {e}");
            return ExitCode::from(3);
        }
    }
    if let Some(path) = &args.line_csv {
        if let Err(e) = sampler.write_line_csv(path) {
            eprintln!("runtime error: {e}");
            return ExitCode::from(3);
        }
    }
    if let Some(path) = &args.probes_csv {
        if let Err(e) = sampler.write_probes_csv(path) {
            eprintln!("runtime error: {e}");
            return ExitCode::from(3);
        }
    }

    let first = &summary.rows[0];
    let last = summary.rows.last().unwrap();
    println!(
        "# finished: {} steps, final mass {:.12e}, final energy {:.12e}",
        last.k, last.mass, last.energy
    );

    let mut failed = false;
    for check in &args.checks {
        let (label, reference) = match check.as_str() {
            "mass" => ("mass", first.mass),
            _ => ("energy", first.energy),
        };
        let scale = reference.abs().max(1e-300);
        let drift = summary
            .rows
            .iter()
            .map(|r| {
                let v = if label == "mass" { r.mass } else { r.energy };
                (v - reference).abs() / scale
            })
            .fold(0.0f64, f64::max);
        let ok = drift <= args.check_tol;
        println!(
            "# check {label}: initial {reference:.12e}, max relative drift {drift:.3e} \
             (tolerance {:.1e}) -> {}",
            args.check_tol,
            if ok { "OK" } else { "FAILED" }
        );
        failed |= !ok;
    }
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn converge_command(args: ConvergeArgs) -> ExitCode {
    let config = match args.common.build() {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            return ExitCode::from(2);
        }
    };
    let degree = config.fe_degree;
    let dt_rule = match args.dt_rule.as_deref() {
        None => {
            if degree == 1 {
                DtRule::SqrtH
            } else {
                DtRule::MatchH
            }
        }
        Some("h") => DtRule::MatchH,
        Some("sqrt-h") => DtRule::SqrtH,
        Some(other) => match other.strip_prefix("fixed:").and_then(|v| v.parse().ok()) {
            Some(v) => DtRule::Fixed(v),
            None => {
                eprintln!(
                    "configuration error: --dt-rule must be h, sqrt-h or fixed:<dt>, got {other:?}"
                );
                return ExitCode::from(2);
            }
        },
    };
    let report_times = if args.times.is_empty() {
        // default to integer report times up to T, table style
        let n = config.t_final.floor() as usize;
        if n >= 1 {
            (1..=n).map(|j| j as f64).collect()
        } else {
            vec![config.t_final]
        }
    } else {
        args.times.clone()
    };

    let mut exact = mms::example52();
    exact.gamma = config.gamma;
    exact.v0 = config.v0;
    let study = StudyConfig {
        degree,
        grid: args.grid.clone(),
        dt_rule,
        report_times,
        solver_rtol: config.solver_rtol,
    };
    eprintln!(
        "# verifying manufactured sources, then running grid {:?}",
        study.grid
    );
    let table = match mms::convergence_study(Arc::new(exact), &study) {
        Ok(t) => t,
        Err(mms::StudyError::Gate(e)) => {
            eprintln!("source gate error: {e}");
            return ExitCode::from(3);
        }
        Err(mms::StudyError::BadConfig(msg)) => {
            eprintln!("configuration error: {msg}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            return ExitCode::from(3);
        }
    };
    let csv = table.to_csv();
    print!("{csv}");
    for &t in &table.report_times {
        println!(
            "# t = {t}: EOC(A_H1) = {:?}, EOC(Psi_H1) = {:?}",
            table.eoc_at(t, |e| e.a_h1),
            table.eoc_at(t, |e| e.psi_h1)
        );
    }
    if let Some(path) = &args.csv {
        if let Err(e) = write_text(path, &csv) {
            eprintln!("runtime error: {e}");
            return ExitCode::from(3);
        }
    }
    ExitCode::SUCCESS
}
