//! Simulation configuration: a flat key=value text format plus programmatic
//! overrides. Unknown keys are rejected with a listing; `serialize` emits the
//! full normal form, and parse ∘ serialize is the identity.

use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    /// Subcubes per axis, h = 1/M.
    pub mesh_m: usize,
    /// Lagrange element degree, 1 or 2.
    pub fe_degree: usize,
    /// Requested time step (the ceil rule may shrink it to divide T).
    pub dt: f64,
    /// Final time.
    pub t_final: f64,
    /// Divergence penalty factor γ.
    pub gamma: f64,
    /// Constant potential V₀.
    pub v0: f64,
    /// Preset id or "custom".
    pub problem: String,
    /// Relative residual tolerance for both linear solvers.
    pub solver_rtol: f64,
    /// Iteration cap as a multiple of the system size.
    pub solver_max_iter_factor: usize,
    /// Diagnostics CSV destination; empty = stdout summary only.
    pub csv_path: String,
    /// Emit a VTK snapshot every N steps (0 = never).
    pub vtk_every: usize,
    /// Points per line sample along the main diagonal.
    pub line_samples: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            mesh_m: 8,
            fe_degree: 1,
            dt: 0.01,
            t_final: 1.0,
            gamma: 1.0,
            v0: 0.0,
            problem: "custom".to_string(),
            solver_rtol: 1e-10,
            solver_max_iter_factor: 10,
            csv_path: String::new(),
            vtk_every: 0,
            line_samples: 101,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("invalid value for {key}: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("malformed line {line}: expected key=value, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("unknown problem preset {0:?}; run `preset-list` for options")]
    UnknownPreset(String),
}

impl SimulationConfig {
    /// Parse a flat key=value text; '#' starts a comment, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = SimulationConfig::default();
        config.apply_text(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Apply key=value lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut unknown = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed {
                    line: lineno + 1,
                    text: raw.to_string(),
                });
            };
            match self.set(key.trim(), value.trim()) {
                Ok(()) => {}
                Err(ConfigError::UnknownKeys(mut k)) => unknown.append(&mut k),
                Err(e) => return Err(e),
            }
        }
        if !unknown.is_empty() {
            return Err(ConfigError::UnknownKeys(unknown));
        }
        Ok(())
    }

    /// Set a single key; used by the text parser and the CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
            v.parse().map_err(|_| ConfigError::InvalidValue {
                key: key.to_string(),
                reason: format!("cannot parse {v:?}"),
            })
        }
        match key {
            "mesh.M" => self.mesh_m = num(key, value)?,
            "fe.degree" => self.fe_degree = num(key, value)?,
            "time.dt" => self.dt = num(key, value)?,
            "time.T" => self.t_final = num(key, value)?,
            "physics.gamma" => self.gamma = num(key, value)?,
            "physics.V0" => self.v0 = num(key, value)?,
            "problem" => self.problem = value.to_string(),
            "solver.rtol" => self.solver_rtol = num(key, value)?,
            "solver.max_iter_factor" => self.solver_max_iter_factor = num(key, value)?,
            "output.csv_path" => self.csv_path = value.to_string(),
            "output.vtk_every" => self.vtk_every = num(key, value)?,
            "output.line_samples" => self.line_samples = num(key, value)?,
            _ => return Err(ConfigError::UnknownKeys(vec![key.to_string()])),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |key: &str, reason: String| {
            Err(ConfigError::InvalidValue {
                key: key.to_string(),
                reason,
            })
        };
        if self.mesh_m == 0 {
            return fail("mesh.M", "must be at least 1".into());
        }
        if self.fe_degree != 1 && self.fe_degree != 2 {
            return fail(
                "fe.degree",
                format!("{} unsupported; supported degrees are 1 and 2", self.fe_degree),
            );
        }
        if !(self.dt > 0.0) {
            return fail("time.dt", "must be positive".into());
        }
        if !(self.t_final > 0.0) {
            return fail("time.T", "must be positive".into());
        }
        if !(self.gamma > 0.0) {
            return fail("physics.gamma", "penalty factor must be positive".into());
        }
        if !(self.solver_rtol > 0.0) {
            return fail("solver.rtol", "must be positive".into());
        }
        if self.solver_max_iter_factor == 0 {
            return fail("solver.max_iter_factor", "must be at least 1".into());
        }
        Ok(())
    }

    /// Full normal form; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problem = {}", self.problem);
        let _ = writeln!(out, "mesh.M = {}", self.mesh_m);
        let _ = writeln!(out, "fe.degree = {}", self.fe_degree);
        let _ = writeln!(out, "time.dt = {}", self.dt);
        let _ = writeln!(out, "time.T = {}", self.t_final);
        let _ = writeln!(out, "physics.gamma = {}", self.gamma);
        let _ = writeln!(out, "physics.V0 = {}", self.v0);
        let _ = writeln!(out, "solver.rtol = {}", self.solver_rtol);
        let _ = writeln!(out, "solver.max_iter_factor = {}", self.solver_max_iter_factor);
        let _ = writeln!(out, "output.csv_path = {}", self.csv_path);
        let _ = writeln!(out, "output.vtk_every = {}", self.vtk_every);
        let _ = writeln!(out, "output.line_samples = {}", self.line_samples);
        out
    }

    /// Step count after the ceil rule: n = ceil(T/dt) unless T/dt is already
    /// an integer to 1e-9 relative.
    pub fn effective_steps(&self) -> usize {
        effective_steps(self.t_final, self.dt)
    }

    /// Time step actually used: T / effective_steps.
    pub fn effective_dt(&self) -> f64 {
        self.t_final / self.effective_steps() as f64
    }
}

/// Shared ceil rule for non-dividing time steps.
pub fn effective_steps(t_final: f64, dt: f64) -> usize {
    let q = t_final / dt;
    let r = q.round();
    let n = if (q - r).abs() <= 1e-9 * q.max(1.0) {
        r as usize
    } else {
        q.ceil() as usize
    };
    n.max(1)
}
