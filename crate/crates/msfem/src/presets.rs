//! Problem presets: the three reference setups plus a zero-source variant
//! for conservation checks.

use crate::config::{ConfigError, SimulationConfig};
use crate::mms;
use crate::stepper::{MaxwellSource, Problem};
use num_complex::Complex64;
use std::sync::Arc;

pub struct PresetInfo {
    pub id: &'static str,
    pub summary: &'static str,
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        id: "example51",
        summary: "ground-state wave packet with a polynomial vector potential; \
                  the Maxwell source is the charge-integral reduction \
                  (T=0.5, dt=0.0025, V0=0, gamma=1)",
    },
    PresetInfo {
        id: "conservation",
        summary: "same initial data as example51 but zero Maxwell source; \
                  mass and discrete energy are conserved exactly \
                  (T=0.125, dt=0.0025, V0=0)",
    },
    PresetInfo {
        id: "example52",
        summary: "manufactured smooth solution with known sources for \
                  convergence studies (T=4, gamma=1, V0=5)",
    },
    PresetInfo {
        id: "example53",
        summary: "ground-state wave packet driven by a rotating external \
                  current (T=10, dt=0.0025, V0=0, gamma=1)",
    },
    PresetInfo {
        id: "custom",
        summary: "zero initial data and zero sources; pair with the library \
                  API to supply your own problem",
    },
];

fn ground_mode(x: [f64; 3]) -> Complex64 {
    let pi = std::f64::consts::PI;
    Complex64::new(
        2.0 * 2.0f64.sqrt() * (pi * x[0]).sin() * (pi * x[1]).sin() * (pi * x[2]).sin(),
        0.0,
    )
}

fn polynomial_a0(x: [f64; 3]) -> [f64; 3] {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    [
        10.0 * x1 * x2 * x3 * (1.0 - x2) * (1.0 - x3),
        10.0 * x1 * x2 * x3 * (1.0 - x1) * (1.0 - x3),
        10.0 * x1 * x2 * x3 * (1.0 - x1) * (1.0 - x2),
    ]
}

/// Hand-coded ∇·A₀ for the polynomial initial potential.
fn polynomial_div_a0(x: [f64; 3]) -> f64 {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    10.0 * (x2 * x3 * (1.0 - x2) * (1.0 - x3)
        + x1 * x3 * (1.0 - x1) * (1.0 - x3)
        + x1 * x2 * (1.0 - x1) * (1.0 - x2))
}

/// A fresh configuration carrying a preset's defaults.
pub fn preset(id: &str) -> SimulationConfig {
    let mut config = SimulationConfig::default();
    apply_preset_defaults(&mut config, id)
        .unwrap_or_else(|e| panic!("not a preset id: {e}"));
    config
}

/// Overlay preset-specific defaults (time window, physics constants) onto a
/// configuration; explicit user overrides should be applied afterwards.
pub fn apply_preset_defaults(config: &mut SimulationConfig, id: &str) -> Result<(), ConfigError> {
    config.problem = id.to_string();
    match id {
        "example51" => {
            config.t_final = 0.5;
            config.dt = 0.0025;
            config.v0 = 0.0;
            config.gamma = 1.0;
            config.fe_degree = 1;
        }
        "conservation" => {
            config.t_final = 0.125;
            config.dt = 0.0025;
            config.v0 = 0.0;
            config.gamma = 1.0;
            config.fe_degree = 1;
        }
        "example52" => {
            config.t_final = 4.0;
            config.dt = 0.05;
            config.v0 = 5.0;
            config.gamma = 1.0;
            config.fe_degree = 2;
        }
        "example53" => {
            config.t_final = 10.0;
            config.dt = 0.0025;
            config.v0 = 0.0;
            config.gamma = 1.0;
            config.fe_degree = 1;
        }
        "custom" => {}
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    }
    Ok(())
}

/// Build the Problem for a configuration's preset id.
pub fn build_problem(config: &SimulationConfig) -> Result<Problem, ConfigError> {
    match config.problem.as_str() {
        "example51" => Ok(Problem {
            name: "example51".to_string(),
            psi0: Box::new(ground_mode),
            a0: Box::new(polynomial_a0),
            a1: Box::new(|_| [0.0; 3]),
            maxwell_source: MaxwellSource::ChargeIntegral {
                div_a0: Box::new(polynomial_div_a0),
            },
            schrodinger_source: None,
        }),
        "conservation" => Ok(Problem {
            name: "conservation".to_string(),
            psi0: Box::new(ground_mode),
            a0: Box::new(polynomial_a0),
            a1: Box::new(|_| [0.0; 3]),
            maxwell_source: MaxwellSource::None,
            schrodinger_source: None,
        }),
        "example52" => {
            let mut exact = mms::example52();
            exact.gamma = config.gamma;
            exact.v0 = config.v0;
            Ok(mms::manufactured_problem(Arc::new(exact)))
        }
        "example53" => Ok(Problem {
            name: "example53".to_string(),
            psi0: Box::new(ground_mode),
            a0: Box::new(|_| [0.0; 3]),
            a1: Box::new(|_| [0.0; 3]),
            maxwell_source: MaxwellSource::Analytic(Box::new(|_, t| {
                let phase = 1.5 * std::f64::consts::PI.powi(2) * t;
                [10.0 * phase.sin(), 10.0 * phase.sin(), 10.0 * phase.cos()]
            })),
            schrodinger_source: None,
        }),
        "custom" => Ok(Problem::trivial()),
        other => Err(ConfigError::UnknownPreset(other.to_string())),
    }
}
