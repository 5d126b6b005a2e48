//! Run configuration: JSON ingestion, validation and built-in presets.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{SystemParams, DEFAULT_EPSILON};
use crate::error::{invalid, Error, Result};
use crate::levels::{Level, Transition};
use crate::relphase::trapping_config;

pub const PRESET_NAMES: [&str; 4] = ["fig2", "fig3a", "fig3b", "fig4"];

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_transitions() -> Vec<Transition> {
    Transition::ALL.to_vec()
}

/// One scenario. Amplitudes `c` are written as `[[re, im], [re, im], [re, im]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub g_a: f64,
    pub g_b: f64,
    #[serde(default)]
    pub delta_a: f64,
    #[serde(default)]
    pub delta_b: f64,
    pub nbar_a: f64,
    pub nbar_b: f64,
    pub c: [[f64; 2]; 3],
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub tau_max: f64,
    pub tau_steps: usize,
    #[serde(default = "default_transitions")]
    pub transitions: Vec<Transition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_params(params: &SystemParams, tau_max: f64, tau_steps: usize) -> Self {
        RunConfig {
            g_a: params.g_a,
            g_b: params.g_b,
            delta_a: params.delta_a,
            delta_b: params.delta_b,
            nbar_a: params.nbar_a,
            nbar_b: params.nbar_b,
            c: params.c.map(|z| [z.re, z.im]),
            epsilon: params.epsilon,
            tau_max,
            tau_steps,
            transitions: default_transitions(),
            csv: None,
            svg: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn params(&self) -> SystemParams {
        SystemParams {
            g_a: self.g_a,
            g_b: self.g_b,
            delta_a: self.delta_a,
            delta_b: self.delta_b,
            nbar_a: self.nbar_a,
            nbar_b: self.nbar_b,
            c: self.c.map(|[re, im]| C64::new(re, im)),
            epsilon: self.epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if !(self.g_a > 0.0) {
            return Err(invalid("g_a", "must be positive to define the rescaled time"));
        }
        if !(self.nbar_a > 0.0) {
            return Err(invalid("nbar_a", "must be positive to define the rescaled time"));
        }
        if !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return Err(invalid("tau_max", "must be positive and finite"));
        }
        if self.tau_steps < 2 {
            return Err(invalid("tau_steps", "must be at least 2"));
        }
        if self.transitions.is_empty() {
            return Err(invalid("transitions", "must name at least one transition"));
        }
        for (k, t) in self.transitions.iter().enumerate() {
            if self.transitions[..k].contains(t) {
                return Err(invalid("transitions", format!("{t} is listed twice")));
            }
        }
        Ok(())
    }

    /// Requested transitions in canonical column order.
    pub fn ordered_transitions(&self) -> Vec<Transition> {
        Transition::ALL.into_iter().filter(|t| self.transitions.contains(t)).collect()
    }

    /// `τ_k = τ_max k / (steps − 1)`.
    pub fn tau_grid(&self) -> Vec<f64> {
        let last = (self.tau_steps - 1) as f64;
        (0..self.tau_steps).map(|k| self.tau_max * k as f64 / last).collect()
    }

    /// Inverts `τ = g_a t / (2π √n̄_a)`.
    pub fn time_of(&self, tau: f64) -> f64 {
        tau_to_time(tau, self.g_a, self.nbar_a)
    }
}

pub fn tau_to_time(tau: f64, g_a: f64, nbar_a: f64) -> f64 {
    tau * 2.0 * PI * nbar_a.sqrt() / g_a
}

pub fn time_to_tau(t: f64, g_a: f64, nbar_a: f64) -> f64 {
    g_a * t / (2.0 * PI * nbar_a.sqrt())
}

/// Built-in scenarios, all with unit couplings and zero detunings.
///
/// | name  | n̄_a | n̄_b | atom            | τ range | steps |
/// |-------|-----|-----|-----------------|---------|-------|
/// | fig2  | 1   | 1   | `|1⟩`           | [0, 2]  | 2001  |
/// | fig3a | 50  | 0.5 | `|1⟩`           | [0, 3]  | 6001  |
/// | fig3b | 50  | 50  | `|1⟩`           | [0, 3]  | 6001  |
/// | fig4  | 50  | 50  | `(|1⟩−|2⟩)/√2`  | [0, 3]  | 6001  |
pub fn preset(name: &str) -> Result<RunConfig> {
    let atom1 = SystemParams::ground(Level::One);
    let cfg = match name {
        "fig2" => RunConfig::from_params(&SystemParams::resonant(1.0, 1.0, 1.0, atom1), 2.0, 2001),
        "fig3a" => RunConfig::from_params(&SystemParams::resonant(1.0, 50.0, 0.5, atom1), 3.0, 6001),
        "fig3b" => RunConfig::from_params(&SystemParams::resonant(1.0, 50.0, 50.0, atom1), 3.0, 6001),
        "fig4" => RunConfig::from_params(&trapping_config(PI, 50.0), 3.0, 6001),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(cfg)
}
