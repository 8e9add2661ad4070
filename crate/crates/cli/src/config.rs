//! Run configuration in physical units and its conversion to the
//! dimensionless core parameters.
//!
//! Frequencies are given in kHz and multiplied by 2π, times in ms, so the
//! core works in rad/ms and ms throughout.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use inertial_core::protocol::{
    DEFAULT_MU_FLOOR, REFERENCE_DELTAS, REFERENCE_SAMPLES, REFERENCE_T_FINAL,
};
use inertial_core::{Gauge, InertialConfig, IntegratorConfig, ProtocolParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Sweep,
    Figures,
    Validate,
}

/// How `gamma_khz2` is read: kHz² (`2π·γ` rad/ms²) or MHz² (`2π·γ·10⁶` rad/ms²).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaUnit {
    #[default]
    Khz2,
    Mhz2,
}

impl GammaUnit {
    fn factor(self) -> f64 {
        match self {
            GammaUnit::Khz2 => TAU,
            GammaUnit::Mhz2 => TAU * 1e6,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            GammaUnit::Khz2 => "gamma_khz2 in kHz^2, gamma = 2*pi*gamma_khz2 rad/ms^2",
            GammaUnit::Mhz2 => "gamma_khz2 in MHz^2, gamma = 2*pi*1e6*gamma_khz2 rad/ms^2",
        }
    }
}

/// δ range and resolution of the distance heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub delta_min_over_alpha0: f64,
    pub delta_max_over_alpha0: f64,
    pub n_delta: usize,
    pub n_time: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            delta_min_over_alpha0: -0.1,
            delta_max_over_alpha0: 0.1,
            n_delta: 41,
            n_time: 200,
        }
    }
}

impl GridConfig {
    pub fn deltas_over_alpha0(&self) -> Vec<f64> {
        let (a, b, n) = (self.delta_min_over_alpha0, self.delta_max_over_alpha0, self.n_delta);
        if n == 1 {
            return vec![a];
        }
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha0_khz: f64,
    pub gamma_khz2: f64,
    pub gamma_unit: GammaUnit,
    pub mu0: f64,
    pub delta_over_alpha0: f64,
    pub t_final_ms: f64,
    pub n_samples: usize,
    pub mu_floor: f64,
    pub integrator: IntegratorConfig,
    pub inertial_gauge: Gauge,
    pub mode: Mode,
    /// δ/α₀ values; simulate falls back to `delta_over_alpha0`, sweep to the
    /// grid range, figures to the six reference values.
    pub delta_list: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    pub include_geometric: bool,
    pub seed: u64,
    /// Relative σ of the multiplicative field noise; 0 disables the noisy run.
    pub noise_rel_sigma: f64,
    pub grid: GridConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha0_khz: 6.0,
            gamma_khz2: 50.0,
            gamma_unit: GammaUnit::Khz2,
            mu0: -1.0,
            delta_over_alpha0: -0.01,
            t_final_ms: REFERENCE_T_FINAL,
            n_samples: REFERENCE_SAMPLES,
            mu_floor: DEFAULT_MU_FLOOR,
            integrator: IntegratorConfig::default(),
            inertial_gauge: Gauge::Unitary,
            mode: Mode::Simulate,
            delta_list: None,
            output_dir: PathBuf::from("out"),
            include_geometric: false,
            seed: 0,
            noise_rel_sigma: 0.0,
            grid: GridConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn check(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if !(self.alpha0_khz.is_finite() && self.gamma_khz2.is_finite() && self.mu0.is_finite()) {
            return bad("alpha0_khz, gamma_khz2 and mu0 must be finite");
        }
        if !(self.t_final_ms > 0.0 && self.t_final_ms.is_finite()) {
            return bad("t_final_ms must be positive");
        }
        if self.n_samples < 2 {
            return bad("n_samples must be at least 2");
        }
        if matches!(&self.delta_list, Some(l) if l.is_empty()) {
            return bad("delta_list must not be empty");
        }
        if self.grid.n_delta == 0 || self.grid.n_time < 2 {
            return bad("grid needs n_delta >= 1 and n_time >= 2");
        }
        if !(self.noise_rel_sigma >= 0.0 && self.noise_rel_sigma.is_finite()) {
            return bad("noise_rel_sigma must be >= 0");
        }
        self.integrator
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn alpha0(&self) -> f64 {
        TAU * self.alpha0_khz
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_unit.factor() * self.gamma_khz2
    }

    /// Core parameters for `δ = delta_over_alpha0 · α₀`.
    pub fn protocol(&self, delta_over_alpha0: f64) -> ProtocolParams {
        let alpha0 = self.alpha0();
        ProtocolParams {
            alpha0,
            gamma: self.gamma(),
            mu0: self.mu0,
            delta: delta_over_alpha0 * alpha0,
            t_final: self.t_final_ms,
            n_samples: self.n_samples,
            mu_floor: self.mu_floor,
        }
    }

    pub fn inertial(&self) -> InertialConfig {
        InertialConfig::default()
            .with_gauge(self.inertial_gauge)
            .with_geometric(self.include_geometric)
    }

    pub fn simulate_deltas(&self) -> Vec<f64> {
        self.delta_list
            .clone()
            .unwrap_or_else(|| vec![self.delta_over_alpha0])
    }

    pub fn sweep_deltas(&self) -> Vec<f64> {
        self.delta_list
            .clone()
            .unwrap_or_else(|| self.grid.deltas_over_alpha0())
    }

    pub fn figure_deltas(&self) -> Vec<f64> {
        self.delta_list
            .clone()
            .unwrap_or_else(|| REFERENCE_DELTAS.to_vec())
    }
}
