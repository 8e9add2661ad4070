//! Chirped driving protocol with a linearly varying adiabatic parameter.
//!
//! The detuning and Rabi frequency are
//!
//! ```text
//! ω(t) = Ω(t) cos φ(t),   ε(t) = Ω(t) sin φ(t),   φ(t) = (α₀ + γ t) t
//! Ω(t) = −(α₀ + 2γ t) / μ(t),                     μ(t) = μ₀ + δ t
//! ```
//!
//! which makes `(ω̇ε − ε̇ω)/Ω³ = μ(t)` exactly. Units are whatever the caller
//! uses consistently (the CLI works in ms and rad/ms).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inertial::{self, InertialReport};

pub const DEFAULT_MU_FLOOR: f64 = 1e-9;

/// δ/α₀ values of the six reference panels.
pub const REFERENCE_DELTAS: [f64; 6] = [-1.0, -0.05, -0.01, 0.01, 0.05, 0.1];

/// Reference drive: α₀ = 2π·6 rad/ms, γ = 2π·50 rad/ms², μ₀ = −1.
pub const REFERENCE_ALPHA0: f64 = 2.0 * std::f64::consts::PI * 6.0;
pub const REFERENCE_GAMMA: f64 = 2.0 * std::f64::consts::PI * 50.0;
pub const REFERENCE_T_FINAL: f64 = 0.2;
pub const REFERENCE_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub alpha0: f64,
    pub gamma: f64,
    pub mu0: f64,
    pub delta: f64,
    pub t_final: f64,
    pub n_samples: usize,
    #[serde(default = "default_mu_floor")]
    pub mu_floor: f64,
}

fn default_mu_floor() -> f64 {
    DEFAULT_MU_FLOOR
}

/// Instantaneous drive values; `omega_rabi` keeps the protocol's sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fields {
    pub omega: f64,
    pub epsilon: f64,
    pub omega_rabi: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSample {
    pub t: f64,
    pub mu: f64,
    pub alpha: f64,
    pub omega_rabi: f64,
    pub omega: f64,
    pub epsilon: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub zero_crossing: Option<f64>,
    pub min_abs_mu: f64,
    pub max_abs_rabi: f64,
    pub inertial: Option<InertialReport>,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

impl ProtocolParams {
    pub fn new(
        alpha0: f64,
        gamma: f64,
        mu0: f64,
        delta: f64,
        t_final: f64,
        n_samples: usize,
    ) -> Result<Self> {
        let p = Self {
            alpha0,
            gamma,
            mu0,
            delta,
            t_final,
            n_samples,
            mu_floor: DEFAULT_MU_FLOOR,
        };
        p.check_shape()?;
        Ok(p)
    }

    /// Reference drive with `δ = delta_over_alpha0 · α₀`.
    pub fn reference(delta_over_alpha0: f64) -> Self {
        Self {
            alpha0: REFERENCE_ALPHA0,
            gamma: REFERENCE_GAMMA,
            mu0: -1.0,
            delta: delta_over_alpha0 * REFERENCE_ALPHA0,
            t_final: REFERENCE_T_FINAL,
            n_samples: REFERENCE_SAMPLES,
            mu_floor: DEFAULT_MU_FLOOR,
        }
    }

    /// Resonant drive `α(t) = Ω = α₀`, which pins μ = −1.
    pub fn resonance(alpha0: f64, t_final: f64, n_samples: usize) -> Result<Self> {
        Self::new(alpha0, 0.0, -1.0, 0.0, t_final, n_samples)
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_samples(mut self, n_samples: usize) -> Self {
        self.n_samples = n_samples;
        self
    }

    pub fn with_t_final(mut self, t_final: f64) -> Self {
        self.t_final = t_final;
        self
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::InvalidParams(format!(
                "n_samples must be >= 2 (got {})",
                self.n_samples
            )));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "t_final must be positive and finite (got {})",
                self.t_final
            )));
        }
        let finite = [self.alpha0, self.gamma, self.mu0, self.delta, self.mu_floor];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite drive constant".into()));
        }
        if self.mu_floor < 0.0 {
            return Err(Error::InvalidParams("mu_floor must be >= 0".into()));
        }
        Ok(())
    }

    pub fn mu_at(&self, t: f64) -> f64 {
        self.mu0 + self.delta * t
    }

    pub fn alpha_at(&self, t: f64) -> f64 {
        self.alpha0 + self.gamma * t
    }

    /// Drive phase `φ(t) = α(t)·t`.
    pub fn phase_at(&self, t: f64) -> f64 {
        self.alpha_at(t) * t
    }

    fn checked_mu(&self, t: f64) -> Result<f64> {
        let mu = self.mu_at(t);
        if mu.abs() < self.mu_floor || mu == 0.0 {
            Err(Error::SingularMu {
                t,
                mu,
                floor: self.mu_floor,
            })
        } else {
            Ok(mu)
        }
    }

    pub fn rabi_at(&self, t: f64) -> Result<f64> {
        let mu = self.checked_mu(t)?;
        Ok(-(self.alpha0 + 2.0 * self.gamma * t) / mu)
    }

    /// `dΩ/dt` in closed form.
    pub fn rabi_rate_at(&self, t: f64) -> Result<f64> {
        let mu = self.checked_mu(t)?;
        let num = 2.0 * self.gamma * mu - self.delta * (self.alpha0 + 2.0 * self.gamma * t);
        Ok(-num / (mu * mu))
    }

    pub fn fields_at(&self, t: f64) -> Result<Fields> {
        let omega_rabi = self.rabi_at(t)?;
        let (s, c) = self.phase_at(t).sin_cos();
        Ok(Fields {
            omega: omega_rabi * c,
            epsilon: omega_rabi * s,
            omega_rabi,
            alpha: self.alpha_at(t),
        })
    }

    /// First time in `[0, t_final]` where μ reaches the singularity floor.
    pub fn mu_zero_crossing(&self) -> Option<f64> {
        let end = self.mu_at(self.t_final);
        if self.mu0.abs() < self.mu_floor || self.mu0 == 0.0 {
            return Some(0.0);
        }
        if self.mu0.signum() == end.signum() && end.abs() >= self.mu_floor && end != 0.0 {
            return None;
        }
        // μ is affine: first time |μ| hits the floor while approaching zero
        let target = self.mu_floor * self.mu0.signum();
        Some(((target - self.mu0) / self.delta).clamp(0.0, self.t_final))
    }

    /// Errors with `SingularMu` if μ reaches the floor anywhere on `[0, t]`.
    pub fn check_nonsingular_until(&self, t: f64) -> Result<()> {
        let horizon = self.with_t_final(t.max(f64::MIN_POSITIVE));
        match horizon.mu_zero_crossing() {
            Some(tc) => Err(Error::SingularMu {
                t: tc,
                mu: self.mu_at(tc),
                floor: self.mu_floor,
            }),
            None => Ok(()),
        }
    }

    pub fn check_nonsingular(&self) -> Result<()> {
        self.check_nonsingular_until(self.t_final)
    }

    /// Scaled time `θ(t) = ∫₀ᵗ Ω dt'` in closed form.
    ///
    /// With `x = δt/μ₀` the antiderivative is written as
    /// `θ = −(α₀ t/μ₀)·ln(1+x)/x + (2γ t²/μ₀)·(ln(1+x) − x)/x²`,
    /// which stays accurate as δ → 0 where it reduces to `−(α₀t + γt²)/μ₀`.
    pub fn theta_at(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        self.check_nonsingular_until(t)?;
        let x = self.delta * t / self.mu0;
        let (f1, f2) = log_ratios(x);
        Ok(-(self.alpha0 * t / self.mu0) * f1 + (2.0 * self.gamma * t * t / self.mu0) * f2)
    }

    pub fn sample_at(&self, t: f64) -> Result<ProtocolSample> {
        let f = self.fields_at(t)?;
        Ok(ProtocolSample {
            t,
            mu: self.mu_at(t),
            alpha: f.alpha,
            omega_rabi: f.omega_rabi,
            omega: f.omega,
            epsilon: f.epsilon,
            theta: self.theta_at(t)?,
        })
    }

    /// Uniform grid `t_i = t_final · i/(n−1)`; the last point is exactly `t_final`.
    pub fn time_grid(&self) -> Vec<f64> {
        let n = self.n_samples;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.t_final
                } else {
                    self.t_final * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    pub fn samples(&self) -> Result<Vec<ProtocolSample>> {
        self.check_shape()?;
        self.check_nonsingular()?;
        self.time_grid().into_iter().map(|t| self.sample_at(t)).collect()
    }
}

/// `(ln(1+x)/x, (ln(1+x) − x)/x²)` with series near zero.
fn log_ratios(x: f64) -> (f64, f64) {
    if x.abs() < 0.1 {
        // ln(1+x) = Σ_{k≥1} (−1)^{k+1} x^k / k
        let mut f1 = 1.0;
        let mut f2 = 0.0;
        let mut pow = 1.0; // x^{k−2}
        for k in 2..=24 {
            let term = if k % 2 == 1 { pow / k as f64 } else { -pow / k as f64 };
            f2 += term;
            f1 += term * x;
            pow *= x;
        }
        (f1, f2)
    } else {
        let l = x.ln_1p();
        (l / x, (l - x) / (x * x))
    }
}

/// Runs the singularity checks and attaches the inertial-parameter summary.
pub fn validate(params: &ProtocolParams) -> ValidationReport {
    let mut problems = Vec::new();
    if let Err(e) = params.check_shape() {
        problems.push(e.to_string());
        return ValidationReport {
            zero_crossing: None,
            min_abs_mu: f64::NAN,
            max_abs_rabi: f64::NAN,
            inertial: None,
            problems,
        };
    }
    let zero_crossing = params.mu_zero_crossing();
    if let Some(tc) = zero_crossing {
        problems.push(format!(
            "adiabatic parameter reaches zero at t={tc} within the horizon {}",
            params.t_final
        ));
    }
    let mu_end = params.mu_at(params.t_final);
    let min_abs_mu = if zero_crossing.is_some() {
        0.0
    } else {
        params.mu0.abs().min(mu_end.abs())
    };
    let max_abs_rabi = params
        .time_grid()
        .into_iter()
        .filter_map(|t| params.rabi_at(t).ok())
        .map(f64::abs)
        .fold(0.0, f64::max);
    let inertial = if zero_crossing.is_none() {
        match inertial::inertial_parameter(params) {
            Ok(r) => Some(r),
            Err(e) => {
                problems.push(e.to_string());
                None
            }
        }
    } else {
        None
    };
    ValidationReport {
        zero_crossing,
        min_abs_mu,
        max_abs_rabi,
        inertial,
        problems,
    }
}
