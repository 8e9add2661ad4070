//! Exact propagation by two independent routes.
//!
//! * Liouville route: the real 3-vector ODE
//!   `dv/dt = Ω M(μ) v + (Ω̇/Ω) v` with adaptive Dormand–Prince.
//! * Spinor route: `iψ̇ = Ĥ(t)ψ` with exact 2×2 exponentials of the
//!   midpoint Hamiltonian, mapped to expectation values afterwards.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::algebra::{expectations_with_rabi, LiouvilleVec, SpinorState};
use crate::error::{Error, Result};
use crate::ode::{self, OdeStats, StepControl};
use crate::protocol::{ProtocolParams, ProtocolSample};
use crate::trajectory::{Trajectory, TrajectoryLabel, TrajectoryPoint};

/// Hard cap on `‖Ĥ‖·step` for the midpoint-exponential stepper.
pub const MAX_SPINOR_PHASE_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorMethod {
    AdaptiveEmbeddedRk,
    FixedStepMidpointExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest adaptive step; `f64::INFINITY` leaves it uncapped.
    pub max_step: f64,
    pub max_steps: usize,
    /// `‖Ĥ‖·step` used by the spinor stepper (≤ [`MAX_SPINOR_PHASE_STEP`]).
    pub spinor_phase_step: f64,
    pub method: IntegratorMethod,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_step: f64::INFINITY,
            max_steps: 2_000_000,
            spinor_phase_step: 5e-6,
            method: IntegratorMethod::AdaptiveEmbeddedRk,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.max_step.is_nan() || self.max_step <= 0.0 {
            return Err(Error::InvalidConfig("max_step must be positive".into()));
        }
        if !(self.spinor_phase_step > 0.0 && self.spinor_phase_step <= MAX_SPINOR_PHASE_STEP) {
            return Err(Error::InvalidConfig(format!(
                "spinor_phase_step must lie in (0, {MAX_SPINOR_PHASE_STEP}]"
            )));
        }
        Ok(())
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    fn step_control(&self) -> StepControl {
        StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            max_steps: self.max_steps,
        }
    }
}

fn rhs_unchecked(params: &ProtocolParams, t: f64, v: &[f64; 3]) -> [f64; 3] {
    let mu = params.mu_at(t);
    let drive = params.alpha0 + 2.0 * params.gamma * t;
    let omega_rabi = -drive / mu;
    // Ω̇/Ω = (2γμ − δ(α₀+2γt)) / (μ(α₀+2γt))
    let growth = (2.0 * params.gamma * mu - params.delta * drive) / (mu * drive);
    [
        omega_rabi * mu * v[1] + growth * v[0],
        omega_rabi * (-mu * v[0] + v[2]) + growth * v[1],
        -omega_rabi * v[1] + growth * v[2],
    ]
}

/// `dv/dt` for the expectation vector (identity coefficient is constant).
pub fn liouville_rhs(t: f64, v: &LiouvilleVec, params: &ProtocolParams) -> Result<[f64; 3]> {
    let omega_rabi = params.rabi_at(t)?;
    let rate = params.rabi_rate_at(t)?;
    let mu = params.mu_at(t);
    let [h, l, c] = v.components();
    let g = rate / omega_rabi;
    Ok([
        omega_rabi * mu * l + g * h,
        omega_rabi * (-mu * h + c) + g * l,
        -omega_rabi * l + g * c,
    ])
}

/// Integrates the Liouville ODE from `(t0, v0)` to each of `times`
/// (monotone, either direction).
pub fn propagate_liouville(
    params: &ProtocolParams,
    t0: f64,
    v0: &LiouvilleVec,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<(Vec<LiouvilleVec>, OdeStats)> {
    cfg.validate()?;
    let lo = times.iter().copied().fold(t0, f64::min);
    let hi = times.iter().copied().fold(t0, f64::max);
    params.rabi_at(lo)?;
    params.check_nonsingular_until(hi)?;
    if params.alpha0 + 2.0 * params.gamma * lo == 0.0 || params.alpha0 + 2.0 * params.gamma * hi == 0.0 {
        return Err(Error::DegenerateHamiltonian { omega_rabi: 0.0 });
    }
    let (ys, stats) = ode::integrate(
        |t, y: &[f64; 3]| rhs_unchecked(params, t, y),
        t0,
        v0.components(),
        times,
        &cfg.step_control(),
    )?;
    Ok((ys.into_iter().map(|y| v0.with_components(y)).collect(), stats))
}

pub fn integrate_liouville(
    params: &ProtocolParams,
    v0: &LiouvilleVec,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    params.check_shape()?;
    params.check_nonsingular()?;
    let samples = params.samples()?;
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let (states, _) = propagate_liouville(params, 0.0, v0, &times, cfg)?;
    let points = samples
        .into_iter()
        .zip(states)
        .map(|(sample, state)| TrajectoryPoint { sample, state })
        .collect();
    Trajectory::new(TrajectoryLabel::ExactLiouville, points)
}

/// Exact trajectory from the ground state of `Ĥ(0)` by the route in `cfg.method`.
pub fn integrate_exact(params: &ProtocolParams, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let (psi0, v0) = initial_ground_state(params)?;
    match cfg.method {
        IntegratorMethod::AdaptiveEmbeddedRk => integrate_liouville(params, &v0, cfg),
        IntegratorMethod::FixedStepMidpointExponential => integrate_spinor(params, &psi0, cfg),
    }
}

/// Lower eigenvector of `(ω σ_z + ε σ_x)/2`, gauge: `amp1` real and ≥ 0.
pub fn ground_state(omega: f64, epsilon: f64) -> Result<SpinorState> {
    let omega_rabi = omega.hypot(epsilon);
    if omega_rabi < 1e-14 {
        return Err(Error::DegenerateHamiltonian { omega_rabi });
    }
    let beta = epsilon.atan2(omega);
    let (s, c) = (0.5 * beta).sin_cos();
    Ok(SpinorState::new(Complex64::new(-s, 0.0), Complex64::new(c, 0.0)))
}

/// Ground state of `Ĥ(0)` and the matching Liouville vector.
pub fn initial_ground_state(params: &ProtocolParams) -> Result<(SpinorState, LiouvilleVec)> {
    let f = params.fields_at(0.0)?;
    let psi = ground_state(f.omega, f.epsilon)?;
    let v = expectations_with_rabi(&psi, f.omega, f.epsilon, f.omega_rabi)?;
    Ok((psi, v))
}

/// Per-interval multiplicative perturbations of the drive fields.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldNoise {
    pub omega_factors: Vec<f64>,
    pub epsilon_factors: Vec<f64>,
}

impl FieldNoise {
    /// Independent `1 + rel_sigma·N(0,1)` factors for ω and ε on each of
    /// `intervals` sample intervals, from a ChaCha8 stream seeded by `seed`.
    pub fn gaussian(intervals: usize, rel_sigma: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, rel_sigma).expect("finite sigma");
        let mut omega_factors = Vec::with_capacity(intervals);
        let mut epsilon_factors = Vec::with_capacity(intervals);
        for _ in 0..intervals {
            omega_factors.push(1.0 + normal.sample(&mut rng));
            epsilon_factors.push(1.0 + normal.sample(&mut rng));
        }
        Self {
            omega_factors,
            epsilon_factors,
        }
    }
}

#[inline]
fn midpoint_step(psi: &mut SpinorState, omega: f64, epsilon: f64, h: f64) {
    let b = omega.hypot(epsilon);
    if b == 0.0 {
        return;
    }
    let (nz, nx) = (omega / b, epsilon / b);
    let (s, c) = (0.5 * b * h).sin_cos();
    let mi_s = Complex64::new(0.0, -s);
    let (a0, a1) = (psi.amp0, psi.amp1);
    psi.amp0 = a0 * c + mi_s * (a0 * nz + a1 * nx);
    psi.amp1 = a1 * c + mi_s * (a0 * nx - a1 * nz);
}

pub fn integrate_spinor(
    params: &ProtocolParams,
    psi0: &SpinorState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    spinor_run(params, psi0, cfg, None)
}

/// Spinor propagation with the drive fields perturbed per sample interval;
/// expectation values are still taken with the nominal fields.
pub fn integrate_spinor_perturbed(
    params: &ProtocolParams,
    psi0: &SpinorState,
    cfg: &IntegratorConfig,
    noise: &FieldNoise,
) -> Result<Trajectory> {
    let intervals = params.n_samples - 1;
    if noise.omega_factors.len() < intervals || noise.epsilon_factors.len() < intervals {
        return Err(Error::GridMismatch(format!(
            "noise covers {} intervals, need {intervals}",
            noise.omega_factors.len().min(noise.epsilon_factors.len())
        )));
    }
    spinor_run(params, psi0, cfg, Some(noise))
}

fn spinor_run(
    params: &ProtocolParams,
    psi0: &SpinorState,
    cfg: &IntegratorConfig,
    noise: Option<&FieldNoise>,
) -> Result<Trajectory> {
    let mut points = Vec::with_capacity(params.n_samples);
    walk_spinor(params, psi0, cfg, noise, |sample, psi| {
        let state = expectations_with_rabi(psi, sample.omega, sample.epsilon, sample.omega_rabi)?;
        points.push(TrajectoryPoint {
            sample: *sample,
            state,
        });
        Ok(())
    })?;
    Trajectory::new(TrajectoryLabel::ExactSpinor, points)
}

/// Steps the spinor across the sample grid, calling `visit` at every sample.
fn walk_spinor(
    params: &ProtocolParams,
    psi0: &SpinorState,
    cfg: &IntegratorConfig,
    noise: Option<&FieldNoise>,
    mut visit: impl FnMut(&ProtocolSample, &SpinorState) -> Result<()>,
) -> Result<SpinorState> {
    cfg.validate()?;
    let norm = psi0.norm_sq();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    let samples = params.samples()?;
    let mut psi = *psi0;
    for (i, sample) in samples.iter().enumerate() {
        if i > 0 {
            let prev = &samples[i - 1];
            let (t0, t1) = (prev.t, sample.t);
            let peak = prev
                .omega_rabi
                .abs()
                .max(sample.omega_rabi.abs())
                .max(params.rabi_at(0.5 * (t0 + t1))?.abs());
            let (fo, fe) = noise
                .map(|n| (n.omega_factors[i - 1], n.epsilon_factors[i - 1]))
                .unwrap_or((1.0, 1.0));
            let norm_h = 0.5 * peak * fo.abs().max(fe.abs());
            let n_sub = ((norm_h * (t1 - t0)) / cfg.spinor_phase_step).ceil().max(1.0) as usize;
            let h = (t1 - t0) / n_sub as f64;
            for j in 0..n_sub {
                let f = params.fields_at(t0 + (j as f64 + 0.5) * h)?;
                midpoint_step(&mut psi, f.omega * fo, f.epsilon * fe, h);
            }
        }
        visit(sample, &psi)?;
    }
    Ok(psi)
}

/// Final spinor after propagating over the whole horizon (for norm checks).
pub fn final_spinor(
    params: &ProtocolParams,
    psi0: &SpinorState,
    cfg: &IntegratorConfig,
) -> Result<SpinorState> {
    walk_spinor(params, psi0, cfg, None, |_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::generator_real;
    use crate::linalg::expm3;
    use nalgebra::Vector3;

    fn close(a: &LiouvilleVec, b: &LiouvilleVec) -> f64 {
        a.distance(b)
    }

    #[test]
    fn constant_mu_matches_closed_form() {
        // δ = 0: v(t) = (Ω(t)/Ω₀)·exp(θ(t) M) v₀
        let p = ProtocolParams::reference(0.0).with_samples(50);
        let (_, v0) = initial_ground_state(&p).unwrap();
        let traj = integrate_liouville(&p, &v0, &IntegratorConfig::default()).unwrap();
        let m = generator_real(p.mu0);
        let omega0 = p.rabi_at(0.0).unwrap();
        let x0 = Vector3::from(v0.components());
        for pt in &traj.points {
            let s = pt.sample;
            let x = expm3(&(m * s.theta)) * x0 * (s.omega_rabi / omega0);
            let expect = v0.with_components([x[0], x[1], x[2]]);
            assert!(close(&pt.state, &expect) < 1e-8 * omega0.abs(), "t={}", s.t);
        }
    }

    #[test]
    fn time_reversal_returns_initial_state() {
        let p = ProtocolParams::reference(-0.05);
        let (_, v0) = initial_ground_state(&p).unwrap();
        let cfg = IntegratorConfig::default();
        let (fwd, _) = propagate_liouville(&p, 0.0, &v0, &[p.t_final], &cfg).unwrap();
        let (back, _) = propagate_liouville(&p, p.t_final, &fwd[0], &[0.0], &cfg).unwrap();
        assert!(close(&back[0], &v0) < 1e-6 * v0.h.abs());
    }

    #[test]
    fn rhs_forms_agree() {
        let p = ProtocolParams::reference(0.05);
        let v = LiouvilleVec::new(0.3, -1.2, 0.7);
        for &t in &[0.0, 0.05, 0.2] {
            let a = liouville_rhs(t, &v, &p).unwrap();
            let b = rhs_unchecked(&p, t, &v.components());
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-10 * a[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn spinor_and_liouville_agree() {
        let p = ProtocolParams::reference(-0.01).with_samples(200);
        let (psi0, v0) = initial_ground_state(&p).unwrap();
        let cfg = IntegratorConfig::default();
        let a = integrate_liouville(&p, &v0, &cfg).unwrap();
        let b = integrate_spinor(&p, &psi0, &cfg).unwrap();
        let omega0 = p.rabi_at(0.0).unwrap().abs();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!(close(&x.state, &y.state) < 1e-7 * omega0);
        }
    }

    #[test]
    fn ground_state_is_lower_eigenvector() {
        for &(w, e) in &[(1.0, 0.0), (0.0, 1.0), (-0.3, 0.8), (2.0, -5.0)] {
            let psi = ground_state(w, e).unwrap();
            let b = f64::hypot(w, e);
            // H ψ = −(b/2) ψ with H = (w σz + e σx)/2
            let h0 = 0.5 * (w * psi.amp0 + e * psi.amp1);
            let h1 = 0.5 * (e * psi.amp0 - w * psi.amp1);
            assert!((h0 + 0.5 * b * psi.amp0).norm() < 1e-14 * b);
            assert!((h1 + 0.5 * b * psi.amp1).norm() < 1e-14 * b);
            assert!(psi.amp1.re >= 0.0);
        }
        let psi = ground_state(0.0, 1.0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((psi.amp0.re + r).abs() < 1e-15 && (psi.amp1.re - r).abs() < 1e-15);
        assert!(matches!(ground_state(0.0, 0.0), Err(Error::DegenerateHamiltonian { .. })));
    }

    #[test]
    fn initial_state_is_stationary_in_eigenbasis() {
        let p = ProtocolParams::reference(0.01);
        let (_, v0) = initial_ground_state(&p).unwrap();
        let omega0 = p.rabi_at(0.0).unwrap();
        assert!((v0.h + 0.5 * omega0.abs()).abs() < 1e-14);
        assert!(v0.l.abs() < 1e-14 && v0.c.abs() < 1e-14);
    }

    #[test]
    fn longitudinal_field_preserves_populations() {
        let mut psi = SpinorState::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        for k in 0..1000 {
            midpoint_step(&mut psi, 3.0 + (k as f64).sin(), 0.0, 0.01);
        }
        assert!((psi.amp0.norm_sqr() - 0.36).abs() < 1e-13);
        assert!((psi.amp1.norm_sqr() - 0.64).abs() < 1e-13);
    }

    #[test]
    fn spinor_norm_is_conserved() {
        let p = ProtocolParams::reference(0.1).with_samples(100);
        let (psi0, _) = initial_ground_state(&p).unwrap();
        let cfg = IntegratorConfig {
            spinor_phase_step: 1e-3,
            ..IntegratorConfig::default()
        };
        let psi = final_spinor(&p, &psi0, &cfg).unwrap();
        assert!((psi.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_is_reproducible() {
        let a = FieldNoise::gaussian(100, 0.01, 7);
        let b = FieldNoise::gaussian(100, 0.01, 7);
        let c = FieldNoise::gaussian(100, 0.01, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mean = a.omega_factors.iter().sum::<f64>() / 100.0;
        assert!((mean - 1.0).abs() < 0.005);
    }

    #[test]
    fn short_noise_is_rejected() {
        let p = ProtocolParams::reference(0.01).with_samples(20);
        let (psi0, _) = initial_ground_state(&p).unwrap();
        let noise = FieldNoise::gaussian(5, 0.01, 1);
        let r = integrate_spinor_perturbed(&p, &psi0, &IntegratorConfig::default(), &noise);
        assert!(matches!(r, Err(Error::GridMismatch(_))));
    }

    #[test]
    fn config_validation() {
        let mut cfg = IntegratorConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.spinor_phase_step = 0.1;
        assert!(cfg.validate().is_err());
        let cfg = IntegratorConfig::default().with_tolerances(0.0, 1e-12);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn singular_horizon_is_rejected() {
        let p = ProtocolParams::reference(0.1).with_t_final(0.3);
        let v0 = LiouvilleVec::new(-1.0, 0.0, 0.0);
        let r = integrate_liouville(&p, &v0, &IntegratorConfig::default());
        assert!(matches!(r, Err(Error::SingularMu { .. })));
    }
}
