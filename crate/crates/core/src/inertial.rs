//! Inertial solution, its phases, the inertial parameter Υ, and the
//! first-order correction in the co-moving eigenbasis.
//!
//! With `v = (Ω(t)/Ω(0))·u` and `u = P(μ) w`, the exact dynamics read
//! `dw/dθ = −iD w + O w` with `O = −P⁻¹ dP/dθ`. Dropping `O` and
//! integrating the eigenvalues gives
//!
//! ```text
//! v(t) = (Ω(t)/Ω(0)) · P(μ(t)) · exp(−i ∫₀^θ D dθ′) · P⁻¹(μ(0)) · v(0)
//! ```
//!
//! Left and right factors are taken at the current and initial μ so the
//! solution follows the rotating eigenbasis.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{bprime_mu_derivative, Branch, EigenSystem, Gauge, LiouvilleVec};
use crate::error::{Error, Result};
use crate::linalg::expm3;
use crate::protocol::{ProtocolParams, DEFAULT_MU_FLOOR};
use crate::quad::{self, QuadTol};
use crate::trajectory::{Trajectory, TrajectoryLabel, TrajectoryPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertialConfig {
    pub gauge: Gauge,
    pub include_geometric: bool,
    /// Relative tolerance of the phase quadratures.
    pub quad_rel_tol: f64,
}

impl Default for InertialConfig {
    fn default() -> Self {
        Self {
            gauge: Gauge::Unitary,
            include_geometric: false,
            quad_rel_tol: QuadTol::default().rel,
        }
    }
}

impl InertialConfig {
    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn with_geometric(mut self, include: bool) -> Self {
        self.include_geometric = include;
        self
    }

    fn quad_tol(&self) -> QuadTol {
        QuadTol {
            rel: self.quad_rel_tol,
            ..QuadTol::default()
        }
    }
}

fn kappa(mu: f64) -> f64 {
    (1.0 + mu * mu).sqrt()
}

/// `∫₀ᵗ κ(μ(t′)) Ω(t′) dt′`, the dynamical phase of the `+κ` branch
/// (the `−κ` branch carries its negative, the zero branch none).
pub fn dynamical_phase(params: &ProtocolParams, t: f64) -> Result<f64> {
    dynamical_phase_with(params, t, QuadTol::default())
}

pub fn dynamical_phase_with(params: &ProtocolParams, t: f64, tol: QuadTol) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    params.check_nonsingular_until(t)?;
    let r = quad::integrate(
        |s| kappa(params.mu_at(s)) * -(params.alpha0 + 2.0 * params.gamma * s) / params.mu_at(s),
        0.0,
        t,
        tol,
    );
    Ok(r.value)
}

fn dynamical_phases(params: &ProtocolParams, times: &[f64], tol: QuadTol) -> Vec<f64> {
    quad::cumulative(
        |s| kappa(params.mu_at(s)) * -(params.alpha0 + 2.0 * params.gamma * s) / params.mu_at(s),
        times,
        tol,
    )
}

/// `φ_k = i ∫ (G_k | dF_k/dμ) dμ` split into its real part (`phase`) and
/// imaginary part (`residue`). The branch factor is `e^{iφ_k}`.
///
/// For this model `(G_k|dF_k/dμ)` is real in every gauge with real column
/// scales, so `phase` is zero and `residue` is a pure normalization
/// transport term; in the unitary gauge both vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricPhase {
    pub phase: f64,
    pub residue: f64,
}

impl GeometricPhase {
    pub fn factor(&self) -> Complex64 {
        Complex64::from_polar((-self.residue).exp(), self.phase)
    }
}

fn connection(gauge: Gauge, branch: Branch, mu: f64) -> Result<Complex64> {
    let es = EigenSystem::with_gauge(mu, gauge)?;
    Ok(es.partner(branch).dot(&es.eigenvector_derivative(branch)))
}

/// Geometric phase of `branch` accumulated along μ from `mu_a` to `mu_b`.
pub fn geometric_phase_between(
    gauge: Gauge,
    branch: Branch,
    mu_a: f64,
    mu_b: f64,
    tol: QuadTol,
) -> Result<GeometricPhase> {
    if gauge == Gauge::Printed && (mu_a.signum() != mu_b.signum() || mu_a == 0.0 || mu_b == 0.0) {
        return Err(Error::SingularMu {
            t: f64::NAN,
            mu: 0.0,
            floor: 0.0,
        });
    }
    connection(gauge, branch, mu_a)?;
    let re = quad::integrate(
        |m| connection(gauge, branch, m).map(|z| z.re).unwrap_or(f64::NAN),
        mu_a,
        mu_b,
        tol,
    );
    let im = quad::integrate(
        |m| connection(gauge, branch, m).map(|z| z.im).unwrap_or(f64::NAN),
        mu_a,
        mu_b,
        tol,
    );
    // φ = i(re + i·im)
    Ok(GeometricPhase {
        phase: -im.value,
        residue: re.value,
    })
}

pub fn geometric_phase(
    params: &ProtocolParams,
    gauge: Gauge,
    branch: Branch,
    t: f64,
) -> Result<GeometricPhase> {
    params.check_nonsingular_until(t)?;
    geometric_phase_between(gauge, branch, params.mu0, params.mu_at(t), QuadTol::default())
}

fn residue_limit(params: &ProtocolParams) -> Result<f64> {
    Ok(1e-8 * params.rabi_at(0.0)?.abs())
}

fn real_part_checked(u: &Vector3<Complex64>, limit: f64) -> Result<[f64; 3]> {
    let residue = u.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if residue > limit {
        return Err(Error::ComplexResidue { residue, limit });
    }
    Ok([u[0].re, u[1].re, u[2].re])
}

fn complexify(v: &LiouvilleVec) -> Vector3<Complex64> {
    Vector3::new(
        Complex64::new(v.h, 0.0),
        Complex64::new(v.l, 0.0),
        Complex64::new(v.c, 0.0),
    )
}

/// Inertial solution sampled on the protocol grid.
pub fn inertial_propagate(
    params: &ProtocolParams,
    v0: &LiouvilleVec,
    cfg: &InertialConfig,
) -> Result<Trajectory> {
    params.check_shape()?;
    let samples = params.samples()?;
    let tol = cfg.quad_tol();
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let phases = dynamical_phases(params, &times, tol);
    let limit = residue_limit(params)?;

    let es0 = EigenSystem::with_gauge(params.mu0, cfg.gauge)?;
    let coeffs = es0.p_inv * complexify(v0);
    let omega0 = samples[0].omega_rabi;

    let mut transport = [Complex64::new(1.0, 0.0); 3];
    let mut points = Vec::with_capacity(samples.len());
    for (i, sample) in samples.iter().enumerate() {
        if cfg.include_geometric && i > 0 {
            let (mu_a, mu_b) = (samples[i - 1].mu, sample.mu);
            for b in Branch::ALL {
                let g = geometric_phase_between(cfg.gauge, b, mu_a, mu_b, tol)?;
                transport[b.index()] *= g.factor();
            }
        }
        let es = EigenSystem::with_gauge(sample.mu, cfg.gauge)?;
        let rot = Complex64::from_polar(1.0, -phases[i]);
        let w = Vector3::new(
            coeffs[0] * transport[0],
            coeffs[1] * rot * transport[1],
            coeffs[2] * rot.conj() * transport[2],
        );
        let u = es.p * w * Complex64::new(sample.omega_rabi / omega0, 0.0);
        let state = v0.with_components(real_part_checked(&u, limit)?);
        points.push(TrajectoryPoint {
            sample: *sample,
            state,
        });
    }
    Trajectory::new(TrajectoryLabel::Inertial, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    InertialValid,
    Marginal,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpsilonThresholds {
    pub valid: f64,
    pub violated: f64,
}

impl Default for UpsilonThresholds {
    fn default() -> Self {
        Self {
            valid: 1e-2,
            violated: 1e-1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertialReport {
    pub upsilon: f64,
    pub mu_rate: f64,
    /// Sample time at which the maximum is attained.
    pub t_at_max: f64,
    pub verdict: Verdict,
}

/// One `(n, k)` contribution `|(G_k, ∂_μB′ F_n)| / (λ_n − λ_k)² · (dμ/dθ)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerm {
    pub n: Branch,
    pub k: Branch,
    pub coupling: f64,
    pub gap: f64,
    pub value: f64,
}

/// All six `n ≠ k` terms at a given μ and `dμ/dθ`, couplings evaluated
/// with orthonormal eigenvectors.
pub fn upsilon_terms(mu: f64, dmu_dtheta: f64) -> Vec<PairTerm> {
    let es = EigenSystem::with_gauge(mu, Gauge::Unitary).expect("unitary gauge is regular");
    let db = bprime_mu_derivative();
    let rate2 = dmu_dtheta * dmu_dtheta;
    let mut out = Vec::with_capacity(6);
    for n in Branch::ALL {
        let dbf = db * es.eigenvector(n);
        for k in Branch::ALL {
            if n == k {
                continue;
            }
            let coupling = es.partner(k).dot(&dbf).norm();
            let gap = es.eigenvalue(n) - es.eigenvalue(k);
            out.push(PairTerm {
                n,
                k,
                coupling,
                gap,
                value: coupling / (gap * gap) * rate2,
            });
        }
    }
    out
}

pub fn inertial_parameter(params: &ProtocolParams) -> Result<InertialReport> {
    inertial_parameter_with(params, UpsilonThresholds::default())
}

/// Maximum of Υ over the sample grid, with `dμ/dθ = δ/Ω(t)`.
pub fn inertial_parameter_with(
    params: &ProtocolParams,
    thresholds: UpsilonThresholds,
) -> Result<InertialReport> {
    params.check_shape()?;
    params.check_nonsingular()?;
    let mut upsilon = 0.0;
    let mut t_at_max = 0.0;
    for t in params.time_grid() {
        let rate = params.delta / params.rabi_at(t)?;
        let local = upsilon_terms(params.mu_at(t), rate)
            .iter()
            .map(|p| p.value)
            .fold(0.0, f64::max);
        if local > upsilon {
            upsilon = local;
            t_at_max = t;
        }
    }
    let verdict = if upsilon < thresholds.valid {
        Verdict::InertialValid
    } else if upsilon > thresholds.violated {
        Verdict::Violated
    } else {
        Verdict::Marginal
    };
    Ok(InertialReport {
        upsilon,
        mu_rate: params.delta,
        t_at_max,
        verdict,
    })
}

/// `O = −P⁻¹ dP/dθ` for the tabulated diagonalizer, split as
/// `scalar_part·1 + s_part`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionOperator {
    pub mu: f64,
    pub omega_rabi: f64,
    pub delta: f64,
    pub entries: Matrix3<f64>,
    pub scalar_part: f64,
    pub s_part: Matrix3<f64>,
    /// Largest |Im λ| among the numerically computed eigenvalues. At μ² = 1
    /// the operator is defective (the `2μ` and `μ + 1/μ` roots merge into a
    /// Jordan block), so this carries a √ε-sized rounding artefact there.
    pub max_imag_eigenvalue: f64,
}

impl CorrectionOperator {
    /// Closed-form spectrum `{μ, 2μ, μ + 1/μ} · δ/(Ωκ²)`.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let mu = self.mu;
        let s = self.delta / (self.omega_rabi * (1.0 + mu * mu));
        [mu * s, 2.0 * mu * s, (mu + 1.0 / mu) * s]
    }
}

pub fn correction_operator(mu: f64, omega_rabi: f64, delta: f64) -> Result<CorrectionOperator> {
    if mu.abs() < DEFAULT_MU_FLOOR {
        return Err(Error::SingularMu {
            t: f64::NAN,
            mu,
            floor: DEFAULT_MU_FLOOR,
        });
    }
    if omega_rabi == 0.0 {
        return Err(Error::DegenerateHamiltonian { omega_rabi });
    }
    let k2 = 1.0 + mu * mu;
    let pre = delta / (omega_rabi * k2);
    let scalar_part = 2.0 * mu * pre;
    let s_part = Matrix3::new(
        1.0 / mu,
        mu,
        mu,
        -0.5 / mu,
        -mu,
        0.0,
        -0.5 / mu,
        0.0,
        -mu,
    ) * pre;
    let entries = Matrix3::identity() * scalar_part + s_part;
    let max_imag_eigenvalue = entries
        .complex_eigenvalues()
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    Ok(CorrectionOperator {
        mu,
        omega_rabi,
        delta,
        entries,
        scalar_part,
        s_part,
        max_imag_eigenvalue,
    })
}

/// First-order corrected solution: on each grid interval
/// `w ← e^{−iDΔθ} e^{OΔθ} w` with midpoint μ and Ω, in the tabulated gauge.
pub fn corrected_propagate(params: &ProtocolParams, v0: &LiouvilleVec) -> Result<Trajectory> {
    params.check_shape()?;
    let samples = params.samples()?;
    let limit = residue_limit(params)?;
    let es0 = EigenSystem::with_gauge(params.mu0, Gauge::Printed)?;
    let mut w = es0.p_inv * complexify(v0);
    let omega0 = samples[0].omega_rabi;

    let mut points = Vec::with_capacity(samples.len());
    for (i, sample) in samples.iter().enumerate() {
        if i > 0 {
            let prev = &samples[i - 1];
            let tm = 0.5 * (prev.t + sample.t);
            let mu_m = params.mu_at(tm);
            let dtheta = sample.theta - prev.theta;
            let o = correction_operator(mu_m, params.rabi_at(tm)?, params.delta)?;
            let amp = (expm3(&(o.entries * dtheta))).map(|x| Complex64::new(x, 0.0));
            let rot = Complex64::from_polar(1.0, -kappa(mu_m) * dtheta);
            w = amp * w;
            w[1] *= rot;
            w[2] *= rot.conj();
        }
        let es = EigenSystem::with_gauge(sample.mu, Gauge::Printed)?;
        let u = es.p * w * Complex64::new(sample.omega_rabi / omega0, 0.0);
        let state = v0.with_components(real_part_checked(&u, limit)?);
        points.push(TrajectoryPoint {
            sample: *sample,
            state,
        });
    }
    Trajectory::new(TrajectoryLabel::Corrected, points)
}

/// Instantaneous-eigenstate following: `v(t) = (Ω(t)/Ω(0))·v(0)`.
pub fn adiabatic_reference(params: &ProtocolParams, v0: &LiouvilleVec) -> Result<Trajectory> {
    let scale = v0.h.abs().max(1.0);
    if v0.l.abs() > 1e-12 * scale || v0.c.abs() > 1e-12 * scale {
        return Err(Error::NotEigenstate { l: v0.l, c: v0.c });
    }
    let samples = params.samples()?;
    let omega0 = samples[0].omega_rabi;
    let points = samples
        .iter()
        .map(|s| TrajectoryPoint {
            sample: *s,
            state: v0.with_components([v0.h * s.omega_rabi / omega0, 0.0, 0.0]),
        })
        .collect();
    Trajectory::new(TrajectoryLabel::Adiabatic, points)
}
