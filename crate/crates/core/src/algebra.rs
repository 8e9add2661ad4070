//! SU(2) operator algebra in the moving basis {Ĥ, L̂, Ĉ} (Î carried aside).
//!
//! `L̂ = (ε σ_z − ω σ_x)/2` and `Ĉ = (Ω/2) σ_y`. In scaled time the
//! expectation vector obeys `du/dθ = M(μ) u` with the real antisymmetric
//! `M = [[0, μ, 0], [−μ, 0, 1], [0, −1, 0]]`, i.e. `−i B′` for the Hermitian
//! generator `B′ = i M`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LiouvilleVec {
    pub h: f64,
    pub l: f64,
    pub c: f64,
    pub id_coeff: f64,
}

impl LiouvilleVec {
    pub fn new(h: f64, l: f64, c: f64) -> Self {
        Self { h, l, c, id_coeff: 1.0 }
    }

    /// `{⟨Ĥ(0)⟩, 0, 0, 1}` for the ground state at gap `omega_rabi`.
    pub fn ground(omega_rabi: f64) -> Self {
        Self::new(-0.5 * omega_rabi.abs(), 0.0, 0.0)
    }

    pub fn components(&self) -> [f64; 3] {
        [self.h, self.l, self.c]
    }

    pub fn with_components(&self, v: [f64; 3]) -> Self {
        Self {
            h: v[0],
            l: v[1],
            c: v[2],
            id_coeff: self.id_coeff,
        }
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.h, self.l, self.c)
    }

    pub fn norm_sq(&self) -> f64 {
        self.h * self.h + self.l * self.l + self.c * self.c
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let d = self.to_vector() - other.to_vector();
        d.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorMatrix {
    pub mu: f64,
    pub entries: Matrix3<Complex64>,
}

impl GeneratorMatrix {
    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.entries - self.entries.adjoint()).iter().all(|z| z.norm() <= tol)
    }
}

/// Real generator `M(μ)` with `du/dθ = M u`.
pub fn generator_real(mu: f64) -> Matrix3<f64> {
    Matrix3::new(0.0, mu, 0.0, -mu, 0.0, 1.0, 0.0, -1.0, 0.0)
}

pub fn bprime(mu: f64) -> GeneratorMatrix {
    GeneratorMatrix {
        mu,
        entries: generator_real(mu).map(|x| I * x),
    }
}

/// `∂B′/∂μ`.
pub fn bprime_mu_derivative() -> Matrix3<Complex64> {
    Matrix3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0).map(|x| I * x)
}

/// Normalization convention for the eigenvector columns of `P`.
///
/// The eigen-directions are fixed; only the μ-dependent column scales
/// differ. Products `P(μ₁)·e^{…}·P⁻¹(μ₀)` with `μ₁ ≠ μ₀` depend on the
/// choice unless the transport factor of the geometric phase is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    /// Orthonormal columns; `P⁻¹ = P†` and the geometric phase vanishes.
    #[default]
    Unitary,
    /// First column `(1, 0, μ)`, remaining columns `(−μ, ±iκ, 1)/(2κ²)`.
    Regular,
    /// The tabulated matrix `(1/2κ²)[[1/μ, −μ, −μ], [0, iκ, −iκ], [1, 1, 1]]`;
    /// singular at μ = 0.
    Printed,
}

impl Gauge {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gauge::Unitary => "unitary",
            Gauge::Regular => "regular",
            Gauge::Printed => "printed",
        }
    }

    /// Column scales `(a₀, a±)` and their μ-derivatives.
    fn scales(&self, mu: f64) -> Result<[f64; 4]> {
        let k2 = 1.0 + mu * mu;
        let k = k2.sqrt();
        Ok(match self {
            Gauge::Unitary => {
                let s2 = std::f64::consts::SQRT_2;
                [1.0 / k, -mu / (k2 * k), 1.0 / (s2 * k), -mu / (s2 * k2 * k)]
            }
            Gauge::Regular => [1.0, 0.0, 0.5 / k2, -mu / (k2 * k2)],
            Gauge::Printed => {
                if mu == 0.0 {
                    return Err(Error::SingularMu {
                        t: f64::NAN,
                        mu,
                        floor: 0.0,
                    });
                }
                let den = 2.0 * mu * k2;
                [
                    1.0 / den,
                    -(2.0 + 6.0 * mu * mu) / (den * den),
                    0.5 / k2,
                    -mu / (k2 * k2),
                ]
            }
        })
    }
}

/// Index of an eigen-branch: λ = 0, +κ, −κ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Zero,
    Plus,
    Minus,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Zero, Branch::Plus, Branch::Minus];

    pub fn index(&self) -> usize {
        match self {
            Branch::Zero => 0,
            Branch::Plus => 1,
            Branch::Minus => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub mu: f64,
    pub kappa: f64,
    pub eigenvalues: [f64; 3],
    /// Columns are right eigenvectors `F_k` ordered as `eigenvalues`.
    pub p: Matrix3<Complex64>,
    /// Rows are the bi-orthogonal partners `G_k`.
    pub p_inv: Matrix3<Complex64>,
    pub gauge: Gauge,
    /// Sign `s` such that `(−μ, s·iκ, 1)` belongs to `+κ`.
    plus_sign: f64,
}

impl EigenSystem {
    /// Eigensystem in the regular gauge.
    pub fn new(mu: f64) -> Self {
        Self::with_gauge(mu, Gauge::Regular).expect("regular gauge is defined for all mu")
    }

    pub fn with_gauge(mu: f64, gauge: Gauge) -> Result<Self> {
        let [a0, _, a1, _] = gauge.scales(mu)?;
        let kappa = (1.0 + mu * mu).sqrt();
        let plus_sign = plus_branch_sign(mu, kappa);
        let f0 = Vector3::new(c(1.0), c(0.0), c(mu)) * c(a0);
        let f_plus = Vector3::new(c(-mu), I * (plus_sign * kappa), c(1.0)) * c(a1);
        let f_minus = Vector3::new(c(-mu), I * (-plus_sign * kappa), c(1.0)) * c(a1);
        let p = Matrix3::from_columns(&[f0, f_plus, f_minus]);

        // G_k·F_j = δ_kj; the partner of (−μ, ±iκ, 1) is (−μ, ∓iκ, 1)/(2κ²).
        let k2 = kappa * kappa;
        let g0 = Vector3::new(c(1.0), c(0.0), c(mu)) / c(a0 * k2);
        let g_plus = Vector3::new(c(-mu), I * (-plus_sign * kappa), c(1.0)) / c(2.0 * k2 * a1);
        let g_minus = Vector3::new(c(-mu), I * (plus_sign * kappa), c(1.0)) / c(2.0 * k2 * a1);
        let p_inv = Matrix3::from_rows(&[g0.transpose(), g_plus.transpose(), g_minus.transpose()]);

        Ok(Self {
            mu,
            kappa,
            eigenvalues: [0.0, kappa, -kappa],
            p,
            p_inv,
            gauge,
            plus_sign,
        })
    }

    pub fn eigenvector(&self, branch: Branch) -> Vector3<Complex64> {
        self.p.column(branch.index()).into_owned()
    }

    pub fn partner(&self, branch: Branch) -> Vector3<Complex64> {
        self.p_inv.row(branch.index()).transpose()
    }

    pub fn eigenvalue(&self, branch: Branch) -> f64 {
        self.eigenvalues[branch.index()]
    }

    pub fn diag(&self) -> Matrix3<Complex64> {
        Matrix3::from_diagonal(&Vector3::from(self.eigenvalues.map(c)))
    }

    /// Analytic `dF_k/dμ` in this gauge.
    pub fn eigenvector_derivative(&self, branch: Branch) -> Vector3<Complex64> {
        let mu = self.mu;
        let [a0, da0, a1, da1] = self
            .gauge
            .scales(mu)
            .expect("scales were valid at construction");
        match branch {
            Branch::Zero => {
                Vector3::new(c(da0), c(0.0), c(da0 * mu + a0))
            }
            Branch::Plus | Branch::Minus => {
                let s = if branch == Branch::Plus {
                    self.plus_sign
                } else {
                    -self.plus_sign
                };
                let dkappa = mu / self.kappa;
                let base = Vector3::new(c(-mu), I * (s * self.kappa), c(1.0));
                let dbase = Vector3::new(c(-1.0), I * (s * dkappa), c(0.0));
                base * c(da1) + dbase * c(a1)
            }
        }
    }

    /// `max |P⁻¹ B′ P − D|`.
    pub fn diagonalization_residual(&self) -> f64 {
        let r = self.p_inv * bprime(self.mu).entries * self.p - self.diag();
        r.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |P P⁻¹ − 1|`.
    pub fn inverse_residual(&self) -> f64 {
        let r = self.p * self.p_inv - Matrix3::identity();
        r.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Decides which of `(−μ, ±iκ, 1)` satisfies `B′F = +κF` by substitution.
fn plus_branch_sign(mu: f64, kappa: f64) -> f64 {
    let b = bprime(mu).entries;
    let residual = |s: f64| {
        let f = Vector3::new(c(-mu), I * (s * kappa), c(1.0));
        (b * f - f * c(kappa)).norm()
    };
    if residual(1.0) <= residual(-1.0) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinorState {
    pub amp0: Complex64,
    pub amp1: Complex64,
}

impl SpinorState {
    pub fn new(amp0: Complex64, amp1: Complex64) -> Self {
        Self { amp0, amp1 }
    }

    pub fn norm_sq(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    /// Bloch components `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)`.
    pub fn bloch(&self) -> [f64; 3] {
        let cross = self.amp0.conj() * self.amp1;
        [
            2.0 * cross.re,
            2.0 * cross.im,
            self.amp0.norm_sqr() - self.amp1.norm_sqr(),
        ]
    }
}

/// Expectation values in the moving basis with `Ω = √(ω² + ε²)`.
pub fn expectations_from_spinor(psi: &SpinorState, omega: f64, epsilon: f64) -> Result<LiouvilleVec> {
    expectations_with_rabi(psi, omega, epsilon, omega.hypot(epsilon))
}

/// As [`expectations_from_spinor`] but with an explicit (signed) `Ω` for Ĉ,
/// matching protocols where `Ω(t)` is negative.
pub fn expectations_with_rabi(
    psi: &SpinorState,
    omega: f64,
    epsilon: f64,
    omega_rabi: f64,
) -> Result<LiouvilleVec> {
    let norm = psi.norm_sq();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { norm });
    }
    let [sx, sy, sz] = psi.bloch();
    Ok(LiouvilleVec::new(
        0.5 * (omega * sz + epsilon * sx),
        0.5 * (epsilon * sz - omega * sx),
        0.5 * omega_rabi * sy,
    ))
}
