use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("adiabatic parameter mu={mu:e} at t={t} is below the singularity floor {floor:e}")]
    SingularMu { t: f64, mu: f64, floor: f64 },

    #[error("invalid protocol parameters: {0}")]
    InvalidParams(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("spinor is not normalized (|psi|^2 = {norm})")]
    NotNormalized { norm: f64 },

    #[error("Hamiltonian is degenerate (Omega = {omega_rabi:e})")]
    DegenerateHamiltonian { omega_rabi: f64 },

    #[error("step size underflow at t={t} (h={h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integrator exceeded {max_steps} steps before t={t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("propagated state has imaginary residue {residue:e} above {limit:e}")]
    ComplexResidue { residue: f64, limit: f64 },

    #[error("initial vector is not an energy eigenstate (l={l:e}, c={c:e})")]
    NotEigenstate { l: f64, c: f64 },

    #[error("initial energy {0:e} is too small to normalize by")]
    ZeroInitialEnergy(f64),

    #[error("trajectory time grids differ: {0}")]
    GridMismatch(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}
