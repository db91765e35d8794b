use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the library.
///
/// Variants split into input errors (shape or configuration problems) and
/// math-domain errors (a point in a spectrum, a pole, a singular coupling);
/// [`Error::is_domain`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("lambda = {lambda} lies in the spectrum (condition {cond:.3e})")]
    SpectrumPoint { lambda: Complex64, cond: f64 },

    #[error("boundary map Gamma0 is not invertible on the defect space at lambda = {0}")]
    NonInvertibleTrace(Complex64),

    #[error("lambda = {0} is a pole of the operator function or lies in the spectrum of its A0")]
    PoleOrSpectrum(Complex64),

    #[error("at least {need} sample points required, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("representation form is not strict: ker gamma has dimension {kernel_dim}")]
    NotStrict { kernel_dim: usize },

    #[error("theta = {0} must be nonreal")]
    RealTheta(Complex64),

    #[error("off-diagonal coupling blocks are not mutually adjoint (residual {0:.3e})")]
    NonAdjointBlocks(f64),

    #[error("beta_1 is not positive definite (smallest eigenvalue {0:.3e})")]
    BetaOneSingular(f64),

    #[error("coefficient {name} is not positive at ({x}, {y}): {value}")]
    NonPositiveCoefficient {
        name: String,
        x: f64,
        y: f64,
        value: f64,
    },

    #[error("boundary coupling block L_IB lost column rank")]
    RankDeficientCoupling,

    #[error("coupling conditions do not determine the linearization uniquely")]
    CouplingRankDeficient,

    #[error("coupled boundary value system is singular at lambda = {0}")]
    SingularSystem(Complex64),

    #[error("lambda = {lambda} is outside the solvability set (sigma_min = {sigma_min:.3e})")]
    OutsideU { lambda: Complex64, sigma_min: f64 },

    #[error("invalid coefficient expression {expr:?}: {message}")]
    Expression { expr: String, message: String },
}

impl Error {
    /// True for errors caused by the spectral parameter or the mathematical
    /// data rather than by malformed input.
    pub fn is_domain(&self) -> bool {
        !matches!(
            self,
            Error::DimensionMismatch(_) | Error::InvalidInput(_) | Error::Expression { .. }
        )
    }

    /// Variant name, for structured error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidInput(_) => "InvalidInput",
            Error::SpectrumPoint { .. } => "SpectrumPoint",
            Error::NonInvertibleTrace(_) => "NonInvertibleTrace",
            Error::PoleOrSpectrum(_) => "PoleOrSpectrum",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::NotStrict { .. } => "NotStrict",
            Error::RealTheta(_) => "RealTheta",
            Error::NonAdjointBlocks(_) => "NonAdjointBlocks",
            Error::BetaOneSingular(_) => "BetaOneSingular",
            Error::NonPositiveCoefficient { .. } => "NonPositiveCoefficient",
            Error::RankDeficientCoupling => "RankDeficientCoupling",
            Error::CouplingRankDeficient => "CouplingRankDeficient",
            Error::SingularSystem(_) => "SingularSystem",
            Error::OutsideU { .. } => "OutsideU",
            Error::Expression { .. } => "Expression",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
