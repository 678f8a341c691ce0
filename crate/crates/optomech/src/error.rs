use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("susceptibility pole on the real axis (zero damping at resonance)")]
    PoleOnRealAxis,

    #[error("adaptive quadrature did not converge to tolerance {tol} (best error {best})")]
    QuadratureNotConverged { tol: f64, best: f64 },

    #[error("blue-detuned drive (detuning >= 0) has no cooling minimum")]
    BlueDetunedNoMinimum,

    #[error("frequency grid too narrow: need margin {needed} beyond +/-Omega, have {have}")]
    GridTooNarrow { needed: f64, have: f64 },

    #[error("linear-response denominator |Sigma| below {0} (parametric instability)")]
    SingularSigma(f64),

    #[error("Bessel truncation order {order} contributes {contribution} > tolerance {tol}")]
    TruncationError {
        order: i32,
        contribution: f64,
        tol: f64,
    },

    #[error("integration step too large: field magnitude exceeded stability bound at t = {t}")]
    StepTooLarge { t: f64 },

    #[error("non-finite state encountered during integration at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("ring-down fit did not converge: {0}")]
    FitNotConverged(String),

    #[error("insufficient decay for ring-down fit: Gamma_eff * duration = {0} < 2")]
    InsufficientDecay(f64),

    #[error("unknown figure name: {0}")]
    UnknownFigure(String),

    #[error("missing configuration: {0}")]
    ConfigMissing(String),

    #[error("bad axis specification: {0}")]
    BadAxisSpec(String),

    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
