use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solver, the diagnostics and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("grid mismatch: N={left_n}, L={left_l} vs N={right_n}, L={right_l}")]
    GridMismatch {
        left_n: usize,
        left_l: f64,
        right_n: usize,
        right_l: f64,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("multiplier symbol is not finite at frequency ({xi1}, {xi2})")]
    NonFiniteSymbol { xi1: f64, xi2: f64 },

    #[error("field has nonzero spatial mean {mean:.3e} (tolerance {tol:.1e})")]
    NonzeroMean { mean: f64, tol: f64 },

    #[error("unsupported form degree {degree} for the {metric} metric")]
    UnsupportedDegree { degree: usize, metric: &'static str },

    #[error("missing time-derivative data for {0}")]
    MissingTimeDerivative(&'static str),

    #[error("gauge field is not unitary: deviation {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("Coulomb condition violated: divergence ratio {ratio:.3e} exceeds {tol:.1e}")]
    NotCoulomb { ratio: f64, tol: f64 },

    #[error("smallness violated in {context}: measure {measure:.4e} exceeds threshold {threshold:.4e}")]
    SmallnessViolated {
        context: &'static str,
        measure: f64,
        threshold: f64,
    },

    #[error("{context} did not contract: observed ratio {ratio:.4}")]
    NoContraction { context: &'static str, ratio: f64 },

    #[error("{context} did not converge in {iterations} iterations (last residual {residual:.3e})")]
    NotConverged {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("non-physical component too large after reconstruction: {ratio:.3e} of field norm")]
    NonPhysical { ratio: f64 },

    #[error("field norm {norm:.3e} exceeds blow-up cap {cap:.3e} at t={time}")]
    BlowUp { norm: f64, cap: f64, time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("config error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config field `{field}` invalid: {message}")]
    ConfigInvalid { field: String, message: String },

    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RankMismatch { .. } => "rank_mismatch",
            Error::GridMismatch { .. } => "grid_mismatch",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::NonFiniteSymbol { .. } => "non_finite_symbol",
            Error::NonzeroMean { .. } => "nonzero_mean",
            Error::UnsupportedDegree { .. } => "unsupported_degree",
            Error::MissingTimeDerivative(_) => "missing_time_derivative",
            Error::NotUnitary { .. } => "not_unitary",
            Error::NotCoulomb { .. } => "not_coulomb",
            Error::SmallnessViolated { .. } => "smallness_violated",
            Error::NoContraction { .. } => "no_contraction",
            Error::NotConverged { .. } => "not_converged",
            Error::NonPhysical { .. } => "non_physical",
            Error::BlowUp { .. } => "blow_up",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Degenerate(_) => "degenerate",
            Error::Inadmissible(_) => "inadmissible",
            Error::ConfigParse { .. } => "config_parse",
            Error::ConfigInvalid { .. } => "config_invalid",
            Error::Snapshot { .. } => "snapshot",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
