//! Crate-wide error type.
//!
//! Numeric operations distinguish precondition failures (`NotHermitian`,
//! `NotPsd`, `NotInvertible`, ...) from guard refusals (`MetricSingular`,
//! `ConditionGuard`) and from the one "should never happen" case,
//! `InternalInconsistency`, which reports both singular-value witnesses so a
//! conditioning problem can be diagnosed from the message alone.

use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds {allowed:.3e}")]
    NotHermitian { asymmetry: f64, allowed: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.6e} below -{allowed:.3e}")]
    NotPsd { eigenvalue: f64, allowed: f64 },

    #[error("form gram matrix is not symmetric (Hermitian): asymmetry {asymmetry:.3e}")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("operator is not invertible: sigma_min {sigma_min:.3e} <= cutoff {cutoff:.3e}")]
    NotInvertible { sigma_min: f64, cutoff: f64 },

    #[error("metric operator is singular: sigma_min {sigma_min:.3e} <= cutoff {cutoff:.3e}")]
    MetricSingular { sigma_min: f64, cutoff: f64 },

    #[error(
        "condition guard tripped: cond(H)^2 = {cond_squared:.3e} exceeds {guard:.3e}; \
         the extracted representation would not be certifiable"
    )]
    ConditionGuard { cond_squared: f64, guard: f64 },

    #[error(
        "internal inconsistency: solvability verdicts disagree \
         (sigma_min(Q_B) = {sigma_min_qb:.6e}, sigma_min(T+B) = {sigma_min_tb:.6e}); \
         this signals a numerical-conditioning problem in the instance"
    )]
    InternalInconsistency { sigma_min_qb: f64, sigma_min_tb: f64 },

    #[error("resolvent hypothesis violated at n = {index}: |alpha_n + beta_n| = {value:.3e}")]
    ResolventViolation { index: usize, value: f64 },

    #[error("symbol evaluation failed at n = {index}: {source}")]
    SymbolEval { index: usize, source: EvalError },

    #[error("grid evaluation failed at z = ({x}, {y}): {source}")]
    GridEval { x: f64, y: f64, source: EvalError },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),

    #[error("invalid problem spec: {0}")]
    Spec(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code class: 2 for spec/parse problems, 3 for numeric/guard
    /// problems. Check failures (exit 1) are decided by report verdicts, not
    /// by errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_)
            | Error::Eval(_)
            | Error::Spec(_)
            | Error::Json(_)
            | Error::Io { .. }
            | Error::InvalidTolerance(_)
            | Error::DimensionMismatch { .. } => 2,
            _ => 3,
        }
    }
}
