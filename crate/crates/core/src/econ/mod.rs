//! Regression machinery: OLS, unit-root and cointegration tests, the
//! two-step error-correction model, expanding-window stability scans,
//! and the one-step-ahead backtest harness.

pub mod adf;
pub mod ecm;
pub mod ols;

pub use adf::{adf_test, engle_granger_test, AdfResult, CriticalValues, Deterministic};
pub use ecm::{
    backtest, equilibrium_delta, expanding_window, fit_ecm, fit_ecm_columns, BacktestPoint,
    BacktestReport, DepVariable, EcmFit, EcmSpec, WindowEstimate, WindowOutcome,
};
pub use ols::{ols, OlsFit};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EconError {
    #[error("regressor matrix is rank deficient")]
    RankDeficient,
    #[error("{n_obs} observations cannot identify {n_regressors} coefficients")]
    TooFewObservations { n_obs: usize, n_regressors: usize },
    #[error("series of length {len} too short; need more than {min_len}")]
    SeriesTooShort { len: usize, min_len: usize },
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("only {months} aligned months; need at least {needed}")]
    InsufficientOverlap { months: usize, needed: usize },
    #[error("aligned months are not consecutive (gap after {0})")]
    NonContiguousMonths(crate::time::Month),
    #[error("equilibrium residuals are numerically constant; no error-correction signal")]
    DegenerateResiduals,
    #[error("operation requires a Level fit; got {0:?}")]
    WrongDepVariable(ecm::DepVariable),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("split month leaves an empty train or test side")]
    EmptySplit,
}
