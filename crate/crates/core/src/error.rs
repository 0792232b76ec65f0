use thiserror::Error;

/// Errors produced by the grid, field, solver, diagnostics and ADN layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("CFL violated: dt = {dt:.3e} exceeds limit {limit:.3e} (max|u| = {max_u:.3e})")]
    Cfl { max_u: f64, dt: f64, limit: f64 },

    #[error("solution diverged at step {step} (t = {t:.6})")]
    Divergence { step: usize, t: f64 },

    #[error("simulation with nu = {nu} failed at t = {t:.6}: {source}")]
    Simulation {
        nu: f64,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("boundary system for Fourier mode k = {k} is singular (alpha = {alpha})")]
    DegenerateMode { k: i64, alpha: f64 },

    #[error("Neumann data incompatible: mode-0 defect {defect:.3e}")]
    CompatibilityDefect { defect: f64 },

    #[error("test field is not in V: {predicate} (value {value:.3e})")]
    NotInV { predicate: &'static str, value: f64 },

    #[error("no pressure supplied for snapshot {index}")]
    MissingPressure { index: usize },

    #[error("test function is negative ({value:.3e}) at sample {index}")]
    NegativeTestFunction { index: usize, value: f64 },

    #[error("field is numerically zero (norm {norm:.3e})")]
    ZeroField { norm: f64 },

    #[error("weight violation in {operator}[{row},{col}] multi-index {multi_index:?}: {reason}")]
    Weight {
        operator: &'static str,
        row: usize,
        col: usize,
        multi_index: Vec<u32>,
        reason: String,
    },

    #[error("root on the real axis: sigma = {re:.6e} + {im:.6e}i")]
    RealRoot { re: f64, im: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what: what.to_string(),
        })
    }
}
