use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (zero mode,
    /// non-mean-zero field, negative horizon, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("grid under-resolved: {0}")]
    UnderResolved(String),

    #[error("degenerate critical mode: {0} frequency pairs attain the threshold")]
    DegenerateCriticalMode(usize),

    #[error("no phase transition: every kernel coefficient is nonnegative")]
    NoThreshold,

    #[error("spectral gap closed at gamma = {gamma} (gamma_c = {gamma_c})")]
    GapClosed { gamma: f64, gamma_c: f64 },

    #[error("elliptic mode: sigma = {0} < 0")]
    EllipticMode(f64),

    #[error("singular linear system (condition estimate {condition:e}): {context}")]
    Singular { condition: f64, context: String },

    #[error("iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("positivity lost: min density {min} at time index {step}")]
    PositivityLost { min: f64, step: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("{0}")]
    Fit(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
