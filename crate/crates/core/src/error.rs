//! Error types shared across the simulation crates.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Invalid user-facing parameters. Carries every violation found.
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// A quantity was requested outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature failed to converge under the subinterval cap.
    #[error(
        "quadrature did not converge: error estimate {error_estimate:.3e} after {subintervals} \
         subintervals (worst subinterval [{worst_a:.6e}, {worst_b:.6e}]){context}"
    )]
    QuadratureNonConvergent {
        error_estimate: f64,
        subintervals: usize,
        worst_a: f64,
        worst_b: f64,
        context: String,
    },

    /// Matrix exponential would overflow the scaling budget.
    #[error(
        "operator norm {norm:.3e} exceeds the matrix-exponential scaling budget; \
         reduce the coupling (smaller N_at g_L^2 or dipole magnitude)"
    )]
    ExpOverflow { norm: f64 },

    /// Fock-space truncation is too severe for the requested evolution.
    #[error(
        "top Fock level holds population {population:.3e} (> {limit:.0e}); \
         increase n_cutoff or reduce the coupling"
    )]
    Truncation { population: f64, limit: f64 },

    /// Heralding cannot succeed: no photons in the heralding mode.
    #[error("heralding impossible: success probability {p_success:.3e} below threshold")]
    HeraldImpossible { p_success: f64 },

    /// Two independent computation routes disagreed beyond tolerance.
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    /// Malformed input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CoreError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CoreError::Validation(vec![msg.into()])
    }

    /// Short machine-readable tag for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            CoreError::Validation(_) => "validation",
            CoreError::Domain(_) => "domain",
            CoreError::QuadratureNonConvergent { .. } => "quadrature",
            CoreError::ExpOverflow { .. } => "exp-overflow",
            CoreError::Truncation { .. } => "truncation",
            CoreError::HeraldImpossible { .. } => "herald-impossible",
            CoreError::InternalConsistency(_) => "internal-consistency",
            CoreError::Parse { .. } => "parse",
            CoreError::Io(_) => "io",
            CoreError::Csv(_) => "csv",
            CoreError::Json(_) => "json",
        }
    }
}
