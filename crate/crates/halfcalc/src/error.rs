use thiserror::Error;

/// Errors shared across the workbench.
#[derive(Debug, Error)]
pub enum HalfcalcError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is singular: pivot magnitude {pivot:.3e} below threshold {threshold:.3e}")]
    Singular { pivot: f64, threshold: f64 },

    #[error("iteration did not converge after {iterations} steps (last estimate {last:.6e})")]
    Convergence { iterations: usize, last: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("generator is not exponentially stable: growth bound {omega} >= 0")]
    Unstable { omega: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("spectral oracle unavailable: generator has no spectral form")]
    OracleUnavailable,

    #[error("path inapplicable: {0}")]
    PathInapplicable(String),

    #[error("contour placement: epsilon {epsilon} outside (0, {bound})")]
    ContourPlacement { epsilon: f64, bound: f64 },

    #[error("symbol lacks integrable decay: {0}")]
    Decay(String),

    #[error("shift {tau} is not a nonnegative multiple of the grid step {step}")]
    Alignment { tau: f64, step: f64 },

    #[error("rescaling requires growth bound {omega} < shift {v}")]
    Rescaling { omega: f64, v: f64 },

    #[error("size limit exceeded: {0}")]
    Size(String),
}

pub type Result<T> = std::result::Result<T, HalfcalcError>;
