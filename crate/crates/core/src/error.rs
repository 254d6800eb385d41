use thiserror::Error;

/// Errors raised by the numeric core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("polynomials are not coprime (scaled resultant {scaled_resultant:e}): {hint}")]
    NotCoprime { scaled_resultant: f64, hint: String },

    #[error("internal model synthesis failed: {0}")]
    Synthesis(String),

    #[error("system pencil is not regular: the Rosenbrock matrix is rank deficient for every s")]
    NonRegularPencil,

    #[error("design condition violated: {0}")]
    DesignCondition(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("{0}")]
    FunnelViolation(FunnelViolation),
}

/// Location of a funnel escape detected while evaluating the closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct FunnelViolation {
    pub t: f64,
    /// 1-based level of the error cascade.
    pub level: usize,
    pub error_norm: f64,
    pub psi: f64,
}

impl std::fmt::Display for FunnelViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "funnel violation at t = {:.6} s on level {}: |e_{}| = {:.6e}, psi_{} = {:.6e}",
            self.t, self.level, self.level, self.error_norm, self.level, self.psi
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
