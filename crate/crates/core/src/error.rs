//! Shared error types.

use thiserror::Error;

/// Errors from ring construction and arithmetic.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("operands belong to different ring specs")]
    SpecMismatch,
    #[error("element is not a unit")]
    NotAUnit,
    #[error("series has a nonzero constant term and cannot be composed")]
    NotComposable,
    #[error("working precision too low: need headroom of {needed} beyond {available}")]
    InsufficientPrecision { needed: u32, available: u32 },
    #[error("result leaves the representable window: {0}")]
    TruncationLoss(LossReport),
    #[error("negative exponent where an integral element was required")]
    NotIntegral,
    #[error("module is not etale: {0}")]
    NotEtale(String),
    #[error("search bound exhausted before the answer stabilized: {0}")]
    Inconclusive(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// What fell outside the representable window during an operation.
#[derive(Debug, Clone, Default)]
pub struct LossReport {
    /// Terms whose exponent in some variable went below the negative bound,
    /// as (exponent vector, pi-valuation of the lost coefficient).
    pub below_floor: Vec<(Vec<i64>, u32)>,
    /// Terms past the total-degree window, same format.
    pub past_window: Vec<(Vec<i64>, u32)>,
}

impl LossReport {
    pub fn is_empty(&self) -> bool {
        self.below_floor.is_empty() && self.past_window.is_empty()
    }
}

impl std::fmt::Display for LossReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} term(s) below the exponent floor, {} past the degree window",
            self.below_floor.len(),
            self.past_window.len()
        )?;
        if let Some((exp, v)) = self.below_floor.first() {
            write!(f, "; first lost low term at {exp:?} (pi-valuation {v})")?;
        }
        if let Some((exp, v)) = self.past_window.first() {
            write!(f, "; first lost high term at {exp:?} (pi-valuation {v})")?;
        }
        Ok(())
    }
}
