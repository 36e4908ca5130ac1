use thiserror::Error;

/// Errors raised by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("integrand is not finite at p = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("price law has an atom at {at} inside [{lo}, {hi}]; density supremum is unbounded")]
    AtomInRange { at: f64, lo: f64, hi: f64 },

    #[error("quality order violated: q1 = {q1} must exceed q2 = {q2}")]
    InvalidOrder { q1: f64, q2: f64 },

    #[error("data sources have different means: {dominant} vs {dominated}")]
    MeanMismatch { dominant: f64, dominated: f64 },

    #[error("binding budget with v_high = v_low = 0 leaves the bid ratio undefined")]
    DegenerateRatio,

    #[error("{test}: estimate {estimate} is within 3 standard errors ({std_error}) of zero; raise trials")]
    InconclusiveAtResolution {
        test: String,
        estimate: f64,
        std_error: f64,
    },

    #[error("mean spend {spend} exceeds the budget {budget} (std error {std_error})")]
    BudgetInfeasible {
        spend: f64,
        budget: f64,
        std_error: f64,
    },

    #[error("paired scenarios differ in {0}")]
    StructureMismatch(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(what: &'static str, reason: impl Into<String>) -> Result<T> {
    Err(Error::Invalid {
        what,
        reason: reason.into(),
    })
}

/// Checks `lo <= x <= hi` and finiteness.
pub(crate) fn check_range(what: &'static str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if !x.is_finite() || x < lo || x > hi {
        return invalid(what, format!("{x} is outside [{lo}, {hi}]"));
    }
    Ok(())
}
