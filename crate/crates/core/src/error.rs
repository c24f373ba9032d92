use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A query asked for more depth than the tree carries.
    #[error("insufficient resolution: needed depth {needed}, have {have}")]
    InsufficientResolution { needed: u32, have: u32 },

    /// Component of a zero-mass cell.
    #[error("empty component: cell has zero mass")]
    EmptyComponent,

    /// Word enumeration exceeded the configured budget.
    #[error("budget exceeded: {visited} nodes visited (budget {budget})")]
    BudgetExceeded { visited: u64, budget: u64 },

    /// Exact-arithmetic operation requested on non-exact data.
    #[error("exact arithmetic required: {0}")]
    ExactArithmeticRequired(String),

    /// Invalid construction parameters.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Degenerate direction pair.
    #[error("degenerate pair: translations coincide")]
    DegeneratePair,

    /// Conditional measure on a strip that carries no mass.
    #[error("zero-mass strip")]
    ZeroMassStrip,

    /// Magnification ran out of tree depth on a non-replenishable measure.
    #[error("magnification budget exhausted at step {step}")]
    DepthExhausted { step: u32 },

    /// A lemma hypothesis failed where the operation requires it to hold.
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    /// Structured-text parse failure.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
