use alloc::string::String;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error in {op}: {what}")]
    Domain { op: &'static str, what: String },

    /// A quantity underflowed to zero where a positive value is required.
    #[error("underflow in {op}: {what}")]
    Underflow { op: &'static str, what: &'static str },

    /// An iterative solver ran out of iterations.
    #[error("{op} did not converge after {iters} iterations")]
    NonConvergence { op: &'static str, iters: u32 },

    /// No bracket containing the sought root or minimum could be found.
    #[error("bracket failure in {op}: {what}")]
    BracketFailure { op: &'static str, what: &'static str },

    /// The requested object does not exist for these sizes.
    #[error("infeasible request: {what}")]
    Infeasible { what: String },

    /// Duplicate-rejection sampling would be too slow at this density.
    #[error("edge density too high for rejection sampling: m = {m}, C(n,r) = {choices}")]
    DensityTooHigh { m: u64, choices: u128 },

    /// A rejection loop exceeded its attempt budget.
    #[error("rejection budget exhausted after {attempts} attempts in {op}")]
    RejectionBudget { op: &'static str, attempts: u64 },

    /// A search exceeded its state budget.
    #[error("search budget exceeded after {states} states")]
    BudgetExceeded { states: u64 },

    /// Invalid (r, k) parameters.
    #[error("invalid parameters: {what}")]
    InvalidParams { what: String },

    /// Depth is undefined for vertices that survive in the k-core.
    #[error("vertex {v} is in the k-core; depth is undefined")]
    CoreVertex { v: u32 },
}

impl Error {
    pub(crate) fn domain(op: &'static str, what: impl Into<String>) -> Self {
        Error::Domain {
            op,
            what: what.into(),
        }
    }
}
