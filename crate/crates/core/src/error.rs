//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by channel parsing, condition checks, capacity
/// evaluation, codec construction, and the oracles.
///
/// Mathematical verdicts (a condition failing, a capacity being zero, a
/// covering search coming up empty) are data, not errors; only violated
/// preconditions and resource exhaustion land here.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed channel document: {0}")]
    MalformedDocument(String),

    #[error("support row for (x={x}, s={s}) is empty; every row must be a distribution")]
    EmptySupportRow { x: usize, s: usize },

    #[error("probability table disagrees with the support set: {0}")]
    ProbSupportMismatch(String),

    #[error("unknown builtin channel name `{0}`")]
    UnknownName(String),

    #[error("strategy alphabet would have {needed} letters, above the cap of {cap}")]
    SizeOverflow { needed: u128, cap: usize },

    #[error("state subset to keep is empty")]
    EmptySubset,

    #[error("output alphabet size {ny} is too large for exhaustive partition search (max {max})")]
    OutputAlphabetTooLarge { ny: usize, max: usize },

    #[error("state cost vector is required but missing")]
    MissingStateCost,

    #[error("input cost vector is required but missing")]
    MissingInputCost,

    #[error("cost budget {budget} is infeasible (minimum attainable cost is {min})")]
    InfeasibleBudget { budget: f64, min: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("channel is not deterministic; the closed form applies only to single-output rows")]
    NotDeterministic,

    #[error("optimizer did not reach the requested tolerance (gap estimate {gap:.3e})")]
    ConvergenceFailure {
        gap: f64,
        partial: Box<crate::capacity::CapacityResult>,
    },

    #[error("channel fails the acausal positivity condition at state pair (s={s}, s'={s_prime})")]
    NotPositive { s: usize, s_prime: usize },

    #[error("no-feedback certificate is invalid: {0}")]
    InvalidCertificate(String),

    #[error("output partition does not witness the causal positivity condition: {0}")]
    InvalidPartition(String),

    #[error("survivor set of size {survivors} exceeds the phase-2 budget n2={n2}")]
    SurvivorOverflow { survivors: usize, n2: usize },

    #[error("output {y} at step {step} has zero probability under the plan; transcript corrupt")]
    InfeasibleOutput { step: usize, y: usize },

    #[error("no message is consistent with the phase-2 outputs; transcript corrupt")]
    NoConsistentMessage,

    #[error("both messages are consistent with the phase-2 outputs; codec invariant broken")]
    AmbiguousMessage,

    #[error("zero-error verification failed: {0}")]
    VerificationFailed(String),

    #[error("no covering bin family found after {retries} seeded retries")]
    CoveringNotFound { retries: u32 },

    #[error("bin family does not cover the state block: {0}")]
    CoveringViolation(String),

    #[error("search budget exhausted after {nodes} nodes; result unknown")]
    BudgetExhausted { nodes: u64 },

    #[error("LP solver failed: {0}")]
    LpFailure(String),
}
