//! Zero-error feedback coding over state-dependent discrete memoryless
//! channels (SD-DMCs).
//!
//! The crate decides when the zero-error feedback capacity of an SD-DMC is
//! positive under acausal, causal, strictly-causal, or absent encoder side
//! information; evaluates the matching capacity formulas (including
//! cost-constrained and rate-and-state variants); constructs the two-phase
//! single-bit codecs that witness positivity; and cross-checks everything
//! against brute-force game-tree oracles at small block lengths.
//!
//! Everything is support-first: zero-error questions depend only on which
//! transitions have positive probability, so channels are stored as support
//! sets with optional probability weights that only the mutual-information
//! evaluators consult.

pub mod bins;
pub mod block;
pub mod capacity;
pub mod channel;
pub mod codec;
pub mod conditions;
pub mod error;
pub mod ktype;
pub mod lp;
pub mod oracle;
pub mod rng;

pub use channel::{
    builtin, marginal_channel, parse_channel, restrict_states, serialize_channel,
    shannon_strategy_channel, CostSpec, StatelessChannel, StrategyTable, SupportChannel,
};
pub use conditions::{
    check_acausal_positive, check_causal_positive, check_ccstates_necessary,
    check_nofb_sufficient_zero, check_phase1_feasible, check_stateless_positive,
    search_nofb_positive_certificate, NofbCertificate, SearchLimits, Verdict,
};
pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
