//! Exact analysis of ideal-torsion membership for elements of the circle
//! given by Cantor-series (mixed radix) expansions.
//!
//! Layers, bottom up: [`scale`] (ratio sequences `b_n` and scales `u_n`),
//! [`intsets`] (symbolic subsets of ℕ), [`expansion`] (digit streams and
//! exact circle norms), [`ideals`] (three-valued membership oracles),
//! [`conditions`] (the support conditions and the decision procedure) and
//! [`verifier`] (exception sets computed from exact norms).

pub mod catalog;
pub mod conditions;
pub mod expansion;
pub mod ideals;
pub mod intsets;
pub mod scale;
pub mod verdict;
pub mod verifier;

pub use intsets::{IndexRule, NestedPair, SetError, SymbolicSet};
pub use scale::{BClassification, BTag, RatioKind, RatioSequence, Rule, ScaleError};
pub use verdict::{TrailPoint, Truth, Verdict};
pub use ideals::{membership, Family, IdealSpec, Nested, Schedule, Weights};
pub use expansion::{circle_norm, extract_digits, Clause, DigitStream, NormInterval, ValueRule};
pub use conditions::{decide, evaluate_all, ConditionTable, Decision, Outcome, TorsionContext};
pub use verifier::{exception_set, run_verification, smallness_assessment, Consistency, ExceptionReport, VerifyParams};
