//! Counters of how often each construction rule fired, process-wide.

use core::sync::atomic::{AtomicU64, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    /// Composition: the first transducer emits a letter the second reads.
    ComposeInput,
    /// Composition: the first transducer emits nothing.
    ComposeInputEps,
    /// Composition: the output of the first may be empty, split into both cases.
    ComposeMaybeEps,
    /// Composition: the second transducer moves without reading.
    ComposeSecondEps,
    /// Composition: a combined transition was dropped as unsatisfiable.
    ComposeUnsat,
    /// Product: both sides emit and the letters are compared.
    ProductBoth,
    /// Product: only the left side moves (emitting nothing).
    ProductLeftEps,
    /// Product: only the right side moves (emitting nothing).
    ProductRightEps,
    /// Product: the left side is done; the right side only has to finish.
    ProductLeftDone,
    /// Product: the right side is known to accept any continuation.
    ProductRightUniversal,
    /// Product: the right side keeps reading after the left is done.
    ProductTail,
    /// Epsilon elimination: a silent path was folded into a transition.
    EpsilonFold,
    /// Epsilon elimination: a silent path reached a final state.
    EpsilonFinal,
    /// Concatenation merged the left final state with the right initial state.
    ConcatMerge,
    /// Concatenation copied the right initial transitions to left finals.
    ConcatCopy,
}

pub const ALL_RULES: [Rule; 15] = [
    Rule::ComposeInput,
    Rule::ComposeInputEps,
    Rule::ComposeMaybeEps,
    Rule::ComposeSecondEps,
    Rule::ComposeUnsat,
    Rule::ProductBoth,
    Rule::ProductLeftEps,
    Rule::ProductRightEps,
    Rule::ProductLeftDone,
    Rule::ProductRightUniversal,
    Rule::ProductTail,
    Rule::EpsilonFold,
    Rule::EpsilonFinal,
    Rule::ConcatMerge,
    Rule::ConcatCopy,
];

static COUNTS: [AtomicU64; 15] = [const { AtomicU64::new(0) }; 15];

pub(crate) fn hit(rule: Rule) {
    COUNTS[rule as usize].fetch_add(1, Ordering::Relaxed);
}

pub fn count(rule: Rule) -> u64 {
    COUNTS[rule as usize].load(Ordering::Relaxed)
}

/// Fraction of rules that fired at least once.
pub fn coverage() -> f64 {
    let hit = ALL_RULES.iter().filter(|r| count(**r) > 0).count();
    hit as f64 / ALL_RULES.len() as f64
}
