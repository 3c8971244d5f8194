//! Left nested pairs `l_n ≤ r_n < l_{n+1} − 1`.

use super::{IndexRule, SetError, SymbolicSet};
use crate::verdict::Verdict;
use serde::{Deserialize, Serialize};

/// Sequences `(l_n)`, `(r_n)` indexed by `n ≥ from`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestedPair {
    pub lefts: IndexRule,
    pub rights: IndexRule,
    #[serde(default)]
    pub from: u64,
}

impl NestedPair {
    pub fn new(lefts: IndexRule, rights: IndexRule, from: u64) -> Self {
        NestedPair { lefts, rights, from }
    }

    fn check_rules(&self) -> Result<(), SetError> {
        for rule in [self.lefts, self.rights] {
            if !rule.is_increasing() {
                return Err(SetError::NotIncreasing(rule));
            }
        }
        Ok(())
    }

    /// First index `n ≥ from` where the chain breaks, if any.
    pub fn first_violation(&self) -> Result<Option<u64>, SetError> {
        self.check_rules()?;
        let (l, r) = (self.lefts.poly(), self.rights.poly());
        let from = self.from as i128;
        let a = r.sub(&l).first_negative(from);
        let b = l.shift_index(1).sub(&r).add_const(-2).first_negative(from);
        let first = match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        };
        Ok(first.map(|n| n as u64))
    }

    pub fn lefts_set(&self) -> SymbolicSet {
        SymbolicSet::points(self.lefts, self.from).expect("increasing rule")
    }

    pub fn rights_set(&self) -> SymbolicSet {
        SymbolicSet::points(self.rights, self.from).expect("increasing rule")
    }

    pub fn left(&self, n: u64) -> i128 {
        self.lefts.eval(n)
    }

    pub fn right(&self, n: u64) -> i128 {
        self.rights.eval(n)
    }

    pub fn with_from(&self, from: u64) -> NestedPair {
        NestedPair { from, ..*self }
    }

    /// The same pair with the first `k` indices dropped.
    pub fn skip(&self, k: u64) -> NestedPair {
        NestedPair { from: self.from + k, ..*self }
    }
}

/// Checks the chain on the first `window` indices; the rules are closed
/// forms, so the answer is exact.
pub fn validate_left_nested(p: &NestedPair, window: u64) -> Result<Verdict, SetError> {
    Ok(match p.first_violation()? {
        None => Verdict::holds("closed-form chain check").note("holds for every index"),
        Some(n) if n < p.from + window => Verdict::fails("closed-form chain check").note(format!(
            "breaks at n = {n}: l_n = {}, r_n = {}, l_(n+1) = {}",
            p.left(n),
            p.right(n),
            p.left(n + 1)
        )),
        Some(n) => Verdict::holds("closed-form chain check").note(format!("holds on the window; first break at n = {n}")),
    })
}

/// `⋃_{n ≥ from} [l_n, r_n]`.
pub fn realize_from_pair(p: &NestedPair) -> Result<SymbolicSet, SetError> {
    if let Some(n) = p.first_violation()? {
        return Err(SetError::NotNested(n));
    }
    SymbolicSet::interval_union(vec![], p.lefts, p.rights, p.from)
}
