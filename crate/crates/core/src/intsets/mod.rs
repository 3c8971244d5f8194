//! Symbolic subsets of ℕ.
//!
//! A [`SymbolicSet`] is an immutable tree: a handful of closed forms
//! (finite, cofinite, residue classes, interval unions with polynomial
//! generators, explicit prefixes) combined by lazy algebra nodes. Every form
//! answers membership and counting queries; the closed forms answer them
//! without enumeration, and [`normal`] turns most trees back into a closed
//! description that the ideal oracles can reason about.

mod normal;
mod pairs;
mod poly;

pub use normal::{NormalForm, Periodic, Piece};
pub use pairs::{realize_from_pair, validate_left_nested, NestedPair};
pub use poly::IndexRule;
pub(crate) use poly::{isqrt, Poly};

pub(crate) fn exact_sqrt_pub(n: i128) -> Option<i128> {
    poly::exact_sqrt(n)
}

pub(crate) fn div_floor_pub(a: i128, b: i128) -> i128 {
    poly::div_floor(a, b)
}

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("query at {n} is beyond the validity horizon {horizon}")]
    BeyondHorizon { n: u64, horizon: u64 },
    #[error("boundaries are undefined for the empty set")]
    EmptyBoundary,
    #[error("invalid interval generators: {0}")]
    InvalidGenerators(String),
    #[error("index rule {0} is not strictly increasing")]
    NotIncreasing(IndexRule),
    #[error("pair is not left nested at index {0}")]
    NotNested(u64),
    #[error("modulus must be positive")]
    ZeroModulus,
}

/// Blocks `[l(i), r(i)]` for `i ≥ start`, preceded by explicit head blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntervalUnion {
    head: Vec<(u64, u64)>,
    left: IndexRule,
    right: IndexRule,
    start: u64,
}

impl IntervalUnion {
    pub fn head(&self) -> &[(u64, u64)] {
        &self.head
    }
    pub fn left(&self) -> IndexRule {
        self.left
    }
    pub fn right(&self) -> IndexRule {
        self.right
    }
    pub fn start(&self) -> u64 {
        self.start
    }

    fn l(&self, i: u64) -> u64 {
        self.left.eval(i) as u64
    }
    fn r(&self, i: u64) -> u64 {
        self.right.eval(i) as u64
    }

    /// Largest generator index `i ≥ start` with `l(i) ≤ n`.
    fn last_block_at(&self, n: u64) -> Option<u64> {
        if self.left.eval(self.start) > n as i128 {
            return None;
        }
        let mut step = 1u64;
        while self.left.eval(self.start + step) <= n as i128 {
            step *= 2;
        }
        let (mut lo, mut hi) = (self.start, self.start + step);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.left.eval(mid) <= n as i128 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }

    fn contains(&self, n: u64) -> bool {
        if self.head.iter().any(|&(a, b)| a <= n && n <= b) {
            return true;
        }
        match self.last_block_at(n) {
            Some(i) => n <= self.r(i),
            None => false,
        }
    }

    fn count(&self, n: u64) -> u64 {
        let mut total: u64 = self
            .head
            .iter()
            .filter(|&&(a, _)| a <= n)
            .map(|&(a, b)| b.min(n) - a + 1)
            .sum();
        if let Some(k) = self.last_block_at(n) {
            let len = self.right.poly().sub(&self.left.poly()).add_const(1);
            total += len.range_sum(self.start as i128, k as i128 - 1) as u64;
            total += self.r(k).min(n) - self.l(k) + 1;
        }
        total
    }

    /// Maximal runs are not merged here; adjacent blocks may touch.
    fn blocks_upto(&self, n: u64) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = self.head.iter().copied().filter(|&(a, _)| a <= n).collect();
        if let Some(k) = self.last_block_at(n) {
            for i in self.start..=k {
                out.push((self.l(i), self.r(i)));
            }
        }
        out
    }

    /// True when consecutive blocks are separated by at least one gap point.
    fn strictly_separated(&self) -> bool {
        let gap = self.left.poly().shift_index(1).sub(&self.right.poly()).add_const(-2);
        if !gap.nonneg_on(self.start as i128) {
            return false;
        }
        let mut prev: Option<u64> = None;
        for &(a, b) in &self.head {
            if let Some(p) = prev {
                if a < p + 2 {
                    return false;
                }
            }
            prev = Some(b);
        }
        match prev {
            Some(p) => self.l(self.start) >= p + 2,
            None => true,
        }
    }
}

/// Node of a symbolic set tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SetNode {
    Empty,
    Finite(Vec<u64>),
    Cofinite(Vec<u64>),
    Residue { modulus: u64, residues: Vec<u64> },
    Intervals(IntervalUnion),
    Prefix { members: Vec<u64>, horizon: u64 },
    Union(SymbolicSet, SymbolicSet),
    Intersect(SymbolicSet, SymbolicSet),
    Diff(SymbolicSet, SymbolicSet),
    Complement(SymbolicSet),
    Shift(SymbolicSet, i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolicSet(Arc<SetNode>);

fn sorted(items: impl IntoIterator<Item = u64>) -> Vec<u64> {
    items.into_iter().collect::<BTreeSet<_>>().into_iter().collect()
}

impl SymbolicSet {
    fn wrap(node: SetNode) -> Self {
        SymbolicSet(Arc::new(node))
    }

    pub fn node(&self) -> &SetNode {
        &self.0
    }

    pub fn empty() -> Self {
        Self::wrap(SetNode::Empty)
    }

    pub fn naturals() -> Self {
        Self::wrap(SetNode::Cofinite(Vec::new()))
    }

    /// ℕ₊ = ℕ ∖ {0}.
    pub fn positives() -> Self {
        Self::cofinite([0])
    }

    pub fn finite(items: impl IntoIterator<Item = u64>) -> Self {
        let v = sorted(items);
        if v.is_empty() {
            Self::empty()
        } else {
            Self::wrap(SetNode::Finite(v))
        }
    }

    /// Closed interval `[a, b]`.
    pub fn range(a: u64, b: u64) -> Self {
        Self::finite(a..=b)
    }

    pub fn cofinite(excluded: impl IntoIterator<Item = u64>) -> Self {
        Self::wrap(SetNode::Cofinite(sorted(excluded)))
    }

    pub fn residue(modulus: u64, residues: impl IntoIterator<Item = u64>) -> Result<Self, SetError> {
        if modulus == 0 {
            return Err(SetError::ZeroModulus);
        }
        let r = sorted(residues.into_iter().map(|x| x % modulus));
        Ok(if r.is_empty() {
            Self::empty()
        } else if r.len() as u64 == modulus {
            Self::naturals()
        } else {
            Self::wrap(SetNode::Residue { modulus, residues: r })
        })
    }

    pub fn evens() -> Self {
        Self::residue(2, [0]).unwrap()
    }

    pub fn odds() -> Self {
        Self::residue(2, [1]).unwrap()
    }

    /// Perfect squares `{n²}`.
    pub fn squares() -> Self {
        Self::interval_union(vec![], IndexRule::new(1, 0, 0), IndexRule::new(1, 0, 0), 0).unwrap()
    }

    /// Points `{rule(i) : i ≥ start}` of an increasing rule.
    pub fn points(rule: IndexRule, start: u64) -> Result<Self, SetError> {
        Self::interval_union(vec![], rule, rule, start)
    }

    pub fn interval_union(
        head: Vec<(u64, u64)>,
        left: IndexRule,
        right: IndexRule,
        start: u64,
    ) -> Result<Self, SetError> {
        let bad = |m: &str| Err(SetError::InvalidGenerators(m.to_string()));
        let (l, r) = (left.poly(), right.poly());
        if l.eval(start as i128) < 0 {
            return bad("first generator block starts below zero");
        }
        if !r.sub(&l).nonneg_on(start as i128) {
            return bad("need l(i) ≤ r(i) for every index");
        }
        if !l.shift_index(1).sub(&r).add_const(-1).nonneg_on(start as i128) {
            return bad("need r(i) < l(i+1) for every index");
        }
        let mut prev: Option<u64> = None;
        for &(a, b) in &head {
            if a > b || prev.is_some_and(|p| a <= p) {
                return bad("head blocks must be ordered and disjoint");
            }
            prev = Some(b);
        }
        if prev.is_some_and(|p| p as i128 >= l.eval(start as i128)) {
            return bad("head blocks must precede the generator blocks");
        }
        Ok(Self::wrap(SetNode::Intervals(IntervalUnion { head, left, right, start })))
    }

    pub fn prefix(members: impl IntoIterator<Item = u64>, horizon: u64) -> Self {
        let members = sorted(members.into_iter().filter(|&m| m <= horizon));
        Self::wrap(SetNode::Prefix { members, horizon })
    }

    pub fn is_empty_form(&self) -> bool {
        matches!(self.node(), SetNode::Empty)
    }

    pub fn is_naturals_form(&self) -> bool {
        matches!(self.node(), SetNode::Cofinite(e) if e.is_empty())
    }

    pub fn as_finite(&self) -> Option<&[u64]> {
        match self.node() {
            SetNode::Empty => Some(&[]),
            SetNode::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn union(&self, other: &SymbolicSet) -> SymbolicSet {
        use SetNode::*;
        if self.is_empty_form() || other.is_naturals_form() || self == other {
            return other.clone();
        }
        if other.is_empty_form() || self.is_naturals_form() || other.within(self, 4) {
            return self.clone();
        }
        if self.within(other, 4) {
            return other.clone();
        }
        match (self.node(), other.node()) {
            (Finite(a), Finite(b)) => Self::finite(a.iter().chain(b).copied()),
            (Cofinite(e), Finite(f)) | (Finite(f), Cofinite(e)) => {
                let f: BTreeSet<_> = f.iter().collect();
                Self::cofinite(e.iter().copied().filter(|x| !f.contains(x)))
            }
            (Cofinite(a), Cofinite(b)) => {
                let b: BTreeSet<_> = b.iter().collect();
                Self::cofinite(a.iter().copied().filter(|x| b.contains(x)))
            }
            (Residue { modulus: m1, residues: r1 }, Residue { modulus: m2, residues: r2 }) if m1 == m2 => {
                Self::residue(*m1, r1.iter().chain(r2).copied()).unwrap()
            }
            _ => Self::wrap(Union(self.clone(), other.clone())),
        }
    }

    pub fn intersect(&self, other: &SymbolicSet) -> SymbolicSet {
        use SetNode::*;
        if self.is_empty_form() || other.is_naturals_form() || self == other {
            return self.clone();
        }
        if other.is_empty_form() || self.is_naturals_form() || other.within(self, 4) {
            return other.clone();
        }
        if self.within(other, 4) {
            return self.clone();
        }
        if self.disjoint_from(other) {
            return Self::empty();
        }
        match (self.node(), other.node()) {
            (Finite(a), _) if other.horizon().is_none() => {
                Self::finite(a.iter().copied().filter(|&x| other.contains(x) == Some(true)))
            }
            (_, Finite(b)) if self.horizon().is_none() => {
                Self::finite(b.iter().copied().filter(|&x| self.contains(x) == Some(true)))
            }
            (Cofinite(a), Cofinite(b)) => Self::cofinite(a.iter().chain(b).copied()),
            (Residue { modulus: m1, residues: r1 }, Residue { modulus: m2, residues: r2 }) if m1 == m2 => {
                let r2: BTreeSet<_> = r2.iter().collect();
                Self::residue(*m1, r1.iter().copied().filter(|x| r2.contains(x))).unwrap()
            }
            _ => Self::wrap(Intersect(self.clone(), other.clone())),
        }
    }

    pub fn diff(&self, other: &SymbolicSet) -> SymbolicSet {
        use SetNode::*;
        if self.is_empty_form() || other.is_naturals_form() || self.within(other, 4) {
            return Self::empty();
        }
        if other.is_empty_form() || self.disjoint_from(other) {
            return self.clone();
        }
        match (self.node(), other.node()) {
            (Finite(a), _) if other.horizon().is_none() => {
                Self::finite(a.iter().copied().filter(|&x| other.contains(x) == Some(false)))
            }
            (Cofinite(e), Finite(f)) => Self::cofinite(e.iter().chain(f).copied()),
            (_, Finite(f)) if self.horizon().is_none() && f.iter().all(|&x| self.contains(x) == Some(false)) => {
                self.clone()
            }
            _ => Self::wrap(Diff(self.clone(), other.clone())),
        }
    }

    /// Syntactic `self ⊆ other`; `false` means "not shown".
    fn within(&self, other: &SymbolicSet, depth: u32) -> bool {
        use SetNode::*;
        if self == other || self.is_empty_form() || other.is_naturals_form() {
            return true;
        }
        if depth == 0 {
            return false;
        }
        let d = depth - 1;
        match self.node() {
            Intersect(x, y) if x.within(other, d) || y.within(other, d) => return true,
            Diff(x, _) if x.within(other, d) => return true,
            Union(x, y) if x.within(other, d) && y.within(other, d) => return true,
            _ => {}
        }
        match other.node() {
            Cofinite(e) if self.horizon().is_none() => e.iter().all(|&x| self.contains(x) == Some(false)),
            Union(x, y) => self.within(x, d) || self.within(y, d),
            Intersect(x, y) => self.within(x, d) && self.within(y, d),
            _ => false,
        }
    }

    /// Syntactic `self ∩ other = ∅`.
    fn disjoint_from(&self, other: &SymbolicSet) -> bool {
        self.disjoint(other, 4) || other.disjoint(self, 4)
    }

    fn disjoint(&self, other: &SymbolicSet, depth: u32) -> bool {
        use SetNode::*;
        if self.is_empty_form() || other.is_empty_form() {
            return true;
        }
        if depth == 0 {
            return false;
        }
        let d = depth - 1;
        match (self.node(), other.node()) {
            (Residue { modulus: m1, residues: r1 }, Residue { modulus: m2, residues: r2 }) => {
                let g = num_integer::gcd(*m1, *m2);
                return r1.iter().all(|a| r2.iter().all(|b| a % g != b % g));
            }
            (Finite(v), _) if other.horizon().is_none() => {
                return v.iter().all(|&x| other.contains(x) == Some(false));
            }
            _ => {}
        }
        match self.node() {
            Intersect(x, y) => x.disjoint_from_depth(other, d) || y.disjoint_from_depth(other, d),
            Diff(x, y) => x.disjoint_from_depth(other, d) || other.within(y, d),
            Union(x, y) => x.disjoint_from_depth(other, d) && y.disjoint_from_depth(other, d),
            Complement(y) => other.within(y, d),
            _ => false,
        }
    }

    fn disjoint_from_depth(&self, other: &SymbolicSet, depth: u32) -> bool {
        self.disjoint(other, depth) || other.disjoint(self, depth)
    }

    /// Rebuilt from the normal form when one exists; otherwise unchanged.
    pub fn simplified(&self) -> SymbolicSet {
        match self.node() {
            SetNode::Union(..) | SetNode::Intersect(..) | SetNode::Diff(..) | SetNode::Complement(..) | SetNode::Shift(..) => {
                self.normal_form().and_then(|nf| nf.to_set()).unwrap_or_else(|| self.clone())
            }
            _ => self.clone(),
        }
    }

    pub fn complement(&self) -> SymbolicSet {
        use SetNode::*;
        match self.node() {
            Empty => Self::naturals(),
            Finite(v) => Self::cofinite(v.iter().copied()),
            Cofinite(v) => Self::finite(v.iter().copied()),
            Residue { modulus, residues } => {
                let r: BTreeSet<_> = residues.iter().collect();
                Self::residue(*modulus, (0..*modulus).filter(|x| !r.contains(x))).unwrap()
            }
            Complement(inner) => inner.clone(),
            _ => Self::wrap(Complement(self.clone())),
        }
    }

    /// `{n + k : n ∈ A} ∩ ℕ`.
    pub fn shift(&self, k: i64) -> SymbolicSet {
        use SetNode::*;
        if k == 0 {
            return self.clone();
        }
        let mv = |x: u64| {
            let y = x as i128 + k as i128;
            (y >= 0).then_some(y as u64)
        };
        match self.node() {
            Empty => self.clone(),
            Finite(v) => Self::finite(v.iter().filter_map(|&x| mv(x))),
            Cofinite(e) => {
                if k > 0 {
                    Self::cofinite((0..k as u64).chain(e.iter().map(|&x| x + k as u64)))
                } else {
                    Self::cofinite(e.iter().filter_map(|&x| mv(x)))
                }
            }
            Residue { modulus, residues } if k < 0 => {
                let m = *modulus as i128;
                Self::residue(
                    *modulus,
                    residues.iter().map(|&r| (r as i128 + k as i128).rem_euclid(m) as u64),
                )
                .unwrap()
            }
            Intervals(iu) => shift_intervals(iu, k),
            Prefix { members, horizon } => {
                let h = *horizon as i128 + k as i128;
                if h < 0 {
                    Self::prefix([], 0)
                } else {
                    Self::prefix(members.iter().filter_map(|&x| mv(x)), h as u64)
                }
            }
            Shift(inner, j) if (*j > 0) == (k > 0) => inner.shift(j + k),
            _ => Self::wrap(Shift(self.clone(), k)),
        }
    }

    /// Membership; `None` beyond the validity horizon.
    pub fn contains(&self, n: u64) -> Option<bool> {
        use SetNode::*;
        match self.node() {
            Empty => Some(false),
            Finite(v) => Some(v.binary_search(&n).is_ok()),
            Cofinite(e) => Some(e.binary_search(&n).is_err()),
            Residue { modulus, residues } => Some(residues.binary_search(&(n % modulus)).is_ok()),
            Intervals(iu) => Some(iu.contains(n)),
            Prefix { members, horizon } => (n <= *horizon).then(|| members.binary_search(&n).is_ok()),
            Union(a, b) => match (a.contains(n), b.contains(n)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            Intersect(a, b) => match (a.contains(n), b.contains(n)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Diff(a, b) => match (a.contains(n), b.contains(n)) {
                (Some(false), _) | (_, Some(true)) => Some(false),
                (Some(true), Some(false)) => Some(true),
                _ => None,
            },
            Complement(a) => a.contains(n).map(|x| !x),
            Shift(a, k) => {
                let m = n as i128 - *k as i128;
                if m < 0 {
                    Some(false)
                } else {
                    a.contains(m as u64)
                }
            }
        }
    }

    /// Largest index for which membership is defined; `None` when unbounded.
    pub fn horizon(&self) -> Option<u64> {
        use SetNode::*;
        match self.node() {
            Prefix { horizon, .. } => Some(*horizon),
            Union(a, b) | Intersect(a, b) | Diff(a, b) => match (a.horizon(), b.horizon()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
            Complement(a) => a.horizon(),
            Shift(a, k) => a.horizon().map(|h| (h as i128 + *k as i128).max(0) as u64),
            _ => None,
        }
    }

    /// `|A ∩ [0, n]|`.
    pub fn count(&self, n: u64) -> Result<u64, SetError> {
        use SetNode::*;
        if let Some(h) = self.horizon() {
            if n > h {
                return Err(SetError::BeyondHorizon { n, horizon: h });
            }
        }
        Ok(match self.node() {
            Empty => 0,
            Finite(v) | Prefix { members: v, .. } => v.partition_point(|&x| x <= n) as u64,
            Cofinite(e) => n + 1 - e.partition_point(|&x| x <= n) as u64,
            Residue { modulus, residues } => {
                let full = (n + 1) / modulus;
                let rem = (n + 1) % modulus;
                full * residues.len() as u64 + residues.partition_point(|&r| r < rem) as u64
            }
            Intervals(iu) => iu.count(n),
            _ => (0..=n).filter(|&i| self.contains(i) == Some(true)).count() as u64,
        })
    }

    /// Members in `[0, n]` in increasing order.
    pub fn members_upto(&self, n: u64) -> Result<Vec<u64>, SetError> {
        use SetNode::*;
        if let Some(h) = self.horizon() {
            if n > h {
                return Err(SetError::BeyondHorizon { n, horizon: h });
            }
        }
        Ok(match self.node() {
            Empty => vec![],
            Finite(v) | Prefix { members: v, .. } => v.iter().copied().take_while(|&x| x <= n).collect(),
            Intervals(iu) => iu
                .blocks_upto(n)
                .into_iter()
                .flat_map(|(a, b)| a..=b.min(n))
                .collect(),
            _ => (0..=n).filter(|&i| self.contains(i) == Some(true)).collect(),
        })
    }

    /// Least member `≥ from` and `≤ limit`.
    pub fn next_member(&self, from: u64, limit: u64) -> Option<u64> {
        (from..=limit).find(|&i| self.contains(i) == Some(true))
    }

    /// Normal form, when the tree is within reach of the closed-form algebra.
    pub fn normal_form(&self) -> Option<NormalForm> {
        NormalForm::of(self)
    }

    /// `Some(true)` if provably finite, `Some(false)` if provably infinite.
    pub fn is_finite(&self) -> Option<bool> {
        self.normal_form().map(|nf| nf.is_finite())
    }

    /// `Some(true)` if provably empty.
    pub fn is_empty(&self) -> Option<bool> {
        if self.is_empty_form() {
            return Some(true);
        }
        self.normal_form().map(|nf| nf.is_empty())
    }

    /// Left boundary, right boundary and isolated points.
    pub fn boundaries(&self) -> Result<Boundaries, SetError> {
        use SetNode::*;
        if self.is_empty() == Some(true) {
            return Err(SetError::EmptyBoundary);
        }
        let (left, right) = match self.node() {
            Finite(v) => {
                let s: BTreeSet<_> = v.iter().copied().collect();
                (
                    Self::finite(v.iter().copied().filter(|&x| x == 0 || !s.contains(&(x - 1)))),
                    Self::finite(v.iter().copied().filter(|&x| !s.contains(&(x + 1)))),
                )
            }
            Cofinite(e) => {
                let s: BTreeSet<_> = e.iter().copied().collect();
                let top = e.last().map_or(0, |&m| m + 1);
                let inside = |x: &u64| !s.contains(x);
                (
                    Self::finite((0..=top).filter(inside).filter(|&x| x == 0 || s.contains(&(x - 1)))),
                    Self::finite((0..=top).filter(inside).filter(|&x| s.contains(&(x + 1)))),
                )
            }
            Residue { modulus, residues } => {
                let m = *modulus;
                let r: BTreeSet<_> = residues.iter().copied().collect();
                let lefts = Self::residue(m, residues.iter().copied().filter(|&x| !r.contains(&((x + m - 1) % m))))?;
                let lefts = if r.contains(&0) { lefts.union(&Self::finite([0])) } else { lefts };
                let rights = Self::residue(m, residues.iter().copied().filter(|&x| !r.contains(&((x + 1) % m))))?;
                (lefts, rights)
            }
            Intervals(iu) if iu.strictly_separated() => {
                let lh = iu.head.iter().map(|&(a, _)| (a, a)).collect();
                let rh = iu.head.iter().map(|&(_, b)| (b, b)).collect();
                (
                    Self::interval_union(lh, iu.left, iu.left, iu.start)?,
                    Self::interval_union(rh, iu.right, iu.right, iu.start)?,
                )
            }
            _ => (self.diff(&self.shift(1)), self.diff(&self.shift(-1))),
        };
        let isolated = isolated_of(&left, &right);
        Ok(Boundaries { left, right, isolated })
    }

    /// Maximal intervals of `A ∩ [0, window]`; the flag marks a last block
    /// that may continue past the window.
    pub fn blocks(&self, window: u64) -> Result<(Vec<(u64, u64)>, bool), SetError> {
        let members = self.members_upto(window)?;
        let mut out: Vec<(u64, u64)> = Vec::new();
        for m in members {
            match out.last_mut() {
                Some((_, b)) if *b + 1 == m => *b = m,
                _ => out.push((m, m)),
            }
        }
        let open = matches!(out.last(), Some(&(_, b)) if b == window)
            && self.contains(window + 1) != Some(false);
        Ok((out, open))
    }
}

fn isolated_of(left: &SymbolicSet, right: &SymbolicSet) -> SymbolicSet {
    if let (SetNode::Intervals(a), SetNode::Intervals(b)) = (left.node(), right.node()) {
        if a.left == a.right && b.left == b.right && a.left == b.left && a.start == b.start {
            let head: Vec<_> = a.head.iter().copied().filter(|p| b.head.contains(p)).collect();
            if let Ok(s) = SymbolicSet::interval_union(head, a.left, a.left, a.start) {
                return s;
            }
        }
    }
    left.intersect(right)
}

fn shift_intervals(iu: &IntervalUnion, k: i64) -> SymbolicSet {
    let k128 = k as i128;
    let mut head: Vec<(u64, u64)> = iu
        .head
        .iter()
        .filter_map(|&(a, b)| {
            let (a, b) = (a as i128 + k128, b as i128 + k128);
            (b >= 0).then(|| (a.max(0) as u64, b as u64))
        })
        .collect();
    let (l, r) = (iu.left.poly().add_const(k128), iu.right.poly().add_const(k128));
    let mut start = iu.start;
    while l.eval(start as i128) < 0 {
        let b = r.eval(start as i128);
        if b >= 0 {
            head.push((0, b as u64));
        }
        start += 1;
    }
    let rule = |p: Poly| IndexRule::new(p.a as i64, p.b as i64, p.c as i64);
    SymbolicSet::interval_union(head, rule(l), rule(r), start).expect("shift preserves interval structure")
}

#[derive(Clone, Debug)]
pub struct Boundaries {
    pub left: SymbolicSet,
    pub right: SymbolicSet,
    pub isolated: SymbolicSet,
}

impl fmt::Display for SymbolicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SetNode::*;
        let list = |v: &[u64]| {
            if v.len() > 12 {
                let shown: Vec<String> = v[..10].iter().map(|x| x.to_string()).collect();
                format!("{}, …, {}", shown.join(", "), v[v.len() - 1])
            } else {
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
            }
        };
        match self.node() {
            Empty => write!(f, "∅"),
            Finite(v) => write!(f, "{{{}}}", list(v)),
            Cofinite(e) if e.is_empty() => write!(f, "ℕ"),
            Cofinite(e) => write!(f, "ℕ∖{{{}}}", list(e)),
            Residue { modulus, residues } => write!(f, "{{n ≡ {} (mod {modulus})}}", list(residues)),
            Intervals(iu) => {
                for &(a, b) in &iu.head {
                    write!(f, "[{a}, {b}] ∪ ")?;
                }
                if iu.left == iu.right {
                    write!(f, "{{{} : n ≥ {}}}", iu.left, iu.start)
                } else {
                    write!(f, "⋃_{{n≥{}}}[{}, {}]", iu.start, iu.left, iu.right)
                }
            }
            Prefix { members, horizon } => write!(f, "{{{}}} up to {horizon}", list(members)),
            Union(a, b) => write!(f, "({a} ∪ {b})"),
            Intersect(a, b) => write!(f, "({a} ∩ {b})"),
            Diff(a, b) => write!(f, "({a} ∖ {b})"),
            Complement(a) => write!(f, "({a})*"),
            Shift(a, k) if *k >= 0 => write!(f, "({a} + {k})"),
            Shift(a, k) => write!(f, "({a} - {})", -k),
        }
    }
}


impl serde::Serialize for SymbolicSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
