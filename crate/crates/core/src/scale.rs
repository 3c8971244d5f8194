//! Ratio sequences `b_n` and the scales `u_n = b_1 ⋯ b_n`.

use crate::intsets::SymbolicSet;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use std::fmt;
use std::sync::{Arc, RwLock};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScaleError {
    #[error("ratios are indexed from 1; index 0 has no ratio")]
    ZeroIndex,
    #[error("ratio {value} at index {index} is below 2")]
    RatioTooSmall { index: u64, value: String },
    #[error("opaque ratio callback returned no value at index {0}")]
    Opaque(u64),
}

/// Nondecreasing rule `n ↦ b_n` used on a region of indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    Const(u64),
    /// `a·n + c` with `a ≥ 1`.
    Linear { a: u64, c: i64 },
    /// `2^n`.
    Pow2,
}

impl Rule {
    /// Linear rule, collapsed to a constant when `a = 0`.
    pub fn linear(a: u64, c: i64) -> Rule {
        if a == 0 {
            Rule::Const(c.max(0) as u64)
        } else {
            Rule::Linear { a, c }
        }
    }

    pub fn value(&self, n: u64) -> BigUint {
        match *self {
            Rule::Const(c) => BigUint::from(c),
            Rule::Linear { a, c } => BigUint::from((a as i128 * n as i128 + c as i128).max(0) as u128),
            Rule::Pow2 => BigUint::one() << n,
        }
    }

    /// Bound when the rule is constant.
    pub fn bound(&self) -> Option<u64> {
        match *self {
            Rule::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Indices `n ≥ 1` with `value(n) = v`, when there are finitely many.
    /// `Err(())` means every index qualifies.
    pub fn level(&self, v: u64) -> Result<Vec<u64>, ()> {
        match *self {
            Rule::Const(c) if c == v => Err(()),
            Rule::Const(_) => Ok(vec![]),
            Rule::Linear { a, c } => {
                let d = v as i128 - c as i128;
                Ok(if d > 0 && d % a as i128 == 0 { vec![(d / a as i128) as u64] } else { vec![] })
            }
            Rule::Pow2 => Ok(if v.is_power_of_two() { vec![v.trailing_zeros() as u64] } else { vec![] }),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Rule::Const(c) => write!(f, "{c}"),
            Rule::Linear { a: 1, c: 0 } => write!(f, "n"),
            Rule::Linear { a: 1, c } if c > 0 => write!(f, "n + {c}"),
            Rule::Linear { a: 1, c } => write!(f, "n - {}", -c),
            Rule::Linear { a, c: 0 } => write!(f, "{a}n"),
            Rule::Linear { a, c } if c > 0 => write!(f, "{a}n + {c}"),
            Rule::Linear { a, c } => write!(f, "{a}n - {}", -c),
            Rule::Pow2 => write!(f, "2^n"),
        }
    }
}

pub type RatioFn = Arc<dyn Fn(u64) -> Option<u64> + Send + Sync>;

#[derive(Clone)]
pub enum RatioKind {
    Constant(u64),
    /// `b_n = n + 1`, so `u_n = (n+1)!`.
    Affine,
    PiecewiseBySet { set: SymbolicSet, on: Rule, off: Rule },
    /// `b_1, …, b_k` listed, then the tail kind from index `k+1`.
    ExplicitPrefixWithTail { prefix: Vec<u64>, tail: Box<RatioKind> },
    /// Black-box ratios; never classified beyond inspection.
    Opaque { name: String, f: RatioFn },
}

impl PartialEq for RatioKind {
    fn eq(&self, other: &Self) -> bool {
        use RatioKind::*;
        match (self, other) {
            (Constant(a), Constant(b)) => a == b,
            (Affine, Affine) => true,
            (PiecewiseBySet { set: s1, on: o1, off: f1 }, PiecewiseBySet { set: s2, on: o2, off: f2 }) => {
                s1 == s2 && o1 == o2 && f1 == f2
            }
            (ExplicitPrefixWithTail { prefix: p1, tail: t1 }, ExplicitPrefixWithTail { prefix: p2, tail: t2 }) => {
                p1 == p2 && t1 == t2
            }
            (Opaque { f: a, .. }, Opaque { f: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl RatioKind {
    fn ratio(&self, n: u64) -> Option<BigUint> {
        match self {
            RatioKind::Constant(b) => Some(BigUint::from(*b)),
            RatioKind::Affine => Some(BigUint::from(n) + 1u32),
            RatioKind::PiecewiseBySet { set, on, off } => {
                Some(if set.contains(n) == Some(true) { on.value(n) } else { off.value(n) })
            }
            RatioKind::ExplicitPrefixWithTail { prefix, tail } => match prefix.get(n as usize - 1) {
                Some(&v) => Some(BigUint::from(v)),
                None => tail.ratio(n),
            },
            RatioKind::Opaque { f, .. } => f(n).map(BigUint::from),
        }
    }

    fn regions(&self, set: &SymbolicSet) -> Option<Vec<(SymbolicSet, Rule)>> {
        Some(match self {
            RatioKind::Constant(b) => vec![(set.clone(), Rule::Const(*b))],
            RatioKind::Affine => vec![(set.clone(), Rule::Linear { a: 1, c: 1 })],
            RatioKind::PiecewiseBySet { set: t, on, off } => {
                let mut v = Vec::new();
                let inside = set.intersect(t);
                let outside = set.diff(t);
                if inside.is_empty() != Some(true) {
                    v.push((inside, *on));
                }
                if outside.is_empty() != Some(true) {
                    v.push((outside, *off));
                }
                v
            }
            RatioKind::ExplicitPrefixWithTail { prefix, tail } => {
                let k = prefix.len() as u64;
                let mut v: Vec<(SymbolicSet, Rule)> = (1..=k)
                    .filter(|&n| set.contains(n) == Some(true))
                    .map(|n| (SymbolicSet::finite([n]), Rule::Const(prefix[n as usize - 1])))
                    .collect();
                v.extend(tail.regions(&set.diff(&SymbolicSet::range(0, k)))?);
                v
            }
            RatioKind::Opaque { .. } => return None,
        })
    }

    fn bounded_region(&self) -> Option<(SymbolicSet, u64)> {
        Some(match self {
            RatioKind::Constant(b) => (SymbolicSet::naturals(), *b),
            RatioKind::Affine => (SymbolicSet::empty(), 2),
            RatioKind::PiecewiseBySet { set, on, off } => match (on.bound(), off.bound()) {
                (Some(x), Some(y)) => (SymbolicSet::naturals(), x.max(y)),
                (Some(x), None) => (set.clone(), x),
                (None, Some(y)) => (set.complement(), y),
                (None, None) => (SymbolicSet::empty(), 2),
            },
            RatioKind::ExplicitPrefixWithTail { prefix, tail } => {
                let (r, c) = tail.bounded_region()?;
                let k = prefix.len() as u64;
                let top = prefix.iter().copied().max().unwrap_or(2);
                (r.union(&SymbolicSet::range(0, k)), c.max(top))
            }
            RatioKind::Opaque { .. } => return None,
        })
    }

    fn describe(&self) -> String {
        match self {
            RatioKind::Constant(b) => format!("constant {b}"),
            RatioKind::Affine => "b_n = n + 1".into(),
            RatioKind::PiecewiseBySet { set, on, off } => format!("b_n = {on} on {set}, {off} elsewhere"),
            RatioKind::ExplicitPrefixWithTail { prefix, tail } => {
                format!("prefix {prefix:?} then {}", tail.describe())
            }
            RatioKind::Opaque { name, .. } => format!("opaque {name}"),
        }
    }
}

/// Ratio sequence with memoized scales. Cloning shares the memo.
#[derive(Clone)]
pub struct RatioSequence {
    kind: Arc<RatioKind>,
    memo: Arc<RwLock<Vec<BigUint>>>,
}

impl PartialEq for RatioSequence {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.kind, &other.kind) || self.kind == other.kind
    }
}

impl fmt::Debug for RatioSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatioSequence({})", self.kind.describe())
    }
}

impl fmt::Display for RatioSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.kind.describe())
    }
}

impl RatioSequence {
    pub fn new(kind: RatioKind) -> Result<Self, ScaleError> {
        validate(&kind)?;
        Ok(RatioSequence { kind: Arc::new(kind), memo: Arc::new(RwLock::new(vec![BigUint::one()])) })
    }

    pub fn constant(b: u64) -> Result<Self, ScaleError> {
        Self::new(RatioKind::Constant(b))
    }

    pub fn affine() -> Self {
        Self::new(RatioKind::Affine).expect("affine ratios are valid")
    }

    pub fn piecewise(set: SymbolicSet, on: Rule, off: Rule) -> Result<Self, ScaleError> {
        Self::new(RatioKind::PiecewiseBySet { set, on, off })
    }

    pub fn kind(&self) -> &RatioKind {
        &self.kind
    }

    /// `b_n` for `n ≥ 1`.
    pub fn ratio_at(&self, n: u64) -> Result<BigUint, ScaleError> {
        if n == 0 {
            return Err(ScaleError::ZeroIndex);
        }
        self.kind.ratio(n).ok_or(ScaleError::Opaque(n))
    }

    /// `u_n`, with `u_0 = 1`.
    pub fn scale_at(&self, n: u64) -> Result<BigUint, ScaleError> {
        if let Some(u) = self.memo.read().expect("memo lock").get(n as usize) {
            return Ok(u.clone());
        }
        let mut memo = self.memo.write().expect("memo lock");
        while memo.len() <= n as usize {
            let i = memo.len() as u64;
            let next = memo.last().expect("u_0 present") * self.ratio_at(i)?;
            memo.push(next);
        }
        Ok(memo[n as usize].clone())
    }

    /// Governing rules on pieces of `set`; `None` for opaque ratios.
    pub fn regions(&self, set: &SymbolicSet) -> Option<Vec<(SymbolicSet, Rule)>> {
        self.kind.regions(set)
    }

    /// `(R, C)`: `b_n ≤ C` on `R`, and `b_n → ∞` along `ℕ ∖ R`.
    pub fn bounded_region(&self) -> Option<(SymbolicSet, u64)> {
        self.kind.bounded_region()
    }

    /// Splits `A` into its bounded part `A ∩ R` and divergent part `A ∖ R`.
    pub fn split(&self, a: &SymbolicSet) -> Option<(SymbolicSet, SymbolicSet)> {
        let (r, _) = self.bounded_region()?;
        Some((a.intersect(&r), a.diff(&r)))
    }

    fn max_ratio_on(&self, members: &[u64]) -> Option<BigUint> {
        members.iter().filter(|&&n| n >= 1).map(|&n| self.ratio_at(n).ok()).max().flatten()
    }

    pub fn classify_bbound(&self, a: &SymbolicSet, window: u64) -> BClassification {
        let finite = a.as_finite().map(|v| v.to_vec()).or_else(|| {
            let nf = a.normal_form()?;
            nf.is_finite().then(|| nf.finite.iter().copied().collect())
        });
        if let Some(members) = finite {
            let c = self.max_ratio_on(&members).unwrap_or_else(|| BigUint::from(2u32));
            return BClassification::new(BTag::BBounded(c), "finite set", window);
        }
        let Some((r, c)) = self.bounded_region() else {
            return self.inspect(a, window);
        };
        let (b0, d0) = (a.intersect(&r), a.diff(&r));
        match (b0.is_finite(), d0.normal_form()) {
            (_, Some(nf)) if nf.is_finite() => {
                let extra: Vec<u64> = nf.finite.iter().copied().collect();
                let top = self.max_ratio_on(&extra).map_or(BigUint::from(c), |m| m.max(BigUint::from(c)));
                BClassification::new(BTag::BBounded(top), "set lies in the bounded ratio region up to finitely many points", window)
            }
            (Some(true), Some(_)) => {
                BClassification::new(BTag::BDivergent, "set lies in the divergent ratio region up to finitely many points", window)
            }
            (Some(false), Some(_)) => {
                BClassification::new(BTag::Mixed, "set meets both ratio regions infinitely often", window)
            }
            _ => self.inspect(a, window),
        }
    }

    fn inspect(&self, a: &SymbolicSet, window: u64) -> BClassification {
        let limit = a.horizon().map_or(window, |h| h.min(window));
        let members = a.members_upto(limit).unwrap_or_default();
        let note = match self.max_ratio_on(&members) {
            Some(m) => format!("ratios on the window peak at {m}; no closed form for the tail"),
            None => "no closed form for the tail".into(),
        };
        BClassification::new(BTag::Unknown, note, window)
    }

    /// Whether ℕ itself is b-bounded.
    pub fn is_bounded(&self) -> Option<bool> {
        match self.classify_bbound(&SymbolicSet::positives(), 1000).tag {
            BTag::BBounded(_) => Some(true),
            BTag::Unknown => None,
            _ => Some(false),
        }
    }
}

fn validate(kind: &RatioKind) -> Result<(), ScaleError> {
    let low = |index: u64, value: BigUint| Err(ScaleError::RatioTooSmall { index, value: value.to_string() });
    match kind {
        RatioKind::Constant(b) if *b < 2 => low(1, BigUint::from(*b)),
        RatioKind::PiecewiseBySet { set, on, off } => {
            // rules are nondecreasing, so the first index of each region decides
            let first_in = set.next_member(1, 100_000);
            let first_out = set.complement().next_member(1, 100_000);
            for (first, rule) in [(first_in, on), (first_out, off)] {
                if let Some(n) = first {
                    let v = rule.value(n);
                    if v < BigUint::from(2u32) {
                        return low(n, v);
                    }
                }
            }
            Ok(())
        }
        RatioKind::ExplicitPrefixWithTail { prefix, tail } => {
            if let Some((i, &v)) = prefix.iter().enumerate().find(|(_, &v)| v < 2) {
                return low(i as u64 + 1, BigUint::from(v));
            }
            validate(tail)?;
            if let Some(v) = tail.ratio(prefix.len() as u64 + 1) {
                if v < BigUint::from(2u32) {
                    return low(prefix.len() as u64 + 1, v);
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum BTag {
    BBounded(#[serde(serialize_with = "big_as_string")] BigUint),
    BDivergent,
    Mixed,
    Unknown,
}

fn big_as_string<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BClassification {
    pub tag: BTag,
    pub rule: String,
    pub window: u64,
}

impl BClassification {
    fn new(tag: BTag, rule: impl Into<String>, window: u64) -> Self {
        BClassification { tag, rule: rule.into(), window }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.tag, BTag::BBounded(_))
    }

    pub fn bound(&self) -> Option<u64> {
        match &self.tag {
            BTag::BBounded(c) => c.to_u64(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn ratio_and_scale_examples() {
        assert_eq!(RatioSequence::affine().ratio_at(3).unwrap(), big(4));
        assert_eq!(RatioSequence::constant(2).unwrap().ratio_at(10).unwrap(), big(2));
        let s = SymbolicSet::odds();
        let p = RatioSequence::piecewise(s, Rule::Const(2), Rule::Pow2).unwrap();
        assert_eq!(p.ratio_at(5).unwrap(), big(2));
        let p = RatioSequence::piecewise(SymbolicSet::evens(), Rule::Const(2), Rule::Pow2).unwrap();
        assert_eq!(p.ratio_at(5).unwrap(), big(32));
        assert_eq!(RatioSequence::affine().ratio_at(0), Err(ScaleError::ZeroIndex));
        assert_eq!(RatioSequence::affine().scale_at(4).unwrap(), big(120));
        assert_eq!(RatioSequence::affine().scale_at(0).unwrap(), big(1));
        assert_eq!(RatioSequence::constant(2).unwrap().scale_at(10).unwrap(), big(1024));
        assert!(RatioSequence::constant(1).is_err());
    }

    #[test]
    fn piecewise_validation_checks_first_index() {
        // b_n = n on evens starts at b_2 = 2
        let ok = RatioSequence::piecewise(SymbolicSet::odds(), Rule::Const(2), Rule::linear(1, 0));
        assert!(ok.is_ok());
        let bad = RatioSequence::piecewise(SymbolicSet::evens(), Rule::Const(2), Rule::linear(1, 0));
        assert!(bad.is_err());
    }

    #[test]
    fn classification_examples() {
        let a = RatioSequence::affine();
        assert_eq!(a.classify_bbound(&SymbolicSet::odds(), 100).tag, BTag::BDivergent);
        assert_eq!(a.classify_bbound(&SymbolicSet::finite([3, 7]), 100).tag, BTag::BBounded(big(8)));
        assert_eq!(a.classify_bbound(&SymbolicSet::empty(), 100).tag, BTag::BBounded(big(2)));
        let p = RatioSequence::piecewise(SymbolicSet::odds(), Rule::Const(2), Rule::linear(1, 0)).unwrap();
        assert_eq!(p.classify_bbound(&SymbolicSet::evens(), 100).tag, BTag::BDivergent);
        assert_eq!(p.classify_bbound(&SymbolicSet::odds(), 100).tag, BTag::BBounded(big(2)));
        assert_eq!(p.classify_bbound(&SymbolicSet::naturals(), 100).tag, BTag::Mixed);
        assert_eq!(p.is_bounded(), Some(false));
        assert_eq!(RatioSequence::constant(3).unwrap().is_bounded(), Some(true));
        let opaque = RatioSequence::new(RatioKind::Opaque { name: "f".into(), f: Arc::new(|n| Some(n + 2)) }).unwrap();
        assert_eq!(opaque.classify_bbound(&SymbolicSet::odds(), 100).tag, BTag::Unknown);
    }

    fn kinds() -> impl Strategy<Value = RatioSequence> {
        prop_oneof![
            (2u64..7).prop_map(|b| RatioSequence::constant(b).unwrap()),
            Just(RatioSequence::affine()),
            (2u64..5, 1u64..4).prop_map(|(m, a)| RatioSequence::piecewise(
                SymbolicSet::residue(m, [0]).unwrap(),
                Rule::Const(2),
                Rule::linear(a, 2)
            )
            .unwrap()),
            (prop::collection::vec(2u64..9, 0..6), 2u64..5).prop_map(|(p, b)| RatioSequence::new(
                RatioKind::ExplicitPrefixWithTail { prefix: p, tail: Box::new(RatioKind::Constant(b)) }
            )
            .unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn divisibility_and_growth(seq in kinds(), n in 0u64..40) {
            let un = seq.scale_at(n).unwrap();
            for m in 0..=n {
                prop_assert_eq!(&un % seq.scale_at(m).unwrap(), BigUint::from(0u32));
            }
            prop_assert!(seq.scale_at(n + 1).unwrap() >= un * 2u32);
        }

        #[test]
        fn classification_soundness(seq in kinds(), m in 1u64..5, r in 0u64..5, window in 20u64..200) {
            let a = SymbolicSet::residue(m, [r]).unwrap();
            let cls = seq.classify_bbound(&a, window);
            let members: Vec<u64> = a.members_upto(window).unwrap().into_iter().filter(|&n| n >= 1).collect();
            match cls.tag {
                BTag::BBounded(c) => {
                    for n in &members {
                        prop_assert!(seq.ratio_at(*n).unwrap() <= c);
                    }
                }
                BTag::BDivergent => {
                    let low = members.iter().filter(|&&n| n <= window / 2).map(|&n| seq.ratio_at(n).unwrap()).min();
                    let high = members.iter().filter(|&&n| n > window / 2).map(|&n| seq.ratio_at(n).unwrap()).min();
                    if let (Some(lo), Some(hi)) = (low, high) {
                        prop_assert!(hi > lo);
                    }
                }
                _ => {}
            }
        }
    }
}
