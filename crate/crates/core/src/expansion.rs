//! Digit expansions `x = Σ c_n/u_n`, exact tails and circle norms.

use crate::ideals::{membership, render_rational, IdealSpec, Schedule};
use crate::intsets::SymbolicSet;
use crate::scale::{RatioKind, RatioSequence, Rule, ScaleError};
use crate::verdict::{Truth, Verdict};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

/// Step budget for norm evaluation when nothing else is configured.
pub const DEFAULT_NORM_BUDGET: u64 = 512;
pub const BUDGET_ENV: &str = "TORSION_NORM_BUDGET";

/// Budget from the environment, falling back to [`DEFAULT_NORM_BUDGET`].
pub fn default_norm_budget() -> u64 {
    std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_NORM_BUDGET)
}

/// Greedy extraction stops looking for structure after this many digits.
const GREEDY_CAP: u64 = 40_000;
const VALIDATION_WINDOW: u64 = 2_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpansionError {
    #[error("x = {0} lies outside [0, 1)")]
    OutOfRange(String),
    #[error("digit at index {index} is not below b_n = {ratio}")]
    DigitTooLarge { index: u64, ratio: String },
    #[error("digits equal b_n − 1 on a cofinite set; the representation is not canonical")]
    TopTail,
    #[error("supp_b is finite, so the atomic components are undefined")]
    FiniteFlatSupport,
    #[error("streams are governed by different ratio sequences")]
    RatioMismatch,
    #[error("{0}")]
    NotApplicable(String),
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

/// Digit value as a function of the current ratio `b_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ValueRule {
    Constant(u64),
    /// `b_n − k`; `BMinus(1)` is the top digit.
    BMinus(u64),
    FloorHalf,
}

impl ValueRule {
    pub fn value(&self, b: &BigUint) -> Option<BigUint> {
        match *self {
            ValueRule::Constant(c) => Some(BigUint::from(c)),
            ValueRule::BMinus(k) => (b >= &BigUint::from(k)).then(|| b - k),
            ValueRule::FloorHalf => Some(b >> 1),
        }
    }

    /// Ratios where the digit is nonzero.
    fn nonzero(&self) -> Levels {
        match *self {
            ValueRule::Constant(0) => Levels::none(),
            ValueRule::Constant(_) | ValueRule::FloorHalf => Levels::All,
            ValueRule::BMinus(k) => Levels::Except(vec![k]),
        }
    }

    /// Ratios where the digit is `b − 1`.
    fn top(&self) -> Levels {
        match *self {
            ValueRule::Constant(c) => Levels::Only(vec![c + 1]),
            ValueRule::BMinus(1) => Levels::All,
            ValueRule::BMinus(_) => Levels::none(),
            ValueRule::FloorHalf => Levels::Only(vec![2]),
        }
    }

    /// Ratios where the digit is 1.
    fn one(&self) -> Levels {
        match *self {
            ValueRule::Constant(1) => Levels::All,
            ValueRule::Constant(_) => Levels::none(),
            ValueRule::BMinus(k) => Levels::Only(vec![k + 1]),
            ValueRule::FloorHalf => Levels::Only(vec![2, 3]),
        }
    }

    /// Ratios where both rules give the same digit.
    fn agree(&self, other: &ValueRule) -> Levels {
        use ValueRule::*;
        match (*self, *other) {
            (Constant(c), Constant(d)) => Levels::all_if(c == d),
            (Constant(c), BMinus(k)) | (BMinus(k), Constant(c)) => Levels::Only(vec![c + k]),
            (BMinus(k), BMinus(j)) => Levels::all_if(k == j),
            (FloorHalf, FloorHalf) => Levels::All,
            (FloorHalf, Constant(c)) | (Constant(c), FloorHalf) => Levels::Only(vec![2 * c, 2 * c + 1]),
            (FloorHalf, BMinus(k)) | (BMinus(k), FloorHalf) => Levels::Only(vec![(2 * k).saturating_sub(1), 2 * k]),
        }
    }

    /// `b − 1 − value`, when expressible.
    fn complement(&self) -> Option<ValueRule> {
        match *self {
            ValueRule::Constant(c) => Some(ValueRule::BMinus(c + 1)),
            ValueRule::BMinus(k) if k >= 1 => Some(ValueRule::Constant(k - 1)),
            _ => None,
        }
    }
}

impl fmt::Display for ValueRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueRule::Constant(c) => write!(f, "{c}"),
            ValueRule::BMinus(k) => write!(f, "b-{k}"),
            ValueRule::FloorHalf => write!(f, "⌊b/2⌋"),
        }
    }
}

/// A set of ratio values `b ≥ 2`.
#[derive(Clone, Debug)]
enum Levels {
    All,
    Only(Vec<u64>),
    Except(Vec<u64>),
}

impl Levels {
    fn none() -> Levels {
        Levels::Only(vec![])
    }

    fn all_if(b: bool) -> Levels {
        if b {
            Levels::All
        } else {
            Levels::none()
        }
    }
}

/// Indices `n ∈ region, n ≥ 1` with `b_n` in the level set.
fn level_set(ratio: &RatioSequence, region: &SymbolicSet, levels: &Levels) -> Option<SymbolicSet> {
    let values = match levels {
        Levels::All => return Some(region.intersect(&SymbolicSet::positives())),
        Levels::Only(v) | Levels::Except(v) => v,
    };
    let mut out = SymbolicSet::empty();
    for (piece, rule) in ratio.regions(region)? {
        let mut hits = Vec::new();
        let mut all = false;
        for &v in values {
            match rule.level(v) {
                Ok(ix) => hits.extend(ix),
                Err(()) => all = true,
            }
        }
        let matched = if all { piece.clone() } else { piece.intersect(&SymbolicSet::finite(hits)) };
        let part = match levels {
            Levels::Except(_) => piece.diff(&matched),
            _ => matched,
        };
        out = out.union(&part);
    }
    Some(out.intersect(&SymbolicSet::positives()).simplified())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Clause {
    pub set: SymbolicSet,
    pub value: ValueRule,
}

impl Clause {
    pub fn new(set: SymbolicSet, value: ValueRule) -> Clause {
        Clause { set, value }
    }
}

struct Greedy {
    /// remainders `r_n = a_n / q`
    numer: Vec<BigUint>,
    digits: Vec<BigUint>,
}

enum Source {
    /// First matching clause wins; unmatched indices carry digit 0.
    Pattern(Vec<Clause>),
    Greedy { x: BigRational, q: BigUint, state: Mutex<Greedy> },
    Patched { base: DigitStream, patch: Clause },
    Flat(DigitStream),
    /// Known digits `c_1, …, c_k`; nothing is known past `k`.
    Prefix(Vec<u64>),
}

#[derive(Clone, Debug)]
struct Structure {
    supports: Option<(SymbolicSet, SymbolicSet)>,
    /// No nonzero digit past this index.
    support_end: Option<u64>,
    /// Constant ratio `b` with digits periodic of period `λ` from `μ`.
    periodic: Option<(u64, u64, u64)>,
}

/// Digits `c_n` of some `x ∈ [0,1)` against a ratio sequence.
#[derive(Clone)]
pub struct DigitStream {
    ratio: RatioSequence,
    source: Arc<Source>,
    cache: Arc<OnceLock<Structure>>,
    /// `c_n < b_n − 1` infinitely often was checked rather than declared.
    verified: bool,
}

impl fmt::Debug for DigitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DigitStream({})", self.describe())
    }
}

impl DigitStream {
    fn build(ratio: &RatioSequence, source: Source) -> DigitStream {
        DigitStream { ratio: ratio.clone(), source: Arc::new(source), cache: Arc::new(OnceLock::new()), verified: true }
    }

    /// Pattern source; checks digit bounds and that the top digit is not cofinal.
    pub fn pattern(ratio: &RatioSequence, clauses: Vec<Clause>) -> Result<DigitStream, ExpansionError> {
        let mut d = Self::build(ratio, Source::Pattern(clauses));
        d.validate()?;
        Ok(d)
    }

    pub fn zero(ratio: &RatioSequence) -> DigitStream {
        Self::build(ratio, Source::Pattern(vec![]))
    }

    /// `value` on `set`, zero elsewhere.
    pub fn on_set(ratio: &RatioSequence, set: SymbolicSet, value: ValueRule) -> Result<DigitStream, ExpansionError> {
        Self::pattern(ratio, vec![Clause::new(set, value)])
    }

    /// Explicit digits `c_1, …, c_k` followed by zeros.
    pub fn from_digits(ratio: &RatioSequence, digits: &[u64]) -> Result<DigitStream, ExpansionError> {
        let mut by_value: HashMap<u64, Vec<u64>> = HashMap::new();
        for (i, &c) in digits.iter().enumerate() {
            if c != 0 {
                by_value.entry(c).or_default().push(i as u64 + 1);
            }
        }
        let mut values: Vec<_> = by_value.into_iter().collect();
        values.sort();
        let clauses = values.into_iter().map(|(c, ix)| Clause::new(SymbolicSet::finite(ix), ValueRule::Constant(c))).collect();
        Self::pattern(ratio, clauses)
    }

    /// Known digits up to `k` only; the canonical-tail condition is declared, not checked.
    pub fn opaque(ratio: &RatioSequence, digits: Vec<u64>) -> Result<DigitStream, ExpansionError> {
        for (i, &c) in digits.iter().enumerate() {
            let b = ratio.ratio_at(i as u64 + 1)?;
            if BigUint::from(c) >= b {
                return Err(ExpansionError::DigitTooLarge { index: i as u64 + 1, ratio: b.to_string() });
            }
        }
        let mut d = Self::build(ratio, Source::Prefix(digits));
        d.verified = false;
        Ok(d)
    }

    /// The stream with `patch` overriding it on `patch.set`.
    pub fn modified(&self, patch: Clause) -> Result<DigitStream, ExpansionError> {
        if let Source::Pattern(clauses) = &*self.source {
            let mut all = vec![patch];
            all.extend(clauses.iter().cloned());
            return Self::pattern(&self.ratio, all);
        }
        let mut d = Self::build(&self.ratio, Source::Patched { base: self.clone(), patch });
        d.validate()?;
        Ok(d)
    }

    pub fn ratio(&self) -> &RatioSequence {
        &self.ratio
    }

    pub fn clauses(&self) -> Option<&[Clause]> {
        match &*self.source {
            Source::Pattern(c) => Some(c),
            _ => None,
        }
    }

    /// Disjoint regions carrying each value rule, the zero region last; pattern sources only.
    pub fn value_regions(&self) -> Option<Vec<(SymbolicSet, ValueRule)>> {
        self.clauses().map(clause_regions)
    }

    /// Digits kept on `set` and zeroed elsewhere.
    pub fn restricted(&self, set: &SymbolicSet) -> Result<DigitStream, ExpansionError> {
        if let Some(clauses) = self.clauses() {
            let masked = clauses.iter().map(|cl| Clause::new(cl.set.intersect(set).simplified(), cl.value)).collect();
            return Self::pattern(&self.ratio, masked);
        }
        self.modified(Clause::new(set.complement(), ValueRule::Constant(0)))
    }

    pub fn rational(&self) -> Option<&BigRational> {
        match &*self.source {
            Source::Greedy { x, .. } => Some(x),
            _ => None,
        }
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    pub fn describe(&self) -> String {
        match &*self.source {
            Source::Pattern(c) if c.is_empty() => "all zero".into(),
            Source::Pattern(c) => {
                c.iter().map(|cl| format!("{} on {}", cl.value, cl.set)).collect::<Vec<_>>().join("; ")
            }
            Source::Greedy { x, .. } => format!("greedy digits of {}", render_rational(x)),
            Source::Patched { base, patch } => format!("{} on {}, else {}", patch.value, patch.set, base.describe()),
            Source::Flat(base) => format!("flat part of ({})", base.describe()),
            Source::Prefix(d) => format!("{} explicit digits", d.len()),
        }
    }

    fn validate(&mut self) -> Result<(), ExpansionError> {
        let clauses: Vec<Clause> = match &*self.source {
            Source::Pattern(c) => c.clone(),
            Source::Patched { patch, .. } => vec![patch.clone()],
            _ => return Ok(()),
        };
        for cl in &clauses {
            match self.ratio.regions(&cl.set.intersect(&SymbolicSet::positives())) {
                Some(pieces) => {
                    // rules are nondecreasing, so the first index of each piece decides
                    for (piece, rule) in pieces {
                        if let Some(n) = piece.next_member(1, 100_000) {
                            check_digit(&cl.value, &rule.value(n), n)?;
                        }
                    }
                }
                None => {
                    for n in 1..=VALIDATION_WINDOW {
                        if cl.set.contains(n) == Some(true) {
                            check_digit(&cl.value, &self.ratio.ratio_at(n)?, n)?;
                        }
                    }
                }
            }
        }
        match self.structure().supports.as_ref().map(|(_, sb)| sb.complement().intersect(&SymbolicSet::positives()).is_finite()) {
            Some(Some(true)) => Err(ExpansionError::TopTail),
            Some(Some(false)) => Ok(()),
            _ => {
                self.verified = false;
                Ok(())
            }
        }
    }

    /// `c_n`, or `None` past the known horizon.
    pub fn digit(&self, n: u64) -> Option<BigUint> {
        if n == 0 {
            return Some(BigUint::zero());
        }
        match &*self.source {
            Source::Pattern(clauses) => {
                for cl in clauses {
                    match cl.set.contains(n) {
                        Some(true) => return cl.value.value(&self.ratio.ratio_at(n).ok()?),
                        Some(false) => {}
                        None => return None,
                    }
                }
                Some(BigUint::zero())
            }
            Source::Greedy { .. } => {
                self.extend_greedy(n);
                let Source::Greedy { state, .. } = &*self.source else { unreachable!() };
                state.lock().unwrap().digits.get(n as usize - 1).cloned()
            }
            Source::Patched { base, patch } => match patch.set.contains(n)? {
                true => patch.value.value(&self.ratio.ratio_at(n).ok()?),
                false => base.digit(n),
            },
            Source::Flat(base) => {
                let b = self.ratio.ratio_at(n).ok()?;
                let c = base.digit(n)?;
                Some(if &c + 1u32 == b { c } else { BigUint::zero() })
            }
            Source::Prefix(d) => d.get(n as usize - 1).map(|&c| BigUint::from(c)),
        }
    }

    pub fn digits_upto(&self, n: u64) -> Vec<Option<BigUint>> {
        (1..=n).map(|i| self.digit(i)).collect()
    }

    fn extend_greedy(&self, n: u64) {
        let Source::Greedy { q, state, .. } = &*self.source else { return };
        let mut st = state.lock().unwrap();
        while (st.digits.len() as u64) < n {
            let i = st.digits.len() as u64 + 1;
            let b = self.ratio.ratio_at(i).expect("ratio defined for n ≥ 1");
            let t = st.numer.last().unwrap() * b;
            let (c, r) = t.div_rem(q);
            st.digits.push(c);
            st.numer.push(r);
        }
    }

    /// `{u_n x}` for greedy sources.
    fn greedy_remainder(&self, n: u64) -> Option<BigRational> {
        let Source::Greedy { q, state, .. } = &*self.source else { return None };
        self.extend_greedy(n);
        let st = state.lock().unwrap();
        Some(BigRational::new(BigInt::from(st.numer[n as usize].clone()), BigInt::from(q.clone())))
    }

    fn structure(&self) -> &Structure {
        self.cache.get_or_init(|| self.compute_structure())
    }

    fn compute_structure(&self) -> Structure {
        let constant = match self.ratio.kind() {
            RatioKind::Constant(b) => Some(*b),
            _ => None,
        };
        match &*self.source {
            Source::Pattern(clauses) => {
                let supports = pattern_supports(&self.ratio, clauses);
                let support_end = supports.as_ref().and_then(|(s, _)| finite_max(s));
                let periodic = constant.and_then(|b| pattern_period(clauses).map(|(mu, lambda)| (b, mu, lambda)));
                Structure { supports, support_end, periodic }
            }
            Source::Greedy { q, .. } => {
                let cap = (4 * q.to_u64().unwrap_or(GREEDY_CAP) + 64).min(GREEDY_CAP);
                self.greedy_structure(constant, cap)
            }
            Source::Patched { base, patch } => {
                let supports = base.structure().supports.as_ref().and_then(|(s, sb)| {
                    let p = &patch.set;
                    let nz = level_set(&self.ratio, p, &patch.value.nonzero())?;
                    let top = level_set(&self.ratio, p, &patch.value.top())?;
                    Some((s.diff(p).union(&nz), sb.diff(p).union(&top)))
                });
                let support_end = supports.as_ref().and_then(|(s, _)| finite_max(s));
                Structure { supports, support_end, periodic: None }
            }
            Source::Flat(base) => {
                let supports = base.structure().supports.as_ref().map(|(_, sb)| (sb.clone(), sb.clone()));
                let support_end = supports.as_ref().and_then(|(s, _)| finite_max(s));
                Structure { supports, support_end, periodic: None }
            }
            Source::Prefix(_) => Structure { supports: None, support_end: None, periodic: None },
        }
    }

    fn greedy_structure(&self, constant: Option<u64>, cap: u64) -> Structure {
        let mut seen: HashMap<BigUint, u64> = HashMap::new();
        for n in 0..=cap {
            self.extend_greedy(n.max(1));
            let Source::Greedy { state, .. } = &*self.source else { unreachable!() };
            let st = state.lock().unwrap();
            let a = st.numer[n as usize].clone();
            if a.is_zero() {
                let digits = st.digits[..n as usize].to_vec();
                drop(st);
                let (s, sb) = self.prefix_sets(&digits, None);
                return Structure { supports: Some((s, sb)), support_end: Some(n), periodic: None };
            }
            if let Some(b) = constant {
                if let Some(&mu) = seen.get(&a) {
                    // r_mu = r_n: digits from mu + 1 repeat with period n − mu
                    let lambda = n - mu;
                    let digits = st.digits[..n as usize].to_vec();
                    drop(st);
                    let supports = self.periodic_sets(&digits, mu, lambda, b);
                    return Structure { supports: Some(supports), support_end: None, periodic: Some((b, mu + 1, lambda)) };
                }
                seen.insert(a, n);
            }
        }
        Structure { supports: None, support_end: None, periodic: None }
    }

    /// Support sets of explicit digits `c_1 … c_k`, as prefix sets when a horizon is given.
    fn prefix_sets(&self, digits: &[BigUint], horizon: Option<u64>) -> (SymbolicSet, SymbolicSet) {
        let mut s = Vec::new();
        let mut sb = Vec::new();
        for (i, c) in digits.iter().enumerate() {
            let n = i as u64 + 1;
            if !c.is_zero() {
                s.push(n);
                if let Ok(b) = self.ratio.ratio_at(n) {
                    if c + 1u32 == b {
                        sb.push(n);
                    }
                }
            }
        }
        match horizon {
            Some(h) => (SymbolicSet::prefix(s, h), SymbolicSet::prefix(sb, h)),
            None => (SymbolicSet::finite(s), SymbolicSet::finite(sb)),
        }
    }

    /// Digits `c_1 … c_n` with `c_{k+λ} = c_k` for `k > mu`.
    fn periodic_sets(&self, digits: &[BigUint], mu: u64, lambda: u64, b: u64) -> (SymbolicSet, SymbolicSet) {
        let head = &digits[..mu as usize];
        let (hs, hsb) = self.prefix_sets(head, None);
        let mut res = Vec::new();
        let mut res_b = Vec::new();
        for n in mu + 1..=mu + lambda {
            let c = &digits[n as usize - 1];
            if !c.is_zero() {
                res.push(n % lambda);
                if *c == BigUint::from(b - 1) {
                    res_b.push(n % lambda);
                }
            }
        }
        let tail = |r: Vec<u64>| {
            if r.is_empty() {
                return SymbolicSet::empty();
            }
            SymbolicSet::residue(lambda, r).expect("positive period").diff(&SymbolicSet::range(0, mu))
        };
        (hs.union(&tail(res)), hsb.union(&tail(res_b)))
    }

    /// `(S, S_b)`: exact when the source has a closed form, else prefix sets up to `window`.
    pub fn supports(&self, window: u64) -> (SymbolicSet, SymbolicSet) {
        if let Some(s) = &self.structure().supports {
            return s.clone();
        }
        let limit = match &*self.source {
            Source::Prefix(d) => window.min(d.len() as u64),
            _ => window,
        };
        let digits: Vec<BigUint> = (1..=limit).map_while(|n| self.digit(n)).collect();
        let horizon = digits.len() as u64;
        self.prefix_sets(&digits, Some(horizon))
    }

    /// Whether the supports are exact rather than window prefixes.
    pub fn has_symbolic_supports(&self) -> bool {
        self.structure().supports.is_some()
    }

    /// Index past which every digit is zero, when known.
    pub fn support_end(&self) -> Option<u64> {
        self.structure().support_end
    }

    /// `(μ, λ)`: constant ratio with `c_{n+λ} = c_n` for all `n ≥ μ`.
    pub fn eventual_period(&self) -> Option<(u64, u64)> {
        self.structure().periodic.map(|(_, mu, lambda)| (mu, lambda))
    }

    /// Exact `{u_k x}` when the tail past `k` has a recognized form.
    fn exact_frac(&self, k: u64, budget: u64) -> Option<BigRational> {
        if let Some(r) = self.greedy_remainder(k) {
            return Some(r);
        }
        let st = self.structure();
        if let Some(e) = st.support_end {
            if k >= e {
                return Some(BigRational::zero());
            }
            if e - k > budget {
                return None;
            }
            let mut num = BigUint::zero();
            let mut den = BigUint::one();
            for m in k + 1..=e {
                let b = self.ratio.ratio_at(m).ok()?;
                num = num * &b + self.digit(m)?;
                den *= b;
            }
            return Some(BigRational::new(BigInt::from(num), BigInt::from(den)));
        }
        let (b, mu, _) = st.periodic?;
        if k + 1 >= mu {
            return self.periodic_frac(k);
        }
        if mu - k - 1 > budget {
            return None;
        }
        let mut num = BigUint::zero();
        for m in k + 1..mu {
            num = num * b + self.digit(m)?;
        }
        let den = BigUint::from(b).pow((mu - 1 - k) as u32);
        let tail = self.periodic_frac(mu - 1)?;
        Some((BigRational::from(BigInt::from(num)) + tail) / BigRational::from(BigInt::from(den)))
    }

    /// `{u_m x} = P/(b^λ − 1)` once the digits past `m` are periodic.
    fn periodic_frac(&self, m: u64) -> Option<BigRational> {
        let (b, _, lambda) = self.structure().periodic?;
        let mut p = BigUint::zero();
        for j in 1..=lambda {
            p = p * b + self.digit(m + j)?;
        }
        let den = BigUint::from(b).pow(lambda as u32) - 1u32;
        Some(BigRational::new(BigInt::from(p), BigInt::from(den)))
    }

    /// Exact `{u_k x}` when the tail past `k` has a recognized form.
    pub fn fractional_part(&self, k: u64) -> Option<BigRational> {
        self.exact_frac(k, default_norm_budget())
    }

    /// Exact `x` when recognized.
    pub fn value(&self) -> Option<BigRational> {
        self.exact_frac(0, default_norm_budget())
    }

    /// Flat part: `b_n − 1` on `S_b`, zero elsewhere.
    pub fn flat_truncation(&self) -> DigitStream {
        if let Some((_, sb)) = &self.structure().supports {
            if self.clauses().is_some() || sb.as_finite().is_some() {
                if let Ok(d) = Self::on_set(&self.ratio, sb.clone(), ValueRule::BMinus(1)) {
                    return d;
                }
            }
        }
        if let Source::Flat(_) = &*self.source {
            return self.clone();
        }
        Self::build(&self.ratio, Source::Flat(self.clone()))
    }

    /// Digits `b_n − 1 − c_n`; the values of the two streams sum to 1.
    pub fn complement_stream(&self) -> Result<DigitStream, ExpansionError> {
        let clauses = self
            .clauses()
            .ok_or_else(|| ExpansionError::NotApplicable("complement streams need a pattern source".into()))?;
        let mut out = Vec::new();
        let mut covered = SymbolicSet::empty();
        for cl in clauses {
            let v = cl.value.complement().ok_or_else(|| {
                ExpansionError::NotApplicable(format!("no closed form for b − 1 − {}", cl.value))
            })?;
            out.push(Clause::new(cl.set.diff(&covered), v));
            covered = covered.union(&cl.set);
        }
        out.push(Clause::new(SymbolicSet::positives().diff(&covered), ValueRule::BMinus(1)));
        Self::pattern(&self.ratio, out)
    }
}

fn check_digit(v: &ValueRule, b: &BigUint, n: u64) -> Result<(), ExpansionError> {
    match v.value(b) {
        Some(c) if &c < b => Ok(()),
        _ => Err(ExpansionError::DigitTooLarge { index: n, ratio: b.to_string() }),
    }
}

fn finite_max(s: &SymbolicSet) -> Option<u64> {
    if let Some(v) = s.as_finite() {
        return Some(v.iter().copied().max().unwrap_or(0));
    }
    let nf = s.normal_form()?;
    nf.is_finite().then(|| nf.finite.iter().copied().max().unwrap_or(0))
}

/// First-match regions of the clauses, plus the zero region.
fn clause_regions(clauses: &[Clause]) -> Vec<(SymbolicSet, ValueRule)> {
    let mut covered = SymbolicSet::empty();
    let mut out = Vec::new();
    for cl in clauses {
        out.push((cl.set.diff(&covered).intersect(&SymbolicSet::positives()).simplified(), cl.value));
        covered = covered.union(&cl.set);
    }
    out.push((SymbolicSet::positives().diff(&covered).simplified(), ValueRule::Constant(0)));
    out
}

fn pattern_supports(ratio: &RatioSequence, clauses: &[Clause]) -> Option<(SymbolicSet, SymbolicSet)> {
    let mut s = SymbolicSet::empty();
    let mut sb = SymbolicSet::empty();
    for (region, v) in clause_regions(clauses) {
        s = s.union(&level_set(ratio, &region, &v.nonzero())?);
        sb = sb.union(&level_set(ratio, &region, &v.top())?);
    }
    Some((s.simplified(), sb.simplified()))
}

/// `(μ, λ)` with clause membership periodic of period `λ` from `μ`.
fn pattern_period(clauses: &[Clause]) -> Option<(u64, u64)> {
    let mut mu = 1u64;
    let mut lambda = 1u64;
    for cl in clauses {
        let nf = cl.set.normal_form()?;
        if !nf.pieces.is_empty() {
            return None;
        }
        if let Some(m) = nf.finite.iter().max() {
            mu = mu.max(m + 1);
        }
        if let Some(p) = &nf.periodic {
            mu = mu.max(p.from);
            lambda = lambda.lcm(&p.modulus);
            if lambda > 4096 {
                return None;
            }
        }
    }
    Some((mu, lambda))
}

/// Greedy digits of `x ∈ [0,1)`; the stream is extended on demand past `n_max`.
pub fn extract_digits(x: &BigRational, ratio: &RatioSequence, n_max: u64) -> Result<DigitStream, ExpansionError> {
    if x.is_negative() || x >= &BigRational::one() {
        return Err(ExpansionError::OutOfRange(render_rational(x)));
    }
    let q = x.denom().to_biguint().expect("positive denominator");
    let a = x.numer().to_biguint().expect("nonnegative numerator");
    let state = Greedy { numer: vec![a], digits: Vec::new() };
    let d = DigitStream::build(ratio, Source::Greedy { x: x.clone(), q, state: Mutex::new(state) });
    d.extend_greedy(n_max);
    Ok(d)
}

/// Partial sum with its tail bound.
#[derive(Clone, Debug, PartialEq)]
pub struct TailEval {
    /// `s_n = Σ_{i≤n} c_i/u_i`.
    pub partial: BigRational,
    pub low: BigRational,
    /// `s_n + 1/u_n`.
    pub high: BigRational,
    pub exact: Option<BigRational>,
}

pub fn eval_with_tail(d: &DigitStream, n: u64) -> Result<TailEval, ExpansionError> {
    let mut num = BigUint::zero();
    for i in 1..=n {
        let b = d.ratio.ratio_at(i)?;
        let c = d.digit(i).ok_or_else(|| ExpansionError::NotApplicable(format!("digit {i} is unknown")))?;
        num = num * b + c;
    }
    let u = BigInt::from(d.ratio.scale_at(n)?);
    let partial = BigRational::new(BigInt::from(num), u.clone());
    let width = BigRational::new(BigInt::one(), u.clone());
    let exact = d.exact_frac(n, default_norm_budget()).map(|f| &partial + f / BigRational::from(u));
    Ok(TailEval { high: &partial + width, low: partial.clone(), partial, exact })
}

/// `Σ_{i=l}^{r} (b_i − 1)/u_i` in closed form, `1/u_{l−1} − 1/u_r`.
pub fn flat_block_value(ratio: &RatioSequence, l: u64, r: u64) -> Result<BigRational, ExpansionError> {
    let recip = |n| -> Result<BigRational, ExpansionError> {
        Ok(BigRational::new(BigInt::one(), BigInt::from(ratio.scale_at(n)?)))
    };
    Ok(recip(l - 1)? - recip(r)?)
}

/// Enclosure of `‖u_k x‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormInterval {
    pub low: BigRational,
    pub high: BigRational,
    pub resolved: bool,
    pub exact: bool,
    /// Digits summed past `k`.
    pub steps: u64,
}

impl NormInterval {
    pub fn width(&self) -> BigRational {
        &self.high - &self.low
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.low + &self.high) / BigRational::from(BigInt::from(2))
    }
}

impl Serialize for NormInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("NormInterval", 5)?;
        st.serialize_field("low", &render_rational(&self.low))?;
        st.serialize_field("high", &render_rational(&self.high))?;
        st.serialize_field("resolved", &self.resolved)?;
        st.serialize_field("exact", &self.exact)?;
        st.serialize_field("steps", &self.steps)?;
        st.end()
    }
}

/// `min(s, 1 − s)` over `s ∈ [lo, hi] ⊂ [0, 1]`.
fn fold(lo: BigRational, hi: BigRational) -> (BigRational, BigRational) {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let one = BigRational::one();
    if hi <= half {
        (lo, hi)
    } else if lo >= half {
        (&one - hi, one - lo)
    } else {
        let other = &one - hi;
        (if lo < other { lo } else { other }, half)
    }
}

pub fn circle_norm(d: &DigitStream, k: u64, resolution: &BigRational) -> NormInterval {
    circle_norm_with_budget(d, k, resolution, default_norm_budget())
}

pub fn circle_norm_with_budget(d: &DigitStream, k: u64, resolution: &BigRational, budget: u64) -> NormInterval {
    let exact_point = |v: BigRational, steps| {
        let (low, high) = fold(v.clone(), v);
        NormInterval { low, high, resolved: true, exact: true, steps }
    };
    if let Some(v) = d.exact_frac(k, budget) {
        return exact_point(v, 0);
    }
    let st = d.structure();
    let (res_n, res_d) = (resolution.numer().to_biguint(), resolution.denom().to_biguint());
    let (res_n, res_d) = (res_n.unwrap_or_default(), res_d.unwrap_or_else(BigUint::one));
    let mut num = BigUint::zero();
    let mut den = BigUint::one();
    let mut steps = 0;
    let mut m = k;
    loop {
        // the tail past m lies in [0, 1/den)
        if !res_n.is_zero() && &den * &res_n > res_d {
            break;
        }
        if steps >= budget {
            break;
        }
        m += 1;
        let (Some(c), Ok(b)) = (d.digit(m), d.ratio.ratio_at(m)) else { break };
        num = num * &b + c;
        den *= b;
        steps += 1;
        let tail = if st.support_end.is_some_and(|e| m >= e) {
            Some(BigRational::zero())
        } else if st.periodic.is_some_and(|(_, mu, _)| m + 1 >= mu) {
            d.periodic_frac(m)
        } else {
            None
        };
        if let Some(t) = tail {
            let v = (BigRational::from(BigInt::from(num)) + t) / BigRational::from(BigInt::from(den));
            return exact_point(v, steps);
        }
    }
    let lo = BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()));
    let hi = BigRational::new(BigInt::from(num + 1u32), BigInt::from(den));
    let (low, high) = fold(lo, hi);
    let resolved = &high - &low < *resolution;
    NormInterval { low, high, resolved, exact: false, steps }
}

/// `(α^(l), α^(r))`: digit 1 on `{l_n − 1}` and on `{r_n}` for the maximal blocks `[l_n, r_n]` of `S_b`.
pub fn atomic_components(d: &DigitStream, window: u64) -> Result<(DigitStream, DigitStream), ExpansionError> {
    let (s, sb) = d.supports(window);
    let finite = match sb.is_finite() {
        Some(f) => f,
        None => sb.as_finite().is_some(),
    };
    if finite || sb.count(window.min(sb.horizon().unwrap_or(window))).map_or(false, |c| c == 0) {
        return Err(ExpansionError::FiniteFlatSupport);
    }
    if s.complement().intersect(&SymbolicSet::positives()).is_finite() == Some(true) {
        return Err(ExpansionError::NotApplicable("supp(x) is cofinite".into()));
    }
    let bd = sb.boundaries().map_err(|e| ExpansionError::NotApplicable(e.to_string()))?;
    let lefts = bd.left.shift(-1).diff(&SymbolicSet::finite([0]));
    let left = DigitStream::on_set(&d.ratio, lefts, ValueRule::Constant(1))?;
    let right = DigitStream::on_set(&d.ratio, bd.right, ValueRule::Constant(1))?;
    Ok((left, right))
}

/// Every nonzero digit is 1 and no two support indices are adjacent.
pub fn is_atomic(d: &DigitStream, window: u64) -> Verdict {
    if let Some(clauses) = d.clauses() {
        if let Some(v) = atomic_symbolic(d, clauses) {
            return v;
        }
    }
    let (s, _) = d.supports(window);
    let limit = s.horizon().map_or(window, |h| h.min(window));
    let mut prev = false;
    for n in 1..=limit {
        let Some(c) = d.digit(n) else { break };
        if !c.is_zero() && !c.is_one() {
            return Verdict::fails("digit other than 1").note(format!("c_{n} = {c}"));
        }
        let cur = c.is_one();
        if cur && prev {
            return Verdict::fails("adjacent support indices").note(format!("{} and {n}", n - 1));
        }
        prev = cur;
    }
    if d.structure().support_end.is_some_and(|e| e <= limit) {
        return Verdict::holds("finite support checked in full");
    }
    Verdict::unknown("no violation on the window").note(format!("checked n ≤ {limit}"))
}

fn atomic_symbolic(d: &DigitStream, clauses: &[Clause]) -> Option<Verdict> {
    for (region, v) in clause_regions(clauses) {
        if v == ValueRule::Constant(0) {
            continue;
        }
        let nonzero = level_set(&d.ratio, &region, &v.nonzero())?;
        let ones = level_set(&d.ratio, &region, &v.one())?;
        let bad = nonzero.diff(&ones);
        match bad.is_empty() {
            Some(false) => {
                let first = bad.next_member(1, 1_000_000);
                return Some(Verdict::fails("digit other than 1").note(match first {
                    Some(n) => format!("c_{n} = {}", d.digit(n).unwrap_or_default()),
                    None => format!("digits {v} on {bad}"),
                }));
            }
            Some(true) => {}
            None => return None,
        }
    }
    let (s, _) = d.structure().supports.clone()?;
    let adjacent = s.intersect(&s.shift(1));
    match adjacent.is_empty()? {
        false => {
            let n = adjacent.next_member(1, 1_000_000);
            Some(Verdict::fails("adjacent support indices").note(match n {
                Some(n) => format!("{} and {n}", n - 1),
                None => format!("{adjacent}"),
            }))
        }
        true => Some(Verdict::holds("closed form: digits 1 on isolated indices")),
    }
}

/// `{n : c_n(d1) ≠ c_n(d2)}`, exact for two pattern sources.
pub fn disagreement_set(d1: &DigitStream, d2: &DigitStream) -> Option<SymbolicSet> {
    let (c1, c2) = (d1.clauses()?, d2.clauses()?);
    let mut out = SymbolicSet::empty();
    for (r1, v1) in clause_regions(c1) {
        for (r2, v2) in clause_regions(c2) {
            let both = r1.intersect(&r2);
            if both.is_empty() == Some(true) {
                continue;
            }
            let agree = level_set(&d1.ratio, &both, &v1.agree(&v2))?;
            out = out.union(&both.diff(&agree));
        }
    }
    Some(out.simplified())
}

pub fn digit_equiv(
    d1: &DigitStream,
    d2: &DigitStream,
    ideal: &IdealSpec,
    window: u64,
) -> Result<Verdict, ExpansionError> {
    if d1.ratio.kind() != d2.ratio.kind() {
        return Err(ExpansionError::RatioMismatch);
    }
    let set = disagreement_set(d1, d2).unwrap_or_else(|| {
        let mut members = Vec::new();
        let mut horizon = 0;
        for n in 1..=window {
            match (d1.digit(n), d2.digit(n)) {
                (Some(a), Some(b)) => {
                    if a != b {
                        members.push(n);
                    }
                    horizon = n;
                }
                _ => break,
            }
        }
        SymbolicSet::prefix(members, horizon)
    });
    let v = membership(ideal, &set, &Schedule::new(vec![window]));
    Ok(Verdict::new(v.value, v.rule.clone()).note(format!("disagreement set {set}")).with_trail(v.trail))
}

/// Truth of `x ≡ y` mod the ideal as a plain value.
pub fn equivalent(d1: &DigitStream, d2: &DigitStream, ideal: &IdealSpec, window: u64) -> Truth {
    digit_equiv(d1, d2, ideal, window).map_or(Truth::Unknown, |v| v.value)
}

/// Every ratio region rule on `set`, or `None` for opaque ratios.
pub fn rules_on(ratio: &RatioSequence, set: &SymbolicSet) -> Option<Vec<(SymbolicSet, Rule)>> {
    ratio.regions(set)
}

#[cfg(test)]
mod tests;
