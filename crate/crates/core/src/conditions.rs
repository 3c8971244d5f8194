//! Support conditions on `S = supp(x)` and the decision procedure for
//! `x̄ ∈ t_𝐮^𝕀(𝕋)`.
//!
//! Conditions quantified over all sets outside the ideal are evaluated on a
//! finite witness catalog. A refuting witness makes the verdict `Fails`; a
//! `Holds` is relative to the catalog unless the catalog contains the
//! extremal witness for that condition (see [`Witness::extremal`]).

use crate::expansion::{DigitStream, ExpansionError, ValueRule};
use crate::ideals::{membership, IdealSpec, Nested, Schedule};
use crate::intsets::SymbolicSet;
use crate::scale::{BTag, RatioSequence};
use crate::verdict::{Truth, Verdict};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;
use thiserror::Error;

/// Rule citations, as printed in decisions and reports.
pub mod cite {
    pub const SUPPORT_IN_IDEAL: &str = "Lemma Lemma2.2";
    pub const TOP_SUPPORT_DUAL: &str = "Corollary Coro1:May14";
    pub const RIGHT_BOUNDARY: &str = "Lemma rem:nested*";
    pub const LEFT_BOUNDARY: &str = "Lemma lambda-1";
    pub const T_SUFFICIENT: &str = "Theorem in";
    pub const NESTED: &str = "Corollary CoroGhosh(2)";
    pub const BOUNDED_SCALE: &str = "Corollary b-boundedreal";
    pub const BOUNDED_MOD: &str = "Theorem Nuovo:Th";
    pub const DIVERGENT_MOD: &str = "Theorem Last:corollary";
    pub const NATURALS_DIVERGENT: &str = "Corollary NmodI";
    pub const SPLIT_RESTRICTED: &str = "Corollary alleq*";
    pub const SPLIT_DIRECT: &str = "Corollary ThGh:May29";
    pub const A1_BOUNDED: &str = "Lemma Necessity2.12*";
    pub const IMPLICATIONS: &str = "Proposition primo";
    pub const A2_LEFT: &str = "Proposition 3i";
    pub const STAR_A1: &str = "Remark ax1p";
}

#[derive(Debug, Error)]
pub enum ConditionError {
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Condition {
    A1,
    A2,
    Star,
    II,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::A1 => "(a1)",
            Condition::A2 => "(a2)",
            Condition::Star => "(⋆)",
            Condition::II => "(II)",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Origin {
    Seeded,
    User,
}

/// A catalog set for quantified conditions.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub label: String,
    pub set: SymbolicSet,
    pub origin: Origin,
    /// Conditions for which this set refutes whenever any set does.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extremal: Vec<Condition>,
}

impl Witness {
    pub fn user(label: impl Into<String>, set: SymbolicSet) -> Witness {
        Witness { label: label.into(), set, origin: Origin::User, extremal: vec![] }
    }

    fn seeded(label: impl Into<String>, set: SymbolicSet, extremal: Vec<Condition>) -> Witness {
        Witness { label: label.into(), set: set.simplified(), origin: Origin::Seeded, extremal }
    }
}

/// `ℕ = B ⊔ D` with `B` b-bounded mod 𝕀 and `D` b-divergent mod 𝕀.
#[derive(Clone, Debug, Serialize)]
pub struct Partition {
    pub bounded: SymbolicSet,
    pub divergent: SymbolicSet,
    pub declared: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Config {
    pub window: u64,
    pub schedule: Schedule,
}

impl Default for Config {
    fn default() -> Self {
        Config { window: 2000, schedule: Schedule::default() }
    }
}

/// Where the limits of `c_n/b_n` and `(c_n + 1)/b_n` fail, read off the value rules.
#[derive(Clone, Debug)]
struct LimitProfile {
    /// `n ∈ S` with `‖c_n/b_n‖` bounded away from 0.
    phi_bad: SymbolicSet,
    /// `n ∈ S` with `c_n/b_n` bounded away from 0.
    plain_bad: SymbolicSet,
    /// `n ≥ 1` with `(c_n + 1)/b_n` bounded away from 1.
    top_bad: SymbolicSet,
    certificates: Vec<String>,
}

pub struct TorsionContext {
    pub digits: DigitStream,
    pub ratio: RatioSequence,
    pub ideal: IdealSpec,
    pub s: SymbolicSet,
    pub s_b: SymbolicSet,
    pub witness_catalog: Vec<Witness>,
    pub partition: Option<Partition>,
    /// User certificate: `‖c_n/b_n‖ → 0` along `S` minus this set.
    pub declared_limit: Option<SymbolicSet>,
    pub config: Config,
    region: Option<SymbolicSet>,
    profile: Option<LimitProfile>,
    /// Membership verdicts keyed by the simplified set; trails are costly.
    memo: Mutex<HashMap<SymbolicSet, Verdict>>,
}

impl fmt::Debug for TorsionContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TorsionContext({:?}, {}, S = {})", self.digits, self.ideal.label(), self.s)
    }
}

/// `ρ(S) = S ∖ (S − 1)`: members whose successor is missing.
pub fn right_boundary(s: &SymbolicSet) -> SymbolicSet {
    s.diff(&s.shift(-1)).simplified()
}

/// `λ(S) = S ∖ (S + 1)`: members whose predecessor is missing.
pub fn left_boundary(s: &SymbolicSet) -> SymbolicSet {
    s.diff(&s.shift(1)).simplified()
}

fn positives() -> SymbolicSet {
    SymbolicSet::positives()
}

impl TorsionContext {
    pub fn new(digits: DigitStream, ideal: IdealSpec, config: Config) -> TorsionContext {
        let (s, s_b) = digits.supports(config.window);
        let ratio = digits.ratio().clone();
        let region = ratio.bounded_region().map(|(r, _)| r.intersect(&positives()).simplified());
        let profile = region.as_ref().and_then(|r| limit_profile(&digits, &s, &s_b, r));
        let mut ctx = TorsionContext {
            digits,
            ratio,
            ideal,
            s,
            s_b,
            witness_catalog: Vec::new(),
            partition: None,
            declared_limit: None,
            config,
            region,
            profile,
            memo: Mutex::default(),
        };
        ctx.witness_catalog = ctx.seed_catalog();
        ctx
    }

    pub fn with_witnesses(mut self, extra: impl IntoIterator<Item = Witness>) -> Self {
        self.witness_catalog.extend(extra);
        self
    }

    pub fn with_partition(mut self, bounded: SymbolicSet, divergent: SymbolicSet) -> Self {
        self.partition = Some(Partition { bounded, divergent, declared: true });
        self
    }

    pub fn with_declared_limit(mut self, exception: SymbolicSet) -> Self {
        self.declared_limit = Some(exception);
        self
    }

    /// Same ideal, configuration and user witnesses for another stream.
    pub fn derived(&self, digits: DigitStream) -> TorsionContext {
        let users = self.witness_catalog.iter().filter(|w| w.origin == Origin::User).cloned();
        TorsionContext::new(digits, self.ideal.clone(), self.config.clone()).with_witnesses(users.collect::<Vec<_>>())
    }

    /// Indices with bounded ratios; `b_n → ∞` along the rest.
    pub fn bounded_region(&self) -> Option<&SymbolicSet> {
        self.region.as_ref()
    }

    pub fn member(&self, a: &SymbolicSet) -> Verdict {
        let a = a.simplified();
        if let Some(v) = self.memo.lock().unwrap().get(&a) {
            return v.clone();
        }
        let v = membership(&self.ideal, &a, &self.config.schedule);
        self.memo.lock().unwrap().insert(a, v.clone());
        v
    }

    fn member_as(&self, a: &SymbolicSet, claim: impl Into<String>) -> Verdict {
        relabel(self.member(a), claim, a)
    }

    /// b-boundedness of `A` as a truth value.
    pub fn b_bounded(&self, a: &SymbolicSet) -> Truth {
        match self.ratio.classify_bbound(&a.simplified(), self.config.window).tag {
            BTag::BBounded(_) => Truth::Holds,
            BTag::BDivergent | BTag::Mixed => Truth::Fails,
            BTag::Unknown => Truth::Unknown,
        }
    }

    fn seed_catalog(&self) -> Vec<Witness> {
        use Condition::*;
        let s = &self.s;
        let rho = right_boundary(s);
        let mut out = vec![
            Witness::seeded("ρ(S)", rho.clone(), vec![]),
            Witness::seeded("λ(S) − 1", left_boundary(s).shift(-1), vec![]),
            Witness::seeded("S", s.clone(), vec![]),
        ];
        let Some(r) = &self.region else { return out };
        let near = s.intersect(&r.shift(1));
        out.push(Witness::seeded("S ∩ (R + 1)", near.clone(), vec![]));
        out.push(Witness::seeded("(R ∖ S) ∩ (S − 1)", r.diff(s).intersect(&s.shift(-1)), vec![A2]));
        out.push(Witness::seeded("R ∩ ρ(S)", r.intersect(&rho), vec![A1, Star]));
        out.push(Witness::seeded("R ∩ (S ∖ S_b)", r.intersect(&s.diff(&self.s_b)), vec![A1, Star]));
        out.push(Witness::seeded("(R ∩ S) ∖ (S_b − 1)", r.intersect(s).diff(&self.s_b.shift(-1)), vec![Star]));
        if let Some(p) = &self.profile {
            out.push(Witness::seeded("R ∩ S ∩ (T − 1)", r.intersect(s).intersect(&p.top_bad.shift(-1)), vec![A1]));
            out.push(Witness::seeded("S ∩ (R + 1) ∩ P", near.intersect(&p.plain_bad), vec![II]));
        }
        out
    }

    /// The catalog settles `cond` outright: its extremal witnesses are present
    /// and the ideal is translation invariant.
    fn catalog_complete(&self, cond: Condition) -> bool {
        let needed = match cond {
            Condition::A1 | Condition::Star => 3,
            Condition::A2 | Condition::II => 1,
        };
        self.ideal.flags.translation_invariant
            && self.witness_catalog.iter().filter(|w| w.extremal.contains(&cond)).count() >= needed
    }
}

fn relabel(v: Verdict, claim: impl Into<String>, set: &SymbolicSet) -> Verdict {
    let mut out = Verdict::new(v.value, claim).note(format!("{set}: {}", v.rule));
    out.notes.extend(v.notes);
    out.trail = v.trail;
    out
}

fn limit_profile(d: &DigitStream, s: &SymbolicSet, s_b: &SymbolicSet, region: &SymbolicSet) -> Option<LimitProfile> {
    let divergent = positives().diff(region).simplified();
    let bounded_support = s.intersect(region).simplified();
    let mut p = LimitProfile {
        phi_bad: bounded_support.clone(),
        plain_bad: bounded_support.clone(),
        top_bad: region.diff(s_b).simplified(),
        certificates: Vec::new(),
    };
    if bounded_support.is_empty() != Some(true) {
        p.certificates.push("nonzero digits with bounded ratios keep c_n/b_n within [1/C, 1 − 1/C]".into());
    }
    if divergent.is_finite() == Some(true) {
        return Some(p);
    }
    for (set, value) in d.value_regions()? {
        let e = set.intersect(&divergent).simplified();
        if e.is_empty() == Some(true) {
            continue;
        }
        match value {
            ValueRule::Constant(0) => p.top_bad = p.top_bad.union(&e),
            ValueRule::Constant(c) => {
                p.top_bad = p.top_bad.union(&e);
                p.certificates.push(format!("monotone bound: c_n/b_n = {c}/b_n → 0 on {e}"));
            }
            ValueRule::BMinus(k) => {
                p.plain_bad = p.plain_bad.union(&e);
                p.certificates.push(format!("value rule: ‖c_n/b_n‖ = {k}/b_n → 0 and (c_n + 1)/b_n → 1 on {e}"));
            }
            ValueRule::FloorHalf => {
                p.phi_bad = p.phi_bad.union(&e);
                p.plain_bad = p.plain_bad.union(&e);
                p.top_bad = p.top_bad.union(&e);
                p.certificates.push(format!("value rule: ⌊b_n/2⌋/b_n → 1/2 on {e}"));
            }
        }
    }
    p.phi_bad = p.phi_bad.simplified();
    p.plain_bad = p.plain_bad.simplified();
    p.top_bad = p.top_bad.simplified();
    Some(p)
}

/// Outcome of one witness against `premises ⇒ conclusions`.
struct Probe {
    truth: Truth,
    detail: String,
}

/// Premises are evaluated lazily and in order; a failing premise makes the witness vacuous.
fn probe(premises: &[(&str, &dyn Fn() -> Truth)], conclusions: &[(&str, &dyn Fn() -> Truth)]) -> Probe {
    let mut pending = Vec::new();
    for (name, f) in premises {
        match f() {
            Truth::Fails => return Probe { truth: Truth::Holds, detail: format!("vacuous: not {name}") },
            Truth::Unknown => pending.push(*name),
            Truth::Holds => {}
        }
    }
    for (name, f) in conclusions {
        match f() {
            Truth::Holds => {}
            Truth::Fails if pending.is_empty() => {
                return Probe { truth: Truth::Fails, detail: format!("premises hold but {name} fails") }
            }
            Truth::Fails => {
                return Probe {
                    truth: Truth::Unknown,
                    detail: format!("{name} fails; undecided premise {}", pending.join(", ")),
                }
            }
            Truth::Unknown => return Probe { truth: Truth::Unknown, detail: format!("{name} undecided") },
        }
    }
    let detail = if pending.is_empty() { "conclusions hold".into() } else { "conclusions hold regardless".into() };
    Probe { truth: Truth::Holds, detail }
}

fn over_catalog(ctx: &TorsionContext, cond: Condition, eval: impl Fn(&SymbolicSet) -> Probe) -> Verdict {
    let mut undecided = Vec::new();
    let mut notes = Vec::new();
    for w in &ctx.witness_catalog {
        let p = eval(&w.set);
        notes.push(format!("{} = {}: {}", w.label, w.set, p.detail));
        match p.truth {
            Truth::Fails => {
                let mut v = Verdict::fails(format!("{cond} refuted by the witness {}", w.label));
                v.notes = notes;
                return v;
            }
            Truth::Unknown => undecided.push(w.label.clone()),
            Truth::Holds => {}
        }
    }
    let mut v = if !undecided.is_empty() {
        Verdict::unknown(format!("{cond}: undecided on {}", undecided.join(", ")))
    } else {
        let mut v = Verdict::holds(format!("catalog-relative: no witness among {} refutes {cond}", ctx.witness_catalog.len()));
        if ctx.catalog_complete(cond) {
            v = v.note("the catalog contains the extremal witnesses, so no other set can refute");
        }
        v
    };
    v.notes.extend(notes);
    v
}

/// `((i), (ii), (iii))`: `ρ(S) ∈ 𝕀`, `S ∖ S_b ∈ 𝕀`, `λ(S) ∈ 𝕀`.
pub fn check_i_ii_iii(ctx: &TorsionContext) -> (Verdict, Verdict, Verdict) {
    let i = ctx.member_as(&right_boundary(&ctx.s), "ρ(S) ∈ 𝕀");
    let ii = ctx.member_as(&ctx.s.diff(&ctx.s_b), "S ∖ S_b ∈ 𝕀");
    let iii = ctx.member_as(&left_boundary(&ctx.s), "λ(S) ∈ 𝕀");
    (i, ii, iii)
}

fn conj(name: &str, parts: &[&Verdict]) -> Verdict {
    let value = parts.iter().fold(Truth::Holds, |acc, v| acc.and(v.value));
    let mut v = Verdict::new(value, name);
    for p in parts {
        v.notes.push(format!("{}: {}", p.rule, p.value));
    }
    v
}

/// `(a1)`, `(a2)` and the stronger `(⋆)`.
pub fn check_a1_a2(ctx: &TorsionContext) -> (Verdict, Verdict, Verdict) {
    let (i, ii, iii) = check_i_ii_iii(ctx);
    let s = &ctx.s;
    let s_b = &ctx.s_b;
    let star = over_catalog(ctx, Condition::Star, |a| {
        probe(
            &[
                ("A b-bounded", &|| ctx.b_bounded(a)),
                ("A ∉ 𝕀", &|| ctx.member(a).value.not()),
                ("A ⊆^𝕀 S", &|| ctx.member(&a.diff(s)).value),
            ],
            &[
                ("A + 1 ⊆^𝕀 S", &|| ctx.member(&a.shift(1).diff(s)).value),
                ("A ⊆^𝕀 S_b", &|| ctx.member(&a.diff(s_b)).value),
                ("A ∩ (S_b − 1) ⊆_𝕀 A", &|| ctx.member(&a.diff(&s_b.shift(-1))).value),
            ],
        )
    });

    let both = i.value.and(ii.value);
    let a1 = if both == Truth::Holds {
        Verdict::holds(format!("{}: (i)&(ii) ⇒ (a1)", cite::IMPLICATIONS))
    } else if ctx.b_bounded(s) == Truth::Holds {
        Verdict::new(both, format!("{}: S is b-bounded, so (a1) ⟺ (i)&(ii)", cite::A1_BOUNDED))
    } else {
        let v = over_catalog(ctx, Condition::A1, |a| {
            let limit = || match &ctx.profile {
                Some(p) => ctx.member(&a.intersect(&p.top_bad.shift(-1))).value,
                None => Truth::Unknown,
            };
            probe(
                &[
                    ("A b-bounded", &|| ctx.b_bounded(a)),
                    ("A ∉ 𝕀", &|| ctx.member(a).value.not()),
                    ("A ⊆^𝕀 S", &|| ctx.member(&a.diff(s)).value),
                ],
                &[
                    ("A + 1 ⊆^𝕀 S", &|| ctx.member(&a.shift(1).diff(s)).value),
                    ("A ⊆^𝕀 S_b", &|| ctx.member(&a.diff(s_b)).value),
                    ("(c_(n+1) + 1)/b_(n+1) → 1 along some A' ⊆_𝕀 A", &limit),
                ],
            )
        });
        if v.value == Truth::Unknown && star.value == Truth::Holds {
            Verdict::holds(format!("{}: (⋆) ⇒ (a1)", cite::STAR_A1)).note(star.rule.clone())
        } else {
            match &ctx.profile {
                Some(p) if v.value == Truth::Holds => v.note(p.certificates.join("; ")),
                _ => v,
            }
        }
    };

    let left = left_boundary(s).shift(-1);
    let a2 = if iii.value == Truth::Holds {
        Verdict::holds(format!("{}: (iii) ⇒ (a2)", cite::IMPLICATIONS))
    } else if ctx.b_bounded(&left) == Truth::Holds && iii.value.is_definitive() {
        Verdict::new(iii.value, format!("{}: λ(S) − 1 is b-bounded, so (a2) ⟺ (iii)", cite::A2_LEFT))
    } else {
        over_catalog(ctx, Condition::A2, |a| {
            probe(
                &[
                    ("A b-bounded", &|| ctx.b_bounded(a)),
                    ("A ∉ 𝕀", &|| ctx.member(a).value.not()),
                    ("A ∩ S ∈ 𝕀", &|| ctx.member(&a.intersect(s)).value),
                ],
                &[("(A + 1) ∩ S ∈ 𝕀", &|| ctx.member(&a.shift(1).intersect(s)).value)],
            )
        })
    };
    (a1, a2, star)
}

/// Whether some infinite `D ⊆_𝕀 S` carries `‖c_n/b_n‖ → 0`.
pub fn limit_search(ctx: &TorsionContext) -> Verdict {
    if let Some(p) = &ctx.profile {
        let good = ctx.s.diff(&p.phi_bad).simplified();
        let mut v = if good.is_finite() == Some(true) {
            Verdict::fails("‖c_n/b_n‖ stays away from 0 on all but finitely many n ∈ S")
        } else {
            let m = ctx.member(&p.phi_bad);
            match m.value {
                Truth::Holds => Verdict::holds("value-rule certificate: the limit holds off a set in 𝕀"),
                Truth::Fails => Verdict::fails("‖c_n/b_n‖ stays away from 0 on a set outside 𝕀"),
                Truth::Unknown => Verdict::unknown("membership of the non-convergent part undecided"),
            }
            .note(format!("non-convergent part {}: {}", p.phi_bad, m.rule))
        };
        v.notes.extend(p.certificates.iter().cloned());
        return v;
    }
    if let Some(e) = &ctx.declared_limit {
        let m = ctx.member(e);
        let v = if m.value == Truth::Holds {
            Verdict::holds("user-declared certificate")
        } else {
            Verdict::unknown("user-declared exception set not shown to lie in 𝕀")
        };
        return v.note(format!("exception set {e}: {}", m.rule));
    }
    Verdict::unknown("no limit certificate: the digits have no value rules")
}

/// `((I), (II))`.
pub fn check_i_ii_limits(ctx: &TorsionContext) -> (Verdict, Verdict) {
    let in_ideal = ctx.member(&ctx.s);
    let search = limit_search(ctx);
    let big_i = if in_ideal.value == Truth::Holds {
        Verdict::holds("S ∈ 𝕀").note(format!("limit search: {search}"))
    } else {
        let mut v = Verdict::new(in_ideal.value.or(search.value), format!("limit search: {}", search.rule));
        v.notes.push(format!("S ∈ 𝕀: {}", in_ideal.value));
        v.notes.extend(search.notes);
        v
    };

    let big_ii = if in_ideal.value == Truth::Holds {
        Verdict::holds("vacuous: S ∈ 𝕀")
    } else if let Some(r) = ctx.region.as_ref().filter(|r| ctx.member(r).value == Truth::Holds) {
        Verdict::holds("vacuous: every b-bounded set lies in 𝕀").note(format!("bounded ratio region {r}"))
    } else {
        let s = &ctx.s;
        over_catalog(ctx, Condition::II, |d| {
            let limit = || match &ctx.profile {
                Some(p) => ctx.member(&d.intersect(&p.plain_bad)).value,
                None => Truth::Unknown,
            };
            probe(
                &[
                    ("D ∉ 𝕀", &|| ctx.member(d).value.not()),
                    ("D ⊆^𝕀 S", &|| ctx.member(&d.diff(s)).value),
                    ("D − 1 b-bounded", &|| ctx.b_bounded(&d.shift(-1))),
                ],
                &[("c_n/b_n → 0 along some D' ⊆_𝕀 D", &limit)],
            )
        })
    };
    (big_i, big_ii)
}

/// Alias matching the condition names.
#[allow(non_snake_case)]
pub fn check_I_II(ctx: &TorsionContext) -> (Verdict, Verdict) {
    check_i_ii_limits(ctx)
}

/// Both splitting condition lists, evaluated separately.
#[derive(Clone, Debug, Serialize)]
pub struct SplittingReport {
    pub restricted: Vec<(String, Verdict)>,
    pub direct: Vec<(String, Verdict)>,
    pub restricted_value: Truth,
    pub direct_value: Truth,
    pub verdict: Verdict,
}

fn validate_partition(ctx: &TorsionContext, b: &SymbolicSet, d: &SymbolicSet) -> Result<Vec<String>, ConditionError> {
    let bad = |m: String| Err(ConditionError::Partition(m));
    if b.intersect(d).simplified().is_empty() != Some(true) {
        return bad("the parts are not disjoint".into());
    }
    if positives().diff(&b.union(d)).simplified().is_empty() != Some(true) {
        return bad("the parts do not cover ℕ₊".into());
    }
    let mut notes = Vec::new();
    for (name, part) in [("B", b), ("D", d)] {
        if part.is_empty() == Some(true) {
            continue;
        }
        match ctx.member(part).value {
            Truth::Holds => return bad(format!("{name} is nonempty and lies in 𝕀")),
            Truth::Unknown => notes.push(format!("{name} ∉ 𝕀 not certified")),
            Truth::Fails => {}
        }
    }
    let Some(r) = &ctx.region else {
        notes.push("ratio regions unknown; partition accepted as declared".into());
        return Ok(notes);
    };
    for (name, rest, kind) in [("B", b.diff(r), "b-bounded"), ("D", d.intersect(r), "b-divergent")] {
        match ctx.member(&rest).value {
            Truth::Fails => return bad(format!("{name} is not {kind} mod 𝕀")),
            Truth::Unknown => notes.push(format!("{name} {kind} mod 𝕀 not certified")),
            Truth::Holds => {}
        }
    }
    Ok(notes)
}

pub fn splitting_report(ctx: &TorsionContext, b: &SymbolicSet, d: &SymbolicSet) -> Result<SplittingReport, ConditionError> {
    let notes = validate_partition(ctx, b, d)?;
    let s = &ctx.s;

    let xb = ctx.derived(ctx.digits.restricted(b)?);
    let xd = ctx.derived(ctx.digits.restricted(d)?);
    let (ib, iib, _) = check_i_ii_iii(&xb);
    let (_, a2b, _) = check_a1_a2(&xb);
    let d_small = ctx.member(d);
    let (id, iid) = check_i_ii_limits(&xd);
    let id = if d_small.value == Truth::Holds { Verdict::holds("D ∈ 𝕀") } else { id };
    let restricted = vec![
        ("(i) for x_B".to_string(), ib),
        ("(ii) for x_B".to_string(), iib),
        ("(a2) for x_B".to_string(), a2b),
        ("(I) for x_D".to_string(), id),
        ("(II) for x_D".to_string(), iid),
    ];
    // (II) for x_D is implied by the other four here, so it is reported but not required
    let restricted_value = restricted[..4].iter().fold(Truth::Holds, |acc, (_, v)| acc.and(v.value));

    let bs = b.intersect(s).simplified();
    let profile = ctx.profile.as_ref();
    let via = |set: Option<SymbolicSet>, claim: &str| match set {
        Some(x) => ctx.member_as(&x, claim),
        None => Verdict::unknown(format!("{claim}: no value rules for the limit")),
    };
    let direct = vec![
        ("(1)' (B∩S)+1 ⊆^𝕀 S".to_string(), ctx.member_as(&bs.shift(1).diff(s), "((B∩S)+1) ∖ S ∈ 𝕀")),
        ("(1)'' B∩S ⊆^𝕀 S_b".to_string(), ctx.member_as(&bs.diff(&ctx.s_b), "(B∩S) ∖ S_b ∈ 𝕀")),
        (
            "(1)''' (c_(n+1)+1)/b_(n+1) → 1 on C ⊆_𝕀 B∩S".to_string(),
            via(profile.map(|p| bs.intersect(&p.top_bad.shift(-1))), "(B∩S) ∩ (T − 1) ∈ 𝕀"),
        ),
        (
            "(2) c_(n+1)/b_(n+1) → 0 on C ⊆_𝕀 B∖S".to_string(),
            via(profile.map(|p| b.diff(s).intersect(&p.plain_bad.shift(-1))), "(B∖S) ∩ (P − 1) ∈ 𝕀"),
        ),
        (
            "(3) ‖c_n/b_n‖ → 0 on E ⊆_𝕀 D∩S".to_string(),
            via(profile.map(|p| d.intersect(s).intersect(&p.phi_bad)), "(D∩S) ∩ Φ ∈ 𝕀"),
        ),
    ];
    let direct_value = direct.iter().fold(Truth::Holds, |acc, (_, v)| acc.and(v.value));

    let mut verdict = match (restricted_value, direct_value) {
        (r, d) if r == d && r.is_definitive() => Verdict::new(r, cite::SPLIT_RESTRICTED),
        (r, d) if d.is_definitive() => {
            let v = Verdict::new(d, cite::SPLIT_DIRECT);
            if r.is_definitive() {
                v.note(format!("the restricted-stream list gives {r}; the direct list is used"))
            } else {
                v
            }
        }
        (r, _) => Verdict::new(r, cite::SPLIT_RESTRICTED),
    };
    verdict.notes.extend(notes);
    for (name, v) in restricted.iter().chain(direct.iter()) {
        verdict.notes.push(format!("{name}: {v}"));
    }
    Ok(SplittingReport { restricted, direct, restricted_value, direct_value, verdict })
}

pub fn check_splitting(ctx: &TorsionContext, b: &SymbolicSet, d: &SymbolicSet) -> Result<Verdict, ConditionError> {
    splitting_report(ctx, b, d).map(|r| r.verdict)
}


/// Every condition verdict for one context.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionTable {
    pub i: Verdict,
    pub ii: Verdict,
    pub iii: Verdict,
    pub t: Verdict,
    pub a1: Verdict,
    pub a2: Verdict,
    pub star: Verdict,
    pub a: Verdict,
    #[serde(rename = "I")]
    pub big_i: Verdict,
    #[serde(rename = "II")]
    pub big_ii: Verdict,
    pub limit_search: Verdict,
}

impl ConditionTable {
    /// Lookup by the names used in scenario files: `i ii iii T a1 a2 star A I II limit`.
    pub fn get(&self, name: &str) -> Option<&Verdict> {
        Some(match name {
            "i" => &self.i,
            "ii" => &self.ii,
            "iii" => &self.iii,
            "T" => &self.t,
            "a1" => &self.a1,
            "a2" => &self.a2,
            "star" => &self.star,
            "A" => &self.a,
            "I" => &self.big_i,
            "II" => &self.big_ii,
            "limit" => &self.limit_search,
            _ => return None,
        })
    }

    pub const NAMES: [&'static str; 11] = ["i", "ii", "iii", "T", "a1", "a2", "star", "A", "I", "II", "limit"];
}

pub fn evaluate_all(ctx: &TorsionContext) -> ConditionTable {
    let (i, ii, iii) = check_i_ii_iii(ctx);
    let (a1, a2, star) = check_a1_a2(ctx);
    let (big_i, big_ii) = check_i_ii_limits(ctx);
    let t = conj("T_x = (i)&(ii)&(iii)", &[&i, &ii, &iii]);
    let a = conj("A_x = (i)&(ii)&(a2)", &[&i, &ii, &a2]);
    ConditionTable { limit_search: limit_search(ctx), i, ii, iii, t, a1, a2, star, a, big_i, big_ii }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    In,
    NotIn,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::In => "In",
            Outcome::NotIn => "NotIn",
            Outcome::Unknown => "Unknown",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Step {
    pub check: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decision {
    pub value: Outcome,
    pub rule: Option<String>,
    pub trail: Vec<Step>,
}

impl Decision {
    fn done(value: Outcome, rule: &str, trail: Vec<Step>) -> Decision {
        Decision { value, rule: Some(rule.to_string()), trail }
    }
}

fn from_truth(t: Truth) -> Outcome {
    match t {
        Truth::Holds => Outcome::In,
        Truth::Fails => Outcome::NotIn,
        Truth::Unknown => Outcome::Unknown,
    }
}

/// Rule dispatch in fixed priority; the first definitive rule decides.
pub fn decide(ctx: &TorsionContext) -> Decision {
    let mut trail = Vec::new();
    let mut log = |check: &str, verdict: &Verdict| {
        trail.push(Step { check: check.into(), verdict: verdict.clone() });
    };
    let flags = &ctx.ideal.flags;
    let ti = flags.translation_invariant;
    let ti_p = ti && flags.p_ideal;
    let proper = ctx.ideal.is_proper();
    if !ti_p {
        log("hypotheses", &Verdict::unknown("the ideal is not declared a translation invariant P-ideal; most rules are skipped"));
    }
    let s = &ctx.s;

    if ti && proper {
        let v = ctx.member_as(s, "S ∈ 𝕀");
        log("(1) S ∈ 𝕀", &v);
        if v.is(Truth::Holds) {
            return Decision::done(Outcome::In, cite::SUPPORT_IN_IDEAL, trail);
        }
    }
    if !ctx.ideal.is_fin() {
        let v = ctx.member_as(&positives().diff(&ctx.s_b), "ℕ ∖ S_b ∈ 𝕀");
        log("(2) S_b ∈ 𝕀*", &v);
        if v.is(Truth::Holds) {
            return Decision::done(Outcome::In, cite::TOP_SUPPORT_DUAL, trail);
        }
    }
    if ti_p && proper {
        let rho = right_boundary(s);
        if ctx.b_bounded(&rho) == Truth::Holds {
            let v = ctx.member_as(&rho, "ρ(S) ∈ 𝕀");
            log("(3) ρ(S) b-bounded, ρ(S) ∈ 𝕀", &v);
            if v.is(Truth::Fails) {
                return Decision::done(Outcome::NotIn, cite::RIGHT_BOUNDARY, trail);
            }
        }
        let lam = left_boundary(s);
        if ctx.b_bounded(&lam.shift(-1)) == Truth::Holds {
            let v = ctx.member_as(&lam, "λ(S) ∈ 𝕀");
            log("(4) λ(S) − 1 b-bounded, λ(S) ∈ 𝕀", &v);
            if v.is(Truth::Fails) {
                return Decision::done(Outcome::NotIn, cite::LEFT_BOUNDARY, trail);
            }
        }
    }
    let (i, ii, iii) = check_i_ii_iii(ctx);
    let t = conj("T_x = (i)&(ii)&(iii)", &[&i, &ii, &iii]);
    if ti {
        log("(5) T_x", &t);
        if t.is(Truth::Holds) {
            return Decision::done(Outcome::In, cite::T_SUFFICIENT, trail);
        }
    }
    if ti_p && flags.nested == Nested::Yes {
        let v = conj("(i)&(ii)", &[&i, &ii]);
        log("(6) declared nested, (i)&(ii)", &v);
        if v.is(Truth::Holds) {
            return Decision::done(Outcome::In, cite::NESTED, trail);
        }
    }
    if !ti_p {
        return Decision { value: Outcome::Unknown, rule: None, trail };
    }
    if ctx.ratio.is_bounded() == Some(true) {
        log("(7) 𝐮 b-bounded: T_x", &t);
        if t.value.is_definitive() {
            return Decision::done(from_truth(t.value), cite::BOUNDED_SCALE, trail);
        }
    }
    let Some(r) = ctx.region.clone() else {
        log("(8)–(11)", &Verdict::unknown("ratio regions unknown"));
        return Decision { value: Outcome::Unknown, rule: None, trail };
    };
    let bounded_mod = ctx.member_as(&s.diff(&r), "S ∖ R ∈ 𝕀");
    log("(8) S b-bounded mod 𝕀", &bounded_mod);
    if bounded_mod.is(Truth::Holds) {
        let (_, a2, _) = check_a1_a2(ctx);
        let a = conj("A_x = (i)&(ii)&(a2)", &[&i, &ii, &a2]);
        log("(8) A_x", &a);
        log("(8) (a2)", &a2);
        if a.value.is_definitive() {
            return Decision::done(from_truth(a.value), cite::BOUNDED_MOD, trail);
        }
    }
    let divergent_mod = ctx.member_as(&s.intersect(&r), "S ∩ R ∈ 𝕀");
    log("(9) S b-divergent mod 𝕀", &divergent_mod);
    let (big_i, big_ii) = check_i_ii_limits(ctx);
    if divergent_mod.is(Truth::Holds) {
        let v = conj("(I)&(II)", &[&big_i, &big_ii]);
        log("(9) (I)", &big_i);
        log("(9) (II)", &big_ii);
        if v.value.is_definitive() {
            return Decision::done(from_truth(v.value), cite::DIVERGENT_MOD, trail);
        }
    }
    let naturals_mod = ctx.member_as(&r, "R ∈ 𝕀");
    log("(10) ℕ b-divergent mod 𝕀", &naturals_mod);
    if naturals_mod.is(Truth::Holds) {
        log("(10) (I)", &big_i);
        if big_i.value.is_definitive() {
            return Decision::done(from_truth(big_i.value), cite::NATURALS_DIVERGENT, trail);
        }
    }
    let partition = ctx
        .partition
        .clone()
        .unwrap_or_else(|| Partition { bounded: r.clone(), divergent: positives().diff(&r).simplified(), declared: false });
    match splitting_report(ctx, &partition.bounded, &partition.divergent) {
        Ok(rep) => {
            let origin = if partition.declared { "declared" } else { "ratio regions" };
            log(&format!("(11) splitting ({origin})"), &rep.verdict);
            if rep.verdict.value.is_definitive() {
                let rule = rep.verdict.rule.clone();
                return Decision { value: from_truth(rep.verdict.value), rule: Some(rule), trail };
            }
        }
        Err(e) => log("(11) splitting", &Verdict::unknown(e.to_string())),
    }
    Decision { value: Outcome::Unknown, rule: None, trail }
}

#[cfg(test)]
mod tests;
