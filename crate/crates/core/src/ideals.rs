//! Free ideals of ℕ as three-valued membership oracles.

use crate::intsets::{isqrt, NestedPair, NormalForm, Piece, SetNode, SymbolicSet};
use crate::verdict::{TrailPoint, Truth, Verdict};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdealError {
    #[error("density order must lie in (0, 1], got {0}")]
    DensityOrder(String),
    #[error("wave parameter must lie strictly between 1/2 and 1, got {0}")]
    WaveParameter(String),
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn render_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn approx(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Weight rules for summable ideals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Weights {
    /// `γ_n = 1/(n+1)`.
    Harmonic,
    /// `γ_n = 1/n!`; the total is finite, so the ideal is all of 𝒫(ℕ).
    InverseFactorial,
    /// Wave weights with parameter `q`.
    Wave(#[serde(serialize_with = "rational_as_string")] BigRational),
}

fn rational_as_string<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&render_rational(r))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Family {
    Fin,
    DensityAlpha(#[serde(serialize_with = "rational_as_string")] BigRational),
    Summable(Weights),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Nested {
    Yes,
    No(NestedPair),
    Undeclared,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flags {
    pub translation_invariant: bool,
    pub p_ideal: bool,
    pub nested: Nested,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdealSpec {
    pub family: Family,
    pub flags: Flags,
}

/// Wave blocks: `w_n = n² + 1`, peaks `z_n = n² + n + 1`.
pub mod wave {
    use super::*;
    use crate::intsets::IndexRule;

    pub fn w(n: u64) -> u64 {
        n * n + 1
    }

    pub fn z(n: u64) -> u64 {
        n * n + n + 1
    }

    /// Distance from the peak of the block containing `m ≥ 1`.
    pub fn excess(m: u64) -> u64 {
        let k = isqrt(m as i128 - 1) as u64;
        let t = m - w(k);
        t.abs_diff(k)
    }

    /// `γ_m`, with `γ_0 = 1`.
    pub fn gamma(q: &BigRational, m: u64) -> BigRational {
        if m == 0 {
            return BigRational::one();
        }
        q.pow(excess(m) as i32)
    }

    pub fn z_set() -> SymbolicSet {
        SymbolicSet::points(IndexRule::new(1, 1, 1), 0).unwrap()
    }

    pub fn w_set() -> SymbolicSet {
        SymbolicSet::points(IndexRule::new(1, 0, 1), 0).unwrap()
    }

    /// `B_n = [w_n, w_{n+1} − 1]`.
    pub fn block(n: u64) -> SymbolicSet {
        SymbolicSet::range(w(n), w(n + 1) - 1)
    }

    /// The pair `(z_n, w_{n+1})`, left nested from `n = 1`.
    pub fn pair() -> NestedPair {
        NestedPair::new(IndexRule::new(1, 1, 1), IndexRule::new(1, 2, 2), 1)
    }
}

impl IdealSpec {
    pub fn fin() -> Self {
        IdealSpec {
            family: Family::Fin,
            flags: Flags { translation_invariant: true, p_ideal: true, nested: Nested::Yes },
        }
    }

    pub fn density(alpha: BigRational) -> Result<Self, IdealError> {
        if !alpha.is_positive() || alpha > BigRational::one() {
            return Err(IdealError::DensityOrder(render_rational(&alpha)));
        }
        Ok(IdealSpec {
            family: Family::DensityAlpha(alpha),
            flags: Flags { translation_invariant: true, p_ideal: true, nested: Nested::Yes },
        })
    }

    /// Asymptotic density zero sets.
    pub fn density_zero() -> Self {
        Self::density(BigRational::one()).unwrap()
    }

    pub fn summable(weights: Weights) -> Self {
        let proper = weights != Weights::InverseFactorial;
        let nested = match &weights {
            Weights::Wave(_) => Nested::No(wave::pair()),
            _ => Nested::Undeclared,
        };
        IdealSpec {
            family: Family::Summable(weights),
            flags: Flags { translation_invariant: proper, p_ideal: true, nested },
        }
    }

    pub fn wave_gamma(q: BigRational) -> Result<Self, IdealError> {
        if q <= rat(1, 2) || q >= BigRational::one() {
            return Err(IdealError::WaveParameter(render_rational(&q)));
        }
        Ok(Self::summable(Weights::Wave(q)))
    }

    pub fn is_fin(&self) -> bool {
        self.family == Family::Fin
    }

    /// `false` when every subset of ℕ belongs to the ideal.
    pub fn is_proper(&self) -> bool {
        self.family != Family::Summable(Weights::InverseFactorial)
    }

    pub fn label(&self) -> String {
        match &self.family {
            Family::Fin => "Fin".into(),
            Family::DensityAlpha(a) if a.is_one() => "I_d".into(),
            Family::DensityAlpha(a) => format!("I_{}", render_rational(a)),
            Family::Summable(Weights::Harmonic) => "I_(1/(n+1))".into(),
            Family::Summable(Weights::InverseFactorial) => "I_(1/n!)".into(),
            Family::Summable(Weights::Wave(q)) => format!("I_wave({})", render_rational(q)),
        }
    }

    pub fn weight(&self, n: u64) -> Option<BigRational> {
        match &self.family {
            Family::Summable(w) => Some(weight(w, n)),
            _ => None,
        }
    }
}

pub fn weight(w: &Weights, n: u64) -> BigRational {
    match w {
        Weights::Harmonic => rat(1, n as i64 + 1),
        Weights::InverseFactorial => {
            let f: BigUint = (1..=n).map(BigUint::from).product();
            BigRational::new(BigInt::one(), BigInt::from(f))
        }
        Weights::Wave(q) => wave::gamma(q, n),
    }
}

/// Checkpoints used for numeric trails.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule {
    pub checkpoints: Vec<u64>,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { checkpoints: vec![1_000, 10_000, 100_000] }
    }
}

impl Schedule {
    pub fn new(checkpoints: Vec<u64>) -> Self {
        Schedule { checkpoints }
    }

    fn within(&self, a: &SymbolicSet) -> Vec<u64> {
        let h = a.horizon().unwrap_or(u64::MAX);
        let mut v: Vec<u64> = self.checkpoints.iter().copied().filter(|&n| n <= h && n > 0).collect();
        if v.is_empty() && h != u64::MAX && h > 0 {
            v.push(h);
        }
        v
    }
}

/// `|A(n)| / n^α` along the checkpoints, plus a closed-form limit when known.
#[derive(Clone, Debug, Serialize)]
pub struct DensityTrail {
    pub points: Vec<TrailPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<String>,
    #[serde(skip)]
    pub limit_exact: Option<BigRational>,
}

fn nth_root_exact(n: u64, q: u32) -> Option<u64> {
    let r = (n as f64).powf(1.0 / q as f64).round() as u64;
    (r.saturating_sub(1)..=r + 1).find(|c| c.checked_pow(q) == Some(n))
}

pub fn density_alpha(a: &SymbolicSet, alpha: &BigRational, checkpoints: &[u64]) -> DensityTrail {
    let mut points = Vec::new();
    for (n, count) in counts_at(a, checkpoints) {
        let (p, q) = (alpha.numer().to_u32().unwrap_or(1), alpha.denom().to_u32().unwrap_or(1));
        let exact = nth_root_exact(n, q).map(|r| BigRational::new(BigInt::from(count), BigInt::from(r).pow(p)));
        let approx_v = count as f64 / (n as f64).powf(approx(alpha));
        points.push(TrailPoint {
            n,
            count,
            value: exact.as_ref().map_or_else(|| format!("{count}/{n}^{}", render_rational(alpha)), render_rational),
            approx: exact.as_ref().map_or(approx_v, approx),
        });
    }
    let limit_exact = a.normal_form().and_then(|nf| density_limit(&nf, alpha));
    DensityTrail { points, limit: limit_exact.as_ref().map(render_rational), limit_exact }
}

/// Closed-form `lim |A(n)|/n^α` for a single infinite component.
fn density_limit(nf: &NormalForm, alpha: &BigRational) -> Option<BigRational> {
    if nf.is_finite() {
        return Some(BigRational::zero());
    }
    if !nf.single_infinite_component() {
        return None;
    }
    let one = BigRational::one();
    if let Some(p) = &nf.periodic {
        let (r, m) = p.density();
        return (alpha == &one).then(|| rat(r as i64, m as i64));
    }
    let piece = &nf.pieces[0];
    let (slope, c) = piece.length();
    let lead = piece.lead();
    if slope > 0 {
        // Σ len ≈ slope·K²/2 while n ≈ lead·K²
        return if alpha == &one {
            Some(BigRational::new(BigInt::from(slope), BigInt::from(2 * lead)))
        } else {
            None
        };
    }
    if alpha == &one {
        return Some(BigRational::zero());
    }
    if alpha == &rat(1, 2) {
        let s = crate::intsets::exact_sqrt_pub(lead)?;
        return Some(BigRational::new(BigInt::from(c), BigInt::from(s)));
    }
    None
}

/// `Σ_{n ∈ A(N)} γ_n`.
pub fn submeasure_partial(w: &Weights, a: &SymbolicSet, n: u64) -> Result<BigRational, crate::SetError> {
    let members = a.members_upto(n)?;
    let mut total = BigRational::zero();
    for m in members {
        total += weight(w, m);
    }
    Ok(total)
}

fn summable_trail(w: &Weights, a: &SymbolicSet, checkpoints: &[u64]) -> Vec<TrailPoint> {
    checkpoints
        .iter()
        .filter_map(|&n| {
            let s = submeasure_partial(w, a, n).ok()?;
            Some(TrailPoint { n, count: a.count(n).ok()?, value: render_rational(&s), approx: approx(&s) })
        })
        .collect()
}

/// `|A ∩ [0, n]|` at each checkpoint from a single scan.
fn counts_at(a: &SymbolicSet, points: &[u64]) -> Vec<(u64, u64)> {
    let Some(&top) = points.iter().max() else { return vec![] };
    let Ok(members) = a.members_upto(top) else {
        return points.iter().filter_map(|&n| Some((n, a.count(n).ok()?))).collect();
    };
    points.iter().map(|&n| (n, members.partition_point(|&m| m <= n) as u64)).collect()
}

pub fn membership(ideal: &IdealSpec, a: &SymbolicSet, schedule: &Schedule) -> Verdict {
    if !ideal.is_proper() {
        return Verdict::holds("improper ideal: the weights have finite total sum");
    }
    if let Some(v) = a.as_finite() {
        return Verdict::holds("finite sets belong to every free ideal").note(format!("{} elements", v.len()));
    }
    if let Some(nf) = a.normal_form() {
        let v = normal_form_membership(ideal, &nf);
        if v.value.is_definitive() {
            return v;
        }
    }
    let v = structural_membership(ideal, a, schedule);
    if v.value.is_definitive() {
        return v;
    }
    let points = schedule.within(a);
    let trail = match &ideal.family {
        Family::Summable(w) => summable_trail(w, a, &points),
        Family::DensityAlpha(alpha) => density_alpha(a, alpha, &points).points,
        Family::Fin => counts_at(a, &points)
            .into_iter()
            .map(|(n, c)| TrailPoint { n, count: c, value: c.to_string(), approx: c as f64 })
            .collect(),
    };
    Verdict::unknown("no closed form; trail only").with_trail(trail)
}

fn normal_form_membership(ideal: &IdealSpec, nf: &NormalForm) -> Verdict {
    if nf.is_finite() {
        return Verdict::holds("finite sets belong to every free ideal");
    }
    match &ideal.family {
        Family::Fin => Verdict::fails("infinite set").note("closed form has an infinite component"),
        Family::DensityAlpha(alpha) => {
            if let Some(p) = &nf.periodic {
                let (r, m) = p.density();
                return Verdict::fails("closed-form counting").note(format!("periodic part of density {r}/{m}"));
            }
            let half = rat(1, 2);
            for piece in &nf.pieces {
                let (slope, c) = piece.length();
                if slope > 0 {
                    return Verdict::fails("closed-form counting").note(format!(
                        "blocks of growing length have density {}",
                        render_rational(&rat(slope as i64, 2 * piece.lead() as i64))
                    ));
                }
                if alpha <= &half {
                    return Verdict::fails("closed-form counting")
                        .note(format!("blocks of length {c} give |A(n)| of order n^(1/2)"));
                }
            }
            Verdict::holds("closed-form counting").note("|A(n)| = O(n^(1/2)) and the order exceeds 1/2")
        }
        Family::Summable(Weights::Harmonic) => {
            if nf.periodic.is_some() {
                return Verdict::fails("harmonic series along an arithmetic progression diverges");
            }
            for piece in &nf.pieces {
                if piece.length().0 > 0 {
                    return Verdict::fails("block sums of 1/(n+1) are bounded below");
                }
            }
            Verdict::holds("block sums of 1/(n+1) are O(1/i²)")
        }
        Family::Summable(Weights::InverseFactorial) => Verdict::holds("improper ideal"),
        Family::Summable(Weights::Wave(q)) => wave_membership(q, nf),
    }
}

/// Eventual behaviour of a quadratic generator in wave coordinates.
struct WaveCoords {
    /// `t − k`, linear in the piece index.
    offset: (i128, i128),
    /// block index `k`, linear in the piece index.
    k: (i128, i128),
}

fn wave_coords(a: i128, b: i128, c: i128, s: i128) -> WaveCoords {
    let mut kappa = crate::intsets::div_floor_pub(b, 2 * s);
    let mut tau = b - 2 * s * kappa;
    let mut t0 = c - kappa * kappa - 1;
    if tau == 0 && t0 < 0 {
        kappa -= 1;
        tau = 2 * s;
        t0 = c - kappa * kappa - 1;
    }
    debug_assert_eq!(a, s * s);
    WaveCoords { offset: (tau - s, t0 - kappa), k: (s, kappa) }
}

fn eventually_nonneg(lin: (i128, i128)) -> bool {
    lin.0 > 0 || (lin.0 == 0 && lin.1 >= 0)
}

fn wave_piece(piece: &Piece) -> Option<Truth> {
    let (a, lb, lc) = piece.left();
    let (_, rb, rc) = piece.right();
    let s = crate::intsets::exact_sqrt_pub(a)?;
    let l = wave_coords(a, lb, lc, s);
    let r = wave_coords(a, rb, rc, s);
    let ind = |b: bool| b as i128;
    let l_at_or_past = ind(eventually_nonneg(l.offset));
    let r_at_or_past = ind(eventually_nonneg(r.offset));
    let l_is_peak = ind(l.offset == (0, 0));
    // peaks counted in [l_i, r_i]
    let peaks = (r.k.1 - l.k.1) + r_at_or_past - l_at_or_past + l_is_peak;
    debug_assert_eq!(r.k.0, l.k.0);
    if peaks > 0 {
        return Some(Truth::Fails);
    }
    if l.offset.0 == 0 || r.offset.0 == 0 {
        return Some(Truth::Fails);
    }
    Some(Truth::Holds)
}

fn wave_membership(q: &BigRational, nf: &NormalForm) -> Verdict {
    if let Some(p) = &nf.periodic {
        return Verdict::fails("bounded-below terms").note(format!(
            "a residue class mod {} meets every long wave block within distance {} of its peak, so γ ≥ q^{}",
            p.modulus, p.modulus, p.modulus
        ));
    }
    for piece in &nf.pieces {
        match wave_piece(piece) {
            Some(Truth::Fails) => {
                return Verdict::fails("bounded-below terms")
                    .note("blocks stay at bounded distance from the wave peaks, so γ is bounded below along the set")
            }
            Some(_) => {}
            None => return Verdict::unknown("wave coordinates need a square leading coefficient"),
        }
    }
    Verdict::holds("geometric tail certificate").note(format!(
        "distance to the peaks grows linearly, so μ(A) ≤ Σ (linear)·{}^(linear) < ∞",
        render_rational(q)
    ))
}

fn structural_membership(ideal: &IdealSpec, a: &SymbolicSet, schedule: &Schedule) -> Verdict {
    let m = |s: &SymbolicSet| membership(ideal, s, schedule);
    match a.node() {
        SetNode::Union(x, y) => {
            let (vx, vy) = (m(x), m(y));
            match vx.value.and(vy.value) {
                Truth::Unknown => Verdict::unknown("union with an undecided part"),
                t => Verdict::new(t, "ideals are closed under finite unions and subsets"),
            }
        }
        SetNode::Intersect(x, y) => {
            if m(x).is(Truth::Holds) || m(y).is(Truth::Holds) {
                Verdict::holds("subset of a member")
            } else {
                Verdict::unknown("intersection of non-members")
            }
        }
        SetNode::Diff(x, y) => {
            let vx = m(x);
            if vx.is(Truth::Holds) {
                Verdict::holds("subset of a member")
            } else if vx.is(Truth::Fails) && m(y).is(Truth::Holds) {
                Verdict::fails("removing a member from a non-member leaves a non-member")
            } else {
                Verdict::unknown("difference with undecided parts")
            }
        }
        SetNode::Complement(x) => {
            if m(x).is(Truth::Holds) {
                Verdict::fails("the complement of a member is not a member of a proper ideal")
            } else {
                Verdict::unknown("complement of a non-member")
            }
        }
        SetNode::Shift(x, k) if ideal.flags.translation_invariant => {
            let v = m(x);
            Verdict::new(v.value, "translation invariance").note(format!("shift by {k}: {}", v.rule))
        }
        _ => Verdict::unknown("no applicable rule"),
    }
}

pub fn translation_invariance_check(ideal: &IdealSpec, k_max: u64) -> Verdict {
    match &ideal.family {
        Family::Fin => Verdict::holds("finite sets are closed under shifts"),
        Family::DensityAlpha(_) => Verdict::holds("shifts change |A(n)| by at most the shift"),
        Family::Summable(w) => {
            let (lo, hi) = match w {
                Weights::Wave(q) => (q.clone(), q.recip()),
                Weights::Harmonic => (rat(1, 2), BigRational::one()),
                Weights::InverseFactorial => {
                    return Verdict::unknown("consecutive weight ratios tend to 0; ratio rule inapplicable")
                }
            };
            let mut prev = weight(w, 0);
            for n in 1..=k_max {
                let cur = weight(w, n);
                let ratio = &cur / &prev;
                if ratio < lo || ratio > hi {
                    return Verdict::unknown("ratio bound violated on the window")
                        .note(format!("γ_{n}/γ_{} = {}", n - 1, render_rational(&ratio)));
                }
                prev = cur;
            }
            Verdict::holds("consecutive-ratio rule").note(format!(
                "γ_(n+1)/γ_n ∈ [{}, {}] ⊂ [1/2, 2], checked exactly for n < {k_max}",
                render_rational(&lo),
                render_rational(&hi)
            ))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NestWitness {
    pub pair: NestedPair,
    pub rights: Verdict,
    pub lefts: Verdict,
    pub dropped: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NestProbe {
    pub verdict: Verdict,
    pub witness: Option<NestWitness>,
}

pub fn nestedness_probe(ideal: &IdealSpec, pairs: &[NestedPair], budget: u64) -> NestProbe {
    let schedule = Schedule::default();
    let mut notes = Vec::new();
    let mut checked = Vec::new();
    for p in pairs {
        let mut pair = *p;
        let mut dropped = 0;
        while let Ok(Some(n)) = pair.first_violation() {
            if dropped >= 16 {
                break;
            }
            dropped += n + 1 - pair.from;
            pair = p.skip(dropped);
        }
        if !matches!(pair.first_violation(), Ok(None)) {
            notes.push(format!("pair ({}, {}) is not left nested; skipped", p.lefts, p.rights));
            continue;
        }
        if dropped > 0 {
            notes.push(format!(
                "pair ({}, {}) is left nested from n = {}; a finite change leaves membership unchanged",
                p.lefts, p.rights, pair.from
            ));
        }
        let rv = membership(ideal, &pair.rights_set(), &schedule);
        let lv = membership(ideal, &pair.lefts_set(), &schedule);
        if rv.is(Truth::Holds) && lv.is(Truth::Fails) {
            let mut v = Verdict::fails("non-nested witness").note(format!(
                "R = {} belongs to the ideal, L = {} does not",
                pair.rights_set(),
                pair.lefts_set()
            ));
            v.notes.extend(notes);
            return NestProbe { verdict: v, witness: Some(NestWitness { pair, rights: rv, lefts: lv, dropped }) };
        }
        checked.push(pair);
    }
    let mut v = match (&ideal.family, &ideal.flags.nested) {
        (Family::DensityAlpha(_), _) => {
            let ok = checked.iter().all(|p| {
                let (l, r) = (p.lefts_set(), p.rights_set());
                (p.from..p.from + budget.min(2000)).all(|n| {
                    let ln = p.left(n) as u64;
                    l.count(ln).unwrap() <= r.count(ln).unwrap() + 1
                })
            });
            if ok {
                Verdict::holds("counting inequality |L(l_n)| ≤ |R(l_n)| + 1")
            } else {
                Verdict::unknown("counting inequality violated on a probe pair")
            }
        }
        (Family::Fin, _) => Verdict::holds("vacuous: an infinite R never belongs to Fin"),
        (_, Nested::Yes) => Verdict::holds("declared nested"),
        _ => Verdict::unknown("no witness among the probe pairs and no nestedness rule"),
    };
    v.notes.extend(notes);
    NestProbe { verdict: v, witness: None }
}
