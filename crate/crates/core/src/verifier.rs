//! Exception sets `E_ε = {k ≤ N : ‖u_k x‖ ≥ ε}` from exact norm enclosures,
//! their smallness in an ideal, and consistency checks against [`decide`].

use crate::conditions::{decide, Decision, Outcome, TorsionContext};
use crate::expansion::{circle_norm_with_budget, default_norm_budget, DigitStream, NormInterval, ValueRule};
use crate::ideals::{membership, rat, render_rational, Family, IdealSpec, Schedule};
use crate::intsets::SymbolicSet;
use crate::verdict::{TrailPoint, Truth, Verdict};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use std::fmt;

fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&render_rational(r))
}

/// Norm-evaluation knobs shared by every exception set of a run.
#[derive(Clone, Debug, Serialize)]
pub struct Precision {
    #[serde(serialize_with = "ser_rational")]
    pub resolution: BigRational,
    pub budget: u64,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { resolution: BigRational::new(BigInt::one(), BigInt::from(1_000_000_000u64)), budget: default_norm_budget() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyParams {
    #[serde(serialize_with = "ser_rationals")]
    pub epsilons: Vec<BigRational>,
    pub horizons: Vec<u64>,
    pub precision: Precision,
}

fn ser_rationals<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(render_rational))
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            epsilons: vec![rat(1, 4), rat(1, 10), rat(1, 100)],
            horizons: vec![1_000, 10_000],
            precision: Precision::default(),
        }
    }
}

/// Enclosures of `‖u_k x‖` for `k = 0, …, n`, computed in parallel.
pub fn norms_upto(d: &DigitStream, n: u64, precision: &Precision) -> Vec<NormInterval> {
    (0..=n).into_par_iter().map(|k| circle_norm_with_budget(d, k, &precision.resolution, precision.budget)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Class {
    Member,
    Excluded,
    Unresolved,
}

pub fn classify(norm: &NormInterval, eps: &BigRational) -> Class {
    if &norm.low >= eps {
        Class::Member
    } else if &norm.high < eps {
        Class::Excluded
    } else {
        Class::Unresolved
    }
}

/// `1, 3, 10, 30, …` up to `n`, with `n` itself last.
pub fn trail_checkpoints(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 10u64;
    while p < n {
        out.push(p);
        if 3 * p < n {
            out.push(3 * p);
        }
        p = p.saturating_mul(10);
    }
    out.push(n);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ExceptionReport {
    #[serde(serialize_with = "ser_rational")]
    pub epsilon: BigRational,
    pub horizon: u64,
    /// Indices with certified `‖u_k x‖ ≥ ε`.
    pub members: Vec<u64>,
    /// Indices whose enclosure straddles `ε` at the budget.
    pub unresolved: Vec<u64>,
    /// `|(members ∪ unresolved) ∩ [0, n]| / (n + 1)`.
    pub trail: Vec<TrailPoint>,
    /// Why no index past the horizon is an exception, when that is proved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cofinal_exclusion: Option<String>,
}

impl ExceptionReport {
    /// Members and unresolved indices together.
    pub fn pessimistic(&self) -> Vec<u64> {
        let mut all: Vec<u64> = self.members.iter().chain(&self.unresolved).copied().collect();
        all.sort_unstable();
        all
    }

    pub fn finite_certified(&self) -> bool {
        self.cofinal_exclusion.is_some()
    }
}

fn ratio_trail(sorted: &[u64], checkpoints: &[u64]) -> Vec<TrailPoint> {
    checkpoints
        .iter()
        .map(|&n| {
            let c = sorted.partition_point(|&m| m <= n) as u64;
            let v = BigRational::new(BigInt::from(c), BigInt::from(n + 1));
            TrailPoint { n, count: c, value: render_rational(&v), approx: c as f64 / (n + 1) as f64 }
        })
        .collect()
}

fn report_from(d: &DigitStream, norms: &[NormInterval], eps: &BigRational, n: u64) -> ExceptionReport {
    let (mut members, mut unresolved) = (Vec::new(), Vec::new());
    for (k, norm) in norms.iter().enumerate().take(n as usize + 1) {
        match classify(norm, eps) {
            Class::Member => members.push(k as u64),
            Class::Unresolved => unresolved.push(k as u64),
            Class::Excluded => {}
        }
    }
    let mut report = ExceptionReport {
        epsilon: eps.clone(),
        horizon: n,
        members,
        unresolved,
        trail: Vec::new(),
        cofinal_exclusion: None,
    };
    report.trail = ratio_trail(&report.pessimistic(), &trail_checkpoints(n));
    report.cofinal_exclusion = cofinal_exclusion(d, norms, eps, n);
    report
}

pub fn exception_set(d: &DigitStream, eps: &BigRational, n: u64, precision: &Precision) -> ExceptionReport {
    report_from(d, &norms_upto(d, n, precision), eps, n)
}

/// Proof that `‖u_k x‖ < ε` for every `k > n`.
fn cofinal_exclusion(d: &DigitStream, norms: &[NormInterval], eps: &BigRational, n: u64) -> Option<String> {
    if let Some(e) = d.support_end() {
        if e <= n {
            return Some(format!("no nonzero digit past {e}, so u_k x is an integer for k ≥ {e}"));
        }
    }
    if let Some((mu, lambda)) = d.eventual_period() {
        // ‖u_k x‖ depends only on the digits past k, periodic once k + 1 ≥ μ
        let start = mu.saturating_sub(1);
        if start + lambda <= n + 1 {
            let window = (n + 1 - lambda)..=n;
            if window.clone().all(|k| classify(&norms[k as usize], eps) == Class::Excluded) {
                return Some(format!("norms repeat with period {lambda} from {start}; one full period is excluded"));
            }
        }
    }
    let (c, b) = (digit_bound_beyond(d, n)?, ratio_floor_beyond(d, n)?);
    // {u_k x} = Σ_{i>k} c_i/(b_{k+1}⋯b_i) ≤ Σ_j C/B^j = C/(B − 1)
    if b >= 2 && BigRational::new(BigInt::from(c), BigInt::from(b - 1)) < *eps {
        return Some(format!("digits ≤ {c} and ratios ≥ {b} past {n} give ‖u_k x‖ ≤ {c}/{}", b - 1));
    }
    None
}

/// Largest digit at indices `> n`, from the stream's value rules.
fn digit_bound_beyond(d: &DigitStream, n: u64) -> Option<u64> {
    let tail = SymbolicSet::range(0, n).complement();
    let mut bound = 0u64;
    for (set, rule) in d.value_regions()? {
        let part = set.intersect(&tail).simplified();
        if part.is_empty() == Some(true) {
            continue;
        }
        let c = match rule {
            ValueRule::Constant(c) => c,
            ValueRule::BMinus(k) => ratio_ceiling_on(d, &part)?.saturating_sub(k),
            ValueRule::FloorHalf => ratio_ceiling_on(d, &part)? / 2,
        };
        bound = bound.max(c);
    }
    Some(bound)
}

fn ratio_ceiling_on(d: &DigitStream, part: &SymbolicSet) -> Option<u64> {
    d.ratio().regions(part)?.iter().map(|(_, r)| r.bound()).try_fold(0, |m, b| Some(m.max(b?)))
}

/// Smallest ratio at indices `> n`; the rules are nondecreasing so `n + 1` bounds each piece.
fn ratio_floor_beyond(d: &DigitStream, n: u64) -> Option<u64> {
    let tail = SymbolicSet::range(0, n).complement();
    let mut floor: Option<u64> = None;
    for (set, rule) in d.ratio().regions(&tail)? {
        let v = match set.as_finite() {
            Some(ms) => ms.iter().filter_map(|&m| d.ratio().ratio_at(m).ok()?.to_u64()).min(),
            None => rule.value(n + 1).to_u64().or(Some(u64::MAX)),
        };
        if let Some(v) = v {
            floor = Some(floor.map_or(v, |f| f.min(v)));
        }
    }
    floor
}

/// How a checkpoint trail moves; a finite window never proves a tail property.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Trend {
    /// Nothing left at the last checkpoint.
    Vanishing,
    /// Strictly decreasing over the last checkpoints.
    Shrinking,
    /// Cumulative trail that stopped growing.
    Settling,
    /// Bounded below by a fixed positive fraction of its peak.
    NotSmall,
    Unclear,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Trend {
    pub fn looks_small(self) -> bool {
        matches!(self, Trend::Vanishing | Trend::Shrinking | Trend::Settling)
    }
}

/// Trails of density ideals are ratios; the rest are cumulative.
fn cumulative(ideal: &IdealSpec) -> bool {
    !matches!(ideal.family, Family::DensityAlpha(_))
}

pub fn trend(ideal: &IdealSpec, trail: &[TrailPoint]) -> Trend {
    let v: Vec<f64> = trail.iter().map(|p| p.approx).collect();
    let Some(&last) = v.last() else { return Trend::Unclear };
    if last == 0.0 {
        return Trend::Vanishing;
    }
    let tail = &v[v.len().saturating_sub(3)..];
    if cumulative(ideal) {
        let steps: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
        if steps.last().is_some_and(|&s| s == 0.0) {
            return Trend::Settling;
        }
        // geometric decay: each step a tenth of the one before, the last one negligible
        let decaying = steps.len() >= 2 && steps.windows(2).all(|s| s[1] <= 0.1 * s[0]);
        if decaying && steps.last().is_some_and(|&s| s <= 1e-3 * last) {
            return Trend::Settling;
        }
        if steps.len() >= 2 && steps.windows(2).all(|s| s[1] >= s[0] && s[0] > 0.0) {
            return Trend::NotSmall;
        }
        return Trend::Unclear;
    }
    let peak = tail.iter().cloned().fold(0.0, f64::max);
    if tail.len() >= 2 && tail.iter().all(|&x| x >= 0.8 * peak) {
        return Trend::NotSmall;
    }
    if tail.len() >= 2 && tail.windows(2).all(|w| w[1] < w[0]) {
        return Trend::Shrinking;
    }
    Trend::Unclear
}

/// Ideal membership of `E`; definitive only with a cofinal-exclusion proof.
pub fn smallness_assessment(e: &ExceptionReport, ideal: &IdealSpec, schedule: &Schedule) -> Verdict {
    if let Some(cert) = &e.cofinal_exclusion {
        let last = e.members.iter().chain(&e.unresolved).max();
        return Verdict::holds("finite exception set")
            .note(cert.clone())
            .note(last.map_or("empty".into(), |k| format!("no exception past {k}")));
    }
    let set = SymbolicSet::prefix(e.pessimistic(), e.horizon);
    let mut v = membership(ideal, &set, schedule);
    if v.value.is_definitive() {
        // a window says nothing about the tail
        v = Verdict::unknown("finite window only").with_trail(v.trail);
    }
    let t = trend(ideal, &v.trail);
    v.note(format!("trend: {t}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Consistency {
    #[serde(rename = "CONSISTENT")]
    Consistent,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
    #[serde(rename = "CONTRADICTION")]
    Contradiction,
}

impl fmt::Display for Consistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Consistency::Consistent => "CONSISTENT",
            Consistency::Inconclusive => "INCONCLUSIVE",
            Consistency::Contradiction => "CONTRADICTION",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyRun {
    pub exceptions: ExceptionReport,
    pub smallness: Verdict,
    /// Trend of the pessimistic trail.
    pub trend: Trend,
    /// Trend of the certified members alone.
    pub certified_trend: Trend,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub decision: Decision,
    pub runs: Vec<VerifyRun>,
    pub status: Consistency,
    pub reason: String,
}

pub fn run_verification(ctx: &TorsionContext, params: &VerifyParams) -> VerificationReport {
    let decision = decide(ctx);
    let top = params.horizons.iter().copied().max().unwrap_or(0);
    let norms = norms_upto(&ctx.digits, top, &params.precision);
    let mut runs = Vec::new();
    for &n in &params.horizons {
        let schedule = Schedule::new(trail_checkpoints(n));
        for eps in &params.epsilons {
            let exceptions = report_from(&ctx.digits, &norms, eps, n);
            let smallness = smallness_assessment(&exceptions, &ctx.ideal, &schedule);
            let certified = SymbolicSet::prefix(exceptions.members.iter().copied(), n);
            let certified_trend = trend(&ctx.ideal, &membership(&ctx.ideal, &certified, &schedule).trail);
            let trend = trend(&ctx.ideal, &smallness.trail);
            runs.push(VerifyRun { exceptions, smallness, trend, certified_trend });
        }
    }
    let (status, reason) = judge(&decision, &runs);
    VerificationReport { decision, runs, status, reason: reason.into() }
}

fn judge(decision: &Decision, runs: &[VerifyRun]) -> (Consistency, &'static str) {
    use Consistency::*;
    if runs.is_empty() {
        return (Inconclusive, "no exception sets computed");
    }
    let small = |r: &VerifyRun| r.smallness.is(Truth::Holds) || r.trend.looks_small();
    match decision.value {
        Outcome::In => {
            if runs.iter().any(|r| !r.exceptions.finite_certified() && r.certified_trend == Trend::NotSmall) {
                (Contradiction, "decided In, but a certified exception trail stays bounded below")
            } else if runs.iter().all(small) {
                (Consistent, "every exception set is finite or thinning out")
            } else {
                (Inconclusive, "some exception trail has no clear trend")
            }
        }
        Outcome::NotIn => {
            if runs.iter().all(|r| r.exceptions.finite_certified()) {
                (Contradiction, "decided NotIn, but every exception set is certified finite")
            } else if runs.iter().any(|r| r.certified_trend == Trend::NotSmall) {
                (Consistent, "a certified exception trail stays bounded below")
            } else {
                (Inconclusive, "no exception trail is clearly large")
            }
        }
        Outcome::Unknown => (Inconclusive, "the decision procedure is undecided"),
    }
}

/// Plain-text table `epsilon horizon n count value approx`, one row per trail point.
pub fn trail_table(report: &VerificationReport) -> String {
    let mut out = String::from("epsilon\thorizon\tn\tcount\tvalue\tapprox\n");
    for r in &report.runs {
        for p in &r.exceptions.trail {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                render_rational(&r.exceptions.epsilon),
                r.exceptions.horizon,
                p.n,
                p.count,
                p.value,
                p.approx
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests;
