//! Built-in scenarios with their expected outcomes.

use crate::conditions::{cite, Outcome, TorsionContext, Config};
use crate::expansion::{extract_digits, Clause, DigitStream, ValueRule};
use crate::ideals::{rat, wave, IdealSpec};
use crate::intsets::{IndexRule, SymbolicSet};
use crate::scale::{RatioSequence, Rule};
use crate::verdict::Truth;

#[derive(Clone, Debug)]
pub struct Expectation {
    pub decision: Outcome,
    pub rule: Option<&'static str>,
    /// Condition name (as in [`crate::conditions::ConditionTable::get`]) and expected value.
    pub conditions: Vec<(&'static str, Truth)>,
}

#[derive(Debug)]
pub struct BuiltIn {
    pub id: &'static str,
    pub title: &'static str,
    pub context: TorsionContext,
    pub expect: Expectation,
}

pub const REPRODUCIBLE: [&str; 8] =
    ["ce", "NoWC", "counterexample-wave", "Exa2osserv", "notnested", "prufer", "atomic-PropoNew", "ax1p-b"];

pub const ALL: [&str; 10] = [
    "ce",
    "NoWC",
    "counterexample-wave",
    "Exa2osserv",
    "notnested",
    "prufer",
    "atomic-PropoNew",
    "ax1p-b",
    "notIx",
    "nowc-patched",
];

/// `X ∩ ℕ₊` with `X = ⋃ [(2n)², (2n+1)²]`.
pub fn nowc_support() -> SymbolicSet {
    SymbolicSet::interval_union(vec![], IndexRule::new(4, 0, 0), IndexRule::new(4, 4, 1), 0)
        .unwrap()
        .intersect(&SymbolicSet::positives())
        .simplified()
}

/// `⋃_{n ≥ 1} [z_n, w_{n+1}]` from the non-nested wave pair.
pub fn wave_blocks() -> SymbolicSet {
    let p = wave::pair();
    SymbolicSet::interval_union(vec![], p.lefts, p.rights, p.from).unwrap()
}

fn q35() -> IdealSpec {
    IdealSpec::wave_gamma(rat(3, 5)).unwrap()
}

fn stream(ratio: &RatioSequence, clauses: Vec<Clause>) -> DigitStream {
    DigitStream::pattern(ratio, clauses).expect("built-in digit pattern")
}

pub fn nowc_stream() -> DigitStream {
    stream(&RatioSequence::constant(2).unwrap(), vec![Clause::new(nowc_support(), ValueRule::BMinus(1))])
}

pub fn build(id: &str) -> Option<BuiltIn> {
    build_with(id, Config::default())
}

pub fn build_with(id: &str, config: Config) -> Option<BuiltIn> {
    use Truth::*;
    let two = RatioSequence::constant(2).unwrap();
    let ctx = |d: DigitStream, ideal: IdealSpec| TorsionContext::new(d, ideal, config.clone());
    let expect = |decision, rule, conditions: Vec<(&'static str, Truth)>| Expectation { decision, rule: Some(rule), conditions };
    let (title, context, expect) = match id {
        "NoWC" => (
            "top digits on alternate square blocks; boundaries have density zero",
            ctx(nowc_stream(), IdealSpec::density_zero()),
            expect(Outcome::In, cite::T_SUFFICIENT, vec![("i", Holds), ("ii", Holds), ("iii", Holds), ("T", Holds)]),
        ),
        "nowc-patched" => {
            let d = nowc_stream().modified(Clause::new(SymbolicSet::squares(), ValueRule::Constant(0))).unwrap();
            (
                "the alternate-block stream with digits zeroed on the perfect squares",
                ctx(d, IdealSpec::density_zero()),
                expect(Outcome::In, cite::T_SUFFICIENT, vec![("T", Holds)]),
            )
        }
        "ce" => (
            "digit 1 on odd indices under b_n = n + 1",
            ctx(
                stream(&RatioSequence::affine(), vec![Clause::new(SymbolicSet::odds(), ValueRule::Constant(1))]),
                IdealSpec::fin(),
            ),
            expect(
                Outcome::In,
                cite::DIVERGENT_MOD,
                vec![("i", Fails), ("ii", Fails), ("iii", Fails), ("I", Holds), ("II", Holds)],
            ),
        ),
        "prufer" => (
            "x = 1/2 = Σ 1/3ⁿ under constant ratio 3",
            ctx(extract_digits(&rat(1, 2), &RatioSequence::constant(3).unwrap(), 64).unwrap(), IdealSpec::density_zero()),
            expect(Outcome::NotIn, cite::BOUNDED_SCALE, vec![("i", Holds), ("ii", Fails), ("T", Fails)]),
        ),
        "notnested" => (
            "top digits on the wave blocks [z_n, w_(n+1)] under ratio 2",
            ctx(stream(&two, vec![Clause::new(wave_blocks(), ValueRule::BMinus(1))]), q35()),
            expect(
                Outcome::NotIn,
                cite::LEFT_BOUNDARY,
                vec![("i", Holds), ("ii", Holds), ("iii", Fails), ("a2", Fails)],
            ),
        ),
        "Exa2osserv" => {
            let s = wave_blocks();
            let ratio = RatioSequence::piecewise(s.clone(), Rule::Const(2), Rule::Pow2).unwrap();
            (
                "ratio 2 on the wave blocks and 2ⁿ elsewhere, top digits on the blocks",
                ctx(stream(&ratio, vec![Clause::new(s, ValueRule::BMinus(1))]), q35()),
                expect(
                    Outcome::In,
                    cite::BOUNDED_MOD,
                    vec![("i", Holds), ("ii", Holds), ("iii", Fails), ("T", Fails), ("a2", Holds), ("A", Holds)],
                ),
            )
        }
        "counterexample-wave" => {
            let s = wave::w_set().diff(&SymbolicSet::finite([wave::w(0)])).simplified();
            (
                "top digits on W ∖ {w_0}, a set of finite wave submeasure",
                ctx(stream(&two, vec![Clause::new(s, ValueRule::BMinus(1))]), q35()),
                expect(Outcome::In, cite::SUPPORT_IN_IDEAL, vec![("I", Holds), ("II", Holds)]),
            )
        }
        "atomic-PropoNew" => (
            "atomic element with support {3n + 2} under ratio 2",
            ctx(
                stream(&two, vec![Clause::new(SymbolicSet::residue(3, [2]).unwrap(), ValueRule::Constant(1))]),
                IdealSpec::density_zero(),
            ),
            expect(Outcome::NotIn, cite::RIGHT_BOUNDARY, vec![("i", Fails), ("a1", Fails)]),
        ),
        "ax1p-b" => {
            let (odds, evens) = (SymbolicSet::odds(), SymbolicSet::evens());
            let ratio = RatioSequence::piecewise(odds.clone(), Rule::Const(2), Rule::linear(1, 0)).unwrap();
            let clauses = vec![
                Clause::new(evens.intersect(&SymbolicSet::positives()), ValueRule::BMinus(2)),
                Clause::new(odds.diff(&SymbolicSet::finite([1])), ValueRule::BMinus(1)),
            ];
            (
                "b = 2 on odd and b = n on even indices; (a1) holds while (⋆) fails",
                ctx(stream(&ratio, clauses), IdealSpec::fin()).with_partition(odds, evens),
                expect(Outcome::In, cite::SPLIT_DIRECT, vec![("a1", Holds), ("star", Fails), ("a2", Holds)]),
            )
        }
        "notIx" => {
            let s = SymbolicSet::squares().intersect(&SymbolicSet::positives());
            (
                "digits ⌊b_n/2⌋ on the squares under b_n = n + 1",
                ctx(stream(&RatioSequence::affine(), vec![Clause::new(s, ValueRule::FloorHalf)]), IdealSpec::density_zero()),
                expect(Outcome::In, cite::SUPPORT_IN_IDEAL, vec![("I", Holds), ("II", Holds), ("limit", Fails)]),
            )
        }
        _ => return None,
    };
    let id = ALL.iter().copied().find(|&k| k == id)?;
    Some(BuiltIn { id, title, context, expect })
}

pub fn all() -> Vec<BuiltIn> {
    ALL.iter().filter_map(|id| build(id)).collect()
}
