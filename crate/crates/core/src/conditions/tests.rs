use super::*;
use crate::catalog::{self, BuiltIn};
use crate::expansion::{extract_digits, Clause};
use crate::ideals::rat;
use crate::intsets::IndexRule;
use crate::scale::Rule;
use proptest::prelude::*;

fn table(id: &str) -> (BuiltIn, ConditionTable) {
    let b = catalog::build(id).unwrap();
    let t = evaluate_all(&b.context);
    (b, t)
}

fn values(t: &ConditionTable, names: &[&str]) -> Vec<Truth> {
    names.iter().map(|n| t.get(n).unwrap().value).collect()
}

#[test]
fn boundaries() {
    let odds = SymbolicSet::odds();
    assert_eq!(right_boundary(&odds).members_upto(9).unwrap(), vec![1, 3, 5, 7, 9]);
    let s = SymbolicSet::range(3, 6).union(&SymbolicSet::range(9, 9));
    assert_eq!(right_boundary(&s).members_upto(20).unwrap(), vec![6, 9]);
    assert_eq!(left_boundary(&s).members_upto(20).unwrap(), vec![3, 9]);
}

#[test]
fn basic_conditions_match_examples() {
    use Truth::*;
    let (_, t) = table("NoWC");
    assert_eq!(values(&t, &["i", "ii", "iii"]), vec![Holds, Holds, Holds]);
    let (_, t) = table("ce");
    assert_eq!(values(&t, &["i", "ii", "iii"]), vec![Fails, Fails, Fails]);
    let (_, t) = table("notnested");
    assert_eq!(values(&t, &["i", "ii", "iii"]), vec![Holds, Holds, Fails]);
}

#[test]
fn quantified_conditions_match_examples() {
    use Truth::*;
    let (_, t) = table("Exa2osserv");
    assert_eq!(t.a2.value, Holds, "{:?}", t.a2);
    assert_eq!(t.iii.value, Fails);
    let (_, t) = table("ax1p-b");
    assert_eq!((t.a1.value, t.star.value), (Holds, Fails), "{:?}\n{:?}", t.a1, t.star);
    let (_, t) = table("ce");
    assert_eq!((t.big_i.value, t.big_ii.value), (Holds, Holds));
    assert!(t.big_i.notes.iter().any(|n| n.contains("monotone bound")), "{:?}", t.big_i);
    let (_, t) = table("notIx");
    assert_eq!((t.big_i.value, t.big_ii.value), (Holds, Holds));
    assert_eq!(t.limit_search.value, Fails);
    assert!(t.limit_search.notes.iter().any(|n| n.contains("1/2")));
}

#[test]
fn support_in_ideal_gives_everything() {
    // S = {w_(n+1)} has finite wave submeasure and is b-bounded
    let (_, t) = table("counterexample-wave");
    for name in ["a1", "a2", "I", "II"] {
        assert_eq!(t.get(name).unwrap().value, Truth::Holds, "{name}");
    }
}

#[test]
fn catalog_holds_is_labeled() {
    let (b, t) = table("Exa2osserv");
    assert!(t.a2.rule.starts_with("catalog-relative"), "{}", t.a2.rule);
    assert!(t.a2.notes.iter().any(|n| n.contains("extremal")));
    assert!(b.context.witness_catalog.iter().any(|w| w.label == "ρ(S)"));
}

#[test]
fn splitting_lists() {
    let b = catalog::build("ax1p-b").unwrap();
    let rep = splitting_report(&b.context, &SymbolicSet::odds(), &SymbolicSet::evens()).unwrap();
    assert_eq!(rep.direct_value, Truth::Holds, "{:#?}", rep.direct);
    assert_eq!(rep.restricted_value, Truth::Fails);
    assert_eq!(rep.verdict.value, Truth::Holds);
    assert_eq!(rep.verdict.rule, cite::SPLIT_DIRECT);

    // support inside B and nothing on D: both lists hold
    let ratio = b.context.ratio.clone();
    let d = DigitStream::on_set(&ratio, SymbolicSet::finite([1, 3, 5]), ValueRule::BMinus(1)).unwrap();
    let ctx = TorsionContext::new(d, IdealSpec::fin(), Config::default());
    let rep = splitting_report(&ctx, &SymbolicSet::odds(), &SymbolicSet::evens()).unwrap();
    assert_eq!((rep.restricted_value, rep.direct_value), (Truth::Holds, Truth::Holds));
    assert_eq!(rep.verdict.rule, cite::SPLIT_RESTRICTED);

    // isolated top digits on B: (i) for x_B and (1)' both fail
    let d = DigitStream::on_set(&ratio, SymbolicSet::residue(6, [1, 3]).unwrap(), ValueRule::BMinus(1)).unwrap();
    let ctx = TorsionContext::new(d, IdealSpec::fin(), Config::default());
    let v = check_splitting(&ctx, &SymbolicSet::odds(), &SymbolicSet::evens()).unwrap();
    assert_eq!(v.value, Truth::Fails, "{v:?}");

    let err = check_splitting(&b.context, &SymbolicSet::odds(), &SymbolicSet::residue(4, [0]).unwrap());
    assert!(err.is_err());
}

#[test]
fn splitting_fails_without_top_digits_on_b() {
    let b = catalog::build("ax1p-b").unwrap();
    let _ = b;
    // digits 0 < c < b − 1 need b ≥ 3 on B
    let ratio3 = RatioSequence::piecewise(SymbolicSet::odds(), Rule::Const(3), Rule::linear(1, 0)).unwrap();
    let d = DigitStream::on_set(&ratio3, SymbolicSet::odds(), ValueRule::Constant(1)).unwrap();
    let ctx = TorsionContext::new(d, IdealSpec::fin(), Config::default());
    let rep = splitting_report(&ctx, &SymbolicSet::odds(), &SymbolicSet::evens()).unwrap();
    assert_eq!(rep.restricted[1].1.value, Truth::Fails);
    assert_eq!(rep.verdict.value, Truth::Fails);
}

#[test]
fn decisions_match_catalog() {
    for b in catalog::all() {
        let d = decide(&b.context);
        assert_eq!(d.value, b.expect.decision, "{}: {:#?}", b.id, d.trail);
        assert_eq!(d.rule.as_deref(), b.expect.rule, "{}", b.id);
        let t = evaluate_all(&b.context);
        for (name, want) in &b.expect.conditions {
            assert_eq!(t.get(name).unwrap().value, *want, "{} {name}: {:?}", b.id, t.get(name));
        }
    }
}

#[test]
fn sum_of_thirds_is_decided_by_bounded_scale() {
    let d = extract_digits(&rat(1, 2), &RatioSequence::constant(3).unwrap(), 10).unwrap();
    let ctx = TorsionContext::new(d, IdealSpec::density_zero(), Config::default());
    let dec = decide(&ctx);
    assert_eq!(dec.value, Outcome::NotIn);
    assert_eq!(dec.rule.as_deref(), Some(cite::BOUNDED_SCALE));
}

#[test]
fn opaque_digits_stay_unknown() {
    let ratio = RatioSequence::constant(2).unwrap();
    let d = DigitStream::opaque(&ratio, vec![1, 0, 1, 1, 0, 1]).unwrap();
    let ctx = TorsionContext::new(d, IdealSpec::density_zero(), Config::default());
    let dec = decide(&ctx);
    assert_eq!(dec.value, Outcome::Unknown);
    assert!(dec.rule.is_none());
    assert!(!dec.trail.is_empty());
}

#[test]
fn decisions_always_cite() {
    for b in catalog::all() {
        let d = decide(&b.context);
        assert_eq!(d.value != Outcome::Unknown, d.rule.is_some(), "{}", b.id);
    }
}

fn dominance(t: &ConditionTable) -> Result<(), String> {
    use Truth::*;
    let both = t.i.value.and(t.ii.value);
    if t.t.value == Holds && t.a.value == Fails {
        return Err("T holds but A fails".into());
    }
    if both == Holds && t.a1.value == Fails {
        return Err("(i)&(ii) hold but a1 fails".into());
    }
    if t.iii.value == Holds && t.a2.value == Fails {
        return Err("(iii) holds but a2 fails".into());
    }
    if t.star.value == Holds && t.a1.value == Fails {
        return Err("star holds but a1 fails".into());
    }
    Ok(())
}

#[test]
fn implication_chain_on_catalog() {
    for b in catalog::all() {
        let t = evaluate_all(&b.context);
        dominance(&t).unwrap_or_else(|e| panic!("{}: {e}", b.id));
        if b.context.b_bounded(&b.context.s) == Truth::Holds {
            assert_eq!(t.a1.value, t.i.value.and(t.ii.value), "{}", b.id);
        }
        if b.context.b_bounded(&left_boundary(&b.context.s).shift(-1)) == Truth::Holds
            && t.iii.value.is_definitive()
            && t.a2.value.is_definitive()
        {
            assert_eq!(t.a2.value, t.iii.value, "{}", b.id);
        }
    }
}

fn ideals() -> impl Strategy<Value = IdealSpec> {
    prop_oneof![
        Just(IdealSpec::fin()),
        Just(IdealSpec::density_zero()),
        Just(IdealSpec::density(rat(1, 2)).unwrap()),
        Just(IdealSpec::wave_gamma(rat(3, 5)).unwrap()),
    ]
}

fn supports() -> impl Strategy<Value = SymbolicSet> {
    prop_oneof![
        (2u64..6, 0u64..6, 1u64..3).prop_map(|(m, r, w)| {
            let rs: Vec<u64> = (0..w.min(m - 1)).map(|j| (r + j) % m).collect();
            SymbolicSet::residue(m, rs).unwrap().intersect(&SymbolicSet::positives())
        }),
        (1u64..4, 0u64..3).prop_map(|(a, c)| SymbolicSet::points(IndexRule::new(1, a as i64, c as i64 + 1), 0).unwrap()),
        Just(catalog::nowc_support()),
        Just(catalog::wave_blocks()),
        (1u64..30).prop_map(|k| SymbolicSet::range(1, k)),
    ]
}

fn ratios() -> impl Strategy<Value = RatioSequence> {
    prop_oneof![
        (2u64..5).prop_map(|b| RatioSequence::constant(b).unwrap()),
        Just(RatioSequence::affine()),
        Just(RatioSequence::piecewise(SymbolicSet::odds(), Rule::Const(2), Rule::linear(1, 0)).unwrap()),
        Just(RatioSequence::piecewise(SymbolicSet::residue(3, [0]).unwrap(), Rule::Pow2, Rule::Const(3)).unwrap()),
    ]
}

fn values_rule() -> impl Strategy<Value = ValueRule> {
    prop_oneof![Just(ValueRule::BMinus(1)), Just(ValueRule::Constant(1)), Just(ValueRule::FloorHalf)]
}

/// Short trails: the properties below are about consistency, not counts.
fn quick() -> Config {
    Config { schedule: Schedule::new(vec![500]), ..Config::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dominance_on_random_contexts(s in supports(), r in ratios(), v in values_rule(), ideal in ideals()) {
        let Ok(d) = DigitStream::on_set(&r, s, v) else { return Ok(()) };
        let ctx = TorsionContext::new(d, ideal, quick());
        let t = evaluate_all(&ctx);
        prop_assert!(dominance(&t).is_ok(), "{:?}", dominance(&t));
        if ctx.b_bounded(&ctx.s) == Truth::Holds {
            prop_assert_eq!(t.a1.value, t.i.value.and(t.ii.value));
        }
        let dec = decide(&ctx);
        prop_assert_eq!(dec.value != Outcome::Unknown, dec.rule.is_some());
    }

    #[test]
    fn patching_on_small_sets_keeps_decisions(s in supports(), v in values_rule(), k in 1u64..4) {
        let r = RatioSequence::constant(2 + k).unwrap();
        let Ok(d) = DigitStream::on_set(&r, s, v) else { return Ok(()) };
        let ideal = IdealSpec::density_zero();
        let before = decide(&TorsionContext::new(d.clone(), ideal.clone(), quick()));
        let patch = SymbolicSet::squares().intersect(&SymbolicSet::positives());
        for value in [ValueRule::Constant(0), ValueRule::BMinus(1)] {
            let Ok(p) = d.modified(Clause::new(patch.clone(), value)) else { continue };
            let after = decide(&TorsionContext::new(p, ideal.clone(), quick()));
            if before.value != Outcome::Unknown && after.value != Outcome::Unknown {
                prop_assert_eq!(before.value, after.value, "{:?} vs {:?}", before.rule, after.rule);
            }
        }
    }
}
