use super::*;
use crate::catalog;
use crate::expansion::{extract_digits, Clause};
use crate::scale::RatioSequence;
use num_traits::Zero;
use proptest::prelude::*;

fn precision() -> Precision {
    Precision { resolution: rat(1, 1_000_000_000), budget: 512 }
}

fn half_base3() -> DigitStream {
    extract_digits(&rat(1, 2), &RatioSequence::constant(3).unwrap(), 64).unwrap()
}

fn ce_stream() -> DigitStream {
    DigitStream::pattern(
        &RatioSequence::affine(),
        vec![Clause::new(SymbolicSet::odds(), ValueRule::Constant(1))],
    )
    .unwrap()
}

/// `‖u_k x‖` of the ce element by direct summation, independent of the stream machinery:
/// `{u_k x} = Σ_{odd i > k} (k+1)!/(i+1)!`, summed until the remainder is below `2^-80`.
fn ce_norm_oracle(k: u64) -> (BigRational, BigRational) {
    let mut term = BigRational::one();
    let mut sum = BigRational::zero();
    let tiny = BigRational::new(BigInt::one(), BigInt::from(2u8).pow(80));
    let mut i = k;
    loop {
        i += 1;
        term = term / BigRational::from(BigInt::from(i + 1));
        if i % 2 == 1 {
            sum += &term;
        }
        if term < tiny {
            break;
        }
    }
    // the rest is at most twice the last term
    let hi = &sum + &term * BigRational::from(BigInt::from(2));
    (sum, hi)
}

#[test]
fn thirds_sum_has_norm_one_half_everywhere() {
    let d = half_base3();
    let norms = norms_upto(&d, 50, &precision());
    for (k, n) in norms.iter().enumerate() {
        assert!(n.exact, "k = {k}");
        assert_eq!(n.low, rat(1, 2));
    }
    let e = exception_set(&d, &rat(1, 4), 50, &precision());
    assert_eq!(e.members, (0..=50).collect::<Vec<_>>());
    assert!(e.unresolved.is_empty());
    assert!(!e.finite_certified());
}

#[test]
fn zero_has_no_exceptions() {
    let d = DigitStream::zero(&RatioSequence::constant(2).unwrap());
    for eps in [rat(1, 2), rat(1, 100)] {
        let e = exception_set(&d, &eps, 300, &precision());
        assert!(e.members.is_empty() && e.unresolved.is_empty());
        assert!(e.finite_certified());
        let v = smallness_assessment(&e, &IdealSpec::fin(), &Schedule::default());
        assert_eq!(v.value, Truth::Holds);
    }
}

#[test]
fn ce_exceptions_stop_early_and_norms_match_oracle() {
    let d = ce_stream();
    let e = exception_set(&d, &rat(1, 10), 200, &precision());
    assert!(e.members.iter().chain(&e.unresolved).all(|&k| k <= 20), "{:?}", e.members);
    assert!(e.finite_certified(), "{:?}", e.cofinal_exclusion);
    let norms = norms_upto(&d, 200, &precision());
    for k in 5..=200u64 {
        let (lo, hi) = ce_norm_oracle(k);
        let n = &norms[k as usize];
        // both enclosures contain the true value
        assert!(n.low <= hi && lo <= n.high, "k = {k}");
        assert!(n.high <= rat(1, k as i64 + 1), "k = {k}");
    }
    let v = smallness_assessment(&e, &IdealSpec::fin(), &Schedule::default());
    assert_eq!(v.value, Truth::Holds);
}

#[test]
fn atomic_fractional_parts_stay_in_band() {
    let d = DigitStream::on_set(
        &RatioSequence::constant(2).unwrap(),
        SymbolicSet::residue(3, [2]).unwrap(),
        ValueRule::Constant(1),
    )
    .unwrap();
    // x = Σ_n 2^-(3n+2) = 2/7
    assert_eq!(d.value(), Some(rat(2, 7)));
    for n in 0..=100u64 {
        let k = 3 * n + 1;
        let f = d.fractional_part(k).unwrap();
        let oracle = {
            let y = rat(2, 7) * BigRational::from(BigInt::from(2u8).pow(k as u32));
            &y - y.floor()
        };
        assert_eq!(f, oracle);
        assert!(f >= rat(1, 2) && f <= rat(5, 6), "n = {n}: {f}");
    }
    let e = exception_set(&d, &rat(1, 6), 300, &precision());
    assert!((0..100).map(|n| 3 * n + 1).all(|k| e.members.binary_search(&k).is_ok()));
}

#[test]
fn whole_window_is_not_small() {
    let e = exception_set(&half_base3(), &rat(1, 4), 1000, &precision());
    let v = smallness_assessment(&e, &IdealSpec::density_zero(), &Schedule::new(trail_checkpoints(1000)));
    assert_eq!(v.value, Truth::Unknown);
    assert!(v.trail.iter().all(|p| p.count == p.n.min(1000) + 1 || p.approx >= 0.99));
    assert_eq!(trend(&IdealSpec::density_zero(), &v.trail), Trend::NotSmall);
}

#[test]
fn alternating_blocks_thin_out() {
    let d = catalog::nowc_stream();
    let e = exception_set(&d, &rat(1, 4), 10_000, &precision());
    let at = |n: u64| e.trail.iter().find(|p| p.n == n).unwrap().approx;
    assert!(at(10_000) <= 0.05, "{}", at(10_000));
    assert!(at(1_000) > at(3_000) && at(3_000) > at(10_000));
    // exceptions sit next to block ends, O(√N) of them
    assert!(e.members.len() + e.unresolved.len() <= 8 * 100);
}

#[test]
fn finer_resolution_never_flips() {
    let fine = Precision { resolution: rat(1, 2_000_000_000), budget: 1024 };
    for b in catalog::all() {
        let d = &b.context.digits;
        let coarse = norms_upto(d, 400, &precision());
        let sharp = norms_upto(d, 400, &fine);
        for eps in [rat(1, 4), rat(1, 10), rat(1, 100)] {
            for (k, (a, z)) in coarse.iter().zip(&sharp).enumerate() {
                let (ca, cz) = (classify(a, &eps), classify(z, &eps));
                if ca != Class::Unresolved {
                    assert_eq!(ca, cz, "{} k = {k}", b.id);
                }
            }
        }
    }
}

#[test]
fn catalog_never_contradicts() {
    let params = VerifyParams { horizons: vec![1_000], ..VerifyParams::default() };
    for b in catalog::all() {
        let r = run_verification(&b.context, &params);
        assert_ne!(r.status, Consistency::Contradiction, "{}: {}", b.id, r.reason);
    }
}

#[test]
fn named_examples_are_consistent() {
    let params = VerifyParams { horizons: vec![1_000, 3_000], ..VerifyParams::default() };
    for id in ["prufer", "NoWC", "atomic-PropoNew", "ce"] {
        let b = catalog::build(id).unwrap();
        let r = run_verification(&b.context, &params);
        assert_eq!(r.status, Consistency::Consistent, "{id}: {}", r.reason);
    }
}

#[test]
fn trail_table_has_a_row_per_point() {
    let b = catalog::build("prufer").unwrap();
    let params = VerifyParams { horizons: vec![100], epsilons: vec![rat(1, 4)], ..VerifyParams::default() };
    let r = run_verification(&b.context, &params);
    let rows = trail_table(&r).lines().count();
    assert_eq!(rows, 1 + r.runs[0].exceptions.trail.len());
}

#[test]
fn checkpoints_follow_one_three_grid() {
    assert_eq!(trail_checkpoints(10_000), vec![10, 30, 100, 300, 1000, 3000, 10_000]);
    assert_eq!(trail_checkpoints(5), vec![5]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn longer_horizons_extend_shorter_ones(n in 10u64..200, extra in 1u64..200, id in 0usize..catalog::ALL.len()) {
        let b = catalog::build(catalog::ALL[id]).unwrap();
        let d = &b.context.digits;
        let short = exception_set(d, &rat(1, 10), n, &precision());
        let long = exception_set(d, &rat(1, 10), n + extra, &precision());
        let cut: Vec<u64> = long.members.iter().copied().filter(|&k| k <= n).collect();
        prop_assert_eq!(short.members, cut);
    }

    #[test]
    fn members_and_unresolved_are_disjoint(p in 1u64..200, q in 201u64..400, b in 2u64..6) {
        let x = BigRational::new(BigInt::from(p), BigInt::from(q));
        let d = extract_digits(&x, &RatioSequence::constant(b).unwrap(), 64).unwrap();
        let e = exception_set(&d, &rat(1, 10), 120, &precision());
        prop_assert!(e.members.iter().all(|k| e.unresolved.binary_search(k).is_err()));
        let norms = norms_upto(&d, 120, &precision());
        for &k in &e.members {
            prop_assert!(norms[k as usize].low >= rat(1, 10));
        }
    }
}
