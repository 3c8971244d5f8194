use super::*;
use crate::ideals::{rat, IdealSpec};
use crate::intsets::IndexRule;
use proptest::prelude::*;

fn two() -> RatioSequence {
    RatioSequence::constant(2).unwrap()
}

fn three() -> RatioSequence {
    RatioSequence::constant(3).unwrap()
}

fn digits_u64(d: &DigitStream, n: u64) -> Vec<u64> {
    d.digits_upto(n).into_iter().map(|c| c.unwrap().to_u64().unwrap()).collect()
}

fn nowc_set() -> SymbolicSet {
    SymbolicSet::interval_union(vec![], IndexRule::new(4, 0, 0), IndexRule::new(4, 4, 1), 0).unwrap()
}

fn ce() -> DigitStream {
    DigitStream::on_set(&RatioSequence::affine(), SymbolicSet::odds(), ValueRule::Constant(1)).unwrap()
}

fn inv_u(r: &RatioSequence, n: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(r.scale_at(n).unwrap()))
}

#[test]
fn greedy_examples() {
    let d = extract_digits(&rat(5, 8), &two(), 8).unwrap();
    assert_eq!(digits_u64(&d, 5), vec![1, 0, 1, 0, 0]);
    let d = extract_digits(&rat(1, 3), &RatioSequence::affine(), 4).unwrap();
    assert_eq!(digits_u64(&d, 4), vec![0, 2, 0, 0]);
    let d = extract_digits(&rat(0, 1), &three(), 4).unwrap();
    assert_eq!(digits_u64(&d, 4), vec![0, 0, 0, 0]);
    assert!(extract_digits(&rat(1, 1), &two(), 4).is_err());
    assert!(extract_digits(&rat(-1, 3), &two(), 4).is_err());
}

#[test]
fn tail_examples() {
    let aff = RatioSequence::affine();
    let d = extract_digits(&rat(1, 3), &aff, 4).unwrap();
    let t = eval_with_tail(&d, 2).unwrap();
    assert_eq!((t.low, t.high), (rat(1, 3), rat(1, 2)));
    let z = DigitStream::zero(&aff);
    let t = eval_with_tail(&z, 5).unwrap();
    assert_eq!((t.low.clone(), t.high), (rat(0, 1), rat(1, 720)));
    assert_eq!(t.exact, Some(rat(0, 1)));
    // top digits on one block [l, r]
    let (l, r) = (3, 6);
    let d = DigitStream::on_set(&aff, SymbolicSet::range(l, r), ValueRule::BMinus(1)).unwrap();
    let t = eval_with_tail(&d, 1).unwrap();
    assert_eq!(t.exact, Some(inv_u(&aff, l - 1) - inv_u(&aff, r)));
    assert_eq!(flat_block_value(&aff, l, r).unwrap(), inv_u(&aff, l - 1) - inv_u(&aff, r));
}

#[test]
fn norm_examples() {
    let res = rat(1, 1_000_000);
    let prufer = DigitStream::on_set(&three(), SymbolicSet::positives(), ValueRule::Constant(1)).unwrap();
    for k in [0, 7, 50] {
        let n = circle_norm(&prufer, k, &res);
        assert!(n.exact && n.low == rat(1, 2) && n.high == rat(1, 2), "k = {k}");
    }
    assert_eq!(prufer.value(), Some(rat(1, 2)));
    let half = extract_digits(&rat(1, 2), &two(), 1).unwrap();
    let n = circle_norm(&half, 0, &res);
    assert_eq!((n.low, n.high), (rat(1, 2), rat(1, 2)));
    // {u_3 x} = Σ_{odd n > 3} 4!/(n+1)!
    let aff = RatioSequence::affine();
    let oracle: BigRational = (5..60u64)
        .step_by(2)
        .map(|n| BigRational::from(BigInt::from(aff.scale_at(3).unwrap())) * inv_u(&aff, n))
        .sum();
    let n = circle_norm(&ce(), 3, &res);
    assert!(n.resolved && n.width() < res);
    assert!(n.low <= oracle && oracle <= n.high + rat(1, 1_000_000_000));
    assert!((approx(&n.low) - 0.0339).abs() < 1e-4);
}

fn approx(r: &BigRational) -> f64 {
    r.to_f64().unwrap()
}

#[test]
fn support_examples() {
    // b_1 = 2, so the leading digit 1 is also a top digit
    let (s, sb) = ce().supports(100);
    for n in 1..500 {
        assert_eq!(s.contains(n), Some(n % 2 == 1));
    }
    assert_eq!(sb.as_finite(), Some(&[1u64][..]));
    let (s, sb) = DigitStream::zero(&two()).supports(100);
    assert_eq!((s.is_empty(), sb.is_empty()), (Some(true), Some(true)));
    let x = nowc_set();
    let d = DigitStream::on_set(&two(), x.clone(), ValueRule::BMinus(1)).unwrap();
    let (s, sb) = d.supports(100);
    for n in 0..3000 {
        let want = n >= 1 && x.contains(n) == Some(true);
        assert_eq!(s.contains(n), Some(want));
        assert_eq!(sb.contains(n), Some(want));
    }
    // greedy periodic digits get closed-form supports
    let g = extract_digits(&rat(1, 7), &RatioSequence::constant(10).unwrap(), 1).unwrap();
    assert!(g.has_symbolic_supports());
    let (s, _) = g.supports(10);
    assert_eq!(s.contains(6), Some(true));
    assert_eq!(s.contains(600_001), Some(true));
}

#[test]
fn flat_examples() {
    let x = nowc_set();
    let d = DigitStream::on_set(&two(), x, ValueRule::BMinus(1)).unwrap();
    assert_eq!(digits_u64(&d.flat_truncation(), 200), digits_u64(&d, 200));
    assert!(digits_u64(&ce().flat_truncation(), 50).iter().skip(1).all(|&c| c == 0));
    let d = DigitStream::from_digits(&three(), &[2, 1, 2]).unwrap();
    let f = d.flat_truncation();
    assert_eq!(digits_u64(&f, 5), vec![2, 0, 2, 0, 0]);
    assert_eq!(digits_u64(&f.flat_truncation(), 5), vec![2, 0, 2, 0, 0]);
    // greedy sources too
    let g = extract_digits(&rat(5, 9), &three(), 1).unwrap();
    let f = g.flat_truncation();
    assert_eq!(digits_u64(&g, 4), vec![1, 2, 0, 0]);
    assert_eq!(digits_u64(&f, 4), vec![0, 2, 0, 0]);
}

#[test]
fn atomic_examples() {
    let res = SymbolicSet::residue(3, [2]).unwrap();
    let d = DigitStream::on_set(&three(), res.clone(), ValueRule::Constant(1)).unwrap();
    assert!(is_atomic(&d, 500).is(Truth::Holds));
    let d = DigitStream::on_set(&three(), res, ValueRule::Constant(2)).unwrap();
    assert!(is_atomic(&d, 500).is(Truth::Fails));
    let d = DigitStream::on_set(&three(), SymbolicSet::range(5, 6), ValueRule::Constant(1)).unwrap();
    assert!(is_atomic(&d, 500).is(Truth::Fails));
    let d = DigitStream::opaque(&three(), vec![1, 0, 1, 0]).unwrap();
    assert!(is_atomic(&d, 500).is(Truth::Unknown));
}

#[test]
fn atomic_component_examples() {
    let aff = RatioSequence::affine();
    // S_b = ⋃ [4n+2, 4n+3]
    let sb = SymbolicSet::residue(4, [2, 3]).unwrap();
    let d = DigitStream::on_set(&aff, sb, ValueRule::BMinus(1)).unwrap();
    let (left, right) = atomic_components(&d, 500).unwrap();
    let (ls, _) = left.supports(100);
    let (rs, _) = right.supports(100);
    assert_eq!(ls.members_upto(13).unwrap(), vec![1, 5, 9, 13]);
    assert_eq!(rs.members_upto(15).unwrap(), vec![3, 7, 11, 15]);
    assert!(is_atomic(&left, 500).is(Truth::Holds));
    assert!(is_atomic(&right, 500).is(Truth::Holds));
    // x♭ = α(l) − α(r) on prefixes ending at a block end
    for m in [3u64, 7, 11, 19] {
        let f = eval_with_tail(&d.flat_truncation(), m).unwrap().partial;
        let a = eval_with_tail(&left, m).unwrap().partial - eval_with_tail(&right, m).unwrap().partial;
        assert_eq!(f, a);
    }
    let finite = DigitStream::on_set(&aff, SymbolicSet::range(2, 3), ValueRule::BMinus(1)).unwrap();
    assert_eq!(atomic_components(&finite, 500).unwrap_err(), ExpansionError::FiniteFlatSupport);
}

#[test]
fn equivalence_examples() {
    let id = IdealSpec::density_zero();
    let d = ce();
    assert!(digit_equiv(&d, &d, &id, 100).unwrap().is(Truth::Holds));
    // S ∖ S_b = squares, of density zero
    let x = DigitStream::pattern(
        &three(),
        vec![
            Clause::new(SymbolicSet::squares(), ValueRule::Constant(1)),
            Clause::new(SymbolicSet::evens(), ValueRule::BMinus(1)),
        ],
    )
    .unwrap();
    assert!(digit_equiv(&x, &x.flat_truncation(), &id, 100).unwrap().is(Truth::Holds));
    let y = DigitStream::on_set(&three(), SymbolicSet::evens(), ValueRule::BMinus(1)).unwrap();
    let y2 = y.modified(Clause::new(SymbolicSet::squares(), ValueRule::Constant(0))).unwrap();
    assert!(digit_equiv(&y, &y2, &id, 100).unwrap().is(Truth::Holds));
    assert!(digit_equiv(&y, &ce(), &id, 100).is_err());
    let odd = DigitStream::on_set(&three(), SymbolicSet::odds(), ValueRule::Constant(1)).unwrap();
    assert!(digit_equiv(&y, &odd, &id, 100).unwrap().is(Truth::Fails));
}

#[test]
fn construction_errors() {
    assert!(matches!(
        DigitStream::on_set(&two(), SymbolicSet::odds(), ValueRule::Constant(2)),
        Err(ExpansionError::DigitTooLarge { .. })
    ));
    assert_eq!(
        DigitStream::on_set(&two(), SymbolicSet::positives(), ValueRule::BMinus(1)).unwrap_err(),
        ExpansionError::TopTail
    );
    assert!(DigitStream::opaque(&two(), vec![0, 2]).is_err());
}

#[test]
fn modified_greedy_stream() {
    let g = extract_digits(&rat(1, 3), &two(), 1).unwrap();
    let p = g.modified(Clause::new(SymbolicSet::finite([1, 2]), ValueRule::Constant(1))).unwrap();
    assert_eq!(digits_u64(&p, 6), vec![1, 1, 0, 1, 0, 1]);
    let (s, _) = p.supports(10);
    assert_eq!(s.contains(1), Some(true));
    assert_eq!(s.contains(4), Some(true));
}

fn ratio_kinds() -> impl Strategy<Value = RatioSequence> {
    prop_oneof![
        (2u64..8).prop_map(|b| RatioSequence::constant(b).unwrap()),
        Just(RatioSequence::affine()),
        Just(RatioSequence::piecewise(SymbolicSet::odds(), Rule::Const(2), Rule::linear(1, 0)).unwrap()),
        Just(RatioSequence::piecewise(SymbolicSet::squares(), Rule::Const(3), Rule::Pow2).unwrap()),
        Just(
            RatioSequence::new(RatioKind::ExplicitPrefixWithTail {
                prefix: vec![5, 2, 9],
                tail: Box::new(RatioKind::Constant(4)),
            })
            .unwrap()
        ),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn round_trip(q in 1i64..10_000, p in 0i64..10_000, r in ratio_kinds(), n in 1u64..40) {
        let x = rat(p % q, q);
        let d = extract_digits(&x, &r, n).unwrap();
        let t = eval_with_tail(&d, n).unwrap();
        prop_assert!(t.low <= x && x <= t.high);
        prop_assert_eq!(&t.high - &t.low, inv_u(&r, n));
        prop_assert_eq!(t.exact, Some(x));
    }

    #[test]
    fn greedy_digits_are_canonical(q in 1i64..500, p in 0i64..500, r in ratio_kinds()) {
        let x = rat(p % q, q);
        let d = extract_digits(&x, &r, 60).unwrap();
        for n in 1..=60 {
            let c = d.digit(n).unwrap();
            prop_assert!(c < r.ratio_at(n).unwrap());
        }
    }

    #[test]
    fn telescoping(r in ratio_kinds(), l in 1u64..30, len in 0u64..30) {
        let rr = (l + len).min(30);
        let direct: BigRational = (l..=rr)
            .map(|i| BigRational::from(BigInt::from(r.ratio_at(i).unwrap() - 1u32)) * inv_u(&r, i))
            .sum();
        prop_assert_eq!(direct, flat_block_value(&r, l, rr).unwrap());
    }

    #[test]
    fn norm_soundness(b in 2u64..7, m in 1u64..6, res in 0u64..6, c in 1u64..6, k in 0u64..40) {
        prop_assume!(c < b);
        let set = SymbolicSet::residue(m, [res % m]).unwrap();
        prop_assume!(!(c == b - 1 && m == 1));
        let ratio = RatioSequence::constant(b).unwrap();
        let d = DigitStream::on_set(&ratio, set, ValueRule::Constant(c)).unwrap();
        // x = Σ_{n ≥ 1, n ≡ res} c/b^n in closed form
        let first = (1..=m).find(|n| n % m == res % m).unwrap();
        let bq = |e: u64| BigRational::from(BigInt::from(b).pow(e as u32));
        let x = BigRational::from(BigInt::from(c)) / bq(first) / (BigRational::one() - bq(m).recip());
        let s = bq(k) * &x;
        let frac = &s - s.floor();
        let one = BigRational::one();
        let oracle = if frac.clone() * BigInt::from(2) <= one { frac } else { &one - frac };
        let n = circle_norm_with_budget(&d, k, &rat(1, 1_000_000), 512);
        prop_assert!(n.low <= oracle && oracle <= n.high);
        prop_assert!(n.exact);
        // the same stream without the periodic shortcut still encloses the value
        let opaque = DigitStream::opaque(&ratio, digits_u64(&d, k + 60)).unwrap();
        let n = circle_norm_with_budget(&opaque, k, &rat(1, 1_000_000), 512);
        prop_assert!(n.low <= oracle && oracle <= n.high);
        prop_assert!(n.resolved);
    }

    #[test]
    fn complement_sums_to_one(r in ratio_kinds(), m in 2u64..5, res in 0u64..5, n in 1u64..30) {
        let set = SymbolicSet::residue(m, [res % m]).unwrap();
        let d = DigitStream::on_set(&r, set, ValueRule::Constant(1)).unwrap();
        let c = d.complement_stream().unwrap();
        let total = eval_with_tail(&d, n).unwrap().partial + eval_with_tail(&c, n).unwrap().partial;
        prop_assert_eq!(total, BigRational::one() - inv_u(&r, n));
        if let (Some(x), Some(y)) = (d.value(), c.value()) {
            prop_assert_eq!(x + y, BigRational::one());
        }
    }

    #[test]
    fn components_are_atomic(m in 3u64..7, w in 1u64..3, off in 0u64..3) {
        prop_assume!(w < m - 1);
        let residues: Vec<u64> = (0..w).map(|i| (off + i) % m).collect();
        let sb = SymbolicSet::residue(m, residues).unwrap();
        let d = DigitStream::on_set(&RatioSequence::affine(), sb, ValueRule::BMinus(1)).unwrap();
        let (l, r) = atomic_components(&d, 400).unwrap();
        prop_assert!(is_atomic(&l, 400).is(Truth::Holds));
        prop_assert!(is_atomic(&r, 400).is(Truth::Holds));
    }

    #[test]
    fn supports_match_digits(r in ratio_kinds(), m in 1u64..5, res in 0u64..5, v in 0usize..4) {
        let value = [ValueRule::Constant(1), ValueRule::BMinus(1), ValueRule::BMinus(2), ValueRule::FloorHalf][v];
        let set = SymbolicSet::residue(m.max(2), [res % m.max(2)]).unwrap();
        let Ok(d) = DigitStream::on_set(&r, set, value) else { return Ok(()) };
        let (s, sb) = d.supports(200);
        for n in 1..200 {
            let c = d.digit(n).unwrap();
            prop_assert_eq!(s.contains(n), Some(!c.is_zero()));
            prop_assert_eq!(sb.contains(n), Some(c + 1u32 == r.ratio_at(n).unwrap()));
        }
    }
}
