//! Fixtures shared by the benchmarks under `benches/`.

use num_bigint::BigInt;
use num_rational::BigRational;
use torsion_core::{catalog, extract_digits, DigitStream, RatioSequence};

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Greedy digits of `p/q` under the constant ratio `b`.
pub fn greedy(p: i64, q: i64, b: u64) -> DigitStream {
    extract_digits(&rat(p, q), &RatioSequence::constant(b).unwrap(), 256).unwrap()
}

pub fn nowc() -> DigitStream {
    catalog::nowc_stream()
}
