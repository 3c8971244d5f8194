//! Integer polynomials of degree at most two, evaluated over `i128`.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Index rule `i ↦ a·i² + b·i + c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexRule {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl IndexRule {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        IndexRule { a, b, c }
    }

    pub const fn affine(b: i64, c: i64) -> Self {
        IndexRule { a: 0, b, c }
    }

    pub fn eval(&self, i: u64) -> i128 {
        self.poly().eval(i as i128)
    }

    pub(crate) fn poly(&self) -> Poly {
        Poly::new(self.a as i128, self.b as i128, self.c as i128)
    }

    /// Strictly increasing on all of ℕ.
    pub fn is_increasing(&self) -> bool {
        self.a >= 0 && (self.a as i128 + self.b as i128) > 0
    }
}

impl fmt::Display for IndexRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly().render("n", f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Poly {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl Poly {
    pub const fn new(a: i128, b: i128, c: i128) -> Self {
        Poly { a, b, c }
    }

    pub fn eval(&self, i: i128) -> i128 {
        (self.a * i + self.b) * i + self.c
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        Poly::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }

    pub fn add_const(&self, k: i128) -> Poly {
        Poly::new(self.a, self.b, self.c + k)
    }

    /// `j ↦ p(t·j + r)`.
    pub fn compose(&self, t: i128, r: i128) -> Poly {
        Poly::new(
            self.a * t * t,
            2 * self.a * t * r + self.b * t,
            self.a * r * r + self.b * r + self.c,
        )
    }

    /// `j ↦ p(j + d)`.
    pub fn shift_index(&self, d: i128) -> Poly {
        self.compose(1, d)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0
    }

    /// Bound beyond which the sign equals the sign of the leading coefficient.
    fn root_bound(&self) -> i128 {
        let (lead, rest) = if self.a != 0 {
            (self.a.abs(), self.b.abs().max(self.c.abs()))
        } else if self.b != 0 {
            (self.b.abs(), self.c.abs())
        } else {
            return 0;
        };
        1 + rest / lead + 1
    }

    fn lead_sign(&self) -> i128 {
        if self.a != 0 {
            self.a.signum()
        } else if self.b != 0 {
            self.b.signum()
        } else {
            self.c.signum()
        }
    }

    /// Smallest `j0 ≥ from` with `p(j) > 0` for every `j ≥ j0`, if `p` is eventually positive.
    pub fn positive_from(&self, from: i128) -> Option<i128> {
        if self.lead_sign() <= 0 {
            return None;
        }
        let mut j = self.root_bound().max(from);
        while j > from && self.eval(j - 1) > 0 {
            j -= 1;
        }
        Some(j)
    }

    /// Smallest `j0 ≥ from` with `p(j) ≥ 0` for every `j ≥ j0`, if `p` is eventually nonnegative.
    pub fn nonneg_from(&self, from: i128) -> Option<i128> {
        if self.is_zero() {
            return Some(from);
        }
        self.add_const(1).positive_from(from)
    }

    /// `p(j) ≥ 0` for every `j ≥ from`.
    pub fn nonneg_on(&self, from: i128) -> bool {
        self.nonneg_from(from) == Some(from)
    }

    /// First `j ≥ from` with `p(j) < 0`, if any.
    pub fn first_negative(&self, from: i128) -> Option<i128> {
        match self.nonneg_from(from) {
            Some(j0) => (from..j0).find(|&j| self.eval(j) < 0),
            None => {
                let bound = self.root_bound().max(from) + 1;
                (from..=bound).find(|&j| self.eval(j) < 0)
            }
        }
    }

    /// `Σ_{i=s}^{e} p(i)` for `s ≤ e`.
    pub fn range_sum(&self, s: i128, e: i128) -> i128 {
        if e < s {
            return 0;
        }
        let s1 = |n: i128| n * (n + 1) / 2;
        let s2 = |n: i128| n * (n + 1) * (2 * n + 1) / 6;
        // prefix sums anchored at zero, extended to negative arguments
        let g2 = |n: i128| if n < 0 { -s2(-n - 1) } else { s2(n) };
        let g1 = |n: i128| if n < 0 { s1(-n - 1) } else { s1(n) };
        let sq_sum = g2(e) - g2(s - 1);
        let lin_sum = g1(e) - g1(s - 1);
        self.a * sq_sum + self.b * lin_sum + self.c * (e - s + 1)
    }

    pub fn render(&self, var: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let mut term = |coef: i128, mono: &str| {
            if coef == 0 {
                return;
            }
            let neg = coef < 0;
            let mag = coef.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if mag != 1 || mono.is_empty() {
                out.push_str(&mag.to_string());
            }
            out.push_str(mono);
        };
        let sq = format!("{var}²");
        term(self.a, &sq);
        term(self.b, var);
        term(self.c, "");
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

/// Floor division for `i128`.
pub(crate) fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Integer square root of a nonnegative value.
pub(crate) fn isqrt(n: i128) -> i128 {
    if n < 2 {
        return n.max(0);
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub(crate) fn exact_sqrt(n: i128) -> Option<i128> {
    let r = isqrt(n);
    (n >= 0 && r * r == n).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_are_tight() {
        let p = Poly::new(1, -10, 0);
        assert_eq!(p.positive_from(0), Some(11));
        assert_eq!(p.nonneg_from(0), Some(10));
        assert_eq!(Poly::new(0, 0, 0).nonneg_from(3), Some(3));
        assert_eq!(Poly::new(0, -1, 100).positive_from(0), None);
        assert_eq!(p.first_negative(0), Some(1));
    }

    #[test]
    fn range_sum_matches_loop() {
        let p = Poly::new(3, -2, 7);
        for s in -5..5 {
            for e in s..12 {
                let direct: i128 = (s..=e).map(|i| p.eval(i)).sum();
                assert_eq!(p.range_sum(s, e), direct, "{s}..{e}");
            }
        }
    }

    #[test]
    fn compose_and_render() {
        let p = Poly::new(1, 1, 1);
        let q = p.compose(2, 1);
        for j in 0..10 {
            assert_eq!(q.eval(j), p.eval(2 * j + 1));
        }
        assert_eq!(IndexRule::new(1, 1, 1).to_string(), "n² + n + 1");
        assert_eq!(IndexRule::new(4, 0, 0).to_string(), "4n²");
        assert_eq!(div_floor(-7, 2), -4);
        assert_eq!(isqrt(99), 9);
    }
}
