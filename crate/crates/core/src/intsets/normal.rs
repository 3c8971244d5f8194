//! Closed description of a symbolic set as a finite part, one eventually
//! periodic part and a list of quadratic block pieces.
//!
//! Components may overlap. Every operation either produces an exact normal
//! form or gives up with `None`; it never approximates.

use super::poly::{div_floor, exact_sqrt, Poly};
use super::{IndexRule, SetNode, SymbolicSet};
use num_integer::Integer;
use std::collections::BTreeSet;

const MAX_MODULUS: u64 = 4096;
const MAX_SPLIT: i128 = 32;
const MAX_PIECES: usize = 512;
const MAX_ENUMERATION: i128 = 2_000_000;

/// `{n ≥ from : n mod modulus ∈ residues}` with a nonempty residue list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Periodic {
    pub from: u64,
    pub modulus: u64,
    pub residues: Vec<u64>,
}

impl Periodic {
    fn contains(&self, n: u64) -> bool {
        n >= self.from && self.residues.binary_search(&(n % self.modulus)).is_ok()
    }

    fn is_full(&self) -> bool {
        self.residues.len() as u64 == self.modulus
    }

    /// Asymptotic density `|R| / m`.
    pub fn density(&self) -> (u64, u64) {
        (self.residues.len() as u64, self.modulus)
    }
}

/// Blocks `[l(i), r(i)]` for `i ≥ from` with a positive common leading
/// coefficient and `0 ≤ l(i) ≤ r(i) < l(i+1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub(crate) l: Poly,
    pub(crate) r: Poly,
    pub(crate) from: i128,
}

impl Piece {
    fn new(l: Poly, r: Poly, from: i128) -> Piece {
        debug_assert!(l.a > 0 && l.a == r.a);
        Piece { l, r, from }
    }

    /// Leading coefficient.
    pub fn lead(&self) -> i128 {
        self.l.a
    }

    /// Block length `r(i) − l(i) + 1` as `(slope, constant)`.
    pub fn length(&self) -> (i128, i128) {
        let d = self.r.sub(&self.l).add_const(1);
        (d.b, d.c)
    }

    pub fn left(&self) -> (i128, i128, i128) {
        (self.l.a, self.l.b, self.l.c)
    }

    pub fn right(&self) -> (i128, i128, i128) {
        (self.r.a, self.r.b, self.r.c)
    }

    pub fn from_index(&self) -> i128 {
        self.from
    }

    fn block(&self, i: i128) -> (i128, i128) {
        (self.l.eval(i), self.r.eval(i))
    }

    fn contains(&self, n: u64) -> bool {
        let n = n as i128;
        if self.l.eval(self.from) > n {
            return false;
        }
        let mut step = 1i128;
        while self.l.eval(self.from + step) <= n {
            step *= 2;
        }
        let (mut lo, mut hi) = (self.from, self.from + step);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.l.eval(mid) <= n {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        n <= self.r.eval(lo)
    }

    /// Index substitution `i = t·j + ρ`, one piece per residue `ρ`.
    fn split(&self, t: i128) -> Vec<Piece> {
        (0..t)
            .map(|rho| {
                let from = div_floor(self.from - rho + t - 1, t);
                Piece::new(self.l.compose(t, rho), self.r.compose(t, rho), from)
            })
            .collect()
    }

    /// Drops blocks before index `j`, returning their points in `[0, ∞)`.
    fn advance(&self, j: i128) -> (Piece, Vec<(i128, i128)>) {
        let head = (self.from..j).map(|i| self.block(i)).collect();
        (Piece::new(self.l, self.r, j.max(self.from)), head)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NormalForm {
    pub finite: BTreeSet<u64>,
    pub periodic: Option<Periodic>,
    pub pieces: Vec<Piece>,
}

fn push_points(dst: &mut BTreeSet<u64>, blocks: &[(i128, i128)], keep: impl Fn(u64) -> bool) -> Option<()> {
    let total: i128 = blocks.iter().map(|&(a, b)| (b - a + 1).max(0)).sum();
    if total > MAX_ENUMERATION {
        return None;
    }
    for &(a, b) in blocks {
        for n in a.max(0)..=b {
            if keep(n as u64) {
                dst.insert(n as u64);
            }
        }
    }
    Some(())
}

impl NormalForm {
    pub fn empty() -> Self {
        NormalForm::default()
    }

    fn naturals_from(from: u64) -> Self {
        NormalForm { periodic: Some(Periodic { from, modulus: 1, residues: vec![0] }), ..Default::default() }
    }

    pub fn of(set: &SymbolicSet) -> Option<NormalForm> {
        use SetNode::*;
        match set.node() {
            Empty => Some(Self::empty()),
            Finite(v) => Some(NormalForm { finite: v.iter().copied().collect(), ..Default::default() }),
            Cofinite(e) => Self::of(&SymbolicSet::finite(e.iter().copied())).and_then(|nf| nf.complement()),
            Residue { modulus, residues } => Some(NormalForm {
                periodic: Some(Periodic { from: 0, modulus: *modulus, residues: residues.clone() }),
                ..Default::default()
            }),
            Intervals(iu) => {
                let mut nf = NormalForm::empty();
                for &(a, b) in iu.head() {
                    push_points(&mut nf.finite, &[(a as i128, b as i128)], |_| true)?;
                }
                let (l, r) = (iu.left().poly(), iu.right().poly());
                let start = iu.start() as i128;
                if l.a == 0 {
                    let len = (r.c - l.c + 1) as u64;
                    let m = l.b as u64;
                    let residues: BTreeSet<u64> =
                        (0..len).map(|t| (l.c + t as i128).rem_euclid(m as i128) as u64).collect();
                    nf.periodic = Some(Periodic {
                        from: l.eval(start) as u64,
                        modulus: m,
                        residues: residues.into_iter().collect(),
                    });
                    if nf.periodic.as_ref().is_some_and(|p| p.is_full()) {
                        nf.periodic = Some(Periodic { from: l.eval(start) as u64, modulus: 1, residues: vec![0] });
                    }
                } else {
                    nf.pieces.push(Piece::new(l, r, start));
                }
                Some(nf)
            }
            Prefix { .. } => None,
            Union(a, b) => Self::of(a)?.union(&Self::of(b)?),
            Intersect(a, b) => Self::of(a)?.intersect(&Self::of(b)?),
            Diff(a, b) => Self::of(a)?.intersect(&Self::of(b)?.complement()?),
            Complement(a) => Self::of(a)?.complement(),
            Shift(a, k) => Self::of(a)?.shift(*k),
        }
    }

    /// Back to a set expression; `None` if a generator leaves the `i64` range.
    pub fn to_set(&self) -> Option<SymbolicSet> {
        let mut out = SymbolicSet::finite(self.finite.iter().copied());
        if let Some(p) = &self.periodic {
            let mut set = SymbolicSet::residue(p.modulus, p.residues.iter().copied()).ok()?;
            if p.from > 0 {
                set = set.diff(&SymbolicSet::range(0, p.from - 1));
            }
            out = out.union(&set);
        }
        for piece in &self.pieces {
            let (l, r) = if piece.from < 0 {
                (piece.l.shift_index(piece.from), piece.r.shift_index(piece.from))
            } else {
                (piece.l, piece.r)
            };
            let rule = |p: Poly| -> Option<IndexRule> {
                Some(IndexRule::new(p.a.try_into().ok()?, p.b.try_into().ok()?, p.c.try_into().ok()?))
            };
            let from = piece.from.max(0) as u64;
            let set = SymbolicSet::interval_union(vec![], rule(l)?, rule(r)?, from).ok()?;
            out = out.union(&set);
        }
        Some(out)
    }

    pub fn contains(&self, n: u64) -> bool {
        self.finite.contains(&n)
            || self.periodic.as_ref().is_some_and(|p| p.contains(n))
            || self.pieces.iter().any(|p| p.contains(n))
    }

    pub fn is_finite(&self) -> bool {
        self.periodic.is_none() && self.pieces.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_finite() && self.finite.is_empty()
    }

    /// Infinite part is a single component and the finite part is irrelevant
    /// for asymptotics; used for exact density limits.
    pub fn single_infinite_component(&self) -> bool {
        (self.periodic.is_some() as usize + self.pieces.len()) == 1
    }

    fn check(self) -> Option<Self> {
        (self.pieces.len() <= MAX_PIECES).then_some(self)
    }

    pub fn union(&self, other: &NormalForm) -> Option<NormalForm> {
        let mut out = self.clone();
        out.finite.extend(other.finite.iter().copied());
        out.pieces.extend(other.pieces.iter().cloned());
        out.periodic = match (&self.periodic, &other.periodic) {
            (None, p) | (p, None) => p.clone(),
            (Some(p), Some(q)) => {
                let m = p.modulus.lcm(&q.modulus);
                if m > MAX_MODULUS {
                    return None;
                }
                let from = p.from.max(q.from);
                for n in p.from.min(q.from)..from {
                    if p.contains(n) || q.contains(n) {
                        out.finite.insert(n);
                    }
                }
                let residues: Vec<u64> = (0..m)
                    .filter(|&x| {
                        p.residues.binary_search(&(x % p.modulus)).is_ok()
                            || q.residues.binary_search(&(x % q.modulus)).is_ok()
                    })
                    .collect();
                Some(Periodic { from, modulus: m, residues })
            }
        };
        out.check()
    }

    pub fn intersect(&self, other: &NormalForm) -> Option<NormalForm> {
        let mut out = NormalForm::empty();
        for &n in &self.finite {
            if other.contains(n) {
                out.finite.insert(n);
            }
        }
        for &n in &other.finite {
            if self.contains(n) {
                out.finite.insert(n);
            }
        }
        if let (Some(p), Some(q)) = (&self.periodic, &other.periodic) {
            out = out.union(&periodic_meet(p, q)?)?;
        }
        if let Some(p) = &self.periodic {
            for piece in &other.pieces {
                out = out.union(&periodic_piece_meet(p, piece)?)?;
            }
        }
        if let Some(p) = &other.periodic {
            for piece in &self.pieces {
                out = out.union(&periodic_piece_meet(p, piece)?)?;
            }
        }
        for a in &self.pieces {
            for b in &other.pieces {
                out = out.union(&piece_meet(a, b)?)?;
            }
        }
        out.check()
    }

    pub fn complement(&self) -> Option<NormalForm> {
        let mut out = match self.finite.last() {
            None => Self::naturals_from(0),
            Some(&max) => {
                let mut nf = Self::naturals_from(max + 1);
                nf.finite = (0..=max).filter(|n| !self.finite.contains(n)).collect();
                nf
            }
        };
        if let Some(p) = &self.periodic {
            let mut c = NormalForm { finite: (0..p.from).collect(), ..Default::default() };
            let rest: Vec<u64> = (0..p.modulus).filter(|x| p.residues.binary_search(x).is_err()).collect();
            if !rest.is_empty() {
                c.periodic = Some(Periodic { from: p.from, modulus: p.modulus, residues: rest });
            }
            out = out.intersect(&c)?;
        }
        for piece in &self.pieces {
            out = out.intersect(&piece_complement(piece)?)?;
        }
        Some(out)
    }

    pub fn shift(&self, k: i64) -> Option<NormalForm> {
        let k = k as i128;
        let mut out = NormalForm {
            finite: self
                .finite
                .iter()
                .filter_map(|&x| {
                    let y = x as i128 + k;
                    (y >= 0).then_some(y as u64)
                })
                .collect(),
            ..Default::default()
        };
        if let Some(p) = &self.periodic {
            let m = p.modulus as i128;
            let mut residues: Vec<u64> =
                p.residues.iter().map(|&r| (r as i128 + k).rem_euclid(m) as u64).collect();
            residues.sort_unstable();
            out.periodic = Some(Periodic { from: (p.from as i128 + k).max(0) as u64, modulus: p.modulus, residues });
        }
        for piece in &self.pieces {
            let (l, r) = (piece.l.add_const(k), piece.r.add_const(k));
            let mut j = piece.from;
            while l.eval(j) < 0 {
                j += 1;
            }
            let moved = Piece::new(l, r, piece.from);
            let (kept, head) = moved.advance(j);
            push_points(&mut out.finite, &head, |_| true)?;
            out.pieces.push(kept);
        }
        Some(out)
    }
}

fn periodic_meet(p: &Periodic, q: &Periodic) -> Option<NormalForm> {
    let m = p.modulus.lcm(&q.modulus);
    if m > MAX_MODULUS {
        return None;
    }
    let residues: Vec<u64> = (0..m)
        .filter(|&x| {
            p.residues.binary_search(&(x % p.modulus)).is_ok() && q.residues.binary_search(&(x % q.modulus)).is_ok()
        })
        .collect();
    let mut nf = NormalForm::empty();
    if !residues.is_empty() {
        nf.periodic = Some(Periodic { from: p.from.max(q.from), modulus: m, residues });
    }
    Some(nf)
}

fn periodic_piece_meet(p: &Periodic, piece: &Piece) -> Option<NormalForm> {
    let mut nf = NormalForm::empty();
    let from = p.from as i128;
    let mut candidates = Vec::new();
    if p.is_full() {
        candidates.push(piece.clone());
    } else {
        let len = piece.r.sub(&piece.l);
        if len.a != 0 || len.b != 0 {
            return None;
        }
        let m = p.modulus as i128;
        if m > MAX_SPLIT {
            return None;
        }
        let width = len.c + 1;
        for sub in piece.split(m) {
            let c0 = sub.l.eval(0).rem_euclid(m);
            let mut t = 0;
            while t < width {
                if p.residues.binary_search(&(((c0 + t) % m) as u64)).is_err() {
                    t += 1;
                    continue;
                }
                let t1 = t;
                while t + 1 < width && p.residues.binary_search(&(((c0 + t + 1) % m) as u64)).is_ok() {
                    t += 1;
                }
                candidates.push(Piece::new(sub.l.add_const(t1), sub.l.add_const(t), sub.from));
                t += 1;
            }
        }
    }
    for c in candidates {
        let mut j = c.from;
        while c.l.eval(j) < from {
            j += 1;
        }
        let (kept, head) = c.advance(j);
        push_points(&mut nf.finite, &head, |n| p.contains(n))?;
        nf.pieces.push(kept);
    }
    Some(nf)
}

fn piece_meet(p: &Piece, q: &Piece) -> Option<NormalForm> {
    let g = p.lead().gcd(&q.lead());
    let s = exact_sqrt(p.lead() / g)?;
    let t = exact_sqrt(q.lead() / g)?;
    if s > MAX_SPLIT || t > MAX_SPLIT {
        return None;
    }
    let mut out = NormalForm::empty();
    for a in p.split(t) {
        for b in q.split(s) {
            out = out.union(&aligned_meet(&a, &b)?)?;
        }
    }
    Some(out)
}

/// Two pieces with equal leading coefficient.
fn aligned_meet(p: &Piece, q: &Piece) -> Option<NormalForm> {
    let a2 = 2 * p.lead();
    let lo_gap = |d: i128| q.l.shift_index(d).sub(&p.r);
    let hi_gap = |d: i128| p.l.sub(&q.r.shift_index(d));
    let mut d_hi = div_floor(p.r.b - q.l.b, a2) - 1;
    while lo_gap(d_hi).positive_from(0).is_none() {
        d_hi += 1;
    }
    let mut d_lo = div_floor(p.l.b - q.r.b, a2) + 1;
    while hi_gap(d_lo).positive_from(0).is_none() {
        d_lo -= 1;
    }
    let mut j0 = p.from.max(q.from - d_lo);
    j0 = j0.max(lo_gap(d_hi).positive_from(j0)?);
    j0 = j0.max(hi_gap(d_lo).positive_from(j0)?);
    let mut pieces = Vec::new();
    for d in d_lo + 1..d_hi {
        let (ql, qr) = (q.l.shift_index(d), q.r.shift_index(d));
        let ld = p.l.sub(&ql);
        let (l, jl) = match ld.nonneg_from(j0) {
            Some(j) => (p.l, j),
            None => (ql, ql.sub(&p.l).positive_from(j0)?),
        };
        let rd = qr.sub(&p.r);
        let (r, jr) = match rd.nonneg_from(j0) {
            Some(j) => (p.r, j),
            None => (qr, p.r.sub(&qr).positive_from(j0)?),
        };
        let jj = jl.max(jr);
        if let Some(jn) = r.sub(&l).nonneg_from(jj) {
            pieces.push((Piece::new(l, r, jn), jn));
        }
    }
    let jmax = pieces.iter().map(|&(_, j)| j).max().unwrap_or(j0).max(j0);
    let mut nf = NormalForm::empty();
    let head: Vec<(i128, i128)> = (p.from..jmax).map(|i| p.block(i)).collect();
    push_points(&mut nf.finite, &head, |n| q.contains(n))?;
    for (piece, _) in pieces {
        let (kept, head) = piece.advance(jmax);
        push_points(&mut nf.finite, &head, |_| true)?;
        nf.pieces.push(kept);
    }
    Some(nf)
}

fn piece_complement(p: &Piece) -> Option<NormalForm> {
    let first = p.l.eval(p.from);
    let mut nf = NormalForm { finite: (0..first.max(0) as u64).collect(), ..Default::default() };
    let gl = p.r.add_const(1);
    let gr = p.l.shift_index(1).add_const(-1);
    let gap = gr.sub(&gl).add_const(1);
    if gap.is_zero() {
        return Some(nf);
    }
    let j = gap.add_const(-1).nonneg_from(p.from)?;
    let head: Vec<(i128, i128)> = (p.from..j).map(|i| (gl.eval(i), gr.eval(i))).collect();
    push_points(&mut nf.finite, &head, |_| true)?;
    nf.pieces.push(Piece::new(gl, gr, j));
    Some(nf)
}
