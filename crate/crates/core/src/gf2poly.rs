//! Polynomials over GF(2) and low-weight multiples of a primitive polynomial.
//!
//! Polynomials are stored sparsely as a sorted list of exponents. The
//! polynomials the interleaver search deals with have very few terms but
//! degrees up to the block length, so a dense representation is only used
//! internally while reducing modulo a divisor.
//!
//! Divisibility by a primitive `p(X)` of degree `m` reduces to a question
//! about the cyclic Hamming code of length `n = 2^m - 1` generated by `p`:
//! exponents congruent modulo `n` cancel in pairs, and the remaining
//! exponents, read modulo `n`, must form a codeword.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Polynomial with binary coefficients, kept as its set of exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Gf2Poly {
    exps: Vec<usize>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self { exps: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0)
    }

    pub fn monomial(e: usize) -> Self {
        Self { exps: vec![e] }
    }

    /// Builds a polynomial from exponents; repeated exponents cancel in pairs.
    pub fn from_exponents<I: IntoIterator<Item = usize>>(exps: I) -> Self {
        let mut v: Vec<usize> = exps.into_iter().collect();
        v.sort_unstable();
        let mut out = Vec::with_capacity(v.len());
        let mut k = 0;
        while k < v.len() {
            let mut run = 1;
            while k + run < v.len() && v[k + run] == v[k] {
                run += 1;
            }
            if run % 2 == 1 {
                out.push(v[k]);
            }
            k += run;
        }
        Self { exps: out }
    }

    /// Exponents in increasing order.
    pub fn exponents(&self) -> &[usize] {
        &self.exps
    }

    pub fn weight(&self) -> usize {
        self.exps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.exps.last().copied()
    }

    pub fn coeff(&self, e: usize) -> bool {
        self.exps.binary_search(&e).is_ok()
    }

    /// Sum (symmetric difference of the exponent sets).
    pub fn add(&self, other: &Gf2Poly) -> Gf2Poly {
        let (a, b) = (&self.exps, &other.exps);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Gf2Poly { exps: out }
    }

    /// Multiplication by `X^k`.
    pub fn shift(&self, k: usize) -> Gf2Poly {
        Gf2Poly {
            exps: self.exps.iter().map(|e| e + k).collect(),
        }
    }

    pub fn mul(&self, other: &Gf2Poly) -> Gf2Poly {
        Gf2Poly::from_exponents(
            self.exps
                .iter()
                .flat_map(|a| other.exps.iter().map(move |b| a + b)),
        )
    }

    /// Parses octal tap notation: the most significant bit of the octal
    /// number is the coefficient of `X^0`, so "15" (binary 1101) is
    /// `1 + X + X^3` and "17" is `1 + X + X^2 + X^3`.
    pub fn from_octal(s: &str) -> Result<Gf2Poly> {
        let s = s.trim();
        let value = u64::from_str_radix(s, 8).map_err(|e| Error::PolyParse {
            input: s.to_string(),
            reason: e.to_string(),
        })?;
        if value == 0 {
            return Ok(Gf2Poly::zero());
        }
        let len = 64 - value.leading_zeros() as usize;
        Ok(Gf2Poly::from_exponents(
            (0..len).filter(|&k| value >> (len - 1 - k) & 1 == 1),
        ))
    }

    /// Inverse of [`Gf2Poly::from_octal`]. Requires a nonzero constant term
    /// so the MSB-first reading is unambiguous.
    pub fn to_octal(&self) -> Result<String> {
        let Some(deg) = self.degree() else {
            return Ok("0".to_string());
        };
        if deg > 63 {
            return Err(Error::DegreeUnsupported(deg));
        }
        if !self.coeff(0) {
            return Err(Error::PolyParse {
                input: self.to_string(),
                reason: "octal tap notation needs a nonzero constant term".into(),
            });
        }
        let value = self
            .exps
            .iter()
            .fold(0u64, |acc, &e| acc | 1u64 << (deg - e));
        Ok(format!("{value:o}"))
    }

    /// Dense little-endian bit mask; `None` when the degree exceeds 63.
    pub(crate) fn to_mask(&self) -> Option<u64> {
        match self.degree() {
            Some(d) if d > 63 => None,
            _ => Some(self.exps.iter().fold(0u64, |acc, &e| acc | 1 << e)),
        }
    }

    pub(crate) fn from_mask(mask: u64) -> Gf2Poly {
        Gf2Poly {
            exps: (0..64).filter(|&k| mask >> k & 1 == 1).collect(),
        }
    }
}

impl fmt::Display for Gf2Poly {
    /// Exponent-list form with descending powers, e.g. `x^32+x^16+x^8`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return f.write_str("0");
        }
        for (k, &e) in self.exps.iter().rev().enumerate() {
            if k > 0 {
                f.write_str("+")?;
            }
            match e {
                0 => f.write_str("1")?,
                1 => f.write_str("x")?,
                _ => write!(f, "x^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

impl FromStr for Gf2Poly {
    type Err = Error;

    /// Parses `x^32+x^16+x^8`, `1+x+x^3`, `X^4 + X^39` and `0`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::PolyParse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty input"));
        }
        if compact == "0" {
            return Ok(Gf2Poly::zero());
        }
        let mut exps = Vec::new();
        for term in compact.split('+') {
            let e = match term {
                "1" => 0,
                "x" | "X" => 1,
                t if t.starts_with("x^") || t.starts_with("X^") => {
                    t[2..].parse::<usize>().map_err(|_| bad("bad exponent"))?
                }
                _ => return Err(bad("terms must be 1, x or x^k")),
            };
            exps.push(e);
        }
        Ok(Gf2Poly::from_exponents(exps))
    }
}

/// Carry-less product of two residues reduced modulo `p` (degree `m <= 63`).
fn mulmod(a: u64, b: u64, p: u64, m: usize) -> u64 {
    let mut prod: u128 = 0;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            prod ^= (a as u128) << shift;
        }
        b >>= 1;
        shift += 1;
    }
    reduce128(prod, p, m)
}

fn reduce128(mut v: u128, p: u64, m: usize) -> u64 {
    while v >> m != 0 {
        let top = 127 - v.leading_zeros() as usize;
        v ^= (p as u128) << (top - m);
    }
    v as u64
}

/// `X^e mod p` by square-and-multiply.
fn x_pow_mod(e: u128, p: u64, m: usize) -> u64 {
    let mut result = reduce128(1, p, m);
    let mut base = reduce128(2, p, m);
    let mut e = e;
    while e != 0 {
        if e & 1 == 1 {
            result = mulmod(result, base, p, m);
        }
        base = mulmod(base, base, p, m);
        e >>= 1;
    }
    result
}

fn gcd_mask(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let db = 63 - b.leading_zeros() as usize;
        while a != 0 && 63 - a.leading_zeros() as usize >= db {
            let da = 63 - a.leading_zeros() as usize;
            a ^= b << (da - db);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// Remainder of `f` modulo `p`.
pub fn poly_mod(f: &Gf2Poly, p: &Gf2Poly) -> Result<Gf2Poly> {
    let m = p.degree().ok_or(Error::ZeroDivisor)?;
    if m == 0 {
        return Ok(Gf2Poly::zero());
    }
    if m <= 63 {
        let pm = p.to_mask().expect("degree checked");
        let r = f
            .exponents()
            .iter()
            .fold(0u64, |acc, &e| acc ^ x_pow_mod(e as u128, pm, m));
        return Ok(Gf2Poly::from_mask(r));
    }
    // Long division on a dense bit vector.
    let Some(df) = f.degree() else {
        return Ok(Gf2Poly::zero());
    };
    let words = df / 64 + 1;
    let mut bits = vec![0u64; words];
    for &e in f.exponents() {
        bits[e / 64] |= 1 << (e % 64);
    }
    let mut top = df;
    while top >= m {
        if bits[top / 64] >> (top % 64) & 1 == 1 {
            for &pe in p.exponents() {
                let e = top - m + pe;
                bits[e / 64] ^= 1 << (e % 64);
            }
        }
        top -= 1;
    }
    Ok(Gf2Poly::from_exponents(
        (0..m).filter(|&e| bits[e / 64] >> (e % 64) & 1 == 1),
    ))
}

/// Largest degree [`is_primitive`] can decide.
pub const MAX_PRIMITIVE_DEGREE: usize = 32;

fn prime_factors(mut v: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= v {
        if v.is_multiple_of(q) {
            out.push(q);
            while v.is_multiple_of(q) {
                v /= q;
            }
        }
        q += 1;
    }
    if v > 1 {
        out.push(v);
    }
    out
}

/// True iff `p` is irreducible and `X` has multiplicative order `2^m - 1`
/// modulo `p`. Degrees above [`MAX_PRIMITIVE_DEGREE`] are reported as not
/// primitive.
pub fn is_primitive(p: &Gf2Poly) -> bool {
    let Some(m) = p.degree() else { return false };
    if m == 0 || m > MAX_PRIMITIVE_DEGREE || !p.coeff(0) {
        return false;
    }
    let pm = p.to_mask().expect("degree <= 32");
    // Ben-Or irreducibility: gcd(X^(2^i) - X, p) = 1 for i <= m/2.
    let x = reduce128(2, pm, m);
    let mut xp = x;
    for _ in 1..=m / 2 {
        xp = mulmod(xp, xp, pm, m);
        if gcd_mask(pm, xp ^ x) != 1 {
            return false;
        }
    }
    let order = (1u64 << m) - 1;
    if x_pow_mod(order as u128, pm, m) != 1 {
        return false;
    }
    prime_factors(order)
        .into_iter()
        .all(|q| x_pow_mod((order / q) as u128, pm, m) != 1)
}

/// Largest degree accepted by [`hamming_weight_classes`].
pub const MAX_HAMMING_DEGREE: usize = 16;

/// Codewords of the cyclic Hamming code generated by a primitive polynomial,
/// grouped by weight.
#[derive(Clone, Debug)]
pub struct HammingWeightClasses {
    p: Gf2Poly,
    m: usize,
    n: usize,
    w_max: usize,
    classes: BTreeMap<usize, BTreeSet<Vec<usize>>>,
    lookup: HashSet<Vec<usize>>,
    /// `X^e mod p` for `e` in `0..n`.
    antilog: Vec<u64>,
}

impl HammingWeightClasses {
    pub fn generator(&self) -> &Gf2Poly {
        &self.p
    }

    /// Degree of the generator.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Code length `2^m - 1`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w_max(&self) -> usize {
        self.w_max
    }

    /// Codewords of weight `w`, each as a sorted list of exponents `< n`.
    pub fn class(&self, w: usize) -> Option<&BTreeSet<Vec<usize>>> {
        self.classes.get(&w)
    }

    pub fn class_size(&self, w: usize) -> usize {
        self.classes.get(&w).map_or(0, BTreeSet::len)
    }

    /// Whether the sorted residues (all `< n`, distinct) form a codeword.
    /// Weights beyond `w_max` are decided by evaluating at the root of `p`.
    pub fn is_codeword(&self, residues: &[usize]) -> bool {
        if residues.len() <= self.w_max {
            self.lookup.contains(residues)
        } else {
            residues.iter().fold(0, |acc, &r| acc ^ self.antilog[r]) == 0
        }
    }
}

/// Builds the weight classes `A_0..=A_w_max` of the Hamming code generated by
/// the primitive polynomial `p`.
pub fn hamming_weight_classes(p: &Gf2Poly, w_max: usize) -> Result<HammingWeightClasses> {
    if !is_primitive(p) {
        return Err(Error::NotPrimitive(p.to_string()));
    }
    let m = p.degree().expect("primitive has a degree");
    if m > MAX_HAMMING_DEGREE {
        return Err(Error::DegreeUnsupported(m));
    }
    let n = (1usize << m) - 1;
    if w_max > n {
        return Err(Error::InvalidParameter(format!(
            "w_max={w_max} exceeds code length {n}"
        )));
    }
    let pm = p.to_mask().expect("small degree");
    let mut antilog = Vec::with_capacity(n);
    let mut log = vec![usize::MAX; 1 << m];
    let mut cur = 1u64;
    for e in 0..n {
        antilog.push(cur);
        log[cur as usize] = e;
        cur = mulmod(cur, 2, pm, m);
    }

    let mut classes = BTreeMap::new();
    for w in 0..=w_max {
        let mut set = BTreeSet::new();
        if w == 0 {
            set.insert(Vec::new());
        } else {
            // Choose w-1 exponents; the last one is forced by the syndrome.
            let mut combo: Vec<usize> = (0..w - 1).collect();
            loop {
                let s = combo.iter().fold(0, |acc, &e| acc ^ antilog[e]);
                if s != 0 {
                    let last = log[s as usize];
                    if combo.last().is_none_or(|&l| last > l) {
                        let mut word = combo.clone();
                        word.push(last);
                        set.insert(word);
                    }
                }
                if !next_combination(&mut combo, n) {
                    break;
                }
            }
        }
        classes.insert(w, set);
    }
    let lookup = classes.values().flatten().cloned().collect();
    Ok(HammingWeightClasses {
        p: p.clone(),
        m,
        n,
        w_max,
        classes,
        lookup,
        antilog,
    })
}

/// Advances `combo` (strictly increasing, values `< n`) to the next
/// combination in lexicographic order. Returns false when exhausted.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for t in i + 1..k {
                combo[t] = combo[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Splits `f = g + h` where `g` collects pairs of exponents congruent modulo
/// `n` (matched greedily from the highest exponent down) and `h` keeps at most
/// one exponent per residue class.
pub fn decompose(f: &Gf2Poly, n: usize) -> (Gf2Poly, Gf2Poly) {
    let mut open: BTreeMap<usize, usize> = BTreeMap::new();
    let mut g = Vec::new();
    for &e in f.exponents().iter().rev() {
        match open.remove(&(e % n)) {
            Some(higher) => {
                g.push(e);
                g.push(higher);
            }
            None => {
                open.insert(e % n, e);
            }
        }
    }
    let h = Gf2Poly::from_exponents(open.into_values());
    (Gf2Poly::from_exponents(g), h)
}

/// Divisibility of `f` by the generator of `classes`, decided through the
/// pair/codeword decomposition rather than polynomial division.
pub fn divisible_by_primitive(f: &Gf2Poly, classes: &HammingWeightClasses) -> bool {
    let (_, h) = decompose(f, classes.n);
    let mut residues: Vec<usize> = h.exponents().iter().map(|e| e % classes.n).collect();
    residues.sort_unstable();
    classes.is_codeword(&residues)
}

/// All nonzero polynomials of degree `< len` and weight `<= w_max` divisible
/// by the generator of `classes`, ordered by (weight, exponent tuple).
///
/// Built constructively: the residues that occur an odd number of times must
/// form a codeword, and every other residue class contributes an even number
/// of exponents.
pub fn enumerate_divisible(
    classes: &HammingWeightClasses,
    len: usize,
    w_max: usize,
) -> Result<Vec<Gf2Poly>> {
    let n = classes.n;
    let need = w_max.min(n);
    if classes.w_max < need {
        return Err(Error::ClassesTooSmall {
            have: classes.w_max,
            need,
        });
    }
    // positions[r] = exponents < len congruent to r.
    let positions: Vec<Vec<usize>> = (0..n).map(|r| (r..len).step_by(n).collect()).collect();
    let mut out = Vec::new();
    for j in 0..=need {
        for word in classes.class(j).into_iter().flatten() {
            let odd: Vec<bool> = {
                let mut v = vec![false; n];
                for &r in word {
                    v[r] = true;
                }
                v
            };
            for w in (j..=w_max).step_by(2).filter(|&w| w > 0) {
                let mut counts = vec![0usize; n];
                distribute(&positions, &odd, 0, w, &mut counts, &mut |counts| {
                    expand_counts(&positions, counts, &mut out);
                });
            }
        }
    }
    out.sort_unstable_by(|a, b| {
        a.weight()
            .cmp(&b.weight())
            .then_with(|| a.exps.cmp(&b.exps))
    });
    Ok(out)
}

/// Assigns a count to every residue class (odd for codeword residues, even
/// otherwise, bounded by the available positions) summing to `remaining`.
fn distribute(
    positions: &[Vec<usize>],
    odd: &[bool],
    r: usize,
    remaining: usize,
    counts: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    let n = positions.len();
    if r == n {
        if remaining == 0 {
            emit(counts);
        }
        return;
    }
    let start = usize::from(odd[r]);
    // Residues after r still need at least one exponent each if odd.
    let reserved: usize = odd[r + 1..].iter().filter(|&&b| b).count();
    let mut k = start;
    while k <= positions[r].len() && k + reserved <= remaining {
        counts[r] = k;
        distribute(positions, odd, r + 1, remaining - k, counts, emit);
        k += 2;
    }
    counts[r] = 0;
}

fn expand_counts(positions: &[Vec<usize>], counts: &[usize], out: &mut Vec<Gf2Poly>) {
    let mut chosen = Vec::new();
    expand_rec(positions, counts, 0, &mut chosen, out);
}

fn expand_rec(
    positions: &[Vec<usize>],
    counts: &[usize],
    r: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Gf2Poly>,
) {
    if r == positions.len() {
        out.push(Gf2Poly::from_exponents(chosen.iter().copied()));
        return;
    }
    let k = counts[r];
    if k == 0 {
        expand_rec(positions, counts, r + 1, chosen, out);
        return;
    }
    let avail = &positions[r];
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        let mark = chosen.len();
        chosen.extend(combo.iter().map(|&c| avail[c]));
        expand_rec(positions, counts, r + 1, chosen, out);
        chosen.truncate(mark);
        if !next_combination(&mut combo, avail.len()) {
            break;
        }
    }
}
