//! Interleaver permutations and their constructors.
//!
//! Convention: bit `i` of the data block is moved to position `forward[i]`
//! of the interleaved block, so `interleaved[forward[i]] = data[i]`. Written
//! as a matrix `P` with `P[i][forward[i]] = 1`, interleaving is the row
//! vector product `d P` and de-interleaving uses `P^T`.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A bijection on `0..n` stored together with its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    /// Validates `forward` as a bijection on `0..forward.len()`.
    pub fn new(forward: Vec<usize>) -> Result<Self> {
        if forward.is_empty() {
            return Err(Error::InvalidPermutation("empty permutation".into()));
        }
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (i, &v) in forward.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {v} of index {i} is out of range for n={n}"
                )));
            }
            if inverse[v] != usize::MAX {
                return Err(Error::InvalidPermutation(format!(
                    "image {v} appears twice (indices {} and {i})",
                    inverse[v]
                )));
            }
            inverse[v] = i;
        }
        Ok(Self { forward, inverse })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            forward: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    /// `π(i)`.
    pub fn apply(&self, i: usize) -> usize {
        self.forward[i]
    }

    /// `π⁻¹(k)`.
    pub fn apply_inverse(&self, k: usize) -> usize {
        self.inverse[k]
    }

    /// The inverse permutation as a value.
    pub fn inverted(&self) -> Permutation {
        Permutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// `out[π(i)] = data[i]`.
    pub fn interleave<T: Copy>(&self, data: &[T]) -> Vec<T> {
        assert_eq!(data.len(), self.len(), "interleave length mismatch");
        self.inverse.iter().map(|&i| data[i]).collect()
    }

    /// Inverse of [`Permutation::interleave`]: `out[i] = data[π(i)]`.
    pub fn deinterleave<T: Copy>(&self, data: &[T]) -> Vec<T> {
        assert_eq!(data.len(), self.len(), "deinterleave length mismatch");
        self.forward.iter().map(|&k| data[k]).collect()
    }

    /// Exchanges the images of `i` and `j`.
    pub fn swap_images(&mut self, i: usize, j: usize) {
        self.forward.swap(i, j);
        self.inverse[self.forward[i]] = i;
        self.inverse[self.forward[j]] = j;
    }

    /// Serialises in the text interleaver format: a header line followed by
    /// one 0-based image per line.
    pub fn to_file_string(&self) -> String {
        let mut s = String::with_capacity(8 * self.len() + 40);
        writeln!(s, "# turbo-weave interleaver N={}", self.len()).unwrap();
        for v in &self.forward {
            writeln!(s, "{v}").unwrap();
        }
        s
    }

    pub fn from_file_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InterleaverFormat("empty file".into()))?;
        let n: usize = header
            .trim()
            .strip_prefix("# turbo-weave interleaver N=")
            .and_then(|rest| rest.trim().parse().ok())
            .ok_or_else(|| Error::InterleaverFormat(format!("bad header `{header}`")))?;
        let mut forward = Vec::with_capacity(n);
        for (k, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v = line.parse().map_err(|_| {
                Error::InterleaverFormat(format!("line {}: `{line}` is not an index", k + 2))
            })?;
            forward.push(v);
        }
        if forward.len() != n {
            return Err(Error::InterleaverFormat(format!(
                "header declares N={n} but {} entries follow",
                forward.len()
            )));
        }
        Permutation::new(forward)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_file_str(&std::fs::read_to_string(path)?)
    }

    pub fn store(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }
}

/// Uniformly random permutation from a seeded shuffle.
pub fn random_interleaver(n: usize, seed: u64) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forward: Vec<usize> = (0..n).collect();
    forward.shuffle(&mut rng);
    Ok(Permutation::new(forward).expect("shuffle of 0..n"))
}

/// Restart budget used by the CLI and the designer when none is given.
pub const DEFAULT_MAX_RESTARTS: usize = 1000;

/// Sequential random selection: position `i` takes a random unused image
/// accepted by `admissible(i, candidate, chosen_so_far)`, which may only look
/// at the last `reach` entries of `chosen_so_far`.
///
/// When no unused image fits, the attempt tries a repair: some leftover image
/// `c` replaces an earlier choice `chosen[k]`, which moves to position `i`,
/// provided positions `k..=min(i, k + reach)` and `i` all stay admissible. If no
/// repair exists the attempt is abandoned and a fresh one starts on the same
/// RNG stream, so output is fixed by the seed.
pub(crate) fn sequential_select<F>(
    n: usize,
    rng: &mut ChaCha8Rng,
    max_restarts: usize,
    reach: usize,
    mut admissible: F,
) -> std::result::Result<Vec<usize>, usize>
where
    F: FnMut(usize, usize, &[usize]) -> bool,
{
    let mut best_prefix = 0;
    for _ in 0..=max_restarts {
        let mut pool: Vec<usize> = (0..n).collect();
        pool.shuffle(rng);
        let mut chosen = Vec::with_capacity(n);
        while chosen.len() < n {
            let i = chosen.len();
            if let Some(k) = pool.iter().position(|&c| admissible(i, c, &chosen)) {
                chosen.push(pool.swap_remove(k));
                // swap_remove disturbs the order; reshuffle the moved element in.
                if k < pool.len() {
                    let t = rng.random_range(k..pool.len());
                    pool.swap(k, t);
                }
            } else if !repair(&mut chosen, &mut pool, rng, reach, &mut admissible) {
                break;
            }
        }
        if chosen.len() == n {
            return Ok(chosen);
        }
        best_prefix = best_prefix.max(chosen.len());
    }
    Err(best_prefix)
}

fn repair<F>(
    chosen: &mut Vec<usize>,
    pool: &mut Vec<usize>,
    rng: &mut ChaCha8Rng,
    reach: usize,
    admissible: &mut F,
) -> bool
where
    F: FnMut(usize, usize, &[usize]) -> bool,
{
    let i = chosen.len();
    let mut slots: Vec<usize> = (0..i).collect();
    slots.shuffle(rng);
    for ci in 0..pool.len() {
        let c = pool[ci];
        for &k in &slots {
            let v = chosen[k];
            chosen[k] = c;
            chosen.push(v);
            let fits = (k..=i.min(k + reach))
                .chain((k + reach < i).then_some(i))
                .all(|j| admissible(j, chosen[j], &chosen[..j]));
            if fits {
                pool.swap_remove(ci);
                return true;
            }
            chosen.pop();
            chosen[k] = v;
        }
    }
    false
}

/// S-random permutation: for `0 < i - j <= s`, `|π(i) - π(j)| > s`.
pub fn s_random(n: usize, s: usize, seed: u64, max_restarts: usize) -> Result<Permutation> {
    if n == 0 || s == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and s >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let admissible = |i: usize, c: usize, chosen: &[usize]| {
        chosen[i.saturating_sub(s)..]
            .iter()
            .all(|&prev| prev.abs_diff(c) > s)
    };
    match sequential_select(n, &mut rng, max_restarts, s, admissible) {
        Ok(forward) => Ok(Permutation::new(forward).expect("selection is a bijection")),
        Err(best_prefix) => Err(Error::SpreadNotReached {
            n,
            s,
            restarts: max_restarts,
            best_prefix,
        }),
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Spread guarantees of the affine interleaver for a given `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffineSpread {
    pub alpha: usize,
    pub s1: usize,
    pub s2: usize,
}

impl AffineSpread {
    /// `S1 = min(alpha, floor(n/(alpha+1)))`, `S2 = floor((alpha-1)/2)`.
    pub fn for_alpha(n: usize, alpha: usize) -> Self {
        Self {
            alpha,
            s1: alpha.min(n / (alpha + 1)),
            s2: (alpha - 1) / 2,
        }
    }
}

fn check_affine(n: usize, alpha: usize) -> Result<()> {
    let fail = |reason: String| Error::AffinePrecondition { n, alpha, reason };
    if n == 0 {
        return Err(fail("n must be at least 1".into()));
    }
    if alpha < 2 {
        return Err(fail("alpha - 1 must be a positive divisor of n".into()));
    }
    if gcd(alpha, n) != 1 {
        return Err(fail(format!("gcd(alpha, n) = {} is not 1", gcd(alpha, n))));
    }
    if !n.is_multiple_of(alpha - 1) {
        return Err(fail(format!("alpha - 1 = {} does not divide n", alpha - 1)));
    }
    Ok(())
}

/// Affine interleaver `π(i) ≡ alpha·i + beta (mod n)` with
/// `beta = floor((alpha-1)/2)`, evaluated on 1-based indices and shifted to
/// 0-based: `π(i) = (alpha·(i+1) + beta - 1) mod n`.
pub fn deterministic(n: usize, alpha: usize) -> Result<Permutation> {
    check_affine(n, alpha)?;
    let beta = (alpha - 1) / 2;
    let a = alpha % n;
    let forward = (0..n)
        .map(|i| (a * ((i + 1) % n) + beta + n - 1) % n)
        .collect();
    Ok(Permutation::new(forward).expect("alpha is invertible mod n"))
}

/// All `alpha` admitted by the affine construction for block length `n`, with
/// their guaranteed spreads, best first (by `s1`, then `s2`, then smaller
/// `alpha`). `s1` never exceeds [`s1_upper_bound`].
pub fn alpha_search(n: usize) -> Vec<AffineSpread> {
    let mut out: Vec<AffineSpread> = (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .map(|d| d + 1)
        .filter(|&alpha| gcd(alpha, n) == 1)
        .map(|alpha| AffineSpread::for_alpha(n, alpha))
        .collect();
    out.sort_by(|a, b| {
        b.s1.cmp(&a.s1)
            .then(b.s2.cmp(&a.s2))
            .then(a.alpha.cmp(&b.alpha))
    });
    out
}

/// No permutation of `0..n` reaches `S1 > sqrt(n)`.
pub fn s1_upper_bound(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Distance used by the spread checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// `|i - j|`
    Linear,
    /// `min(x mod n, n - x mod n)` for `x = i - j`
    Circular,
}

impl Metric {
    pub fn distance(self, i: usize, j: usize, n: usize) -> usize {
        let d = i.abs_diff(j);
        match self {
            Metric::Linear => d,
            Metric::Circular => d.min(n - d),
        }
    }

    fn max_separation(self, n: usize) -> usize {
        match self {
            Metric::Linear => n.saturating_sub(1),
            Metric::Circular => n / 2,
        }
    }
}

/// A failed spread condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `i`, `j` within `s1` of each other whose images are closer than `s1`.
    Spread { i: usize, j: usize },
    /// `dist(i, π(i)) < s2`.
    Displacement { i: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpreadReport {
    pub s1_requested: usize,
    pub s2_requested: usize,
    /// Largest `s` such that every pair within distance `s` maps at least `s`
    /// apart.
    pub s1_achieved: usize,
    /// Minimum displacement `dist(i, π(i))`.
    pub s2_achieved: usize,
    pub violations: Vec<Violation>,
    pub metric: Metric,
}

impl SpreadReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks (a) `0 < dist(i, j) <= s1 ⇒ dist(π(i), π(j)) >= s1` and
/// (b) `dist(i, π(i)) >= s2` over all indices.
pub fn verify_spread(p: &Permutation, s1: usize, s2: usize, metric: Metric) -> SpreadReport {
    let n = p.len();
    let fwd = p.forward();
    let max_d = metric.max_separation(n);
    let mut violations = Vec::new();

    for d in 1..=s1.min(max_d) {
        for i in 0..n {
            let j = match metric {
                Metric::Linear if i + d >= n => break,
                Metric::Linear => i + d,
                Metric::Circular => (i + d) % n,
            };
            // For even n the antipodal pair is visited twice.
            if metric == Metric::Circular && 2 * d == n && j < i {
                continue;
            }
            if metric.distance(fwd[i], fwd[j], n) < s1 {
                violations.push(Violation::Spread {
                    i: i.min(j),
                    j: i.max(j),
                });
            }
        }
    }
    let mut s2_achieved = usize::MAX;
    for (i, &v) in fwd.iter().enumerate() {
        let d = metric.distance(i, v, n);
        s2_achieved = s2_achieved.min(d);
        if d < s2 {
            violations.push(Violation::Displacement { i });
        }
    }

    SpreadReport {
        s1_requested: s1,
        s2_requested: s2,
        s1_achieved: achieved_spread(p, metric),
        s2_achieved,
        violations,
        metric,
    }
}

/// Largest `s` for which condition (a) holds. The running minimum image
/// distance over pairs at distance `<= s` only shrinks as `s` grows, so the
/// scan stops at the first failure.
pub fn achieved_spread(p: &Permutation, metric: Metric) -> usize {
    let n = p.len();
    let fwd = p.forward();
    let mut running = usize::MAX;
    let mut best = 0;
    for d in 1..=metric.max_separation(n) {
        for i in 0..n {
            let j = match metric {
                Metric::Linear if i + d >= n => break,
                Metric::Linear => i + d,
                Metric::Circular => (i + d) % n,
            };
            running = running.min(metric.distance(fwd[i], fwd[j], n));
        }
        if running < d {
            return best;
        }
        best = d;
    }
    best
}

/// Strict S-random property: `0 < i - j <= s ⇒ |π(i) - π(j)| > s`.
pub fn is_s_random(p: &Permutation, s: usize) -> bool {
    let fwd = p.forward();
    (0..fwd.len()).all(|i| {
        fwd[i.saturating_sub(s)..i]
            .iter()
            .all(|&prev| prev.abs_diff(fwd[i]) > s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![]).is_err());
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::new(vec![1, 0]).is_ok());
    }

    #[test]
    fn interleave_convention() {
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        let data = ['a', 'b', 'c'];
        let il = p.interleave(&data);
        assert_eq!(il, vec!['b', 'c', 'a']);
        assert_eq!(il[p.apply(0)], 'a');
        assert_eq!(p.deinterleave(&il), data.to_vec());
    }

    #[test]
    fn swap_keeps_inverse() {
        let mut p = random_interleaver(20, 3).unwrap();
        p.swap_images(2, 17);
        for i in 0..20 {
            assert_eq!(p.apply_inverse(p.apply(i)), i);
        }
    }

    #[test]
    fn random_examples() {
        assert_eq!(random_interleaver(1, 9).unwrap(), Permutation::identity(1));
        let a = random_interleaver(192, 7).unwrap();
        assert_eq!(a, random_interleaver(192, 7).unwrap());
        assert_ne!(a, random_interleaver(192, 8).unwrap());
        assert!(random_interleaver(0, 1).is_err());
    }

    /// Every permutation of 0..n, for exhaustive existence checks.
    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_perms(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn s_random_small_cases_agree_with_exhaustive_search() {
        let exists = |n, s| {
            all_perms(n)
                .into_iter()
                .any(|f| is_s_random(&Permutation::new(f).unwrap(), s))
        };
        assert!(exists(8, 1));
        assert!(!exists(4, 3));

        for seed in 0..20 {
            let p = s_random(8, 1, seed, DEFAULT_MAX_RESTARTS).unwrap();
            assert!(is_s_random(&p, 1));
            assert!(verify_spread(&p, 1, 0, Metric::Linear).passed());
        }
        assert!(matches!(
            s_random(4, 3, 1, 50),
            Err(Error::SpreadNotReached { .. })
        ));
    }

    #[test]
    fn s_random_192_s9() {
        let p = s_random(192, 9, 11, DEFAULT_MAX_RESTARTS).unwrap();
        assert!(is_s_random(&p, 9));
        let r = verify_spread(&p, 9, 0, Metric::Linear);
        assert!(r.passed());
        assert!(r.s1_achieved >= 9);
    }

    #[test]
    fn affine_examples() {
        let p = deterministic(1024, 33).unwrap();
        let sp = AffineSpread::for_alpha(1024, 33);
        assert_eq!((sp.s1, sp.s2), (30, 16));
        assert!(verify_spread(&p, 30, 16, Metric::Circular).passed());

        let p = deterministic(12, 5).unwrap();
        let sp = AffineSpread::for_alpha(12, 5);
        assert_eq!((sp.s1, sp.s2), (2, 2));
        assert!(verify_spread(&p, 2, 2, Metric::Circular).passed());

        let err = deterministic(12, 4).unwrap_err();
        assert!(err.to_string().contains("gcd"), "{err}");
        let err = deterministic(12, 11).unwrap_err();
        assert!(err.to_string().contains("divide"), "{err}");
    }

    #[test]
    fn affine_matches_one_based_formula() {
        // π₁(i) ∈ {1..n} congruent to alpha·i + beta, i in 1..=n.
        let (n, alpha) = (12, 5);
        let beta = 2;
        let p = deterministic(n, alpha).unwrap();
        for i in 1..=n {
            let mut v = (alpha * i + beta) % n;
            if v == 0 {
                v = n;
            }
            assert_eq!(p.apply(i - 1) + 1, v);
        }
    }

    #[test]
    fn verify_spread_examples() {
        let id = Permutation::identity(10);
        let r = verify_spread(&id, 0, 1, Metric::Linear);
        assert_eq!(r.violations.len(), 10);
        assert_eq!(r.s2_achieved, 0);

        let rev = Permutation::new((0..5).rev().collect()).unwrap();
        let r = verify_spread(&rev, 0, 1, Metric::Circular);
        assert_eq!(r.violations, vec![Violation::Displacement { i: 2 }]);
    }

    #[test]
    fn achieved_spread_on_affine() {
        let p = deterministic(1024, 33).unwrap();
        let r = verify_spread(&p, 30, 16, Metric::Circular);
        assert!(r.s1_achieved >= 30);
        assert!(r.s2_achieved >= 16);
        assert!(r.s1_achieved <= s1_upper_bound(1024));
    }

    #[test]
    fn alpha_search_examples() {
        let list = alpha_search(1024);
        assert!(list.contains(&AffineSpread {
            alpha: 33,
            s1: 30,
            s2: 16
        }));
        assert!(list.iter().all(|a| a.s1 <= 32));
        assert!(alpha_search(12).contains(&AffineSpread {
            alpha: 5,
            s1: 2,
            s2: 2
        }));
        assert_eq!(s1_upper_bound(1024), 32);
        assert_eq!(s1_upper_bound(15), 3);
    }

    #[test]
    fn file_round_trip_is_exact() {
        let p = random_interleaver(50, 2).unwrap();
        let text = p.to_file_string();
        assert!(text.starts_with("# turbo-weave interleaver N=50\n"));
        let q = Permutation::from_file_str(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(q.to_file_string(), text);
    }

    #[test]
    fn file_errors() {
        assert!(Permutation::from_file_str("").is_err());
        assert!(Permutation::from_file_str("# other N=2\n0\n1\n").is_err());
        assert!(Permutation::from_file_str("# turbo-weave interleaver N=3\n0\n1\n").is_err());
        assert!(Permutation::from_file_str("# turbo-weave interleaver N=2\n0\n0\n").is_err());
        assert!(Permutation::from_file_str("# turbo-weave interleaver N=2\n0\nx\n").is_err());
    }
}
