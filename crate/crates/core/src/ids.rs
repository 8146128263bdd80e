//! Correlation model between extrinsic information and the data sequence,
//! and the iterative decoding suitability (IDS) scores derived from it.
//!
//! The base matrix is `r1[k1][k2] = a·exp(-c·|k1-k2|)` off the diagonal and
//! zero on it. With `G = I + r1`:
//!
//! - second decoder, interleaver route: `r2 = ½·r1·P·G`
//! - second decoder, de-interleaver route: `r2d = ½·r1·Pᵀ·G`
//! - third decoding step: `r3 = ½·r2·Pᵀ·(I + r2)`
//!
//! Right-multiplying by `P` moves column `i` to column `π(i)`; by `Pᵀ` reads
//! column `π(c)` into column `c`. `P` is never materialised.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interleaver::Permutation;

/// Largest block length accepted by the dense IDS computations.
pub const MAX_IDS_N: usize = 4096;

/// Default amplitude of the exponential correlation model.
pub const DEFAULT_A: f64 = 0.5;
/// Default decay rate of the exponential correlation model.
pub const DEFAULT_C: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrModel {
    pub a: f64,
    pub c: f64,
    pub n: usize,
}

impl CorrModel {
    pub fn new(a: f64, c: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0 && c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "correlation model needs finite a >= 0 and c >= 0, got a={a}, c={c}"
            )));
        }
        if n == 0 || n > MAX_IDS_N {
            return Err(Error::InvalidParameter(format!(
                "IDS block length must be in 1..={MAX_IDS_N}, got {n}"
            )));
        }
        Ok(Self { a, c, n })
    }

    pub fn with_defaults(n: usize) -> Result<Self> {
        Self::new(DEFAULT_A, DEFAULT_C, n)
    }
}

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CorrMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            m.data[k * n + k] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs_diff(&self, other: &CorrMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn plus_identity(&self) -> CorrMatrix {
        let mut m = self.clone();
        for k in 0..self.n {
            m.data[k * self.n + k] += 1.0;
        }
        m
    }

    /// `self · P`: column `i` moves to column `π(i)`.
    fn times_p(&self, p: &Permutation) -> CorrMatrix {
        self.permute_columns(p.inverse())
    }

    /// `self · Pᵀ`: column `c` is read from column `π(c)`.
    fn times_pt(&self, p: &Permutation) -> CorrMatrix {
        self.permute_columns(p.forward())
    }

    /// `out[r][c] = self[r][src[c]]`
    fn permute_columns(&self, src: &[usize]) -> CorrMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for (out, row) in data.chunks_mut(n).zip(self.data.chunks(n)) {
            for (o, &s) in out.iter_mut().zip(src) {
                *o = row[s];
            }
        }
        CorrMatrix { n, data }
    }

    /// `scale · self · rhs`, rows computed independently with a fixed
    /// summation order.
    fn matmul_scaled(&self, rhs: &CorrMatrix, scale: f64) -> CorrMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(r, out)| {
            for (k, &lhs) in self.row(r).iter().enumerate() {
                if lhs == 0.0 {
                    continue;
                }
                for (o, &b) in out.iter_mut().zip(rhs.row(k)) {
                    *o += lhs * b;
                }
            }
            for o in out.iter_mut() {
                *o *= scale;
            }
        });
        CorrMatrix { n, data }
    }
}

/// Base correlation matrix: zero diagonal, `a·exp(-c·|k1-k2|)` elsewhere.
pub fn corr_base(model: &CorrModel) -> CorrMatrix {
    // Toeplitz: one exponential per lag.
    let lag: Vec<f64> = (0..model.n)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                model.a * (-model.c * d as f64).exp()
            }
        })
        .collect();
    CorrMatrix::from_fn(model.n, |r, c| lag[r.abs_diff(c)])
}

fn check_dims(base: &CorrMatrix, p: &Permutation) -> Result<()> {
    if base.dim() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            got: p.len(),
        });
    }
    Ok(())
}

/// `½·base·P·(I + base)`.
pub fn propagate_second(base: &CorrMatrix, p: &Permutation) -> Result<CorrMatrix> {
    check_dims(base, p)?;
    Ok(base.times_p(p).matmul_scaled(&base.plus_identity(), 0.5))
}

/// De-interleaver route: `½·base·Pᵀ·(I + base)`.
pub fn propagate_second_deint(base: &CorrMatrix, p: &Permutation) -> Result<CorrMatrix> {
    check_dims(base, p)?;
    Ok(base.times_pt(p).matmul_scaled(&base.plus_identity(), 0.5))
}

/// Third decoding step: `½·r2·Pᵀ·(I + r2)` with `r2` from [`propagate_second`].
pub fn propagate_third(base: &CorrMatrix, p: &Permutation) -> Result<CorrMatrix> {
    let r2 = propagate_second(base, p)?;
    Ok(third_from_second(&r2, p))
}

fn third_from_second(r2: &CorrMatrix, p: &Permutation) -> CorrMatrix {
    r2.times_pt(p).matmul_scaled(&r2.plus_identity(), 0.5)
}

/// Per-row spread: `V[k] = Σ_j (m[k][j] - mean_k)² / (N-1)` with
/// `mean_k = Σ_j m[k][j] / N`.
pub fn v_statistic(m: &CorrMatrix) -> Result<Vec<f64>> {
    if m.dim() < 2 {
        return Err(Error::InvalidParameter("V statistic needs N >= 2".into()));
    }
    Ok((0..m.dim()).map(|r| row_variance(m.row(r))).collect())
}

fn row_variance(row: &[f64]) -> f64 {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Which matrix accompanies the second-decoder matrix in the squared-power
/// score `ids2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PowerPair {
    /// The third-step matrix `r3`.
    #[default]
    ThirdStep,
    /// The de-interleaver matrix `r2d`.
    Deinterleaver,
}

/// IDS scores of one interleaver; lower is better.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdsScores {
    /// `Σ (V + V') / 2N` over the interleaver and de-interleaver matrices.
    pub ids: f64,
    /// `Σ (V + V_new) / 2N` with the third-step matrix.
    pub ids1: f64,
    /// Mean squared correlation of the two matrices, `/ 2N²`.
    pub ids2: f64,
    /// `(ids1 + ids2) / 2`
    pub ids_new: f64,
}

fn sum_sq(m: &CorrMatrix) -> f64 {
    m.as_slice().iter().map(|x| x * x).sum()
}

fn scores_from(r2: &CorrMatrix, r2d: &CorrMatrix, r3: &CorrMatrix, pair: PowerPair) -> IdsScores {
    let n = r2.dim() as f64;
    let v2: f64 = v_statistic(r2).map(|v| v.iter().sum()).unwrap_or(0.0);
    let v2d: f64 = v_statistic(r2d).map(|v| v.iter().sum()).unwrap_or(0.0);
    let v3: f64 = v_statistic(r3).map(|v| v.iter().sum()).unwrap_or(0.0);
    let partner = match pair {
        PowerPair::ThirdStep => r3,
        PowerPair::Deinterleaver => r2d,
    };
    let ids = (v2 + v2d) / (2.0 * n);
    let ids1 = (v2 + v3) / (2.0 * n);
    let ids2 = (sum_sq(r2) + sum_sq(partner)) / (2.0 * n * n);
    IdsScores {
        ids,
        ids1,
        ids2,
        ids_new: (ids1 + ids2) / 2.0,
    }
}

pub fn ids_scores(model: &CorrModel, p: &Permutation) -> Result<IdsScores> {
    ids_scores_with(model, p, PowerPair::default())
}

pub fn ids_scores_with(model: &CorrModel, p: &Permutation, pair: PowerPair) -> Result<IdsScores> {
    if model.n != p.len() {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            got: p.len(),
        });
    }
    let base = corr_base(model);
    let r2 = propagate_second(&base, p)?;
    let r2d = propagate_second_deint(&base, p)?;
    let r3 = third_from_second(&r2, p);
    Ok(scores_from(&r2, &r2d, &r3, pair))
}

/// Full recompute every this many committed swaps.
const REFRESH_EVERY: usize = 64;

/// Maintains the propagated matrices of a permutation under image swaps.
///
/// A swap of the images of `i` and `j` changes `r2` and `r2d` by rank-one
/// terms and `r3` by three rank-one terms, so candidate scores cost `O(N²)`
/// instead of the `O(N³)` of a fresh evaluation.
#[derive(Clone, Debug)]
pub struct IdsState {
    pair: PowerPair,
    perm: Permutation,
    base: CorrMatrix,
    /// `I + base`
    g: CorrMatrix,
    r2: CorrMatrix,
    r2d: CorrMatrix,
    r3: CorrMatrix,
    scores: IdsScores,
    pending: Option<Pending>,
    commits: usize,
}

#[derive(Clone, Debug)]
struct Pending {
    i: usize,
    j: usize,
    r2: CorrMatrix,
    r2d: CorrMatrix,
    r3: CorrMatrix,
    scores: IdsScores,
}

impl IdsState {
    pub fn new(model: &CorrModel, perm: Permutation, pair: PowerPair) -> Result<Self> {
        if model.n != perm.len() {
            return Err(Error::DimensionMismatch {
                expected: model.n,
                got: perm.len(),
            });
        }
        let base = corr_base(model);
        let g = base.plus_identity();
        let mut state = Self {
            pair,
            perm,
            r2: CorrMatrix::zeros(0),
            r2d: CorrMatrix::zeros(0),
            r3: CorrMatrix::zeros(0),
            base,
            g,
            scores: IdsScores {
                ids: 0.0,
                ids1: 0.0,
                ids2: 0.0,
                ids_new: 0.0,
            },
            pending: None,
            commits: 0,
        };
        state.refresh();
        Ok(state)
    }

    fn refresh(&mut self) {
        self.r2 = self.base.times_p(&self.perm).matmul_scaled(&self.g, 0.5);
        self.r2d = self.base.times_pt(&self.perm).matmul_scaled(&self.g, 0.5);
        self.r3 = third_from_second(&self.r2, &self.perm);
        self.scores = scores_from(&self.r2, &self.r2d, &self.r3, self.pair);
    }

    pub fn scores(&self) -> IdsScores {
        self.scores
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    /// Scores of the permutation with the images of `i` and `j` exchanged.
    /// The candidate is kept until [`IdsState::commit`] or the next trial.
    pub fn try_swap(&mut self, i: usize, j: usize) -> IdsScores {
        let n = self.perm.len();
        let (a, b) = (self.perm.apply(i), self.perm.apply(j));
        let (base, g) = (&self.base, &self.g);

        // r2 += u vᵀ
        let u: Vec<f64> = (0..n)
            .map(|r| 0.5 * (base.get(r, i) - base.get(r, j)))
            .collect();
        let v: Vec<f64> = (0..n).map(|c| g.get(b, c) - g.get(a, c)).collect();
        let r2n = rank1_update(&self.r2, &[(&u, &v)]);

        // r2d += ud vdᵀ
        let ud: Vec<f64> = (0..n)
            .map(|r| 0.5 * (base.get(r, a) - base.get(r, b)))
            .collect();
        let vd: Vec<f64> = (0..n).map(|c| g.get(j, c) - g.get(i, c)).collect();
        let r2dn = rank1_update(&self.r2d, &[(&ud, &vd)]);

        // 2·Δr3 = w ⊗ (H[i] - H[j]) + u ⊗ (ṽᵀ H) + (C' u) ⊗ v, where H = I + r2,
        // C' = r2n·P'ᵀ, w = r2[:, b] - r2[:, a] and ṽ[c] = v[π'(c)].
        let r2 = &self.r2;
        let mut fwd_new = self.perm.forward().to_vec();
        fwd_new.swap(i, j);
        let w: Vec<f64> = (0..n)
            .map(|r| 0.5 * (r2.get(r, b) - r2.get(r, a)))
            .collect();
        let hdiff: Vec<f64> = (0..n)
            .map(|c| {
                let mut x = r2.get(i, c) - r2.get(j, c);
                if c == i {
                    x += 1.0;
                }
                if c == j {
                    x -= 1.0;
                }
                x
            })
            .collect();
        let v_perm: Vec<f64> = fwd_new.iter().map(|&src| v[src]).collect();
        let mut vt_h = v_perm.clone(); // identity part of H
        for (k, &coef) in v_perm.iter().enumerate() {
            if coef != 0.0 {
                for (o, &h) in vt_h.iter_mut().zip(r2.row(k)) {
                    *o += coef * h;
                }
            }
        }
        let half_u: Vec<f64> = u.iter().map(|x| 0.5 * x).collect();
        let half_v: Vec<f64> = v.iter().map(|x| 0.5 * x).collect();
        // C' u = r2n · z with z[π'(c)] = u[c].
        let mut z = vec![0.0; n];
        for (c, &dst) in fwd_new.iter().enumerate() {
            z[dst] = u[c];
        }
        let cu: Vec<f64> = (0..n)
            .map(|r| r2n.row(r).iter().zip(&z).map(|(x, y)| x * y).sum())
            .collect();
        let r3n = rank1_update(&self.r3, &[(&w, &hdiff), (&half_u, &vt_h), (&cu, &half_v)]);

        let scores = scores_from(&r2n, &r2dn, &r3n, self.pair);
        self.pending = Some(Pending {
            i,
            j,
            r2: r2n,
            r2d: r2dn,
            r3: r3n,
            scores,
        });
        scores
    }

    /// Applies the most recent [`IdsState::try_swap`].
    pub fn commit(&mut self) {
        let Some(p) = self.pending.take() else { return };
        self.perm.swap_images(p.i, p.j);
        self.r2 = p.r2;
        self.r2d = p.r2d;
        self.r3 = p.r3;
        self.scores = p.scores;
        self.commits += 1;
        if self.commits.is_multiple_of(REFRESH_EVERY) {
            self.refresh();
        }
    }

    /// Swaps and rescores in one step.
    pub fn apply_swap(&mut self, i: usize, j: usize) -> IdsScores {
        self.try_swap(i, j);
        self.commit();
        self.scores
    }
}

fn rank1_update(m: &CorrMatrix, terms: &[(&Vec<f64>, &Vec<f64>)]) -> CorrMatrix {
    let n = m.dim();
    let mut out = m.clone();
    for (r, row) in out.data.chunks_mut(n).enumerate() {
        for (x, y) in terms {
            let s = x[r];
            if s != 0.0 {
                for (o, &t) in row.iter_mut().zip(y.iter()) {
                    *o += s * t;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interleaver::{random_interleaver, s_random};

    /// Dense permutation matrix with `P[i][π(i)] = 1`.
    fn dense_p(p: &Permutation) -> Vec<Vec<f64>> {
        let n = p.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][p.apply(i)] = 1.0;
        }
        m
    }

    fn to_rows(m: &CorrMatrix) -> Vec<Vec<f64>> {
        (0..m.dim()).map(|r| m.row(r).to_vec()).collect()
    }

    fn mm(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut out = vec![vec![0.0; n]; n];
        for r in 0..n {
            for c in 0..n {
                for k in 0..n {
                    out[r][c] += a[r][k] * b[k][c];
                }
            }
        }
        out
    }

    fn madd(a: &[Vec<f64>], b: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + s * q).collect())
            .collect()
    }

    fn eye(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        (0..n).map(|r| (0..n).map(|c| a[c][r]).collect()).collect()
    }

    fn scale(a: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
        a.iter()
            .map(|r| r.iter().map(|x| x * s).collect())
            .collect()
    }

    fn max_diff(a: &[Vec<f64>], b: &CorrMatrix) -> f64 {
        let mut d: f64 = 0.0;
        for (r, row) in a.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                d = d.max((x - b.get(r, c)).abs());
            }
        }
        d
    }

    fn cyclic_shift(n: usize) -> Permutation {
        Permutation::new((0..n).map(|i| (i + 1) % n).collect()).unwrap()
    }

    #[test]
    fn base_entries() {
        let m = corr_base(&CorrModel::new(1.0, 1.0, 5).unwrap());
        for k in 0..5 {
            assert_eq!(m.get(k, k), 0.0);
        }
        assert!((m.get(0, 1) - 0.367879).abs() < 1e-6);
        let m = corr_base(&CorrModel::new(0.5, 0.2, 12).unwrap());
        assert!((m.get(0, 10) - 0.067668).abs() < 1e-6);
        assert_eq!(m.get(10, 0), m.get(0, 10));
        assert_eq!(m.get(3, 7), m.get(4, 8));
    }

    #[test]
    fn model_validation() {
        assert!(CorrModel::new(-1.0, 0.2, 4).is_err());
        assert!(CorrModel::new(0.5, f64::NAN, 4).is_err());
        assert!(CorrModel::new(0.5, 0.2, 0).is_err());
        assert!(CorrModel::new(0.5, 0.2, MAX_IDS_N + 1).is_err());
    }

    #[test]
    fn second_step_examples() {
        let p = cyclic_shift(4);
        let zero = CorrMatrix::zeros(4);
        assert_eq!(propagate_second(&zero, &p).unwrap(), zero);

        let base = corr_base(&CorrModel::new(1.0, 1.0, 4).unwrap());
        let b = to_rows(&base);
        let id = Permutation::identity(4);
        let expect = scale(&mm(&b, &madd(&eye(4), &b, 1.0)), 0.5);
        assert!(max_diff(&expect, &propagate_second(&base, &id).unwrap()) < 1e-14);

        let pm = dense_p(&p);
        let expect = scale(&mm(&mm(&b, &pm), &madd(&eye(4), &b, 1.0)), 0.5);
        assert!(max_diff(&expect, &propagate_second(&base, &p).unwrap()) < 1e-14);
        let expect = scale(&mm(&mm(&b, &transpose(&pm)), &madd(&eye(4), &b, 1.0)), 0.5);
        assert!(max_diff(&expect, &propagate_second_deint(&base, &p).unwrap()) < 1e-14);

        assert!(matches!(
            propagate_second(&base, &cyclic_shift(5)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn third_step_examples() {
        let id = Permutation::identity(4);
        let zero = CorrMatrix::zeros(4);
        assert_eq!(propagate_third(&zero, &id).unwrap(), zero);

        let base = corr_base(&CorrModel::new(1.0, 1.0, 4).unwrap());
        let r2 = to_rows(&propagate_second(&base, &id).unwrap());
        let expect = scale(&mm(&r2, &madd(&eye(4), &r2, 1.0)), 0.5);
        assert!(max_diff(&expect, &propagate_third(&base, &id).unwrap()) < 1e-14);
    }

    /// ¼ (B + B P B Pᵀ)(I + ½ B P + ½ B P B), all dense.
    fn third_expanded(b: &[Vec<f64>], pm: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = b.len();
        let bp = mm(b, pm);
        let bpb = mm(&bp, b);
        let left = madd(b, &mm(&bpb, &transpose(pm)), 1.0);
        let right = madd(&madd(&eye(n), &bp, 0.5), &bpb, 0.5);
        scale(&mm(&left, &right), 0.25)
    }

    #[test]
    fn third_step_factored_equals_expanded_n6() {
        let model = CorrModel::new(0.7, 0.3, 6).unwrap();
        let base = corr_base(&model);
        let p = random_interleaver(6, 42).unwrap();
        let expanded = third_expanded(&to_rows(&base), &dense_p(&p));
        assert!(max_diff(&expanded, &propagate_third(&base, &p).unwrap()) < 1e-10);
    }

    #[test]
    fn v_statistic_examples() {
        let c = CorrMatrix::from_fn(5, |_, _| 0.3);
        assert!(v_statistic(&c).unwrap().iter().all(|&v| v.abs() < 1e-15));

        let m = CorrMatrix::from_fn(2, |_, c| c as f64);
        assert!((v_statistic(&m).unwrap()[0] - 0.5).abs() < 1e-15);

        // Single spike x in a row of N: two-pass variance.
        let n = 7;
        let x = 1.75;
        let m = CorrMatrix::from_fn(n, |_, c| if c == n - 1 { x } else { 0.0 });
        let mean = x / n as f64;
        let expect = ((n - 1) as f64 * mean * mean + (x - mean) * (x - mean)) / (n - 1) as f64;
        assert!((v_statistic(&m).unwrap()[0] - expect).abs() < 1e-14);

        assert!(v_statistic(&CorrMatrix::zeros(1)).is_err());
    }

    /// Straight-from-formula scores using dense P.
    fn naive_scores(model: &CorrModel, p: &Permutation) -> IdsScores {
        let n = model.n;
        let b: Vec<Vec<f64>> = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        if r == c {
                            0.0
                        } else {
                            model.a * (-model.c * (r as f64 - c as f64).abs()).exp()
                        }
                    })
                    .collect()
            })
            .collect();
        let pm = dense_p(p);
        let g = madd(&eye(n), &b, 1.0);
        let r2 = scale(&mm(&mm(&b, &pm), &g), 0.5);
        let r2d = scale(&mm(&mm(&b, &transpose(&pm)), &g), 0.5);
        let r3 = scale(
            &mm(&mm(&r2, &transpose(&pm)), &madd(&eye(n), &r2, 1.0)),
            0.5,
        );
        let v = |m: &Vec<Vec<f64>>| -> f64 {
            m.iter()
                .map(|row| {
                    let mean = row.iter().sum::<f64>() / n as f64;
                    row.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
                })
                .sum()
        };
        let sq = |m: &Vec<Vec<f64>>| -> f64 { m.iter().flatten().map(|x| x * x).sum() };
        let nf = n as f64;
        let ids = (v(&r2) + v(&r2d)) / (2.0 * nf);
        let ids1 = (v(&r2) + v(&r3)) / (2.0 * nf);
        let ids2 = (sq(&r2) + sq(&r3)) / (2.0 * nf * nf);
        IdsScores {
            ids,
            ids1,
            ids2,
            ids_new: (ids1 + ids2) / 2.0,
        }
    }

    #[test]
    fn scores_match_naive_oracle() {
        let model = CorrModel::new(1.0, 1.0, 8).unwrap();
        for p in [Permutation::identity(8), s_random(8, 1, 3, 100).unwrap()] {
            let got = ids_scores(&model, &p).unwrap();
            let want = naive_scores(&model, &p);
            for (g, w) in [
                (got.ids, want.ids),
                (got.ids1, want.ids1),
                (got.ids2, want.ids2),
                (got.ids_new, want.ids_new),
            ] {
                assert!((g - w).abs() < 1e-10, "{g} vs {w}");
            }
            assert_eq!(got.ids_new, (got.ids1 + got.ids2) / 2.0);
        }
    }

    #[test]
    fn zero_amplitude_gives_zero_scores() {
        let model = CorrModel::new(0.0, 0.2, 16).unwrap();
        let s = ids_scores(&model, &random_interleaver(16, 1).unwrap()).unwrap();
        assert_eq!((s.ids, s.ids1, s.ids2, s.ids_new), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn power_pair_switch() {
        let model = CorrModel::with_defaults(24).unwrap();
        let p = random_interleaver(24, 5).unwrap();
        let a = ids_scores_with(&model, &p, PowerPair::ThirdStep).unwrap();
        let b = ids_scores_with(&model, &p, PowerPair::Deinterleaver).unwrap();
        assert_eq!(a.ids, b.ids);
        assert_eq!(a.ids1, b.ids1);
        assert_ne!(a.ids2, b.ids2);
    }

    #[test]
    fn incremental_swaps_match_full_recompute() {
        let n = 40;
        let model = CorrModel::new(0.5, 0.2, n).unwrap();
        let p = random_interleaver(n, 77).unwrap();
        let mut state = IdsState::new(&model, p.clone(), PowerPair::ThirdStep).unwrap();
        let mut reference = p;
        let swaps = [
            (0, 1),
            (5, 39),
            (12, 13),
            (3, 20),
            (39, 0),
            (7, 8),
            (21, 22),
        ];
        for &(i, j) in &swaps {
            let cand = state.try_swap(i, j);
            let mut trial = reference.clone();
            trial.swap_images(i, j);
            let full = ids_scores(&model, &trial).unwrap();
            for (g, w) in [
                (cand.ids, full.ids),
                (cand.ids1, full.ids1),
                (cand.ids2, full.ids2),
                (cand.ids_new, full.ids_new),
            ] {
                assert!((g - w).abs() < 1e-8, "swap ({i},{j}): {g} vs {w}");
            }
            state.commit();
            reference = trial;
        }
        assert_eq!(state.permutation(), &reference);
        // A rejected trial leaves the state untouched.
        let before = state.scores();
        state.try_swap(2, 9);
        assert_eq!(state.scores(), before);
    }
}
