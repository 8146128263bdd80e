//! Two-step S-random interleaver design.
//!
//! Step 1 draws a permutation under a one-sided spread `s1`, a displacement
//! `|i - π(i)| > s2` and constraints keeping the last tail positions of the
//! first encoder away from the end of the second one. Step 2 repairs
//! low-weight codewords by swapping images, accepting only swaps that do not
//! raise `ids_new`.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ids::{CorrModel, IdsScores, IdsState, PowerPair, DEFAULT_A, DEFAULT_C};
use crate::interleaver::{
    sequential_select, verify_spread, Metric, Permutation, SpreadReport, DEFAULT_MAX_RESTARTS,
};
use crate::turbo::distance::{codeword_weight_mapped, SparseEncoder};
use crate::turbo::{distance_search, DistanceReport, RscSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct DesignParams {
    pub n: usize,
    pub s1: usize,
    pub s2: usize,
    pub w_det: usize,
    pub d_min_target: usize,
    pub seed: u64,
    pub max_step2_rounds: usize,
    pub max_restarts: usize,
    /// Correlation model amplitude and decay.
    pub a: f64,
    pub c: f64,
    pub pair: PowerPair,
    pub spec: RscSpec,
}

impl DesignParams {
    pub fn new(n: usize, s1: usize, s2: usize, w_det: usize, d_min_target: usize) -> Self {
        Self {
            n,
            s1,
            s2,
            w_det,
            d_min_target,
            seed: 0,
            max_step2_rounds: 100,
            max_restarts: DEFAULT_MAX_RESTARTS,
            a: DEFAULT_A,
            c: DEFAULT_C,
            pair: PowerPair::default(),
            spec: RscSpec::default_m3(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.s1 < 1 {
            return bad("s1 must be at least 1".into());
        }
        if self.w_det < 2 {
            return bad("w_det must be at least 2".into());
        }
        if self.d_min_target < 1 {
            return bad("d_min target must be at least 1".into());
        }
        if 2 * self.s2 >= self.n {
            return bad(format!("s2 = {} must be below n/2", self.s2));
        }
        if self.n <= 2 * self.spec.memory() {
            return bad(format!(
                "n = {} too small for memory {}",
                self.n,
                self.spec.memory()
            ));
        }
        CorrModel::new(self.a, self.c, self.n)?;
        Ok(())
    }

    fn model(&self) -> Result<CorrModel> {
        CorrModel::new(self.a, self.c, self.n)
    }
}

/// Tail constraints of step 1, 0-based: `π(0) = n-1`, and an index mapped to
/// `n-1-k` for `1 <= k < m` lies in the first half (`2(i+1) < n`).
pub fn satisfies_termination(p: &Permutation, m: usize) -> bool {
    let n = p.len();
    if n == 0 || p.apply(0) != n - 1 {
        return false;
    }
    (1..m.min(n)).all(|k| 2 * (p.apply_inverse(n - 1 - k) + 1) < n)
}

/// Constrained random construction of step 1.
pub fn step1(params: &DesignParams) -> Result<Permutation> {
    params.validate()?;
    let (n, s1, s2, m) = (params.n, params.s1, params.s2, params.spec.memory());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let admissible = |i: usize, c: usize, chosen: &[usize]| {
        if i == 0 {
            return c == n - 1;
        }
        if c == n - 1 || i.abs_diff(c) <= s2 {
            return false;
        }
        if c + m >= n && 2 * (i + 1) >= n {
            return false;
        }
        chosen[i.saturating_sub(s1)..]
            .iter()
            .all(|&prev| prev.abs_diff(c) > s1)
    };
    match sequential_select(n, &mut rng, params.max_restarts, s1, admissible) {
        Ok(forward) => Ok(Permutation::new(forward).expect("selection is a bijection")),
        Err(best_prefix) => Err(Error::SpreadNotReached {
            n,
            s: s1,
            restarts: params.max_restarts,
            best_prefix,
        }),
    }
}

/// One accepted swap of step 2.
#[derive(Clone, Debug, PartialEq)]
pub struct SwapRecord {
    pub round: usize,
    pub i: usize,
    pub j: usize,
    pub ids_before: f64,
    pub ids_after: f64,
    /// Support of the input the swap was meant to fix.
    pub offender: Vec<usize>,
    pub d_before: usize,
    pub d_after: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignTrace {
    pub swaps: Vec<SwapRecord>,
    pub converged: bool,
    /// Distance searches run.
    pub rounds: usize,
    /// Offenders left unfixed because no admissible partner was found.
    pub skipped: usize,
    pub initial: IdsScores,
    pub last: IdsScores,
}

impl DesignTrace {
    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("round,i,j,ids_new_before,ids_new_after,offender,d_before,d_after\n");
        for r in &self.swaps {
            let off: Vec<String> = r.offender.iter().map(usize::to_string).collect();
            writeln!(
                s,
                "{},{},{},{:.12e},{:.12e},{},{},{}",
                r.round,
                r.i,
                r.j,
                r.ids_before,
                r.ids_after,
                off.join(" "),
                r.d_before,
                r.d_after
            )
            .unwrap();
        }
        s
    }
}

/// Swap search of step 2. For each input of weight `<= w_det` with codeword
/// weight `<= d_min_target`, in (input weight, support) order, the images of
/// its first position `i` and `j = i+1, i+2, ...` (wrapping past `n-1` to
/// `0`) are exchanged; the first swap that lifts that input above the target
/// without raising `ids_new` is kept. Offenders without such a partner are
/// skipped and retried after the next search.
pub fn step2(p: Permutation, params: &DesignParams) -> Result<(Permutation, DesignTrace)> {
    params.validate()?;
    if p.len() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: p.len(),
        });
    }
    let n = params.n;
    let target = params.d_min_target;
    let enc = SparseEncoder::new(&params.spec);
    let mut state = IdsState::new(&params.model()?, p, params.pair)?;
    let initial = state.scores();
    let mut swaps = Vec::new();
    let mut skipped = 0;
    let mut converged = false;
    let mut rounds = 0;

    while rounds < params.max_step2_rounds {
        rounds += 1;
        let report = distance_search(&params.spec, state.permutation(), params.w_det, target)?;
        if report.words.is_empty() {
            converged = true;
            break;
        }
        for word in &report.words {
            let fwd = state.permutation().forward().to_vec();
            let d_before = codeword_weight_mapped(&enc, n, &word.support, |x| fwd[x]);
            if d_before > target {
                continue;
            }
            let i = word.support[0];
            let mut fixed = false;
            for j in (i + 1..n).chain(0..i) {
                let d_after = codeword_weight_mapped(&enc, n, &word.support, |x| {
                    if x == i {
                        fwd[j]
                    } else if x == j {
                        fwd[i]
                    } else {
                        fwd[x]
                    }
                });
                if d_after <= target {
                    continue;
                }
                let before = state.scores().ids_new;
                let after = state.try_swap(i, j).ids_new;
                if after <= before {
                    state.commit();
                    swaps.push(SwapRecord {
                        round: rounds,
                        i,
                        j,
                        ids_before: before,
                        ids_after: after,
                        offender: word.support.clone(),
                        d_before,
                        d_after,
                    });
                    fixed = true;
                    break;
                }
            }
            if !fixed {
                skipped += 1;
            }
        }
    }
    if !converged {
        // The budget ran out after a round of swaps; one more look decides.
        let report = distance_search(&params.spec, state.permutation(), params.w_det, target)?;
        converged = report.words.is_empty();
    }
    let last = state.scores();
    let trace = DesignTrace {
        swaps,
        converged,
        rounds,
        skipped,
        initial,
        last,
    };
    Ok((state.permutation().clone(), trace))
}

/// A finished design with its certificates.
#[derive(Clone, Debug)]
pub struct Design {
    pub params: DesignParams,
    pub perm: Permutation,
    pub trace: DesignTrace,
    pub scores: IdsScores,
    /// Distance search at the target on the final permutation.
    pub distance: DistanceReport,
    pub spread: SpreadReport,
    pub termination_ok: bool,
}

impl Design {
    /// `key=value` lines for the sidecar file.
    pub fn metadata(&self) -> String {
        let p = &self.params;
        let d = &self.distance;
        let cert = |x: Option<usize>| match x {
            Some(x) => x.to_string(),
            None => format!(">{}", d.d_cap),
        };
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k}={v}").unwrap();
        kv("n", p.n.to_string());
        kv("s1", p.s1.to_string());
        kv("s2", p.s2.to_string());
        kv("w_det", p.w_det.to_string());
        kv("d_min_target", p.d_min_target.to_string());
        kv("seed", p.seed.to_string());
        kv("encoder", p.spec.label());
        kv("a", p.a.to_string());
        kv("c", p.c.to_string());
        kv("ids", format!("{:.12e}", self.scores.ids));
        kv("ids1", format!("{:.12e}", self.scores.ids1));
        kv("ids2", format!("{:.12e}", self.scores.ids2));
        kv("ids_new", format!("{:.12e}", self.scores.ids_new));
        kv(
            "ids_new_step1",
            format!("{:.12e}", self.trace.initial.ids_new),
        );
        kv("d_min", cert(d.d_min()));
        kv("d_eff", cert(d.effective_free_distance()));
        kv("converged", self.trace.converged.to_string());
        kv("rounds", self.trace.rounds.to_string());
        kv("swaps", self.trace.swaps.len().to_string());
        kv("skipped", self.trace.skipped.to_string());
        kv("s1_achieved", self.spread.s1_achieved.to_string());
        kv("s2_achieved", self.spread.s2_achieved.to_string());
        kv("termination_ok", self.termination_ok.to_string());
        s
    }

    /// Writes the interleaver to `path` and the metadata to `path.meta`.
    pub fn write(&self, path: &Path) -> Result<()> {
        self.perm.store(path)?;
        let mut meta = path.as_os_str().to_owned();
        meta.push(".meta");
        std::fs::write(meta, self.metadata())?;
        Ok(())
    }
}

/// Step 1, then step 2, then the final certificates.
pub fn design(params: &DesignParams) -> Result<Design> {
    let p1 = step1(params)?;
    let (perm, trace) = step2(p1, params)?;
    let scores = crate::ids::ids_scores_with(&params.model()?, &perm, params.pair)?;
    let distance = distance_search(&params.spec, &perm, params.w_det, params.d_min_target)?;
    let spread = verify_spread(&perm, params.s1, params.s2, Metric::Linear);
    let termination_ok = satisfies_termination(&perm, params.spec.memory());
    Ok(Design {
        params: params.clone(),
        perm,
        trace,
        scores,
        distance,
        spread,
        termination_ok,
    })
}
