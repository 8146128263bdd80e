//! Search for low-weight turbo codewords produced by low-weight inputs.
//!
//! Any input splits uniquely at the points where the first encoder returns to
//! the zero state: a sequence of closed error events, each divisible by the
//! feedback polynomial, optionally followed by one event still open at the
//! block end and closed by the termination tail. Closed events are taken from
//! the divisible-polynomial enumeration; open ones from a sparse search near
//! the block end. Both are bounded by the parity weight an encoder must emit
//! while its state is nonzero, which grows by a fixed amount per period of
//! the zero-input cycle.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gf2poly::{enumerate_divisible, hamming_weight_classes};
use crate::interleaver::Permutation;

use super::RscSpec;

/// Zero-input dynamics of an encoder, tabulated over one full period so a
/// run of `r` zeros costs O(1).
#[derive(Clone, Debug)]
pub(crate) struct SparseEncoder {
    spec: RscSpec,
    period: usize,
    /// `run_weight[s][r]` for `r < period`.
    run_weight: Vec<Vec<usize>>,
    run_state: Vec<Vec<usize>>,
    cycle_weight: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct SparseResult {
    pub parity_weight: usize,
    pub final_state: usize,
    /// Tail inputs plus tail parities, zero when not terminated.
    pub tail_weight: usize,
    /// Whether the state was nonzero after every input one except possibly
    /// the last.
    pub stays_open: bool,
}

impl SparseEncoder {
    pub fn new(spec: &RscSpec) -> Self {
        let t = spec.trellis();
        let ns = t.states;
        let zero_step = |s: usize| t.next[s][0];
        // Period of the zero-input map: it permutes the states.
        let mut period = 1;
        'search: loop {
            for s in 0..ns {
                let mut x = s;
                for _ in 0..period {
                    x = zero_step(x);
                }
                if x != s {
                    period += 1;
                    continue 'search;
                }
            }
            break;
        }
        let mut run_weight = vec![vec![0; period]; ns];
        let mut run_state = vec![vec![0; period]; ns];
        let mut cycle_weight = vec![0; ns];
        for s in 0..ns {
            let (mut x, mut w) = (s, 0);
            for r in 0..period {
                run_weight[s][r] = w;
                run_state[s][r] = x;
                w += t.parity[x][0] as usize;
                x = zero_step(x);
            }
            cycle_weight[s] = w;
        }
        Self {
            spec: spec.clone(),
            period,
            run_weight,
            run_state,
            cycle_weight,
        }
    }

    #[cfg(test)]
    pub fn period(&self) -> usize {
        self.period
    }

    /// Smallest parity weight of one full zero-input period from a nonzero
    /// state.
    pub fn min_cycle_weight(&self) -> usize {
        self.cycle_weight[1..].iter().copied().min().unwrap_or(0)
    }

    /// (parity weight, end state) of `r` zero inputs from state `s`.
    #[inline]
    pub fn zero_run(&self, s: usize, r: usize) -> (usize, usize) {
        let (q, rem) = (r / self.period, r % self.period);
        (
            q * self.cycle_weight[s] + self.run_weight[s][rem],
            self.run_state[s][rem],
        )
    }

    /// Encodes the input with ones at `ones` (increasing, all `< len`).
    pub fn encode(&self, ones: &[usize], len: usize, terminate: bool) -> SparseResult {
        let t = self.spec.trellis();
        let (mut s, mut pos, mut w) = (0, 0, 0);
        let mut stays_open = true;
        for (k, &p) in ones.iter().enumerate() {
            let (rw, rs) = self.zero_run(s, p - pos);
            w += rw;
            w += t.parity[rs][1] as usize;
            s = t.next[rs][1];
            pos = p + 1;
            if s == 0 && k + 1 < ones.len() {
                stays_open = false;
            }
        }
        let (rw, rs) = self.zero_run(s, len - pos);
        w += rw;
        s = rs;
        let mut tail_weight = 0;
        if terminate {
            for _ in 0..self.spec.memory() {
                let u = t.flush[s];
                tail_weight += u as usize + t.parity[s][u as usize] as usize;
                s = t.next[s][u as usize];
            }
        }
        SparseResult {
            parity_weight: w,
            final_state: s,
            tail_weight,
            stays_open,
        }
    }

    /// Longest stretch of zeros split into at most `runs` runs whose parity
    /// can stay within `budget` from nonzero states.
    fn max_zero_span(&self, budget: usize, runs: usize) -> usize {
        let c = self.min_cycle_weight();
        (budget / c + 1) * self.period + runs * (self.period - 1)
    }
}

/// Codeword weight (systematic, tail, both parities) of the input with ones
/// at `support` (increasing).
pub fn codeword_weight(spec: &RscSpec, perm: &Permutation, support: &[usize]) -> usize {
    let enc = SparseEncoder::new(spec);
    codeword_weight_with(&enc, perm, support)
}

pub(crate) fn codeword_weight_with(
    enc: &SparseEncoder,
    perm: &Permutation,
    support: &[usize],
) -> usize {
    codeword_weight_mapped(enc, perm.len(), support, |i| perm.apply(i))
}

/// As [`codeword_weight`], with the interleaver given as a map.
pub(crate) fn codeword_weight_mapped(
    enc: &SparseEncoder,
    n: usize,
    support: &[usize],
    map: impl Fn(usize) -> usize,
) -> usize {
    let first = enc.encode(support, n, true);
    let mut il: Vec<usize> = support.iter().map(|&i| map(i)).collect();
    il.sort_unstable();
    let second = enc.encode(&il, n, false);
    support.len() + first.parity_weight + first.tail_weight + second.parity_weight
}

/// An input of weight `<= w_det` whose codeword weight is `<= d_cap`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LowWeightWord {
    pub input_weight: usize,
    /// Positions of the input ones, increasing.
    pub support: Vec<usize>,
    pub codeword_weight: usize,
}

/// Lightest codeword found for one input weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightEntry {
    pub input_weight: usize,
    pub distance: usize,
    pub support: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceReport {
    pub n: usize,
    pub w_det: usize,
    pub d_cap: usize,
    /// Input weights with at least one codeword of weight `<= d_cap`.
    pub per_weight: Vec<WeightEntry>,
    /// All such inputs, ordered by (input weight, support).
    pub words: Vec<LowWeightWord>,
}

impl DistanceReport {
    /// Minimum codeword weight over nonzero inputs of weight `<= w_det`, or
    /// `None` when every such codeword is heavier than `d_cap`.
    pub fn d_min(&self) -> Option<usize> {
        self.per_weight.iter().map(|e| e.distance).min()
    }

    /// Minimum over weight-2 inputs only.
    pub fn effective_free_distance(&self) -> Option<usize> {
        self.entry(2).map(|e| e.distance)
    }

    pub fn entry(&self, w: usize) -> Option<&WeightEntry> {
        self.per_weight.iter().find(|e| e.input_weight == w)
    }

    /// Inputs with codeword weight `<= d`.
    pub fn offenders(&self, d: usize) -> impl Iterator<Item = &LowWeightWord> {
        self.words.iter().filter(move |w| w.codeword_weight <= d)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let show = |d: Option<usize>| match d {
            Some(d) => d.to_string(),
            None => format!("> {}", self.d_cap),
        };
        writeln!(
            s,
            "N = {}, w_det = {}, d_cap = {}",
            self.n, self.w_det, self.d_cap
        )
        .unwrap();
        writeln!(s, "d_min = {}", show(self.d_min())).unwrap();
        writeln!(
            s,
            "d_eff (weight 2) = {}",
            show(self.effective_free_distance())
        )
        .unwrap();
        for w in 1..=self.w_det {
            match self.entry(w) {
                Some(e) => writeln!(s, "  w={w}: d_w = {} at {:?}", e.distance, e.support),
                None => writeln!(s, "  w={w}: d_w > {}", self.d_cap),
            }
            .unwrap();
        }
        writeln!(
            s,
            "{} input(s) with codeword weight <= {}",
            self.words.len(),
            self.d_cap
        )
        .unwrap();
        s
    }

    /// `input_weight,codeword_weight,support` with the support as
    /// space-separated positions.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("input_weight,codeword_weight,support\n");
        for w in &self.words {
            let sup: Vec<String> = w.support.iter().map(usize::to_string).collect();
            writeln!(
                s,
                "{},{},{}",
                w.input_weight,
                w.codeword_weight,
                sup.join(" ")
            )
            .unwrap();
        }
        s
    }
}

/// Closed event shape anchored at position 0.
#[derive(Clone, Debug)]
struct Event {
    ones: Vec<usize>,
    /// Systematic plus parity weight of the first encoder.
    cost: usize,
}

impl Event {
    fn span(&self) -> usize {
        *self.ones.last().expect("nonempty") + 1
    }
}

/// Every input of weight `1..=w_det` whose turbo codeword weighs at most
/// `d_cap`, with per-weight minima.
pub fn distance_search(
    spec: &RscSpec,
    perm: &Permutation,
    w_det: usize,
    d_cap: usize,
) -> Result<DistanceReport> {
    if w_det < 1 {
        return Err(Error::InvalidParameter("w_det must be at least 1".into()));
    }
    if !spec.has_primitive_feedback() {
        return Err(Error::NotPrimitive(spec.feedback().to_string()));
    }
    let n = perm.len();
    let enc = SparseEncoder::new(spec);
    if enc.min_cycle_weight() == 0 {
        return Err(Error::InvalidParameter(
            "encoder emits no parity on its zero-input cycle".into(),
        ));
    }

    // Closed events from the divisible polynomials.
    let mut closed = Vec::new();
    if w_det >= 2 && d_cap >= 2 {
        let budget = d_cap - 2;
        let span = (enc.max_zero_span(budget, w_det - 1) + w_det).min(n);
        let classes = hamming_weight_classes(spec.feedback(), w_det.min((1 << spec.memory()) - 1))?;
        for f in enumerate_divisible(&classes, span, w_det)? {
            let ones = f.exponents();
            if ones[0] != 0 {
                continue;
            }
            let r = enc.encode(ones, span, false);
            let cost = ones.len() + r.parity_weight;
            if r.stays_open && r.final_state == 0 && cost <= d_cap {
                closed.push(Event {
                    ones: ones.to_vec(),
                    cost,
                });
            }
        }
    }
    closed.sort_by_key(|e| e.cost);

    // Events still open at the block end, absolute positions.
    let mut open = Vec::new();
    let reach = (enc.max_zero_span(d_cap, w_det) + w_det).min(n);
    for start in n - reach..n {
        open_events(&enc, n, start, w_det, d_cap, &mut open);
    }
    open.sort_by_key(|e| e.cost);

    let mut search = Composer {
        enc: &enc,
        perm,
        n,
        w_det,
        d_cap,
        closed: &closed,
        open: &open,
        support: Vec::new(),
        found: Vec::new(),
    };
    search.extend(0, 0);

    let mut words = search.found;
    words.sort();
    let mut per_weight: Vec<WeightEntry> = Vec::new();
    for w in &words {
        match per_weight
            .iter_mut()
            .find(|e| e.input_weight == w.input_weight)
        {
            Some(e) if e.distance <= w.codeword_weight => {}
            Some(e) => {
                e.distance = w.codeword_weight;
                e.support = w.support.clone();
            }
            None => per_weight.push(WeightEntry {
                input_weight: w.input_weight,
                distance: w.codeword_weight,
                support: w.support.clone(),
            }),
        }
    }
    Ok(DistanceReport {
        n,
        w_det,
        d_cap,
        per_weight,
        words,
    })
}

/// Open events starting with a one at `start`: the state never returns to
/// zero before the block end, where the termination tail closes it.
fn open_events(
    enc: &SparseEncoder,
    n: usize,
    start: usize,
    w_det: usize,
    d_cap: usize,
    out: &mut Vec<Event>,
) {
    let t = enc.spec.trellis();
    let s = t.next[0][1];
    let w = 1 + t.parity[0][1] as usize;
    let mut ones = vec![start];
    open_rec(enc, n, start + 1, s, w, w_det, d_cap, &mut ones, out);
}

#[allow(clippy::too_many_arguments)]
fn open_rec(
    enc: &SparseEncoder,
    n: usize,
    pos: usize,
    state: usize,
    cost: usize,
    w_det: usize,
    d_cap: usize,
    ones: &mut Vec<usize>,
    out: &mut Vec<Event>,
) {
    let t = enc.spec.trellis();
    let c = enc.min_cycle_weight();
    // Finish here: zeros to the end, then the tail.
    let (rw, rs) = enc.zero_run(state, n - pos);
    if rs != 0 {
        let mut s = rs;
        let mut total = cost + rw;
        for _ in 0..enc.spec.memory() {
            let u = t.flush[s];
            total += u as usize + t.parity[s][u as usize] as usize;
            s = t.next[s][u as usize];
        }
        if total <= d_cap {
            out.push(Event {
                ones: ones.clone(),
                cost: total,
            });
        }
    }
    if ones.len() == w_det {
        return;
    }
    for q in pos..n {
        let gap = q - pos;
        if cost + 1 + (gap / enc.period) * c > d_cap {
            break;
        }
        let (rw, rs) = enc.zero_run(state, gap);
        let s = t.next[rs][1];
        if s == 0 {
            continue;
        }
        let next_cost = cost + rw + 1 + t.parity[rs][1] as usize;
        if next_cost > d_cap {
            continue;
        }
        ones.push(q);
        open_rec(enc, n, q + 1, s, next_cost, w_det, d_cap, ones, out);
        ones.pop();
    }
}

struct Composer<'a> {
    enc: &'a SparseEncoder,
    perm: &'a Permutation,
    n: usize,
    w_det: usize,
    d_cap: usize,
    closed: &'a [Event],
    open: &'a [Event],
    support: Vec<usize>,
    found: Vec<LowWeightWord>,
}

impl Composer<'_> {
    /// Appends events starting at or after `from`; `cost` is the first-encoder
    /// weight (systematic included) of the current support.
    fn extend(&mut self, from: usize, cost: usize) {
        let used = self.support.len();
        for ev in self.open {
            if ev.cost + cost > self.d_cap {
                break;
            }
            if ev.ones[0] < from || ev.ones.len() + used > self.w_det {
                continue;
            }
            let mark = self.support.len();
            self.support.extend_from_slice(&ev.ones);
            self.check(cost + ev.cost);
            self.support.truncate(mark);
        }
        for k in 0..self.closed.len() {
            let ev = &self.closed[k];
            if ev.cost + cost > self.d_cap {
                break;
            }
            if ev.ones.len() + used > self.w_det || from + ev.span() > self.n {
                continue;
            }
            for offset in from..=self.n - ev.span() {
                let mark = self.support.len();
                self.support.extend(ev.ones.iter().map(|&o| o + offset));
                self.check(cost + ev.cost);
                self.extend(offset + ev.span(), cost + ev.cost);
                self.support.truncate(mark);
            }
        }
    }

    fn check(&mut self, first_cost: usize) {
        let budget = self.d_cap - first_cost;
        let mut il: Vec<usize> = self.support.iter().map(|&i| self.perm.apply(i)).collect();
        il.sort_unstable();
        let second = self.enc.encode(&il, self.n, false);
        if second.parity_weight <= budget {
            self.found.push(LowWeightWord {
                input_weight: self.support.len(),
                support: self.support.clone(),
                codeword_weight: first_cost + second.parity_weight,
            });
        }
    }
}
