use crate::error::{Error, Result};
use crate::interleaver::Permutation;

use super::RscSpec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RscOutput {
    /// One parity bit per input bit, plus one per tail bit when terminated.
    pub parity: Vec<u8>,
    pub final_state: usize,
    /// Termination inputs (empty when not terminated).
    pub tail: Vec<u8>,
}

/// Runs the RSC recursion from the zero state. With `terminate`, `m` extra
/// inputs chosen to zero the register input drive the state back to zero and
/// their parities are appended.
pub fn rsc_encode(spec: &RscSpec, input: &[u8], terminate: bool) -> RscOutput {
    let m = spec.memory();
    let t = spec.trellis();
    let mut parity = Vec::with_capacity(input.len() + if terminate { m } else { 0 });
    let mut s = 0;
    for &u in input {
        let u = (u & 1) as usize;
        parity.push(t.parity[s][u]);
        s = t.next[s][u];
    }
    let mut tail = Vec::new();
    if terminate {
        for _ in 0..m {
            let u = t.flush[s];
            tail.push(u);
            parity.push(t.parity[s][u as usize]);
            s = t.next[s][u as usize];
        }
        debug_assert_eq!(s, 0);
    }
    RscOutput {
        parity,
        final_state: s,
        tail,
    }
}

/// Code rate of the transmitted turbo codeword.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rate {
    /// Systematic plus both parity streams.
    Third,
    /// Parity 1 kept at even positions, parity 2 at odd positions; tail
    /// parities always kept.
    Half,
}

impl Rate {
    pub fn parse(s: &str) -> Result<Rate> {
        match s.trim() {
            "1/3" => Ok(Rate::Third),
            "1/2" => Ok(Rate::Half),
            other => Err(Error::InvalidParameter(format!(
                "unsupported rate `{other}` (expected 1/3 or 1/2)"
            ))),
        }
    }

    /// Nominal rate ignoring tail bits.
    pub fn nominal(self) -> f64 {
        match self {
            Rate::Third => 1.0 / 3.0,
            Rate::Half => 0.5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Rate::Third => "1/3",
            Rate::Half => "1/2",
        }
    }

    fn keeps_parity1(self, k: usize, n: usize) -> bool {
        self == Rate::Third || k >= n || k.is_multiple_of(2)
    }

    fn keeps_parity2(self, k: usize) -> bool {
        self == Rate::Third || k % 2 == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurboCodeword {
    pub systematic: Vec<u8>,
    /// Length `N + m`, including the termination parities.
    pub parity1: Vec<u8>,
    /// Length `N`, unterminated.
    pub parity2: Vec<u8>,
    /// Termination inputs of the first encoder.
    pub tail: Vec<u8>,
    pub rate: Rate,
}

impl TurboCodeword {
    /// Hamming weight of the unpunctured codeword (systematic, tail and both
    /// parity streams).
    pub fn weight(&self) -> usize {
        [&self.systematic, &self.tail, &self.parity1, &self.parity2]
            .iter()
            .map(|v| v.iter().filter(|&&b| b == 1).count())
            .sum()
    }
}

pub fn turbo_encode(
    spec: &RscSpec,
    perm: &Permutation,
    data: &[u8],
    rate: Rate,
) -> Result<TurboCodeword> {
    if data.len() != perm.len() {
        return Err(Error::DimensionMismatch {
            expected: perm.len(),
            got: data.len(),
        });
    }
    let first = rsc_encode(spec, data, true);
    let second = rsc_encode(spec, &perm.interleave(data), false);
    Ok(TurboCodeword {
        systematic: data.iter().map(|b| b & 1).collect(),
        parity1: first.parity,
        parity2: second.parity,
        tail: first.tail,
        rate,
    })
}

/// Channel LLRs for one frame, de-punctured (punctured positions are 0).
#[derive(Clone, Debug, PartialEq)]
pub struct LlrFrame {
    /// Systematic LLRs, `N` data bits followed by `m` tail bits.
    pub sys: Vec<f64>,
    /// First-encoder parity LLRs, length `N + m`.
    pub par1: Vec<f64>,
    /// Second-encoder parity LLRs, length `N`.
    pub par2: Vec<f64>,
}

/// Order of bits on the channel: systematic, tail, kept parity-1 bits, kept
/// parity-2 bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeLayout {
    pub n: usize,
    pub m: usize,
    pub rate: Rate,
}

impl CodeLayout {
    pub fn new(n: usize, m: usize, rate: Rate) -> Self {
        Self { n, m, rate }
    }

    /// Number of transmitted bits per frame.
    pub fn transmitted_len(&self) -> usize {
        let p1 = (0..self.n + self.m)
            .filter(|&k| self.rate.keeps_parity1(k, self.n))
            .count();
        let p2 = (0..self.n).filter(|&k| self.rate.keeps_parity2(k)).count();
        self.n + self.m + p1 + p2
    }

    /// Information bits over transmitted bits, tail included.
    pub fn effective_rate(&self) -> f64 {
        self.n as f64 / self.transmitted_len() as f64
    }

    pub fn serialize(&self, cw: &TurboCodeword) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.transmitted_len());
        out.extend_from_slice(&cw.systematic);
        out.extend_from_slice(&cw.tail);
        out.extend(
            cw.parity1
                .iter()
                .enumerate()
                .filter(|&(k, _)| self.rate.keeps_parity1(k, self.n))
                .map(|(_, &b)| b),
        );
        out.extend(
            cw.parity2
                .iter()
                .enumerate()
                .filter(|&(k, _)| self.rate.keeps_parity2(k))
                .map(|(_, &b)| b),
        );
        out
    }

    /// Inverse of [`CodeLayout::serialize`] on LLRs.
    pub fn frame_from_llrs(&self, llrs: &[f64]) -> Result<LlrFrame> {
        if llrs.len() != self.transmitted_len() {
            return Err(Error::DimensionMismatch {
                expected: self.transmitted_len(),
                got: llrs.len(),
            });
        }
        let (n, m) = (self.n, self.m);
        let sys = llrs[..n + m].to_vec();
        let mut it = llrs[n + m..].iter().copied();
        let par1 = (0..n + m)
            .map(|k| {
                if self.rate.keeps_parity1(k, n) {
                    it.next().expect("length checked")
                } else {
                    0.0
                }
            })
            .collect();
        let par2 = (0..n)
            .map(|k| {
                if self.rate.keeps_parity2(k) {
                    it.next().expect("length checked")
                } else {
                    0.0
                }
            })
            .collect();
        Ok(LlrFrame { sys, par1, par2 })
    }
}
