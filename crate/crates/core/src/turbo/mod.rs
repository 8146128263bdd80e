//! Parallel-concatenated turbo code built from two identical RSC encoders.
//!
//! Only the first encoder is terminated. Bits are `u8` values 0/1; LLRs are
//! `ln P(bit = 0) / P(bit = 1)` with bit 0 sent as +1.

mod bcjr;
mod decoder;
pub(crate) mod distance;
mod encoder;

pub use bcjr::{bcjr_decode, SisoOutput};
pub use decoder::{
    turbo_decode, turbo_decode_until, turbo_decode_with, DecodeOptions, DecodeOutcome,
};
pub use distance::{codeword_weight, distance_search, DistanceReport, LowWeightWord, WeightEntry};
pub use encoder::{rsc_encode, turbo_encode, CodeLayout, LlrFrame, Rate, RscOutput, TurboCodeword};

use crate::error::{Error, Result};
use crate::gf2poly::{is_primitive, Gf2Poly};

/// Largest supported encoder memory.
pub const MAX_MEMORY: usize = 8;

/// Recursive systematic convolutional encoder: register recursion with the
/// feedback polynomial, parity taps from the feedforward polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RscSpec {
    memory: usize,
    feedback: Gf2Poly,
    feedforward: Gf2Poly,
    trellis: Trellis,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Trellis {
    pub states: usize,
    /// `next[s][u]`
    pub next: Vec<[usize; 2]>,
    /// `parity[s][u]`
    pub parity: Vec<[u8; 2]>,
    /// Input that keeps the register input at zero (drives toward state 0).
    pub flush: Vec<u8>,
    /// `prev[s'] = [(s, u); 2]`
    pub prev: Vec<[(usize, u8); 2]>,
}

impl RscSpec {
    pub fn new(feedback: Gf2Poly, feedforward: Gf2Poly) -> Result<Self> {
        let memory = feedback
            .degree()
            .ok_or_else(|| Error::InvalidParameter("feedback polynomial is zero".into()))?;
        if memory == 0 || memory > MAX_MEMORY {
            return Err(Error::InvalidParameter(format!(
                "feedback degree must be in 1..={MAX_MEMORY}, got {memory}"
            )));
        }
        if !feedback.coeff(0) {
            return Err(Error::InvalidParameter(
                "feedback polynomial needs a nonzero constant term".into(),
            ));
        }
        match feedforward.degree() {
            None => {
                return Err(Error::InvalidParameter(
                    "feedforward polynomial is zero".into(),
                ))
            }
            Some(d) if d > memory => {
                return Err(Error::InvalidParameter(format!(
                    "feedforward degree {d} exceeds the memory {memory}"
                )))
            }
            _ => {}
        }
        let trellis = Trellis::build(memory, &feedback, &feedforward);
        Ok(Self {
            memory,
            feedback,
            feedforward,
            trellis,
        })
    }

    /// Octal tap notation, e.g. `("15", "17")`.
    pub fn from_octal(feedback: &str, feedforward: &str) -> Result<Self> {
        Self::new(
            Gf2Poly::from_octal(feedback)?,
            Gf2Poly::from_octal(feedforward)?,
        )
    }

    /// `"15,17"`
    pub fn parse(s: &str) -> Result<Self> {
        let (fb, ff) = s.split_once(',').ok_or_else(|| {
            Error::InvalidParameter(format!("encoder `{s}` is not `feedback,feedforward`"))
        })?;
        Self::from_octal(fb, ff)
    }

    /// The memory-3 `(15, 17)` octal pair.
    pub fn default_m3() -> Self {
        Self::from_octal("15", "17").expect("valid constant")
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn feedback(&self) -> &Gf2Poly {
        &self.feedback
    }

    pub fn feedforward(&self) -> &Gf2Poly {
        &self.feedforward
    }

    pub fn has_primitive_feedback(&self) -> bool {
        is_primitive(&self.feedback)
    }

    pub fn num_states(&self) -> usize {
        self.trellis.states
    }

    /// State and parity bit after feeding `u` in state `s`.
    pub fn step(&self, s: usize, u: u8) -> (usize, u8) {
        let u = usize::from(u & 1);
        (self.trellis.next[s][u], self.trellis.parity[s][u])
    }

    pub(crate) fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    /// Octal form `15,17`.
    pub fn label(&self) -> String {
        format!(
            "{},{}",
            self.feedback.to_octal().unwrap_or_default(),
            self.feedforward.to_octal().unwrap_or_default()
        )
    }
}

impl Trellis {
    fn build(m: usize, fb: &Gf2Poly, ff: &Gf2Poly) -> Self {
        // Register bit i-1 holds a_{k-i}.
        let fb_mask = (1..=m)
            .filter(|&i| fb.coeff(i))
            .fold(0usize, |acc, i| acc | 1 << (i - 1));
        let ff_mask = (1..=m)
            .filter(|&i| ff.coeff(i))
            .fold(0usize, |acc, i| acc | 1 << (i - 1));
        let h0 = u8::from(ff.coeff(0));
        let states = 1 << m;
        let mask = states - 1;
        let mut next = Vec::with_capacity(states);
        let mut parity = Vec::with_capacity(states);
        let mut flush = Vec::with_capacity(states);
        let mut prev = vec![[(0usize, 0u8); 2]; states];
        let mut seen = vec![0usize; states];
        for s in 0..states {
            let fbk = ((s & fb_mask).count_ones() & 1) as u8;
            let ffk = ((s & ff_mask).count_ones() & 1) as u8;
            let mut nx = [0; 2];
            let mut py = [0; 2];
            for u in 0..2u8 {
                let a = u ^ fbk;
                nx[u as usize] = ((s << 1) | a as usize) & mask;
                py[u as usize] = (h0 & a) ^ ffk;
                let t = nx[u as usize];
                prev[t][seen[t]] = (s, u);
                seen[t] += 1;
            }
            next.push(nx);
            parity.push(py);
            flush.push(fbk);
        }
        Self {
            states,
            next,
            parity,
            flush,
            prev,
        }
    }
}
