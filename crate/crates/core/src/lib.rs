//! Turbo-code interleaver design toolkit.
//!
//! - [`gf2poly`]: GF(2) polynomials and low-weight multiples of a primitive
//!   polynomial.
//! - [`interleaver`]: permutations, S-random and affine constructions, spread
//!   checks, the text interleaver file format.
//! - [`ids`]: exponential correlation model and the iterative decoding
//!   suitability scores.
//! - [`turbo`]: RSC and turbo encoders, log-MAP decoding, low-weight
//!   codeword search.
//! - [`designer`]: the two-step S-random design.
//! - [`sim`]: AWGN Monte-Carlo BER harness and result emitters.

pub mod designer;
pub mod error;
pub mod gf2poly;
pub mod ids;
pub mod interleaver;
pub mod sim;
pub mod turbo;

pub use error::{Error, Result};
pub use gf2poly::Gf2Poly;
pub use ids::{CorrModel, IdsScores};
pub use interleaver::{Metric, Permutation, SpreadReport};
pub use turbo::{DistanceReport, RscSpec};
