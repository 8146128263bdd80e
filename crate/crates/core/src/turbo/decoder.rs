use crate::error::{Error, Result};
use crate::interleaver::Permutation;

use super::bcjr::bcjr_decode;
use super::{LlrFrame, RscSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeOptions {
    /// Maximum number of iterations (one iteration runs both decoders).
    pub iterations: usize,
    /// Stop once the hard decisions repeat between consecutive iterations.
    pub early_stop: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            iterations: 18,
            early_stop: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutcome {
    pub bits: Vec<u8>,
    /// Final a-posteriori LLRs of the data bits, in data order.
    pub llr: Vec<f64>,
    pub iterations_run: usize,
}

/// Iterative decoding with a fixed number of iterations.
pub fn turbo_decode(
    spec: &RscSpec,
    perm: &Permutation,
    frame: &LlrFrame,
    iterations: usize,
) -> Result<Vec<u8>> {
    let opts = DecodeOptions {
        iterations,
        early_stop: false,
    };
    Ok(turbo_decode_with(spec, perm, frame, &opts)?.bits)
}

/// Decoder 1 sees the data order (terminated, with tail), decoder 2 the
/// interleaved order (unterminated). Each passes its extrinsic output to the
/// other as a-priori input. The decision LLR is
/// `sys + W1 + deinterleave(W2)` in data order.
pub fn turbo_decode_with(
    spec: &RscSpec,
    perm: &Permutation,
    frame: &LlrFrame,
    opts: &DecodeOptions,
) -> Result<DecodeOutcome> {
    decode(spec, perm, frame, opts, None)
}

/// Simulation helper: additionally stops as soon as the decisions equal
/// `reference` (the transmitted data).
pub fn turbo_decode_until(
    spec: &RscSpec,
    perm: &Permutation,
    frame: &LlrFrame,
    opts: &DecodeOptions,
    reference: &[u8],
) -> Result<DecodeOutcome> {
    if reference.len() != perm.len() {
        return Err(Error::DimensionMismatch {
            expected: perm.len(),
            got: reference.len(),
        });
    }
    decode(spec, perm, frame, opts, Some(reference))
}

fn decode(
    spec: &RscSpec,
    perm: &Permutation,
    frame: &LlrFrame,
    opts: &DecodeOptions,
    reference: Option<&[u8]>,
) -> Result<DecodeOutcome> {
    let n = perm.len();
    let m = spec.memory();
    if opts.iterations == 0 {
        return Err(Error::InvalidParameter(
            "iterations must be at least 1".into(),
        ));
    }
    for (got, expected) in [
        (frame.sys.len(), n + m),
        (frame.par1.len(), n + m),
        (frame.par2.len(), n),
    ] {
        if got != expected {
            return Err(Error::DimensionMismatch { expected, got });
        }
    }

    let sys2 = perm.interleave(&frame.sys[..n]);
    let mut apriori1 = vec![0.0; n + m];
    let mut llr = vec![0.0; n];
    let mut bits = vec![0u8; n];
    let mut prev_bits: Option<Vec<u8>> = None;
    let mut run = 0;

    for _ in 0..opts.iterations {
        run += 1;
        let d1 = bcjr_decode(spec, &frame.sys, &frame.par1, &apriori1, true)?;
        let apriori2 = perm.interleave(&d1.extrinsic[..n]);
        let d2 = bcjr_decode(spec, &sys2, &frame.par2, &apriori2, false)?;
        let w2_deint = perm.deinterleave(&d2.extrinsic);
        apriori1[..n].copy_from_slice(&w2_deint);

        for k in 0..n {
            llr[k] = frame.sys[k] + d1.extrinsic[k] + w2_deint[k];
            bits[k] = u8::from(llr[k] < 0.0);
        }
        if reference == Some(&bits[..]) {
            break;
        }
        if opts.early_stop {
            if prev_bits.as_deref() == Some(&bits[..]) {
                break;
            }
            prev_bits = Some(bits.clone());
        }
    }
    Ok(DecodeOutcome {
        bits,
        llr,
        iterations_run: run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interleaver::random_interleaver;
    use crate::turbo::{turbo_encode, CodeLayout, Rate};

    fn clean_frame(layout: &CodeLayout, bits: &[u8], amp: f64) -> LlrFrame {
        let llrs: Vec<f64> = bits
            .iter()
            .map(|&b| if b == 0 { amp } else { -amp })
            .collect();
        layout.frame_from_llrs(&llrs).unwrap()
    }

    #[test]
    fn noiseless_codeword_decodes_in_one_iteration() {
        let spec = RscSpec::default_m3();
        let p = random_interleaver(64, 1).unwrap();
        let data: Vec<u8> = (0..64).map(|k| ((k * 5 + 1) % 3 == 0) as u8).collect();
        for rate in [Rate::Third, Rate::Half] {
            let layout = CodeLayout::new(64, 3, rate);
            let cw = turbo_encode(&spec, &p, &data, rate).unwrap();
            let frame = clean_frame(&layout, &layout.serialize(&cw), 8.0);
            assert_eq!(turbo_decode(&spec, &p, &frame, 1).unwrap(), data);
        }
    }

    #[test]
    fn decoding_is_deterministic() {
        let spec = RscSpec::default_m3();
        let p = random_interleaver(40, 2).unwrap();
        let layout = CodeLayout::new(40, 3, Rate::Third);
        let llrs: Vec<f64> = (0..layout.transmitted_len())
            .map(|k| ((k * 37 % 11) as f64 - 4.0) * 0.7)
            .collect();
        let frame = layout.frame_from_llrs(&llrs).unwrap();
        let opts = DecodeOptions::default();
        let a = turbo_decode_with(&spec, &p, &frame, &opts).unwrap();
        let b = turbo_decode_with(&spec, &p, &frame, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iterations_run, 18);
    }

    #[test]
    fn early_stop_cuts_iterations_on_clean_input() {
        let spec = RscSpec::default_m3();
        let p = random_interleaver(40, 2).unwrap();
        let layout = CodeLayout::new(40, 3, Rate::Third);
        let cw = turbo_encode(&spec, &p, &[0; 40], Rate::Third).unwrap();
        let frame = clean_frame(&layout, &layout.serialize(&cw), 3.0);
        let opts = DecodeOptions {
            iterations: 18,
            early_stop: true,
        };
        let out = turbo_decode_with(&spec, &p, &frame, &opts).unwrap();
        assert_eq!(out.iterations_run, 2);
        assert!(out.bits.iter().all(|&b| b == 0));
    }

    #[test]
    fn reference_stop_matches_full_run_on_clean_input() {
        let spec = RscSpec::default_m3();
        let p = random_interleaver(40, 5).unwrap();
        let layout = CodeLayout::new(40, 3, Rate::Third);
        let data: Vec<u8> = (0..40).map(|k| (k % 3 == 1) as u8).collect();
        let cw = turbo_encode(&spec, &p, &data, Rate::Third).unwrap();
        let frame = clean_frame(&layout, &layout.serialize(&cw), 2.0);
        let opts = DecodeOptions::default();
        let out = turbo_decode_until(&spec, &p, &frame, &opts, &data).unwrap();
        assert_eq!(out.iterations_run, 1);
        assert_eq!(out.bits, turbo_decode(&spec, &p, &frame, 18).unwrap());
        assert!(turbo_decode_until(&spec, &p, &frame, &opts, &data[1..]).is_err());
    }

    #[test]
    fn rejects_bad_frames() {
        let spec = RscSpec::default_m3();
        let p = random_interleaver(10, 2).unwrap();
        let frame = LlrFrame {
            sys: vec![0.0; 12],
            par1: vec![0.0; 13],
            par2: vec![0.0; 10],
        };
        assert!(turbo_decode(&spec, &p, &frame, 1).is_err());
        let frame = LlrFrame {
            sys: vec![0.0; 13],
            par1: vec![0.0; 13],
            par2: vec![0.0; 10],
        };
        assert!(turbo_decode(&spec, &p, &frame, 0).is_err());
    }
}
