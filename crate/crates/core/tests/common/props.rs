//! Property bodies shared by the proptest suite and the acceptance run.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use turbo_weave::designer::{step1, DesignParams};
use turbo_weave::interleaver::{deterministic, random_interleaver, s_random, Permutation};
use turbo_weave::sim::{simulate, to_csv_string, RunConfig};
use turbo_weave::turbo::{bcjr_decode, rsc_encode, turbo_encode, Rate};
use turbo_weave::RscSpec;

use super::{rsc, Register, G15, H17};

pub fn check_bijection(p: &Permutation) -> Result<(), TestCaseError> {
    let n = p.len();
    let mut seen = vec![false; n];
    for i in 0..n {
        let f = p.apply(i);
        prop_assert!(f < n && !seen[f]);
        seen[f] = true;
        prop_assert_eq!(p.apply_inverse(f), i);
    }
    Ok(())
}

/// Every constructor yields a bijection whose inverse is exact.
pub fn bijectivity(n: usize, seed: u64) -> Result<(), TestCaseError> {
    check_bijection(&random_interleaver(n, seed).unwrap())?;
    let s = ((n / 2) as f64).sqrt().floor().max(1.0) as usize;
    if let Ok(p) = s_random(n, s, seed, 50) {
        check_bijection(&p)?;
    }
    for alpha in 2..=n + 1 {
        if n.is_multiple_of(alpha - 1) && gcd(alpha, n) == 1 {
            check_bijection(&deterministic(n, alpha).unwrap())?;
        }
    }
    if n >= 16 {
        let params = DesignParams::new(n, 2, 1, 2, 5).with_seed(seed);
        check_bijection(&step1(&params).unwrap())?;
    }
    Ok(())
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Encoding commutes with XOR, for the RSC and the whole turbo code.
pub fn linearity(a: &[u8], b: &[u8], seed: u64) -> Result<(), TestCaseError> {
    let spec = RscSpec::default_m3();
    for term in [false, true] {
        let ea = rsc_encode(&spec, a, term);
        let eb = rsc_encode(&spec, b, term);
        let es = rsc_encode(&spec, &xor(a, b), term);
        prop_assert_eq!(es.parity, xor(&ea.parity, &eb.parity));
        prop_assert_eq!(es.tail, xor(&ea.tail, &eb.tail));
    }
    let p = random_interleaver(a.len(), seed).unwrap();
    let ca = turbo_encode(&spec, &p, a, Rate::Third).unwrap();
    let cb = turbo_encode(&spec, &p, b, Rate::Third).unwrap();
    let cs = turbo_encode(&spec, &p, &xor(a, b), Rate::Third).unwrap();
    prop_assert_eq!(cs.parity1, xor(&ca.parity1, &cb.parity1));
    prop_assert_eq!(cs.parity2, xor(&ca.parity2, &cb.parity2));
    Ok(())
}

/// Terminated encoding ends in the zero state and matches the register.
pub fn termination(input: &[u8]) -> Result<(), TestCaseError> {
    let spec = RscSpec::default_m3();
    let out = rsc_encode(&spec, input, true);
    prop_assert_eq!(out.final_state, 0);
    let (par, tail) = rsc(input, true);
    prop_assert_eq!(&out.parity, &par);
    prop_assert_eq!(&out.tail, &tail);
    let mut r = Register::new(&G15, &H17);
    for &u in input.iter().chain(&tail) {
        r.step(u);
    }
    prop_assert!(r.is_zero());
    Ok(())
}

/// The extrinsic output at k ignores the systematic and a-priori LLRs at k.
pub fn extrinsic_purity(
    sys: &[f64],
    par: &[f64],
    apr: &[f64],
    k: usize,
    delta: f64,
    terminated: bool,
) -> Result<(), TestCaseError> {
    let spec = RscSpec::default_m3();
    let base = bcjr_decode(&spec, sys, par, apr, terminated).unwrap();
    let mut s2 = sys.to_vec();
    s2[k] += delta;
    let mut a2 = apr.to_vec();
    a2[k] -= 0.5 * delta;
    let out = bcjr_decode(&spec, &s2, par, &a2, terminated).unwrap();
    let (x, y) = (out.extrinsic[k], base.extrinsic[k]);
    // Bits forced by termination carry infinite extrinsic values.
    prop_assert!(x == y || (x - y).abs() <= 1e-12, "{x} vs {y}");
    Ok(())
}

/// Same configuration gives byte-identical CSV, with 1 or 3 worker threads.
pub fn csv_reproducible(seed: u64, n: usize) -> Result<(), TestCaseError> {
    let p = random_interleaver(n, seed).unwrap();
    let cfg = RunConfig {
        iterations: 3,
        min_frame_errors: 4,
        max_frames: 40,
        seed,
        ..RunConfig::default()
    };
    let grid = [-1.0, 0.5];
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| to_csv_string(&simulate(&p, &cfg, &grid).unwrap()))
    };
    let a = run(1);
    prop_assert_eq!(&a, &run(1));
    prop_assert_eq!(&a, &run(3));
    Ok(())
}
