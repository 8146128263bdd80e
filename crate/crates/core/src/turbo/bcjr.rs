//! Exact log-MAP (BCJR) decoding of one RSC constituent code.

use crate::error::{Error, Result};

use super::RscSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct SisoOutput {
    /// Parity-only contribution: independent of the systematic and a-priori
    /// LLR at the same position.
    pub extrinsic: Vec<f64>,
    /// `sys + apriori + extrinsic`
    pub posterior: Vec<f64>,
}

/// `ln(e^a + e^b)` with the exact correction term.
#[inline]
pub(crate) fn max_star(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let d = hi - lo;
    // ln(1 + e^-d) underflows relative to hi for larger d; NaN when both
    // are -inf.
    if d.is_nan() || d > 40.0 {
        hi
    } else {
        hi + (-d).exp().ln_1p()
    }
}

/// Log-MAP decoding from the zero state. `terminated` pins the final state to
/// zero; otherwise all final states are equally likely.
pub fn bcjr_decode(
    spec: &RscSpec,
    sys: &[f64],
    par: &[f64],
    apriori: &[f64],
    terminated: bool,
) -> Result<SisoOutput> {
    let len = sys.len();
    for other in [par.len(), apriori.len()] {
        if other != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: other,
            });
        }
    }
    if sys.iter().chain(par).chain(apriori).any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("LLRs must be finite".into()));
    }
    let t = spec.trellis();
    let ns = t.states;
    let neg = f64::NEG_INFINITY;

    // Branch metric halves per step: systematic/a-priori part for u = 0, 1
    // and parity part for p = 0, 1.
    let gu: Vec<[f64; 2]> = (0..len)
        .map(|k| {
            let x = 0.5 * (sys[k] + apriori[k]);
            [x, -x]
        })
        .collect();
    let gp: Vec<[f64; 2]> = par.iter().map(|&p| [0.5 * p, -0.5 * p]).collect();

    let mut alpha = vec![neg; (len + 1) * ns];
    alpha[0] = 0.0;
    for k in 0..len {
        let (cur, nxt) = alpha[k * ns..(k + 2) * ns].split_at_mut(ns);
        let mut top = neg;
        for (s2, slot) in nxt.iter_mut().enumerate() {
            let [(sa, ua), (sb, ub)] = t.prev[s2];
            let a = cur[sa] + gu[k][ua as usize] + gp[k][t.parity[sa][ua as usize] as usize];
            let b = cur[sb] + gu[k][ub as usize] + gp[k][t.parity[sb][ub as usize] as usize];
            *slot = max_star(a, b);
            top = top.max(*slot);
        }
        for x in nxt.iter_mut() {
            *x -= top;
        }
    }

    let mut beta = vec![neg; (len + 1) * ns];
    if terminated {
        beta[len * ns] = 0.0;
    } else {
        beta[len * ns..].fill(0.0);
    }
    for k in (0..len).rev() {
        let (cur, nxt) = beta[k * ns..(k + 2) * ns].split_at_mut(ns);
        let mut top = neg;
        for (s, slot) in cur.iter_mut().enumerate() {
            let [n0, n1] = t.next[s];
            let [p0, p1] = t.parity[s];
            let a = nxt[n0] + gu[k][0] + gp[k][p0 as usize];
            let b = nxt[n1] + gu[k][1] + gp[k][p1 as usize];
            *slot = max_star(a, b);
            top = top.max(*slot);
        }
        for x in cur.iter_mut() {
            *x -= top;
        }
    }

    let mut extrinsic = Vec::with_capacity(len);
    for k in 0..len {
        let a = &alpha[k * ns..(k + 1) * ns];
        let b = &beta[(k + 1) * ns..(k + 2) * ns];
        let mut num = [neg; 2];
        for s in 0..ns {
            if a[s] == neg {
                continue;
            }
            for u in 0..2 {
                let m = a[s] + gp[k][t.parity[s][u] as usize] + b[t.next[s][u]];
                num[u] = max_star(num[u], m);
            }
        }
        extrinsic.push(num[0] - num[1]);
    }
    let posterior = extrinsic
        .iter()
        .enumerate()
        .map(|(k, e)| sys[k] + apriori[k] + e)
        .collect();
    Ok(SisoOutput {
        extrinsic,
        posterior,
    })
}
