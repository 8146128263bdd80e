//! Reference implementations written straight from the definitions, sharing
//! no code with the library beyond the permutation convention
//! `interleaved[forward[i]] = data[i]`.
#![allow(dead_code)]

pub mod props;

/// (15, 17) octal: feedback 1+X+X³, feedforward 1+X+X²+X³, coefficient of
/// X^i at index i.
pub const G15: [u8; 4] = [1, 1, 0, 1];
pub const H17: [u8; 4] = [1, 1, 1, 1];

/// Shift register holding a_{k-1} .. a_{k-m}.
#[derive(Clone, Debug)]
pub struct Register {
    g: Vec<u8>,
    h: Vec<u8>,
    hist: Vec<u8>,
}

impl Register {
    pub fn new(g: &[u8], h: &[u8]) -> Self {
        Self {
            g: g.to_vec(),
            h: h.to_vec(),
            hist: vec![0; g.len() - 1],
        }
    }

    pub fn m(&self) -> usize {
        self.hist.len()
    }

    fn feedback(&self) -> u8 {
        (1..=self.m()).fold(0, |acc, i| acc ^ (self.g[i] & self.hist[i - 1]))
    }

    /// Feeds `u`, returns the parity bit.
    pub fn step(&mut self, u: u8) -> u8 {
        let a = u ^ self.feedback();
        let mut y = self.h[0] & a;
        for i in 1..=self.m() {
            y ^= self.h[i] & self.hist[i - 1];
        }
        self.hist.insert(0, a);
        self.hist.pop();
        y
    }

    /// Input that makes the register input zero.
    pub fn flush_bit(&self) -> u8 {
        self.feedback()
    }

    pub fn is_zero(&self) -> bool {
        self.hist.iter().all(|&b| b == 0)
    }

    pub fn state(&self) -> Vec<u8> {
        self.hist.clone()
    }
}

/// Parity stream and tail bits; the tail is empty when not terminated.
pub fn rsc(input: &[u8], terminate: bool) -> (Vec<u8>, Vec<u8>) {
    let mut r = Register::new(&G15, &H17);
    let mut par: Vec<u8> = input.iter().map(|&u| r.step(u)).collect();
    let mut tail = Vec::new();
    if terminate {
        for _ in 0..r.m() {
            let u = r.flush_bit();
            tail.push(u);
            par.push(r.step(u));
        }
        assert!(r.is_zero());
    }
    (par, tail)
}

/// Unpunctured turbo codeword weight for the (15, 17) code.
pub fn turbo_weight(forward: &[usize], data: &[u8]) -> usize {
    let mut il = vec![0u8; data.len()];
    for (i, &f) in forward.iter().enumerate() {
        il[f] = data[i];
    }
    let (p1, tail) = rsc(data, true);
    let (p2, _) = rsc(&il, false);
    let ones = |v: &[u8]| v.iter().filter(|&&b| b == 1).count();
    ones(data) + ones(&tail) + ones(&p1) + ones(&p2)
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// Exact bitwise MAP LLRs by enumerating every data word of length `n`.
/// With `terminate` the LLR vectors have length `n + m` (tail included).
pub fn exhaustive_map(
    sys: &[f64],
    par: &[f64],
    apr: &[f64],
    n: usize,
    terminate: bool,
) -> Vec<f64> {
    let len = sys.len();
    let mut metrics: Vec<Vec<f64>> = vec![Vec::new(); 2 * len];
    for word in 0u32..(1 << n) {
        let data: Vec<u8> = (0..n).map(|k| (word >> k & 1) as u8).collect();
        let (p, tail) = rsc(&data, terminate);
        let x: Vec<u8> = data.iter().chain(&tail).copied().collect();
        assert_eq!(x.len(), len);
        let sgn = |b: u8| if b == 0 { 1.0 } else { -1.0 };
        let m: f64 = (0..len)
            .map(|k| 0.5 * sgn(x[k]) * (sys[k] + apr[k]) + 0.5 * sgn(p[k]) * par[k])
            .sum();
        for k in 0..len {
            metrics[2 * k + x[k] as usize].push(m);
        }
    }
    (0..len)
        .map(|k| log_sum_exp(&metrics[2 * k]) - log_sum_exp(&metrics[2 * k + 1]))
        .collect()
}

/// Dense row-major square matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub v: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            v: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.v[i * n + i] = 1.0;
        }
        m
    }

    /// `P[i][π(i)] = 1`
    pub fn perm(forward: &[usize]) -> Self {
        let n = forward.len();
        let mut m = Self::zeros(n);
        for (i, &f) in forward.iter().enumerate() {
            m.v[i * n + f] = 1.0;
        }
        m
    }

    /// `a·exp(-c|i-j|)` off the diagonal, zero on it.
    pub fn corr(n: usize, a: f64, c: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m.v[i * n + j] = a * (-c * (i as f64 - j as f64).abs()).exp();
                }
            }
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.v[i * self.n + j]
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let n = self.n;
        let mut r = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.at(i, k);
                for j in 0..n {
                    r.v[i * n + j] += x * o.at(k, j);
                }
            }
        }
        r
    }

    pub fn add(&self, o: &Dense) -> Dense {
        Dense {
            n: self.n,
            v: self.v.iter().zip(&o.v).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Dense {
        Dense {
            n: self.n,
            v: self.v.iter().map(|a| a * s).collect(),
        }
    }

    pub fn transpose(&self) -> Dense {
        let n = self.n;
        let mut r = Dense::zeros(n);
        for i in 0..n {
            for j in 0..n {
                r.v[j * n + i] = self.at(i, j);
            }
        }
        r
    }
}

/// Circular distance on `0..n`.
pub fn circ(x: usize, y: usize, n: usize) -> usize {
    let d = x.abs_diff(y);
    d.min(n - d)
}
