//! Monte-Carlo BER/FER estimation over AWGN, plus CSV and SVG output.
//!
//! Bit 0 is sent as +1. Each frame draws its data and noise from its own
//! ChaCha stream keyed by (grid point, frame index), and the stop rule is
//! applied in frame order, so results do not depend on the thread count.

use std::fmt::Write as _;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interleaver::Permutation;
use crate::turbo::{
    turbo_decode_until, turbo_decode_with, turbo_encode, CodeLayout, DecodeOptions, Rate, RscSpec,
};

/// LLR magnitude used for a noiseless channel.
pub const NOISELESS_LLR: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    /// Gray-mapped QPSK, one bit on each of I and Q.
    Qpsk,
}

impl Modulation {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" => Ok(Modulation::Qpsk),
            other => Err(Error::InvalidParameter(format!(
                "unknown modulation `{other}` (expected bpsk or qpsk)"
            ))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
        }
    }

    /// Per-dimension amplitude at unit symbol energy.
    pub fn amplitude(self) -> f64 {
        match self {
            Modulation::Bpsk => 1.0,
            Modulation::Qpsk => std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    /// Real channel samples, one per bit (I/Q alternate for QPSK).
    pub fn modulate(self, bits: &[u8]) -> Vec<f64> {
        let a = self.amplitude();
        bits.iter().map(|&b| if b == 0 { a } else { -a }).collect()
    }

    /// Noise variance per real dimension for unit symbol energy at the given
    /// Eb/N0 (linear) and code rate.
    pub fn noise_var(self, ebn0: f64, rate: f64) -> f64 {
        let bits_per_symbol = match self {
            Modulation::Bpsk => 1.0,
            Modulation::Qpsk => 2.0,
        };
        1.0 / (2.0 * bits_per_symbol * rate * ebn0)
    }
}

/// Channel LLRs `2·a·y/σ²` for amplitude `a` of the modulation.
pub fn llr_map(received: &[f64], noise_var: f64, modulation: Modulation) -> Result<Vec<f64>> {
    if !(noise_var.is_finite() && noise_var > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be positive, got {noise_var}"
        )));
    }
    let k = 2.0 * modulation.amplitude() / noise_var;
    Ok(received.iter().map(|y| k * y).collect())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `a:step:b` (inclusive), a comma list, or a single value. Strictly
/// increasing; `inf` is allowed as a noiseless point.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::InvalidParameter(format!("bad Eb/N0 grid `{s}`: {why}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:step:stop"));
        }
        let (a, step, b) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step.is_finite() && step > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(bad("step must be positive and bounds finite"));
        }
        let count = ((b - a) / step + 1e-9).floor();
        if count < 0.0 {
            return Err(bad("stop below start"));
        }
        (0..=count as usize).map(|k| a + k as f64 * step).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<f64>>>()?
    };
    if grid.is_empty() || grid.iter().any(|x| x.is_nan()) {
        return Err(bad("empty"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("not strictly increasing"));
    }
    Ok(grid)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
}

impl BerPoint {
    fn from_counts(
        ebn0_db: f64,
        n: usize,
        frames: u64,
        bit_errors: u64,
        frame_errors: u64,
    ) -> Self {
        let bits = frames as f64 * n as f64;
        Self {
            ebn0_db,
            frames,
            bit_errors,
            frame_errors,
            ber: if frames == 0 {
                0.0
            } else {
                bit_errors as f64 / bits
            },
            fer: if frames == 0 {
                0.0
            } else {
                frame_errors as f64 / frames as f64
            },
        }
    }

    /// Binomial standard error of `ber` for `n` bits per frame.
    pub fn ber_sigma(&self, n: usize) -> f64 {
        binomial_sigma(self.ber, self.frames as f64 * n as f64)
    }
}

pub fn binomial_sigma(p: f64, trials: f64) -> f64 {
    (p * (1.0 - p) / trials).sqrt()
}

/// When the decoder may stop before the iteration limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopRule {
    /// Always run every iteration.
    Fixed,
    /// Stop when the hard decisions repeat between iterations.
    Repeat,
    /// Stop once the decisions equal the transmitted data. Matches
    /// [`StopRule::Fixed`] except for frames that are decoded correctly and
    /// then lost again in later iterations.
    Genie,
}

impl StopRule {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed" => Ok(StopRule::Fixed),
            "repeat" => Ok(StopRule::Repeat),
            "genie" => Ok(StopRule::Genie),
            other => Err(Error::InvalidParameter(format!(
                "unknown stop rule `{other}` (expected fixed, repeat or genie)"
            ))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StopRule::Fixed => "fixed",
            StopRule::Repeat => "repeat",
            StopRule::Genie => "genie",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub spec: RscSpec,
    pub rate: Rate,
    pub modulation: Modulation,
    pub iterations: usize,
    pub stop: StopRule,
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    /// Charge the termination bits to Eb.
    pub include_tail_energy: bool,
    /// Skip the code entirely: hard decisions on BPSK/QPSK samples.
    pub uncoded: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spec: RscSpec::default_m3(),
            rate: Rate::Third,
            modulation: Modulation::Bpsk,
            iterations: 18,
            stop: StopRule::Fixed,
            min_frame_errors: 100,
            max_frames: 1_000_000,
            seed: 0,
            include_tail_energy: true,
            uncoded: false,
        }
    }
}

impl RunConfig {
    /// Rate used for the energy accounting.
    pub fn energy_rate(&self, n: usize) -> f64 {
        if self.uncoded {
            return 1.0;
        }
        let layout = CodeLayout::new(n, self.spec.memory(), self.rate);
        if self.include_tail_energy {
            layout.effective_rate()
        } else {
            n as f64 / (layout.transmitted_len() - 2 * self.spec.memory()) as f64
        }
    }

    /// `key=value` lines describing the run.
    pub fn metadata(&self, n: usize, interleaver: &str) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k}={v}").unwrap();
        kv("interleaver", interleaver.to_string());
        kv("n", n.to_string());
        kv("encoder", self.spec.label());
        kv("rate", self.rate.label().to_string());
        kv("modulation", self.modulation.label().to_string());
        kv("iterations", self.iterations.to_string());
        kv("stop_rule", self.stop.label().to_string());
        kv("min_frame_errors", self.min_frame_errors.to_string());
        kv("max_frames", self.max_frames.to_string());
        kv("seed", self.seed.to_string());
        kv("tail_energy_in_eb", self.include_tail_energy.to_string());
        kv("energy_rate", format!("{:.9}", self.energy_rate(n)));
        kv("uncoded", self.uncoded.to_string());
        s
    }
}

fn frame_rng(seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 40) ^ frame);
    rng
}

/// Bit errors of one frame.
fn run_frame(
    perm: &Permutation,
    cfg: &RunConfig,
    noise_var: Option<f64>,
    point: usize,
    frame: u64,
) -> Result<u64> {
    let n = perm.len();
    let mut rng = frame_rng(cfg.seed, point, frame);
    let data: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
    let bits = if cfg.uncoded {
        data.clone()
    } else {
        let layout = CodeLayout::new(n, cfg.spec.memory(), cfg.rate);
        layout.serialize(&turbo_encode(&cfg.spec, perm, &data, cfg.rate)?)
    };
    let tx = cfg.modulation.modulate(&bits);
    let llrs = match noise_var {
        Some(var) => {
            let sd = var.sqrt();
            let rx: Vec<f64> = tx
                .iter()
                .map(|x| x + sd * rng.sample::<f64, _>(StandardNormal))
                .collect();
            llr_map(&rx, var, cfg.modulation)?
        }
        None => tx.iter().map(|x| x.signum() * NOISELESS_LLR).collect(),
    };
    let decided: Vec<u8> = if cfg.uncoded {
        llrs.iter().map(|&l| u8::from(l < 0.0)).collect()
    } else {
        let layout = CodeLayout::new(n, cfg.spec.memory(), cfg.rate);
        let frame = layout.frame_from_llrs(&llrs)?;
        let opts = DecodeOptions {
            iterations: cfg.iterations,
            early_stop: cfg.stop == StopRule::Repeat,
        };
        match cfg.stop {
            StopRule::Genie => turbo_decode_until(&cfg.spec, perm, &frame, &opts, &data)?.bits,
            _ => turbo_decode_with(&cfg.spec, perm, &frame, &opts)?.bits,
        }
    };
    Ok(data.iter().zip(&decided).filter(|(a, b)| a != b).count() as u64)
}

/// One grid point. `point` selects the RNG streams.
pub fn simulate_point(
    perm: &Permutation,
    cfg: &RunConfig,
    ebn0_db: f64,
    point: usize,
) -> Result<BerPoint> {
    if cfg.max_frames == 0 {
        return Err(Error::InvalidParameter(
            "max_frames must be positive".into(),
        ));
    }
    let n = perm.len();
    let noise_var = if ebn0_db == f64::INFINITY {
        None
    } else {
        Some(
            cfg.modulation
                .noise_var(db_to_linear(ebn0_db), cfg.energy_rate(n)),
        )
    };
    let batch = (4 * rayon::current_num_threads()).max(8) as u64;
    let (mut frames, mut bit_errors, mut frame_errors) = (0u64, 0u64, 0u64);
    'outer: while frames < cfg.max_frames {
        let end = (frames + batch).min(cfg.max_frames);
        let errs: Vec<u64> = (frames..end)
            .into_par_iter()
            .map(|f| run_frame(perm, cfg, noise_var, point, f))
            .collect::<Result<_>>()?;
        for e in errs {
            frames += 1;
            bit_errors += e;
            frame_errors += u64::from(e > 0);
            if frame_errors >= cfg.min_frame_errors {
                break 'outer;
            }
        }
    }
    Ok(BerPoint::from_counts(
        ebn0_db,
        n,
        frames,
        bit_errors,
        frame_errors,
    ))
}

pub fn simulate(perm: &Permutation, cfg: &RunConfig, grid: &[f64]) -> Result<Vec<BerPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty Eb/N0 grid".into()));
    }
    grid.iter()
        .enumerate()
        .map(|(k, &db)| simulate_point(perm, cfg, db, k))
        .collect()
}

pub fn write_csv<W: Write>(points: &[BerPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(points: &[BerPoint]) -> String {
    let mut buf = Vec::new();
    write_csv(points, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BerPoint>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| Error::Io(e.to_string())))
        .collect()
}

/// Log-scale BER against Eb/N0, one polyline per series. Zero-BER points
/// are left out.
pub fn plot_svg(series: &[(String, Vec<BerPoint>)]) -> Result<String> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, v)| v.iter())
        .filter(|p| p.ber > 0.0 && p.ebn0_db.is_finite())
        .map(|p| (p.ebn0_db, p.ber))
        .collect();
    if pts.is_empty() {
        return Err(Error::InvalidParameter("nothing to plot".into()));
    }
    let (w, h, ml, mr, mt, mb) = (640.0, 480.0, 70.0, 150.0, 20.0, 50.0);
    let mut x0 = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut x1 = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let d0 = pts
        .iter()
        .map(|p| p.1.log10())
        .fold(f64::INFINITY, f64::min)
        .floor();
    let mut d1 = pts
        .iter()
        .map(|p| p.1.log10())
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil();
    if d1 <= d0 {
        d1 = d0 + 1.0;
    }
    let pw = w - ml - mr;
    let ph = h - mt - mb;
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |b: f64| mt + (d1 - b.log10()) / (d1 - d0) * ph;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for d in d0 as i32..=d1 as i32 {
        let y = sy(10f64.powi(d));
        writeln!(
            s,
            r##"<line x1="{ml}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
            ml + pw
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#,
            ml - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    for k in 0..=4 {
        let x = x0 + (x1 - x0) * k as f64 / 4.0;
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x:.2}</text>"#,
            sx(x),
            mt + ph + 18.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Eb/N0 (dB)</text>"#,
        ml + pw / 2.0,
        h - 8.0
    )
    .unwrap();
    writeln!(s, r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">BER</text>"#, mt + ph / 2.0, mt + ph / 2.0).unwrap();

    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
    ];
    for (k, (label, points)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let coords: Vec<String> = points
            .iter()
            .filter(|p| p.ber > 0.0 && p.ebn0_db.is_finite())
            .map(|p| format!("{:.2},{:.2}", sx(p.ebn0_db), sy(p.ber)))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        )
        .unwrap();
        for c in &coords {
            let (cx, cy) = c.split_once(',').expect("pair");
            writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>"#).unwrap();
        }
        let ly = mt + 14.0 + 18.0 * k as f64;
        let lx = ml + pw + 12.0;
        writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            xml_escape(label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
