use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use turbo_weave::designer::{design, DesignParams};
use turbo_weave::ids::{ids_scores, DEFAULT_A, DEFAULT_C};
use turbo_weave::interleaver::{
    alpha_search, deterministic, random_interleaver, s1_upper_bound, s_random, verify_spread,
    Violation, DEFAULT_MAX_RESTARTS,
};
use turbo_weave::sim::{
    parse_grid, plot_svg, read_csv, simulate_point, write_csv, Modulation, RunConfig, StopRule,
};
use turbo_weave::turbo::{distance_search, Rate};
use turbo_weave::{CorrModel, Metric, Permutation, RscSpec};

#[derive(Parser)]
#[command(
    name = "turbo-weave",
    version,
    about = "Turbo-code interleaver design toolkit"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build or inspect interleavers.
    #[command(subcommand)]
    Interleaver(IlCmd),
    /// Correlation-based suitability scores of an interleaver.
    Ids(IdsArgs),
    /// Low-weight codeword search for a turbo code.
    Dmin(DminArgs),
    /// Interleaver design.
    #[command(subcommand)]
    Design(DesignCmd),
    /// Monte-Carlo BER simulation over AWGN.
    Simulate(SimArgs),
    /// Plot BER CSV files as SVG.
    Plot(PlotArgs),
}

#[derive(Subcommand)]
enum IlCmd {
    /// Uniform random permutation.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// S-random permutation.
    Srandom {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_RESTARTS)]
        max_restarts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Affine interleaver with multiplier `alpha`.
    Deterministic {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check spread and displacement of an interleaver file.
    Verify {
        #[arg(long)]
        interleaver: PathBuf,
        #[arg(long, default_value_t = 0)]
        s1: usize,
        #[arg(long, default_value_t = 0)]
        s2: usize,
        #[arg(long, value_enum, default_value_t = MetricArg::Linear)]
        metric: MetricArg,
        /// Violations to list.
        #[arg(long, default_value_t = 10)]
        show: usize,
    },
    /// Feasible multipliers for the affine interleaver of length n.
    AlphaSearch {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Linear,
    Circular,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Linear => Metric::Linear,
            MetricArg::Circular => Metric::Circular,
        }
    }
}

#[derive(Args)]
struct IdsArgs {
    #[arg(long)]
    interleaver: PathBuf,
    #[arg(long, default_value_t = DEFAULT_A)]
    a: f64,
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    /// Also print a CSV header and row.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct DminArgs {
    #[arg(long)]
    interleaver: PathBuf,
    #[arg(long, default_value_t = 4)]
    wdet: usize,
    #[arg(long)]
    dcap: usize,
    #[arg(long, default_value = "15,17")]
    encoder: String,
}

#[derive(Subcommand)]
enum DesignCmd {
    /// S-random start with displacement and termination constraints, then
    /// IDS-guided swaps until no low-weight input reaches the target.
    Twostep(TwostepArgs),
}

#[derive(Args)]
struct TwostepArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    s1: usize,
    #[arg(long)]
    s2: usize,
    #[arg(long, default_value_t = 4)]
    wdet: usize,
    /// Target: every input of weight <= wdet must weigh more than this.
    #[arg(long)]
    dmin: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_rounds: usize,
    #[arg(long, default_value_t = DEFAULT_A)]
    a: f64,
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    #[arg(long, default_value = "15,17")]
    encoder: String,
    #[arg(long)]
    out: PathBuf,
    /// Swap trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    /// Interleaver file.
    #[arg(long)]
    interleaver: PathBuf,
    #[arg(long, default_value = "1/3")]
    rate: String,
    #[arg(long = "mod", default_value = "bpsk")]
    modulation: String,
    /// `start:step:stop`, a comma list, or `inf`.
    #[arg(long)]
    ebn0: String,
    #[arg(long, default_value_t = 18)]
    iters: usize,
    /// fixed, repeat or genie.
    #[arg(long, default_value = "fixed")]
    stop: String,
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "15,17")]
    encoder: String,
    /// Leave the termination bits out of the Eb accounting.
    #[arg(long)]
    no_tail_energy: bool,
    /// Hard decisions on the channel samples, no coding.
    #[arg(long)]
    uncoded: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Comma-separated CSV files.
    #[arg(long = "in", value_delimiter = ',', required = true)]
    inputs: Vec<PathBuf>,
    /// Comma-separated legend labels; file stems by default.
    #[arg(long, value_delimiter = ',')]
    labels: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

fn emit(p: &Permutation, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => p
            .store(path)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{}", p.to_file_string());
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Permutation> {
    Permutation::load(path).with_context(|| format!("reading interleaver {}", path.display()))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn interleaver(cmd: IlCmd) -> Result<()> {
    match cmd {
        IlCmd::Random { n, seed, out } => emit(&random_interleaver(n, seed)?, out.as_deref()),
        IlCmd::Srandom {
            n,
            s,
            seed,
            max_restarts,
            out,
        } => emit(&s_random(n, s, seed, max_restarts)?, out.as_deref()),
        IlCmd::Deterministic { n, alpha, out } => emit(&deterministic(n, alpha)?, out.as_deref()),
        IlCmd::Verify {
            interleaver,
            s1,
            s2,
            metric,
            show,
        } => {
            let p = load(&interleaver)?;
            let r = verify_spread(&p, s1, s2, metric.into());
            println!("n = {}", p.len());
            println!("metric = {:?}", r.metric);
            println!("s1_requested = {}", r.s1_requested);
            println!("s2_requested = {}", r.s2_requested);
            println!("s1_achieved = {}", r.s1_achieved);
            println!("s2_achieved = {}", r.s2_achieved);
            println!("violations = {}", r.violations.len());
            for v in r.violations.iter().take(show) {
                match v {
                    Violation::Spread { i, j } => println!("  spread ({i}, {j})"),
                    Violation::Displacement { i } => println!("  displacement {i}"),
                }
            }
            if !r.passed() {
                bail!("spread check failed");
            }
            Ok(())
        }
        IlCmd::AlphaSearch { n } => {
            println!(
                "# s1 <= {} for any interleaver of length {n}",
                s1_upper_bound(n)
            );
            println!("alpha,s1,s2");
            for a in alpha_search(n) {
                println!("{},{},{}", a.alpha, a.s1, a.s2);
            }
            Ok(())
        }
    }
}

fn ids(args: IdsArgs) -> Result<()> {
    let p = load(&args.interleaver)?;
    let model = CorrModel::new(args.a, args.c, p.len())?;
    let s = ids_scores(&model, &p)?;
    println!("ids     = {:.12e}", s.ids);
    println!("ids1    = {:.12e}", s.ids1);
    println!("ids2    = {:.12e}", s.ids2);
    println!("ids_new = {:.12e}", s.ids_new);
    if args.csv {
        println!("n,a,c,ids,ids1,ids2,ids_new");
        println!(
            "{},{},{},{:e},{:e},{:e},{:e}",
            p.len(),
            args.a,
            args.c,
            s.ids,
            s.ids1,
            s.ids2,
            s.ids_new
        );
    }
    Ok(())
}

fn dmin(args: DminArgs) -> Result<()> {
    let p = load(&args.interleaver)?;
    let spec = RscSpec::parse(&args.encoder)?;
    let report = distance_search(&spec, &p, args.wdet, args.dcap)?;
    print!("{}", report.to_text());
    println!();
    print!("{}", report.to_csv());
    Ok(())
}

fn twostep(args: TwostepArgs) -> Result<()> {
    let mut params =
        DesignParams::new(args.n, args.s1, args.s2, args.wdet, args.dmin).with_seed(args.seed);
    params.max_step2_rounds = args.max_rounds;
    params.a = args.a;
    params.c = args.c;
    params.spec = RscSpec::parse(&args.encoder)?;
    let d = design(&params)?;
    d.write(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.trace {
        fs::write(path, d.trace.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", d.metadata());
    if !d.trace.converged {
        bail!(
            "no convergence after {} rounds; {} low-weight inputs remain",
            d.trace.rounds,
            d.distance.words.len()
        );
    }
    Ok(())
}

fn simulate(args: SimArgs) -> Result<()> {
    let p = load(&args.interleaver)?;
    let cfg = RunConfig {
        spec: RscSpec::parse(&args.encoder)?,
        rate: Rate::parse(&args.rate)?,
        modulation: Modulation::parse(&args.modulation)?,
        iterations: args.iters,
        stop: StopRule::parse(&args.stop)?,
        min_frame_errors: args.min_errors,
        max_frames: args.max_frames,
        seed: args.seed,
        include_tail_energy: !args.no_tail_energy,
        uncoded: args.uncoded,
    };
    let grid = parse_grid(&args.ebn0)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build()?;
    let mut points = Vec::with_capacity(grid.len());
    for (k, &db) in grid.iter().enumerate() {
        let pt = pool.install(|| simulate_point(&p, &cfg, db, k))?;
        eprintln!(
            "Eb/N0 {db:>6} dB  frames {:>9}  frame errors {:>5}  BER {:.3e}  FER {:.3e}",
            pt.frames, pt.frame_errors, pt.ber, pt.fer
        );
        points.push(pt);
    }
    let file =
        fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_csv(&points, file)?;
    let meta = cfg.metadata(p.len(), &args.interleaver.display().to_string());
    fs::write(sidecar(&args.out), meta)?;
    Ok(())
}

fn plot(args: PlotArgs) -> Result<()> {
    if !args.labels.is_empty() && args.labels.len() != args.inputs.len() {
        bail!(
            "{} labels for {} inputs",
            args.labels.len(),
            args.inputs.len()
        );
    }
    let mut series = Vec::new();
    for (k, path) in args.inputs.iter().enumerate() {
        let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let points = read_csv(file).with_context(|| format!("parsing {}", path.display()))?;
        let label = match args.labels.get(k) {
            Some(l) => l.clone(),
            None => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        };
        series.push((label, points));
    }
    fs::write(&args.out, plot_svg(&series)?)
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Interleaver(c) => interleaver(c),
        Cmd::Ids(a) => ids(a),
        Cmd::Dmin(a) => dmin(a),
        Cmd::Design(DesignCmd::Twostep(a)) => twostep(a),
        Cmd::Simulate(a) => simulate(a),
        Cmd::Plot(a) => plot(a),
    }
}
