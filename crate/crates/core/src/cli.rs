//! Command-line front end. `run` parses arguments, dispatches and maps
//! errors to exit codes (0 ok, 2 usage or configuration, 3 data, 4 numerics).

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::build_config;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::harness::{
    berry_esseen_diagnostic, run_coverage_sweep, run_length_vs_n, write_records_csv, Manifest, Method, Multiplier,
    SweepConfig,
};
use crate::inference::{default_beta_grid, feasible_interval, IntervalTable, KernelKind, LearnerConfig};
use crate::ising::{
    definetti_sample, sample_block_treatments, BlockIsingParams, CurieWeissSampler, IsingParams, TreatmentDraw,
};
use crate::laws::{hn_quantile, ln_quantile, mple_limit_quantile, LimitLawParams, Regime, WcLaw};
use crate::outcome::{oracle_tau_exact, simulate_dataset, Preset, SimDataset};

#[derive(Debug, Parser)]
#[command(name = "netising", version, about = "Ising-assigned network experiments: simulation and inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coverage and length of prediction intervals over an (n, beta) grid.
    Sweep(SweepArgs),
    /// Interval length against n at one beta, with log-log slopes.
    LengthVsN(SweepArgs),
    /// Quantiles of the limit laws.
    Quantile {
        #[command(subcommand)]
        law: QuantileLaw,
    },
    /// Prediction interval for an observed dataset.
    Analyze(AnalyzeArgs),
    /// Draw one treatment vector.
    Sample(SampleArgs),
    /// Simulate a dataset and write it with its edge list.
    Simulate(SimulateArgs),
    /// KS distance of n^-1 sum X_i W_i to its pointwise limit law.
    DiagBe(DiagArgs),
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory for the CSV and manifest.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (overrides the config and ISING_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum QuantileLaw {
    /// W_c with density proportional to exp(-c w^2/2 - w^4/12).
    Wc {
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long)]
        p: Option<f64>,
        /// Print E[W^k] instead of a quantile.
        #[arg(long)]
        moment: Option<i32>,
    },
    /// Pointwise law of tau_hat - tau.
    Ln {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
    },
    /// Uniform law H_n.
    Hn {
        #[command(flatten)]
        law: LawArgs,
    },
    /// Limit law of the pseudo-likelihood estimator.
    MpleLimit {
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
}

#[derive(Debug, Args)]
struct LawArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, allow_negative_numbers = true)]
    kappa1: f64,
    #[arg(long)]
    kappa2: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    beta: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegimeArg {
    High,
    Critical,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Dataset CSV with header `unit,U,T,Y,M,N`.
    #[arg(long)]
    data: PathBuf,
    /// Edge list, one `i j` pair per line.
    #[arg(long)]
    edges: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha1: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha2: f64,
    #[arg(long, default_value_t = 201)]
    grid_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "epanechnikov")]
    kernel: String,
    /// Fixed bandwidth; automatic when absent.
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    x0: f64,
    /// Exposure assigned to units without neighbours.
    #[arg(long, default_value_t = 0.5)]
    isolated_exposure: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SamplerArg {
    Exact,
    Definetti,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    h: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    sampler: SamplerArg,
    /// Block sizes; enables the block model.
    #[arg(long, value_delimiter = ',')]
    blocks: Vec<usize>,
    /// Per-block beta, one per block.
    #[arg(long, value_delimiter = ',')]
    block_beta: Vec<f64>,
    /// Per-block field, one per block (zero when absent).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    block_h: Vec<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value = "quadratic")]
    preset: String,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DiagArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![200usize, 2000])]
    n: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value = "one")]
    multiplier: String,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Sweep(a) => sweep(&a, false, out, err),
        Command::LengthVsN(a) => sweep(&a, true, out, err),
        Command::Quantile { law } => quantile(law, out),
        Command::Analyze(a) => analyze(&a, out, err),
        Command::Sample(a) => sample(&a, out),
        Command::Simulate(a) => simulate(&a, out),
        Command::DiagBe(a) => diag(&a, out),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn load_sweep_config(a: &SweepArgs, length_vs_n: bool) -> Result<SweepConfig> {
    let text = match &a.config {
        Some(p) => fs::read_to_string(p).map_err(|e| io_err(p, e))?,
        None => String::new(),
    };
    let base = if length_vs_n {
        SweepConfig {
            ns: vec![250, 500, 1000, 2000],
            reps: 300,
            methods: vec![Method::Conserv],
            ..SweepConfig::default()
        }
    } else {
        SweepConfig::default()
    };
    let mut cfg = build_config(base, &text, &a.set)?;
    if let Some(w) = a.workers {
        cfg.workers = Some(w);
    } else if cfg.workers.is_none() {
        if let Ok(v) = std::env::var("ISING_WORKERS") {
            let w = v
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::param("workers", format!("ISING_WORKERS=`{v}` is not a count")))?;
            cfg.workers = Some(w);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn sweep(a: &SweepArgs, length_vs_n: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = load_sweep_config(a, length_vs_n)?;
    fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    let start = Instant::now();
    let (name, result, slopes) = if length_vs_n {
        let r = run_length_vs_n(&cfg)?;
        ("length_vs_n", r.sweep, Some(r.slopes))
    } else {
        ("sweep", run_coverage_sweep(&cfg)?, None)
    };
    let elapsed = start.elapsed().as_secs_f64();

    let csv_path = a.out.join(format!("{name}.csv"));
    let file = File::create(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    let mut w = BufWriter::new(file);
    write_records_csv(&result.records, &mut w)?;
    w.flush()?;

    let mut manifest = Manifest::new(name, &cfg, &result, elapsed);
    manifest.slopes = slopes.as_deref();
    let json_path = a.out.join(format!("{name}.json"));
    write_json(&json_path, &manifest)?;

    for &(n, beta, failed) in result.failures.iter().filter(|f| f.2 > 0) {
        writeln!(err, "warning: {failed} replications failed at n={n}, beta={beta}")?;
    }
    if let Some(s) = &slopes {
        for e in s {
            writeln!(out, "slope {}: {:.4} (se {:.4})", e.method, e.slope, e.se)?;
        }
    }
    writeln!(out, "wrote {} and {}", csv_path.display(), json_path.display())?;
    Ok(())
}

fn quantile(law: QuantileLaw, out: &mut dyn Write) -> Result<()> {
    let check_p = |p: f64| {
        if p > 0.0 && p < 1.0 {
            Ok(p)
        } else {
            Err(Error::param("p", format!("must lie in (0, 1), got {p}")))
        }
    };
    let value = match law {
        QuantileLaw::Wc { c, p, moment } => {
            let w = WcLaw::shared(c)?;
            match (p, moment) {
                (_, Some(k)) => w.moment(k),
                (Some(p), None) => w.quantile(check_p(p)?),
                (None, None) => return Err(Error::param("p", "give --p or --moment")),
            }
        }
        QuantileLaw::Ln { law, regime } => {
            let params = LimitLawParams::new(law.kappa1, law.kappa2, law.n, law.beta)?;
            let regime = match regime {
                Some(RegimeArg::High) => Regime::High,
                Some(RegimeArg::Critical) => Regime::Critical,
                None => Regime::for_beta(law.beta),
            };
            ln_quantile(check_p(law.p)?, &params, regime)?
        }
        QuantileLaw::Hn { law } => {
            let params = LimitLawParams::new(law.kappa1, law.kappa2, law.n, law.beta)?;
            hn_quantile(check_p(law.p)?, &params)?
        }
        QuantileLaw::MpleLimit { c, n, p } => mple_limit_quantile(check_p(p)?, c, n)?,
    };
    writeln!(out, "{value:.10}")?;
    Ok(())
}

fn count_rows(path: &Path) -> Result<usize> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rows = 0;
    for line in BufReader::new(file).lines().skip(1) {
        if !line?.trim().is_empty() {
            rows += 1;
        }
    }
    Ok(rows)
}

fn load_dataset(data: &Path, edges: &Path) -> Result<SimDataset> {
    let n = count_rows(data)?;
    let ef = File::open(edges).map_err(|e| io_err(edges, e))?;
    let graph = Graph::read_edge_list(n, BufReader::new(ef))?;
    let df = File::open(data).map_err(|e| io_err(data, e))?;
    SimDataset::read_csv(BufReader::new(df), graph)
}

fn analyze(a: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let kernel: KernelKind = a
        .kernel
        .parse()
        .map_err(|_| Error::param("kernel", format!("unknown kernel `{}`", a.kernel)))?;
    if a.grid_points < 2 {
        return Err(Error::param("grid_points", "need at least two grid points"));
    }
    let dataset = load_dataset(&a.data, &a.edges)?;
    let learner = LearnerConfig {
        kernel,
        bandwidth: a.bandwidth,
        x0: a.x0,
        ..LearnerConfig::default()
    };
    let table = IntervalTable::new(dataset.n(), a.alpha1, a.alpha2, &default_beta_grid(a.grid_points))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let r = feasible_interval(&dataset, &table, &learner, a.isolated_exposure, &mut rng)?;
    if r.sparse_warning {
        writeln!(err, "warning: graph is sparse (n rho^3 < 10); the variance bound may be unreliable")?;
    }
    if r.interval.fallback {
        writeln!(err, "warning: empty beta confidence set, used the full grid")?;
    }
    let report = json!({
        "n": dataset.n(),
        "tau_hat": r.interval.tau_hat,
        "beta_hat": r.mple.beta_hat,
        "khat": r.kappa.khat,
        "kn_bound": r.kappa.kn_bound,
        "lo": r.interval.lo,
        "hi": r.interval.hi,
        "alpha1": a.alpha1,
        "alpha2": a.alpha2,
        "beta_set_size": r.interval.beta_set.len(),
        "fallback": r.interval.fallback,
        "sparse_warning": r.sparse_warning,
    });
    serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn sample(a: &SampleArgs, out: &mut dyn Write) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let draw: TreatmentDraw = if a.blocks.is_empty() {
        let n = a.n.ok_or_else(|| Error::param("n", "required without --blocks"))?;
        if n == 0 {
            return Err(Error::param("n", "must be positive"));
        }
        let params = IsingParams::new(a.beta, a.h)?;
        match a.sampler {
            SamplerArg::Exact => CurieWeissSampler::new(n, params).sample(&mut rng),
            SamplerArg::Definetti => definetti_sample(n, &params, &mut rng)?,
        }
    } else {
        let k = a.blocks.len();
        if a.block_beta.len() != k {
            return Err(Error::param("block_beta", format!("need {k} values, got {}", a.block_beta.len())));
        }
        if !a.block_h.is_empty() && a.block_h.len() != k {
            return Err(Error::param("block_h", format!("need {k} values, got {}", a.block_h.len())));
        }
        let params = (0..k)
            .map(|b| IsingParams::new(a.block_beta[b], a.block_h.get(b).copied().unwrap_or(0.0)))
            .collect::<Result<Vec<_>>>()?;
        sample_block_treatments(&BlockIsingParams::new(a.blocks.clone(), params)?, &mut rng)
    };
    let t: Vec<u8> = draw.treatments().iter().map(|&b| b as u8).collect();
    let report = json!({
        "n": draw.n(),
        "num_treated": draw.num_treated(),
        "magnetization": draw.magnetization(),
        "block_magnetizations": draw.block_mags(),
        "treatments": t,
    });
    serde_json::to_writer(&mut *out, &report).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let preset = Preset::parse(&a.preset).ok_or_else(|| Error::param("preset", format!("unknown preset `{}`", a.preset)))?;
    if a.n < 2 {
        return Err(Error::param("n", "must be >= 2"));
    }
    let params = IsingParams::new(a.beta, 0.0)?;
    let graphon = preset.graphon(a.rho)?;
    let outcome = preset.outcome();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let d = simulate_dataset(&graphon, &outcome, &CurieWeissSampler::new(a.n, params), &mut rng)?;
    let tau = oracle_tau_exact(&outcome, &d.graph, &params, None)?;

    fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    let data_path = a.out.join("dataset.csv");
    let mut w = BufWriter::new(File::create(&data_path).map_err(|e| io_err(&data_path, e))?);
    d.write_csv(&mut w)?;
    w.flush()?;
    let edge_path = a.out.join("edges.txt");
    let mut w = BufWriter::new(File::create(&edge_path).map_err(|e| io_err(&edge_path, e))?);
    d.graph.write_edge_list(&mut w)?;
    w.flush()?;

    let report = json!({
        "n": a.n,
        "beta": a.beta,
        "preset": preset.name(),
        "edges": d.graph.num_edges(),
        "num_treated": d.draw.num_treated(),
        "tau": tau,
        "dataset": data_path.display().to_string(),
        "edge_list": edge_path.display().to_string(),
    });
    serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn diag(a: &DiagArgs, out: &mut dyn Write) -> Result<()> {
    let multiplier: Multiplier = a.multiplier.parse()?;
    let points = berry_esseen_diagnostic(&a.n, a.beta, multiplier, a.reps, a.seed)?;
    writeln!(out, "n,beta,ks")?;
    for p in points {
        writeln!(out, "{},{},{:.6}", p.n, p.beta, p.ks)?;
    }
    Ok(())
}
