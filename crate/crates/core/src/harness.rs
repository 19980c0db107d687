//! Monte Carlo coverage and length experiments with deterministic,
//! replication-indexed random streams.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{hajek, mple};
use crate::graph::Kernel;
use crate::inference::{
    default_beta_grid, fit_surface, kappa2_resample, IntervalTable, LearnerConfig, PredictionInterval,
};
use crate::ising::{CurieWeissSampler, IsingParams};
use crate::laws::{ks_distance, ln_cdf, HnLaw, LimitLawParams, Regime};
use crate::numeric::{norm_quantile, ols_slope, sorted_quantile};
use crate::outcome::{oracle_kappas, oracle_tau, simulate_dataset, ExactTau, OracleKappas, Preset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Conserv,
    Beta0,
    Oracle,
    Onestep,
    /// Central `1 − α` range of `τ̂ − τ_n` across replications.
    Simulated,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Conserv,
        Method::Beta0,
        Method::Oracle,
        Method::Onestep,
        Method::Simulated,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Conserv => "conserv",
            Method::Beta0 => "beta0",
            Method::Oracle => "oracle",
            Method::Onestep => "onestep",
            Method::Simulated => "simulated",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param("methods", format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub betas: Vec<f64>,
    pub rho: f64,
    pub reps: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub methods: Vec<Method>,
    pub seed: u64,
    #[serde(serialize_with = "ser_preset")]
    pub preset: Preset,
    /// Inner draws for `τ_n`; zero selects the exact computation.
    pub tau_reps: usize,
    pub grid_points: usize,
    #[serde(skip)]
    pub learner: LearnerConfig,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

fn ser_preset<S: serde::Serializer>(p: &Preset, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(p.name())
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            ns: vec![500],
            betas: vec![0.0],
            rho: 0.5,
            reps: 500,
            alpha1: 0.05,
            alpha2: 0.05,
            methods: vec![Method::Conserv, Method::Beta0, Method::Oracle, Method::Onestep],
            seed: 20_240_601,
            preset: Preset::Quadratic,
            tau_reps: 0,
            grid_points: 201,
            learner: LearnerConfig::default(),
            workers: None,
        }
    }
}

impl SweepConfig {
    /// Settings of the coverage-across-β figure.
    pub fn fig1() -> Self {
        SweepConfig {
            betas: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0],
            ..SweepConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.ns.iter().any(|&n| n < 4) {
            return Err(Error::param("n", "need at least one sample size, each >= 4"));
        }
        if self.betas.is_empty() || self.betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(Error::param("beta", "need values in [0, 1]"));
        }
        if self.reps == 0 {
            return Err(Error::param("reps", "must be >= 1"));
        }
        if !(self.alpha1 > 0.0 && self.alpha2 > 0.0 && self.alpha1 + self.alpha2 < 1.0) {
            return Err(Error::param("alpha1", "levels must be positive with alpha1 + alpha2 < 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::param("methods", "need at least one method"));
        }
        if self.grid_points < 2 {
            return Err(Error::param("grid_points", "need at least two grid points"));
        }
        if let Some(0) = self.workers {
            return Err(Error::param("workers", "must be >= 1"));
        }
        self.preset.graphon(self.rho)?;
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha1 + self.alpha2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub n: usize,
    pub beta: f64,
    pub method: Method,
    pub coverage: f64,
    pub mean_length: f64,
    pub sd_length: f64,
    pub reps: usize,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "n,beta,method,coverage,mean_length,sd_length,reps,seed";

pub fn write_records_csv<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{:.6},{:.8},{:.8},{},{}",
            r.n, r.beta, r.method, r.coverage, r.mean_length, r.sd_length, r.reps, r.seed
        )?;
    }
    Ok(())
}

/// Stream seed for one replication, shared by every method.
pub fn replication_seed(seed: u64, n: usize, beta: f64, rep: usize) -> u64 {
    let mut h = splitmix(seed);
    h = splitmix(h ^ n as u64);
    h = splitmix(h ^ beta.to_bits());
    splitmix(h ^ rep as u64)
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Everything computed in one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RepOutcome {
    pub tau: f64,
    pub tau_hat: f64,
    pub beta_hat: f64,
    pub khat: Option<f64>,
    pub intervals: Vec<(Method, PredictionInterval)>,
}

/// Shared, read-only state for all replications at one `(n, β)` cell.
pub struct CellContext<'a> {
    pub cfg: &'a SweepConfig,
    pub n: usize,
    pub beta: f64,
    pub sampler: CurieWeissSampler,
    pub exact_tau: Option<ExactTau>,
    pub table: Option<&'a IntervalTable>,
    pub kappas: OracleKappas,
    pub oracle_quantiles: (f64, f64),
}

impl<'a> CellContext<'a> {
    pub fn new(cfg: &'a SweepConfig, n: usize, beta: f64, table: Option<&'a IntervalTable>) -> Result<Self> {
        let params = IsingParams::new(beta, 0.0)?;
        let outcome = cfg.preset.outcome();
        let graphon = cfg.preset.graphon(cfg.rho)?;
        let kappas = oracle_kappas(&outcome, graphon.kernel(), 0.0)?;
        let alpha = cfg.alpha();
        let oracle_quantiles = if cfg.methods.contains(&Method::Oracle) {
            let law = HnLaw::new(&LimitLawParams::new(kappas.kappa1, kappas.kappa2, n, beta)?)?;
            (law.quantile(0.5 * alpha)?, law.quantile(1.0 - 0.5 * alpha)?)
        } else {
            (f64::NAN, f64::NAN)
        };
        Ok(CellContext {
            cfg,
            n,
            beta,
            sampler: CurieWeissSampler::new(n, params),
            exact_tau: if cfg.tau_reps == 0 {
                Some(ExactTau::new(n, &params, None)?)
            } else {
                None
            },
            table,
            kappas,
            oracle_quantiles,
        })
    }

    pub fn run(&self, rep: usize) -> Result<RepOutcome> {
        let cfg = self.cfg;
        let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(cfg.seed, self.n, self.beta, rep));
        let outcome = cfg.preset.outcome();
        let graphon = cfg.preset.graphon(cfg.rho)?;
        let data = simulate_dataset(&graphon, &outcome, &self.sampler, &mut rng)?;
        let tau = match &self.exact_tau {
            Some(exact) => exact.tau(&outcome, &data.graph)?,
            None => {
                let params = IsingParams::new(self.beta, 0.0)?;
                oracle_tau(&outcome, &data.graph, &params, cfg.tau_reps, &mut rng, None)?.value
            }
        };
        let tau_hat = hajek(&data.draw, &data.y)?;
        let m = mple(&data.draw)?;
        let alpha = cfg.alpha();
        let mut intervals = Vec::new();
        let mut khat = None;
        let needs_khat = cfg.methods.iter().any(|m| matches!(m, Method::Conserv | Method::Onestep));
        let kn = if needs_khat {
            let surface = fit_surface(&data, &cfg.learner)?;
            let k = kappa2_resample(&data, &surface, outcome.isolated_exposure, &mut rng)?;
            khat = Some(k.khat);
            k.kn_bound
        } else {
            0.0
        };
        for &method in &cfg.methods {
            let iv = match method {
                Method::Conserv => {
                    let table = self.table.ok_or_else(|| Error::Numerical("missing interval table".into()))?;
                    table.interval(tau_hat, m.beta_hat, kn)?
                }
                Method::Onestep => {
                    let table = self.table.ok_or_else(|| Error::Numerical("missing interval table".into()))?;
                    table.interval_full_grid(tau_hat, kn)?
                }
                Method::Beta0 => {
                    let half = norm_quantile(1.0 - 0.5 * alpha) * (self.kappas.kappa2 / self.n as f64).sqrt();
                    simple_interval(tau_hat, -half, half, cfg)
                }
                Method::Oracle => simple_interval(tau_hat, self.oracle_quantiles.0, self.oracle_quantiles.1, cfg),
                Method::Simulated => continue,
            };
            intervals.push((method, iv));
        }
        Ok(RepOutcome {
            tau,
            tau_hat,
            beta_hat: m.beta_hat,
            khat,
            intervals,
        })
    }
}

fn simple_interval(tau_hat: f64, lo: f64, hi: f64, cfg: &SweepConfig) -> PredictionInterval {
    PredictionInterval {
        tau_hat,
        lo: tau_hat + lo,
        hi: tau_hat + hi,
        alpha1: cfg.alpha1,
        alpha2: cfg.alpha2,
        beta_set: Vec::new(),
        fallback: false,
    }
}

/// Output of a sweep over `(n, β)` cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    /// Replications excluded after an error, per `(n, β)` cell.
    pub failures: Vec<(usize, f64, usize)>,
    /// Mean of `K̂` per cell, when computed.
    pub mean_khat: Vec<(usize, f64, f64)>,
}

fn summarize(n: usize, beta: f64, method: Method, hits: &[bool], lengths: &[f64], seed: u64) -> SweepRecord {
    let m = lengths.len() as f64;
    let mean = lengths.iter().sum::<f64>() / m;
    let sd = if lengths.len() > 1 {
        (lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    SweepRecord {
        n,
        beta,
        method,
        coverage: hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64,
        mean_length: mean,
        sd_length: sd,
        reps: hits.len(),
        seed,
    }
}

fn with_pool<T: Send, F: FnOnce() -> T + Send>(workers: Option<usize>, f: F) -> Result<T> {
    match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::param("workers", e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Coverage and length of every configured method on every `(n, β)` cell.
pub fn run_coverage_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    with_pool(cfg.workers, || sweep_inner(cfg))?
}

fn sweep_inner(cfg: &SweepConfig) -> Result<SweepResult> {
    let grid = default_beta_grid(cfg.grid_points);
    let needs_table = cfg.methods.iter().any(|m| matches!(m, Method::Conserv | Method::Onestep));
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut mean_khat = Vec::new();
    for &n in &cfg.ns {
        let table = if needs_table {
            Some(IntervalTable::new(n, cfg.alpha1, cfg.alpha2, &grid)?)
        } else {
            None
        };
        for &beta in &cfg.betas {
            let ctx = CellContext::new(cfg, n, beta, table.as_ref())?;
            let results: Vec<Result<RepOutcome>> = (0..cfg.reps).into_par_iter().map(|rep| ctx.run(rep)).collect();
            let mut ok = Vec::with_capacity(results.len());
            let mut failed = 0;
            let mut first_err = None;
            for r in results {
                match r {
                    Ok(o) => ok.push(o),
                    Err(e) => {
                        failed += 1;
                        first_err.get_or_insert(e);
                    }
                }
            }
            if failed * 100 > cfg.reps {
                let e = first_err.unwrap();
                return Err(Error::Numerical(format!(
                    "{failed} of {} replications failed at n={n}, beta={beta}; first error: {e}",
                    cfg.reps
                )));
            }
            failures.push((n, beta, failed));
            if ok.is_empty() {
                return Err(Error::Numerical(format!("no successful replications at n={n}, beta={beta}")));
            }
            let khats: Vec<f64> = ok.iter().filter_map(|o| o.khat).collect();
            if !khats.is_empty() {
                mean_khat.push((n, beta, khats.iter().sum::<f64>() / khats.len() as f64));
            }
            for &method in &cfg.methods {
                if method == Method::Simulated {
                    records.push(simulated_record(n, beta, &ok, cfg));
                    continue;
                }
                let mut hits = Vec::with_capacity(ok.len());
                let mut lengths = Vec::with_capacity(ok.len());
                for o in &ok {
                    let iv = &o.intervals.iter().find(|(m, _)| *m == method).unwrap().1;
                    hits.push(iv.contains(o.tau));
                    lengths.push(iv.length());
                }
                records.push(summarize(n, beta, method, &hits, &lengths, cfg.seed));
            }
        }
    }
    Ok(SweepResult {
        records,
        failures,
        mean_khat,
    })
}

fn simulated_record(n: usize, beta: f64, ok: &[RepOutcome], cfg: &SweepConfig) -> SweepRecord {
    let mut errs: Vec<f64> = ok.iter().map(|o| o.tau_hat - o.tau).collect();
    errs.sort_by(f64::total_cmp);
    let alpha = cfg.alpha();
    let lo = sorted_quantile(&errs, 0.5 * alpha);
    let hi = sorted_quantile(&errs, 1.0 - 0.5 * alpha);
    let hits: Vec<bool> = errs.iter().map(|&e| lo <= e && e <= hi).collect();
    let mut rec = summarize(n, beta, Method::Simulated, &hits, &[hi - lo], cfg.seed);
    rec.reps = ok.len();
    rec
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub method: Method,
    pub slope: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthScaling {
    pub sweep: SweepResult,
    pub slopes: Vec<SlopeEstimate>,
}

/// Log-log slope of mean interval length on `n` at each method.
pub fn slopes_from_records(records: &[SweepRecord]) -> Vec<SlopeEstimate> {
    let mut by_method: BTreeMap<Method, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        if r.mean_length > 0.0 {
            by_method
                .entry(r.method)
                .or_default()
                .push(((r.n as f64).ln(), r.mean_length.ln()));
        }
    }
    by_method
        .into_iter()
        .filter(|(_, pts)| pts.len() >= 2)
        .map(|(method, pts)| {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let (slope, se) = ols_slope(&x, &y);
            SlopeEstimate { method, slope, se }
        })
        .collect()
}

/// Length-versus-`n` experiment at a single `β`.
pub fn run_length_vs_n(cfg: &SweepConfig) -> Result<LengthScaling> {
    let mut distinct = cfg.ns.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::param("n", "need at least three distinct sample sizes"));
    }
    if cfg.betas.len() != 1 {
        return Err(Error::param("beta", "length scaling runs at a single beta"));
    }
    let mut cfg = cfg.clone();
    if !cfg.methods.contains(&Method::Simulated) {
        cfg.methods.push(Method::Simulated);
    }
    let sweep = run_coverage_sweep(&cfg)?;
    let slopes = slopes_from_records(&sweep.records);
    Ok(LengthScaling { sweep, slopes })
}

/// Multipliers `X_i` for the Berry–Esseen diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Multiplier {
    One,
    /// `1 + Uniform[0, 1]`.
    OnePlusUniform,
}

impl Multiplier {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Multiplier::One => 1.0,
            Multiplier::OnePlusUniform => 1.0 + rng.random::<f64>(),
        }
    }

    /// `(E[X], E[X²])`.
    pub fn moments(&self) -> (f64, f64) {
        match self {
            Multiplier::One => (1.0, 1.0),
            Multiplier::OnePlusUniform => (1.5, 7.0 / 3.0),
        }
    }
}

impl FromStr for Multiplier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(Multiplier::One),
            "uniform" => Ok(Multiplier::OnePlusUniform),
            other => Err(Error::param("multiplier", format!("unknown multiplier `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerryEsseenPoint {
    pub n: usize,
    pub beta: f64,
    pub ks: f64,
}

/// KS distance between draws of `n⁻¹ Σ X_i W_i` and the pointwise law with
/// `κ₁ = E[X]`, `κ₂ = E[X²]`.
pub fn berry_esseen_diagnostic(
    ns: &[usize],
    beta: f64,
    multiplier: Multiplier,
    reps: usize,
    seed: u64,
) -> Result<Vec<BerryEsseenPoint>> {
    if reps == 0 {
        return Err(Error::param("reps", "must be >= 1"));
    }
    let params = IsingParams::new(beta, 0.0)?;
    if beta > 1.0 {
        return Err(Error::param("beta", "diagnostic covers beta in [0, 1]"));
    }
    let (k1, k2) = multiplier.moments();
    ns.iter()
        .map(|&n| {
            let sampler = CurieWeissSampler::new(n, params);
            let draws: Vec<f64> = (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(seed, n, beta, rep));
                    let w = sampler.sample(&mut rng);
                    let s: f64 = w.spins().iter().map(|&s| s as f64 * multiplier.draw(&mut rng)).sum();
                    s / n as f64
                })
                .collect();
            let law = LimitLawParams::new(k1, k2, n, beta)?;
            let regime = Regime::for_beta(beta);
            ln_cdf(0.0, &law, regime)?;
            let ks = ks_distance(&draws, |t| ln_cdf(t, &law, regime).unwrap_or(f64::NAN));
            Ok(BerryEsseenPoint { n, beta, ks })
        })
        .collect()
}

/// Config echo, slopes and timing written next to a CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a SweepConfig,
    pub kernel: String,
    pub records: usize,
    pub failures: &'a [(usize, f64, usize)],
    pub mean_khat: &'a [(usize, f64, f64)],
    pub slopes: Option<&'a [SlopeEstimate]>,
    pub wall_time_secs: f64,
}

impl<'a> Manifest<'a> {
    pub fn new(command: &'a str, config: &'a SweepConfig, result: &'a SweepResult, wall_time_secs: f64) -> Self {
        let kernel = match config.preset.graphon(config.rho).map(|g| g.kernel().clone()) {
            Ok(Kernel::Constant(c)) => format!("constant {c}"),
            Ok(k) => format!("{k:?}").to_lowercase(),
            Err(_) => "invalid".into(),
        };
        Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config,
            kernel,
            records: result.records.len(),
            failures: &result.failures,
            mean_khat: &result.mean_khat,
            slopes: None,
            wall_time_secs,
        }
    }
}
