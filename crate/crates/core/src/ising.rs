//! Curie–Weiss treatment assignment.
//!
//! Spins are `w_i = 2 t_i - 1` and the joint law is
//! `P(w) ∝ exp((β/n) Σ_{i<j} w_i w_j + h Σ_i w_i)`. The density depends on the
//! configuration only through `S = Σ w_i`, so exact sampling draws `S` from its
//! marginal and then places the treated units uniformly at random.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{log_binomials, log_sum_exp};

/// Interaction strength and external field of a Curie–Weiss model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    beta: f64,
    h: f64,
}

impl IsingParams {
    pub fn new(beta: f64, h: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::param("beta", format!("must be finite and >= 0, got {beta}")));
        }
        if !h.is_finite() {
            return Err(Error::param("h", format!("must be finite, got {h}")));
        }
        Ok(IsingParams { beta, h })
    }

    /// Equiprobable model (`h = 0`).
    pub fn equiprobable(beta: f64) -> Result<Self> {
        Self::new(beta, 0.0)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn h(&self) -> f64 {
        self.h
    }
}

/// Independent Curie–Weiss blocks occupying consecutive unit ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockIsingParams {
    sizes: Vec<usize>,
    params: Vec<IsingParams>,
}

impl BlockIsingParams {
    pub fn new(sizes: Vec<usize>, params: Vec<IsingParams>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::param("sizes", "need at least one block"));
        }
        if sizes.len() != params.len() {
            return Err(Error::param(
                "params",
                format!("{} blocks but {} parameter pairs", sizes.len(), params.len()),
            ));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::param("sizes", "every block needs at least one unit"));
        }
        Ok(BlockIsingParams { sizes, params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[IsingParams] {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    /// Unit index ranges of every block.
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.sizes
            .iter()
            .map(|&s| {
                let r = start..start + s;
                start += s;
                r
            })
            .collect()
    }

    /// Block shares `n_k / n`.
    pub fn shares(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.sizes.iter().map(|&s| s as f64 / n).collect()
    }
}

/// One realized treatment vector with its spins and magnetization.
#[derive(Debug, Clone, PartialEq)]
pub struct TreatmentDraw {
    t: Vec<bool>,
    spins: Vec<i8>,
    spin_sum: i64,
    mag: f64,
    block_mags: Option<Vec<f64>>,
}

impl TreatmentDraw {
    pub fn from_treatments(t: Vec<bool>) -> Self {
        let spins: Vec<i8> = t.iter().map(|&x| if x { 1 } else { -1 }).collect();
        let spin_sum: i64 = spins.iter().map(|&s| s as i64).sum();
        let mag = if t.is_empty() {
            0.0
        } else {
            spin_sum as f64 / t.len() as f64
        };
        TreatmentDraw {
            t,
            spins,
            spin_sum,
            mag,
            block_mags: None,
        }
    }

    pub fn from_spins(spins: &[i8]) -> Self {
        Self::from_treatments(spins.iter().map(|&s| s > 0).collect())
    }

    pub(crate) fn with_block_mags(mut self, mags: Vec<f64>) -> Self {
        self.block_mags = Some(mags);
        self
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn treatments(&self) -> &[bool] {
        &self.t
    }

    pub fn is_treated(&self, i: usize) -> bool {
        self.t[i]
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin_sum(&self) -> i64 {
        self.spin_sum
    }

    pub fn magnetization(&self) -> f64 {
        self.mag
    }

    pub fn num_treated(&self) -> usize {
        ((self.spin_sum + self.n() as i64) / 2) as usize
    }

    /// Per-block magnetizations when the draw came from a block sampler.
    pub fn block_mags(&self) -> Option<&[f64]> {
        self.block_mags.as_deref()
    }

    /// Leave-one-out magnetization `n⁻¹ Σ_{j≠i} w_j`.
    pub fn loo_magnetization(&self, i: usize) -> f64 {
        (self.spin_sum - self.spins[i] as i64) as f64 / self.n() as f64
    }
}

/// Normalized log-probabilities of the spin sum. Entry `k` is the log
/// probability of `k` treated units, i.e. of `S = 2k - n`.
pub fn magnetization_log_pmf(n: usize, params: &IsingParams) -> Vec<f64> {
    assert!(n >= 1, "need at least one unit");
    let lb = log_binomials(n);
    let nf = n as f64;
    let coupling = params.beta / (2.0 * nf);
    let lw: Vec<f64> = (0..=n)
        .map(|k| {
            let s = 2.0 * k as f64 - nf;
            lb[k] + coupling * (s * s - nf) + params.h * s
        })
        .collect();
    let z = log_sum_exp(&lw);
    lw.into_iter().map(|v| v - z).collect()
}

/// Exact sampler with the spin-sum table precomputed.
#[derive(Debug, Clone)]
pub struct CurieWeissSampler {
    n: usize,
    params: IsingParams,
    cdf: Vec<f64>,
}

impl CurieWeissSampler {
    pub fn new(n: usize, params: IsingParams) -> Self {
        let lp = magnetization_log_pmf(n, &params);
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = lp
            .iter()
            .map(|v| {
                acc += v.exp();
                acc
            })
            .collect();
        let total = *cdf.last().unwrap();
        for c in cdf.iter_mut() {
            *c /= total;
        }
        CurieWeissSampler { n, params, cdf }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> IsingParams {
        self.params
    }

    /// Number of treated units.
    pub fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.n)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TreatmentDraw {
        let k = self.sample_count(rng);
        let mut t = vec![false; self.n];
        for i in index::sample(rng, self.n, k) {
            t[i] = true;
        }
        TreatmentDraw::from_treatments(t)
    }
}

pub fn sample_treatments<R: Rng + ?Sized>(n: usize, params: &IsingParams, rng: &mut R) -> TreatmentDraw {
    CurieWeissSampler::new(n, *params).sample(rng)
}

/// Independent per-block draws; block `k` is a Curie–Weiss model on its own
/// `n_k` units with coupling `β_k / n_k`.
pub fn sample_block_treatments<R: Rng + ?Sized>(cfg: &BlockIsingParams, rng: &mut R) -> TreatmentDraw {
    let mut t = Vec::with_capacity(cfg.n());
    let mut mags = Vec::with_capacity(cfg.num_blocks());
    for (&size, params) in cfg.sizes.iter().zip(&cfg.params) {
        let block = sample_treatments(size, params, rng);
        mags.push(block.magnetization());
        t.extend_from_slice(block.treatments());
    }
    TreatmentDraw::from_treatments(t).with_block_mags(mags)
}

/// `P(W_i = 1 | W_{-i}) = (1 + exp(-2β𝓂_i - 2h))⁻¹`.
pub fn conditional_prob(i: usize, draw: &TreatmentDraw, params: &IsingParams) -> f64 {
    conditional_prob_from_field(draw.loo_magnetization(i), params)
}

pub(crate) fn conditional_prob_from_field(loo_mag: f64, params: &IsingParams) -> f64 {
    let x = 2.0 * params.beta * loo_mag + 2.0 * params.h;
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Sampler through the latent-variable representation: given `U`, spins are
/// i.i.d. with `P(W = 1 | U) = (1 + tanh(√(β/n) U + h)) / 2`.
#[derive(Debug, Clone)]
pub struct DeFinettiSampler {
    n: usize,
    params: IsingParams,
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

const LATENT_NODES: usize = 20_001;

impl DeFinettiSampler {
    pub fn new(n: usize, params: IsingParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "need at least one unit"));
        }
        let nf = n as f64;
        let beta = params.beta;
        let scale = if beta < 1.0 {
            (1.0 - beta).powf(-0.5).min(nf.powf(0.25))
        } else {
            1.0
        };
        // the modes satisfy |u| <= sqrt(βn)
        let half_width = 10.0 * nf.powf(0.25) * scale.max(1.0) + (beta * nf).sqrt();
        let coef = (beta / nf).sqrt();
        let step = 2.0 * half_width / (LATENT_NODES - 1) as f64;
        let grid: Vec<f64> = (0..LATENT_NODES).map(|k| -half_width + k as f64 * step).collect();
        let logd: Vec<f64> = grid
            .iter()
            .map(|&u| -0.5 * u * u + nf * log_cosh(coef * u + params.h))
            .collect();
        let max = logd.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Numerical("latent density is not finite".into()));
        }
        let dens: Vec<f64> = logd.iter().map(|v| (v - max).exp()).collect();
        let mut cdf = Vec::with_capacity(LATENT_NODES);
        cdf.push(0.0);
        let mut acc = 0.0;
        for k in 1..LATENT_NODES {
            acc += 0.5 * step * (dens[k - 1] + dens[k]);
            cdf.push(acc);
        }
        if !(acc.is_finite() && acc > 0.0) {
            return Err(Error::Numerical("latent density failed to normalize".into()));
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Ok(DeFinettiSampler { n, params, grid, cdf })
    }

    /// Inverse-CDF draw of the latent variable (linear within a grid cell).
    pub fn sample_latent<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.grid[k - 1] + frac * (self.grid[k] - self.grid[k - 1])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TreatmentDraw {
        let latent = self.sample_latent(rng);
        let field = (self.params.beta / self.n as f64).sqrt() * latent + self.params.h;
        let p = 0.5 * (1.0 + field.tanh());
        let t: Vec<bool> = (0..self.n).map(|_| rng.random::<f64>() < p).collect();
        TreatmentDraw::from_treatments(t)
    }
}

pub fn definetti_sample<R: Rng + ?Sized>(n: usize, params: &IsingParams, rng: &mut R) -> Result<TreatmentDraw> {
    Ok(DeFinettiSampler::new(n, *params)?.sample(rng))
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Solutions of `x = tanh(βx + h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixedPoints {
    Unique(f64),
    /// Low-temperature pair (`h = 0`, `β > 1`).
    Pair { minus: f64, plus: f64 },
}

impl FixedPoints {
    /// The root selected by a magnetization sign (`true` for `+`).
    pub fn select(&self, positive: bool) -> f64 {
        match *self {
            FixedPoints::Unique(p) => p,
            FixedPoints::Pair { minus, plus } => {
                if positive {
                    plus
                } else {
                    minus
                }
            }
        }
    }
}

pub fn solve_fixed_points(params: &IsingParams) -> FixedPoints {
    let (beta, h) = (params.beta, params.h);
    let g = |x: f64| x - (beta * x + h).tanh();
    if h == 0.0 {
        if beta <= 1.0 {
            return FixedPoints::Unique(0.0);
        }
        let plus = bisect_root(g, 1e-9, 1.0);
        return FixedPoints::Pair { minus: -plus, plus };
    }
    // the root sharing the sign of h is the global one
    if h > 0.0 {
        FixedPoints::Unique(bisect_root(g, 0.0, 1.0))
    } else {
        FixedPoints::Unique(bisect_root(g, -1.0, 0.0))
    }
}

fn bisect_root<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-15 {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
