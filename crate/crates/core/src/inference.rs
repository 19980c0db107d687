//! Robust prediction intervals for `τ_n`: a local linear learner for the
//! response surface, the resampling estimate of the variance bound and the
//! two-step interval that guards against an unknown interaction strength.

use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{hajek, mple, MpleResult};
use crate::graph::{exposures_from, Exposure};
use crate::ising::TreatmentDraw;
use crate::laws::{HnLaw, LimitLawParams, MpleLawSampler};
use crate::outcome::SimDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Epanechnikov,
    Triangular,
    Uniform,
}

impl KernelKind {
    pub fn weight(&self, u: f64) -> f64 {
        let a = u.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self {
            KernelKind::Epanechnikov => 0.75 * (1.0 - a * a),
            KernelKind::Triangular => 1.0 - a,
            KernelKind::Uniform => 0.5,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Epanechnikov => "epanechnikov",
            KernelKind::Triangular => "triangular",
            KernelKind::Uniform => "uniform",
        }
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epanechnikov" => Ok(KernelKind::Epanechnikov),
            "triangular" => Ok(KernelKind::Triangular),
            "uniform" => Ok(KernelKind::Uniform),
            other => Err(Error::param("kernel", format!("unknown kernel `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    pub kernel: KernelKind,
    /// Fixed bandwidth; `None` selects `scale · (n ρ̂)^{-1/5}` clipped to
    /// `[n^{-1/4}, 1]`, with `ρ̂` the observed edge density.
    pub bandwidth: Option<f64>,
    pub bandwidth_scale: f64,
    pub x0: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            kernel: KernelKind::Epanechnikov,
            bandwidth: None,
            bandwidth_scale: 1.5,
            x0: 0.5,
        }
    }
}

impl LearnerConfig {
    pub fn bandwidth_for(&self, n: usize, edge_density: f64) -> f64 {
        if let Some(h) = self.bandwidth {
            return h;
        }
        let nf = n as f64;
        let h = self.bandwidth_scale * (nf * edge_density.max(1.0 / nf)).powf(-0.2);
        h.max(nf.powf(-0.25)).min(1.0)
    }
}

/// Value and slope of each arm's surface at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnedSurface {
    pub value0: f64,
    pub value1: f64,
    pub deriv0: f64,
    pub deriv1: f64,
    pub x0: f64,
    pub bandwidth: f64,
}

impl LearnedSurface {
    /// First-order expansion `f̂(t, x) = value_t + deriv_t (x − x0)`.
    pub fn predict(&self, t: bool, x: f64) -> f64 {
        if t {
            self.value1 + self.deriv1 * (x - self.x0)
        } else {
            self.value0 + self.deriv0 * (x - self.x0)
        }
    }

    pub fn zero(x0: f64) -> Self {
        LearnedSurface {
            value0: 0.0,
            value1: 0.0,
            deriv0: 0.0,
            deriv1: 0.0,
            x0,
            bandwidth: 1.0,
        }
    }
}

/// Weighted least squares of `Y` on `M/N − x0` within one arm. Isolated
/// units carry no exposure and are skipped.
pub fn local_linear_fit(
    dataset: &SimDataset,
    arm: bool,
    x0: f64,
    bandwidth: f64,
    kernel: KernelKind,
) -> Result<(f64, f64)> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::param("bandwidth", format!("must be positive, got {bandwidth}")));
    }
    let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut used = 0usize;
    for i in 0..dataset.n() {
        if dataset.draw.is_treated(i) != arm {
            continue;
        }
        let Some(x) = dataset.exposures[i].frac() else { continue };
        let d = x - x0;
        let w = kernel.weight(d / bandwidth);
        if w <= 0.0 {
            continue;
        }
        used += 1;
        let y = dataset.y[i];
        s0 += w;
        s1 += w * d;
        s2 += w * d * d;
        t0 += w * y;
        t1 += w * d * y;
    }
    let arm_name = if arm { "treated" } else { "control" };
    if used == 0 {
        return Err(Error::EmptySample(format!(
            "no {arm_name} unit has exposure within bandwidth {bandwidth} of {x0}"
        )));
    }
    let det = s0 * s2 - s1 * s1;
    if used < 2 || det <= 1e-12 * s0 * s2.max(f64::MIN_POSITIVE) || s2 == 0.0 {
        return Err(Error::SingularDesign(format!("{arm_name} exposures are collinear")));
    }
    Ok(((s2 * t0 - s1 * t1) / det, (s0 * t1 - s1 * t0) / det))
}

pub fn edge_density(dataset: &SimDataset) -> f64 {
    let n = dataset.n();
    if n < 2 {
        return 0.0;
    }
    2.0 * dataset.graph.num_edges() as f64 / (n as f64 * (n as f64 - 1.0))
}

pub fn fit_surface(dataset: &SimDataset, cfg: &LearnerConfig) -> Result<LearnedSurface> {
    let h = cfg.bandwidth_for(dataset.n(), edge_density(dataset));
    let (value0, deriv0) = local_linear_fit(dataset, false, cfg.x0, h, cfg.kernel)?;
    let (value1, deriv1) = local_linear_fit(dataset, true, cfg.x0, h, cfg.kernel)?;
    Ok(LearnedSurface {
        value0,
        value1,
        deriv0,
        deriv1,
        x0: cfg.x0,
        bandwidth: h,
    })
}

/// `ε̂_i = Y_i − f̂(T_i, M_i/N_i)`; isolated units are evaluated at
/// `isolated_exposure`.
pub fn residuals(dataset: &SimDataset, surface: &LearnedSurface, isolated_exposure: f64) -> Vec<f64> {
    (0..dataset.n())
        .map(|i| {
            let x = dataset.exposures[i].frac_or(isolated_exposure);
            dataset.y[i] - surface.predict(dataset.draw.is_treated(i), x)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaEstimate {
    pub khat: f64,
    /// Bound passed to the interval construction, `√K̂`.
    pub kn_bound: f64,
}

/// Resampling estimate `K̂_n` given the independent fair-coin assignment
/// `t_star`.
pub fn kappa2_resample_with(
    dataset: &SimDataset,
    surface: &LearnedSurface,
    t_star: &[bool],
    isolated_exposure: f64,
) -> Result<KappaEstimate> {
    let n = dataset.n();
    let graph = &dataset.graph;
    let ex = exposures_from(graph, t_star)?;
    let eps = residuals(dataset, surface, isolated_exposure);
    let term = |j: usize, e: Exposure| {
        let x = e.frac_or(isolated_exposure);
        if t_star[j] {
            2.0 * (surface.predict(true, x) + eps[j])
        } else {
            -2.0 * (surface.predict(false, x) + eps[j])
        }
    };
    let a: Vec<f64> = (0..n).map(|j| term(j, ex[j])).collect();
    let total: f64 = a.iter().sum();
    let nf = n as f64;
    let tau_a: Vec<f64> = a.iter().map(|ai| (total - ai) / nf).collect();
    let tau_b: Vec<f64> = (0..n)
        .map(|i| {
            let mut s = total;
            for &j in graph.neighbors(i) {
                let mut e = ex[j];
                e.n -= 1;
                if t_star[i] {
                    e.m -= 1;
                }
                s += term(j, e) - a[j];
            }
            s / nf
        })
        .collect();
    let mean_a = tau_a.iter().sum::<f64>() / nf;
    let mean_b = tau_b.iter().sum::<f64>() / nf;
    let khat = nf
        * tau_a
            .iter()
            .zip(&tau_b)
            .map(|(x, y)| (x - mean_a + y - mean_b).powi(2))
            .sum::<f64>();
    if !khat.is_finite() {
        return Err(Error::Numerical("resampled variance is not finite".into()));
    }
    Ok(KappaEstimate {
        khat,
        kn_bound: khat.sqrt(),
    })
}

pub fn kappa2_resample<R: Rng + ?Sized>(
    dataset: &SimDataset,
    surface: &LearnedSurface,
    isolated_exposure: f64,
    rng: &mut R,
) -> Result<KappaEstimate> {
    let t_star: Vec<bool> = (0..dataset.n()).map(|_| rng.random::<bool>()).collect();
    kappa2_resample_with(dataset, surface, &t_star, isolated_exposure)
}

/// `k + 1` equally spaced points on `[0, 1]`.
pub fn default_beta_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2);
    (0..points).map(|k| k as f64 / (points - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionInterval {
    pub tau_hat: f64,
    pub lo: f64,
    pub hi: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Retained grid points; the whole grid for the one-step variant.
    pub beta_set: Vec<f64>,
    /// Set when no grid point survived the first step.
    pub fallback: bool,
}

impl PredictionInterval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

fn check_levels(alpha1: f64, alpha2: f64) -> Result<()> {
    if !(alpha1 > 0.0 && alpha1 < 1.0) {
        return Err(Error::param("alpha1", format!("must lie in (0, 1), got {alpha1}")));
    }
    if !(alpha2 > 0.0 && alpha2 < 1.0) {
        return Err(Error::param("alpha2", format!("must lie in (0, 1), got {alpha2}")));
    }
    if alpha1 + alpha2 >= 1.0 {
        return Err(Error::param("alpha2", "alpha1 + alpha2 must be below 1"));
    }
    Ok(())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|b| !(0.0..=1.0).contains(b)) {
        return Err(Error::param("grid", "need a nonempty set of values in [0, 1]"));
    }
    Ok(())
}

/// Per-grid quantities that depend only on `(n, α₁, α₂)`: the `α₁`-quantile
/// of the pseudo-likelihood law and the `H_n` quantiles with
/// `(κ₁, κ₂) = (1, 1)`. Quantiles for `(K, K²)` are `K` times these.
#[derive(Debug, Clone)]
pub struct IntervalTable {
    pub n: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub grid: Vec<f64>,
    pub mple_q: Vec<f64>,
    pub unit_lo: Vec<f64>,
    pub unit_hi: Vec<f64>,
}

impl IntervalTable {
    pub fn new(n: usize, alpha1: f64, alpha2: f64, grid: &[f64]) -> Result<Self> {
        Self::with_sampler(n, alpha1, alpha2, grid, MpleLawSampler::shared_default())
    }

    pub fn with_sampler(n: usize, alpha1: f64, alpha2: f64, grid: &[f64], sampler: &MpleLawSampler) -> Result<Self> {
        check_levels(alpha1, alpha2)?;
        check_grid(grid)?;
        if n < 2 {
            return Err(Error::param("n", "need at least two units"));
        }
        let rows: Vec<(f64, f64, f64)> = grid
            .par_iter()
            .map(|&beta| -> Result<(f64, f64, f64)> {
                let c = (n as f64).sqrt() * (1.0 - beta);
                let q = sampler.quantile(alpha1, c, n)?;
                let law = HnLaw::new(&LimitLawParams::new(1.0, 1.0, n, beta)?)?;
                Ok((q, law.quantile(0.5 * alpha2)?, law.quantile(1.0 - 0.5 * alpha2)?))
            })
            .collect::<Result<_>>()?;
        Ok(IntervalTable {
            n,
            alpha1,
            alpha2,
            grid: grid.to_vec(),
            mple_q: rows.iter().map(|r| r.0).collect(),
            unit_lo: rows.iter().map(|r| r.1).collect(),
            unit_hi: rows.iter().map(|r| r.2).collect(),
        })
    }

    /// Indices of grid points with `1 − β̂ ≥ q(β)`.
    pub fn confidence_indices(&self, beta_hat: f64) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&k| 1.0 - beta_hat >= self.mple_q[k])
            .collect()
    }

    fn interval_over(&self, tau_hat: f64, kn: f64, idx: &[usize], fallback: bool) -> PredictionInterval {
        let hi = idx.iter().map(|&k| self.unit_hi[k]).fold(f64::NEG_INFINITY, f64::max);
        let lo = idx.iter().map(|&k| self.unit_lo[k]).fold(f64::INFINITY, f64::min);
        PredictionInterval {
            tau_hat,
            lo: tau_hat + kn * lo,
            hi: tau_hat + kn * hi,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            beta_set: idx.iter().map(|&k| self.grid[k]).collect(),
            fallback,
        }
    }

    /// Two-step interval: confidence set for `β` from `β̂`, then the widest
    /// `H_n` quantiles over it.
    pub fn interval(&self, tau_hat: f64, beta_hat: f64, kn: f64) -> Result<PredictionInterval> {
        if !(kn.is_finite() && kn >= 0.0) {
            return Err(Error::param("kn", format!("must be finite and >= 0, got {kn}")));
        }
        let idx = self.confidence_indices(beta_hat);
        if idx.is_empty() {
            let all: Vec<usize> = (0..self.grid.len()).collect();
            return Ok(self.interval_over(tau_hat, kn, &all, true));
        }
        Ok(self.interval_over(tau_hat, kn, &idx, false))
    }

    /// The one-step variant that skips the confidence set.
    pub fn interval_full_grid(&self, tau_hat: f64, kn: f64) -> Result<PredictionInterval> {
        if !(kn.is_finite() && kn >= 0.0) {
            return Err(Error::param("kn", format!("must be finite and >= 0, got {kn}")));
        }
        let all: Vec<usize> = (0..self.grid.len()).collect();
        Ok(self.interval_over(tau_hat, kn, &all, false))
    }
}

/// Grid points retained by the first step.
pub fn beta_confidence_set(beta_hat: &MpleResult, alpha1: f64, n: usize, grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(grid)?;
    if !(alpha1 > 0.0 && alpha1 < 1.0) {
        return Err(Error::param("alpha1", format!("must lie in (0, 1), got {alpha1}")));
    }
    let sampler = MpleLawSampler::shared_default();
    grid.par_iter()
        .map(|&beta| -> Result<Option<f64>> {
            let c = (n as f64).sqrt() * (1.0 - beta);
            let q = sampler.quantile(alpha1, c, n)?;
            Ok((1.0 - beta_hat.beta_hat >= q).then_some(beta))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

/// Interval from the observed data and a known bound `K_n`.
pub fn infeasible_interval(
    t: &TreatmentDraw,
    y: &[f64],
    kn: f64,
    alpha1: f64,
    alpha2: f64,
    grid: &[f64],
) -> Result<PredictionInterval> {
    let table = IntervalTable::new(t.n(), alpha1, alpha2, grid)?;
    infeasible_interval_with_table(t, y, kn, &table)
}

pub fn infeasible_interval_with_table(
    t: &TreatmentDraw,
    y: &[f64],
    kn: f64,
    table: &IntervalTable,
) -> Result<PredictionInterval> {
    if table.n != t.n() {
        return Err(Error::DimensionMismatch {
            expected: table.n,
            got: t.n(),
        });
    }
    let tau_hat = hajek(t, y)?;
    let m = mple(t)?;
    table.interval(tau_hat, m.beta_hat, kn)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleResult {
    pub interval: PredictionInterval,
    pub surface: LearnedSurface,
    pub kappa: KappaEstimate,
    pub mple: MpleResult,
    /// `n ρ̂³` is small, so the resampling bound may be unreliable.
    pub sparse_warning: bool,
}

/// Learner, resampling bound and two-step interval in sequence.
pub fn feasible_interval<R: Rng + ?Sized>(
    dataset: &SimDataset,
    table: &IntervalTable,
    learner: &LearnerConfig,
    isolated_exposure: f64,
    rng: &mut R,
) -> Result<FeasibleResult> {
    let surface = fit_surface(dataset, learner)?;
    feasible_interval_with_surface(dataset, table, surface, isolated_exposure, rng)
}

pub fn feasible_interval_with_surface<R: Rng + ?Sized>(
    dataset: &SimDataset,
    table: &IntervalTable,
    surface: LearnedSurface,
    isolated_exposure: f64,
    rng: &mut R,
) -> Result<FeasibleResult> {
    let kappa = kappa2_resample(dataset, &surface, isolated_exposure, rng)?;
    let interval = infeasible_interval_with_table(&dataset.draw, &dataset.y, kappa.kn_bound, table)?;
    let rho = edge_density(dataset);
    Ok(FeasibleResult {
        interval,
        surface,
        kappa,
        mple: mple(&dataset.draw)?,
        sparse_warning: dataset.n() as f64 * rho.powi(3) < 10.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, GraphonSpec, Kernel};
    use crate::ising::{CurieWeissSampler, IsingParams};
    use crate::outcome::{realize_outcomes, simulate_dataset, OutcomeSpec, Preset, Surface};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dataset_from(graph: Graph, t: Vec<bool>, spec: &OutcomeSpec) -> SimDataset {
        let n = t.len();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        realize_outcomes(spec, vec![0.5; n], graph, TreatmentDraw::from_treatments(t), &mut rng).unwrap()
    }

    #[test]
    fn exact_linear_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = OutcomeSpec::new(Surface::Custom(std::sync::Arc::new(|t, x| if t { 2.0 + 3.0 * x } else { -1.0 + 0.5 * x })), 0.0).unwrap();
        let sampler = CurieWeissSampler::new(80, IsingParams::new(0.0, 0.0).unwrap());
        let d = simulate_dataset(&GraphonSpec::new(0.3, Kernel::Smooth).unwrap(), &spec, &sampler, &mut rng).unwrap();
        for kernel in [KernelKind::Epanechnikov, KernelKind::Triangular, KernelKind::Uniform] {
            for &h in &[0.3, 1.0] {
                let (v1, d1) = local_linear_fit(&d, true, 0.5, h, kernel).unwrap();
                let (v0, d0) = local_linear_fit(&d, false, 0.5, h, kernel).unwrap();
                assert!((v1 - 3.5).abs() < 1e-10 && (d1 - 3.0).abs() < 1e-9);
                assert!((v0 + 0.75).abs() < 1e-10 && (d0 - 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_outcome_has_flat_fit() {
        let spec = OutcomeSpec::new(Surface::Custom(std::sync::Arc::new(|_, _| 4.0)), 0.0).unwrap();
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2), (1, 3)]).unwrap();
        let d = dataset_from(g, vec![true, false, true, false, true, true], &spec);
        let (v, s) = local_linear_fit(&d, true, 0.5, 1.0, KernelKind::Uniform).unwrap();
        assert!((v - 4.0).abs() < 1e-12 && s.abs() < 1e-12);
    }

    #[test]
    fn degenerate_designs() {
        let spec = OutcomeSpec::new(Surface::Quadratic, 0.0).unwrap();
        let d = dataset_from(Graph::complete(4), vec![true, true, false, false], &spec);
        // treated units both see exposure 1/3
        assert!(matches!(local_linear_fit(&d, true, 0.5, 1.0, KernelKind::Uniform), Err(Error::SingularDesign(_))));
        assert!(matches!(local_linear_fit(&d, true, 0.9, 0.01, KernelKind::Uniform), Err(Error::EmptySample(_))));
    }

    #[test]
    fn residuals_shift_with_outcomes() {
        let spec = OutcomeSpec::new(Surface::Quadratic, 0.0).unwrap();
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let mut d = dataset_from(g, vec![true, false, true, false], &spec);
        let s = LearnedSurface {
            value0: 0.0,
            value1: 3.25,
            deriv0: 0.0,
            deriv1: 3.0,
            x0: 0.5,
            bandwidth: 1.0,
        };
        let r = residuals(&d, &s, 0.5);
        // unit 0: x = 0, f = 2, prediction 3.25 - 1.5
        assert!((r[0] - (2.0 - 1.75)).abs() < 1e-15);
        // unit 2: x = 0, same
        assert!((r[2] - 0.25).abs() < 1e-15);
        assert_eq!(r[1], 0.0);
        for y in d.y.iter_mut() {
            *y += 2.0;
        }
        let r2 = residuals(&d, &s, 0.5);
        for (a, b) in r.iter().zip(&r2) {
            assert!((b - a - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_surface_gives_zero_khat() {
        let spec = OutcomeSpec::new(Surface::Linear { a: 0.0, b: 0.0 }, 0.0).unwrap();
        let d = dataset_from(Graph::complete(6), vec![true, false, true, false, true, false], &spec);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = kappa2_resample(&d, &LearnedSurface::zero(0.5), 0.5, &mut rng).unwrap();
        assert_eq!(k.khat, 0.0);
    }

    #[test]
    fn khat_hand_computation_on_four_units() {
        // f(t, x) = t without noise on the complete graph: every a_j is
        // 2 T*_j and the neighbourhood terms cancel because the surface
        // ignores exposure
        let spec = OutcomeSpec::new(Surface::Linear { a: 1.0, b: 0.0 }, 0.0).unwrap();
        let d = dataset_from(Graph::complete(4), vec![true, false, true, false], &spec);
        let s = LearnedSurface {
            value0: 0.0,
            value1: 1.0,
            deriv0: 0.0,
            deriv1: 0.0,
            x0: 0.5,
            bandwidth: 1.0,
        };
        let t_star = [true, true, false, true];
        let k = kappa2_resample_with(&d, &s, &t_star, 0.5).unwrap();
        // τᵃ_(i) − τ̄ᵃ = −(a_i − ā)/n with a = (2, 2, 0, 2), ā = 1.5,
        // τᵇ is constant; K̂ = n Σ (a_i − ā)² / n² = (3·0.25 + 2.25)/4
        assert!((k.khat - 0.75).abs() < 1e-14);
    }

    #[test]
    fn khat_bounds_oracle_kappa() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let preset = Preset::Quadratic;
        let sampler = CurieWeissSampler::new(400, IsingParams::new(0.0, 0.0).unwrap());
        let d = simulate_dataset(&preset.graphon(0.5).unwrap(), &preset.outcome(), &sampler, &mut rng).unwrap();
        let s = fit_surface(&d, &LearnerConfig::default()).unwrap();
        let k = kappa2_resample(&d, &s, 0.5, &mut rng).unwrap();
        assert!(k.khat >= 2.45, "khat={}", k.khat);
        assert!(k.khat < 40.0);
    }

    #[test]
    fn interval_table_basics() {
        let grid = default_beta_grid(11);
        let t = IntervalTable::new(200, 0.05, 0.05, &grid).unwrap();
        // β̂ = 0 keeps every grid point since the law lives on [0, 1]
        assert_eq!(t.confidence_indices(0.0).len(), grid.len());
        let iv = t.interval(1.0, 0.0, 0.0).unwrap();
        assert_eq!((iv.lo, iv.hi), (1.0, 1.0));
        let iv = t.interval(1.0, 0.2, 2.0).unwrap();
        assert!(iv.lo < 1.0 && iv.hi > 1.0);
        let full = t.interval_full_grid(1.0, 2.0).unwrap();
        assert!(full.lo <= iv.lo && full.hi >= iv.hi);
        assert!(IntervalTable::new(200, 0.6, 0.5, &grid).is_err());
    }

    #[test]
    fn single_point_grid_matches_direct_quantile() {
        let t = IntervalTable::new(300, 0.05, 0.05, &[0.0]).unwrap();
        let iv = t.interval(0.5, 0.0, 1.7).unwrap();
        let law = HnLaw::new(&LimitLawParams::new(1.7, 1.7 * 1.7, 300, 0.0).unwrap()).unwrap();
        assert!((iv.hi - 0.5 - law.quantile(0.975).unwrap()).abs() < 1e-8);
        assert!((iv.lo - 0.5 - law.quantile(0.025).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn smaller_alpha1_never_shrinks_set() {
        let grid = default_beta_grid(21);
        let m = crate::estimators::mple_from_counts(300, 60);
        let big = beta_confidence_set(&m, 0.2, 300, &grid).unwrap();
        let small = beta_confidence_set(&m, 0.05, 300, &grid).unwrap();
        assert!(big.iter().all(|b| small.contains(b)));
    }
}
