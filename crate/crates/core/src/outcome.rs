//! Potential outcomes, simulated datasets and oracle quantities computed
//! from the true response surface.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::{exposures, generate_graph, sample_traits, Exposure, Graph, GraphonSpec, Kernel};
use crate::ising::{magnetization_log_pmf, CurieWeissSampler, IsingParams, TreatmentDraw};
use crate::numeric::{log_factorials, GaussLegendre};

/// Base response surface `f(t, x)`.
#[derive(Clone)]
pub enum Surface {
    /// `f(t, x) = t² + t (x + 1)²`.
    Quadratic,
    /// `f(t, x) = t (1 + x/2) + sin(x)`.
    Smooth,
    /// `f(t, x) = a t + b x`.
    Linear { a: f64, b: f64 },
    Custom(Arc<dyn Fn(bool, f64) -> f64 + Send + Sync>),
}

impl Surface {
    pub fn value(&self, t: bool, x: f64) -> f64 {
        let tf = if t { 1.0 } else { 0.0 };
        match self {
            Surface::Quadratic => tf * tf + tf * (x + 1.0).powi(2),
            Surface::Smooth => tf * (1.0 + 0.5 * x) + x.sin(),
            Surface::Linear { a, b } => a * tf + b * x,
            Surface::Custom(f) => f(t, x),
        }
    }

    /// `∂f/∂x`, by central differences for custom surfaces.
    pub fn deriv(&self, t: bool, x: f64) -> f64 {
        let tf = if t { 1.0 } else { 0.0 };
        match self {
            Surface::Quadratic => 2.0 * tf * (x + 1.0),
            Surface::Smooth => 0.5 * tf + x.cos(),
            Surface::Linear { b, .. } => *b,
            Surface::Custom(f) => {
                let h = 1e-5;
                (f(t, x + h) - f(t, x - h)) / (2.0 * h)
            }
        }
    }

    /// `f(1, x) - f(0, x)`.
    pub fn contrast(&self, x: f64) -> f64 {
        self.value(true, x) - self.value(false, x)
    }
}

impl fmt::Debug for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Surface::Quadratic => write!(f, "Quadratic"),
            Surface::Smooth => write!(f, "Smooth"),
            Surface::Linear { a, b } => write!(f, "Linear {{ a: {a}, b: {b} }}"),
            Surface::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutcomeSpec {
    pub surface: Surface,
    pub noise_sd: f64,
    pub smoothness: u32,
    /// Exposure used for units without neighbours.
    pub isolated_exposure: f64,
}

impl OutcomeSpec {
    pub fn new(surface: Surface, noise_sd: f64) -> Result<Self> {
        if !(noise_sd.is_finite() && noise_sd >= 0.0) {
            return Err(Error::param("noise_sd", format!("must be finite and >= 0, got {noise_sd}")));
        }
        Ok(OutcomeSpec {
            surface,
            noise_sd,
            smoothness: 4,
            isolated_exposure: 0.5,
        })
    }

    pub fn with_isolated_exposure(mut self, x: f64) -> Self {
        self.isolated_exposure = x;
        self
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_sd * self.noise_sd
    }
}

/// Named data-generating processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Quadratic surface, noise variance 0.05, `G ≡ 0.5`, `ρ = 0.5`.
    Quadratic,
    /// Smooth surface, noise sd 0.2, smooth kernel, `ρ = 0.5`.
    Smooth,
}

impl Preset {
    pub fn parse(name: &str) -> Option<Preset> {
        match name {
            "quadratic" => Some(Preset::Quadratic),
            "smooth" => Some(Preset::Smooth),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Quadratic => "quadratic",
            Preset::Smooth => "smooth",
        }
    }

    pub fn outcome(&self) -> OutcomeSpec {
        match self {
            Preset::Quadratic => OutcomeSpec::new(Surface::Quadratic, 0.05f64.sqrt()).unwrap(),
            Preset::Smooth => OutcomeSpec::new(Surface::Smooth, 0.2).unwrap(),
        }
    }

    pub fn graphon(&self, rho: f64) -> Result<GraphonSpec> {
        match self {
            Preset::Quadratic => GraphonSpec::new(rho, Kernel::Constant(0.5)),
            Preset::Smooth => GraphonSpec::new(rho, Kernel::Smooth),
        }
    }
}

/// One replication of the full data-generating process.
#[derive(Debug, Clone)]
pub struct SimDataset {
    pub traits: Vec<f64>,
    pub graph: Graph,
    pub draw: TreatmentDraw,
    pub y: Vec<f64>,
    pub exposures: Vec<Exposure>,
    pub eps: Vec<f64>,
    /// Number of isolated units that received the fallback exposure.
    pub isolated: usize,
}

impl SimDataset {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Exposure fractions with isolated units replaced by `fallback`.
    pub fn fracs(&self, fallback: f64) -> Vec<f64> {
        self.exposures.iter().map(|e| e.frac_or(fallback)).collect()
    }

    /// CSV with columns `unit,U,T,Y,M,N`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "unit,U,T,Y,M,N")?;
        for i in 0..self.n() {
            writeln!(
                out,
                "{},{:e},{},{:e},{},{}",
                i,
                self.traits[i],
                u8::from(self.draw.is_treated(i)),
                self.y[i],
                self.exposures[i].m,
                self.exposures[i].n
            )?;
        }
        Ok(())
    }

    /// Reads a dataset dump together with its graph. Exposures are
    /// recomputed from the graph and must match the `M` and `N` columns.
    pub fn read_csv<R: BufRead>(input: R, graph: Graph) -> Result<SimDataset> {
        let mut lines = input.lines().enumerate();
        let header = match lines.next() {
            Some((_, l)) => l?,
            None => return Err(Error::Data("dataset is empty".into())),
        };
        let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
        if cols != ["unit", "U", "T", "Y", "M", "N"] {
            return Err(Error::Data(format!("unexpected dataset header `{}`", header.trim())));
        }
        let (mut traits, mut t, mut y, mut mn) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 6 {
                return Err(Error::Data(format!("line {lineno}: expected 6 fields, found {}", f.len())));
            }
            let bad = |name: &str| Error::Data(format!("line {lineno}: cannot parse column {name}"));
            let unit: usize = f[0].parse().map_err(|_| bad("unit"))?;
            if unit != traits.len() {
                return Err(Error::Data(format!("line {lineno}: units must be listed as 0, 1, 2, ...")));
            }
            traits.push(f[1].parse::<f64>().map_err(|_| bad("U"))?);
            t.push(match f[2] {
                "1" => true,
                "0" => false,
                _ => return Err(bad("T")),
            });
            y.push(f[3].parse::<f64>().map_err(|_| bad("Y"))?);
            mn.push((
                f[4].parse::<usize>().map_err(|_| bad("M"))?,
                f[5].parse::<usize>().map_err(|_| bad("N"))?,
            ));
        }
        let d = SimDataset::from_observed(traits, graph, TreatmentDraw::from_treatments(t), y)?;
        for (i, (e, &(m, n))) in d.exposures.iter().zip(&mn).enumerate() {
            if e.m != m || e.n != n {
                return Err(Error::Data(format!("unit {i}: M/N columns disagree with the edge list")));
            }
        }
        Ok(d)
    }

    /// Dataset from observed quantities; exposures come from the graph and
    /// the noise is unknown (NaN).
    pub fn from_observed(traits: Vec<f64>, graph: Graph, draw: TreatmentDraw, y: Vec<f64>) -> Result<SimDataset> {
        let n = y.len();
        if graph.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: graph.n(),
            });
        }
        if draw.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: draw.n(),
            });
        }
        if traits.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: traits.len(),
            });
        }
        let exposures = exposures(&graph, &draw)?;
        let isolated = exposures.iter().filter(|e| !e.is_defined()).count();
        Ok(SimDataset {
            traits,
            graph,
            draw,
            y,
            exposures,
            eps: vec![f64::NAN; n],
            isolated,
        })
    }
}

/// Draws noise and evaluates `Y_i = f(T_i, M_i/N_i) + ε_i`.
pub fn realize_outcomes<R: Rng + ?Sized>(
    spec: &OutcomeSpec,
    traits: Vec<f64>,
    graph: Graph,
    draw: TreatmentDraw,
    rng: &mut R,
) -> Result<SimDataset> {
    let n = draw.n();
    if traits.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: traits.len(),
        });
    }
    let exposures = exposures(&graph, &draw)?;
    let eps: Vec<f64> = if spec.noise_sd > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::param("noise_sd", e.to_string()))?;
        (0..n).map(|_| normal.sample(rng)).collect()
    } else {
        vec![0.0; n]
    };
    let mut isolated = 0;
    let y = (0..n)
        .map(|i| {
            let x = exposures[i].frac().unwrap_or_else(|| {
                isolated += 1;
                spec.isolated_exposure
            });
            spec.surface.value(draw.is_treated(i), x) + eps[i]
        })
        .collect();
    Ok(SimDataset {
        traits,
        graph,
        draw,
        y,
        exposures,
        eps,
        isolated,
    })
}

/// Traits, graph, treatments and outcomes in one go.
pub fn simulate_dataset<R: Rng + ?Sized>(
    graphon: &GraphonSpec,
    outcome: &OutcomeSpec,
    sampler: &CurieWeissSampler,
    rng: &mut R,
) -> Result<SimDataset> {
    let traits = sample_traits(sampler.n(), rng);
    let graph = generate_graph(graphon, &traits, rng)?;
    let draw = sampler.sample(rng);
    realize_outcomes(outcome, traits, graph, draw, rng)
}

/// Monte Carlo value of the predictand with its standard error (zero for the
/// exact route).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauEstimate {
    pub value: f64,
    pub se: f64,
}

/// Inner Monte Carlo for `τ_n = n⁻¹ Σ_i E[f(1, M_i/N_i) − f(0, M_i/N_i) | f, E]`
/// over fresh assignments. With `condition = Some(positive)` only draws with
/// `sgn(𝓂)` equal to the requested sign are kept (`𝓂 = 0` counts as
/// positive).
pub fn oracle_tau<R: Rng + ?Sized>(
    spec: &OutcomeSpec,
    graph: &Graph,
    params: &IsingParams,
    reps: usize,
    rng: &mut R,
    condition: Option<bool>,
) -> Result<TauEstimate> {
    if reps == 0 {
        return Err(Error::param("reps", "need at least one inner draw"));
    }
    let n = graph.n();
    let sampler = CurieWeissSampler::new(n, *params);
    let mut vals = Vec::with_capacity(reps);
    let mut attempts = 0usize;
    while vals.len() < reps {
        attempts += 1;
        if attempts > 100 * reps {
            return Err(Error::InfeasibleConditioning(format!(
                "sign {} not reached in {attempts} draws",
                if condition == Some(true) { "+" } else { "-" }
            )));
        }
        let draw = sampler.sample(rng);
        if let Some(positive) = condition {
            if (draw.spin_sum() >= 0) != positive {
                continue;
            }
        }
        let ex = exposures(graph, &draw)?;
        let v = ex
            .iter()
            .map(|e| spec.surface.contrast(e.frac_or(spec.isolated_exposure)))
            .sum::<f64>()
            / n as f64;
        vals.push(v);
    }
    let m = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / m;
    let se = if vals.len() > 1 {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt()
    } else {
        f64::NAN
    };
    Ok(TauEstimate { value: mean, se })
}

/// Exact `τ_n` by summing over the law of the treated count. Given `k`
/// treated units, the assignment is a uniform `k`-subset, so a unit with `d`
/// neighbours sees a hypergeometric number of treated neighbours.
#[derive(Debug, Clone)]
pub struct ExactTau {
    n: usize,
    log_fact: Vec<f64>,
    /// `(k, P(K = k))` for the retained treated counts.
    weights: Vec<(usize, f64)>,
}

impl ExactTau {
    pub fn new(n: usize, params: &IsingParams, condition: Option<bool>) -> Result<Self> {
        let lp = magnetization_log_pmf(n, params);
        let mut weights: Vec<(usize, f64)> = lp
            .iter()
            .enumerate()
            .filter(|&(k, _)| match condition {
                Some(true) => 2 * k >= n,
                Some(false) => 2 * k < n,
                None => true,
            })
            .map(|(k, v)| (k, v.exp()))
            .collect();
        let total: f64 = weights.iter().map(|w| w.1).sum();
        if total <= 0.0 {
            return Err(Error::InfeasibleConditioning("requested sign has zero probability".into()));
        }
        let max = weights.iter().map(|w| w.1).fold(0.0, f64::max);
        weights.retain(|w| w.1 > max * 1e-16);
        let total: f64 = weights.iter().map(|w| w.1).sum();
        for w in weights.iter_mut() {
            w.1 /= total;
        }
        Ok(ExactTau {
            n,
            log_fact: log_factorials(n),
            weights,
        })
    }

    /// `E[g(M/d)]` for a unit with `d ≥ 1` neighbours.
    pub fn expect_frac<G: Fn(f64) -> f64>(&self, d: usize, g: G) -> f64 {
        let n = self.n;
        let lf = &self.log_fact;
        let ln_choose = |a: usize, b: usize| lf[a] - lf[b] - lf[a - b];
        let denom = ln_choose(n, d);
        let mut total = 0.0;
        for &(k, w) in &self.weights {
            let lo = d.saturating_sub(n - k);
            let hi = d.min(k);
            let mean = d as f64 * k as f64 / n as f64;
            let sd = (mean * (1.0 - k as f64 / n as f64)).sqrt();
            let span = 9.0 * sd + 3.0;
            let lo = lo.max((mean - span).floor().max(0.0) as usize);
            let hi = hi.min((mean + span).ceil() as usize);
            let mut inner = 0.0;
            let mut mass = 0.0;
            for m in lo..=hi {
                let p = (ln_choose(k, m) + ln_choose(n - k, d - m) - denom).exp();
                inner += p * g(m as f64 / d as f64);
                mass += p;
            }
            if mass > 0.0 {
                total += w * inner / mass;
            }
        }
        total
    }

    pub fn tau(&self, spec: &OutcomeSpec, graph: &Graph) -> Result<f64> {
        if graph.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: graph.n(),
            });
        }
        let degrees = graph.degrees();
        let max_deg = degrees.iter().copied().max().unwrap_or(0);
        let mut by_degree = vec![None; max_deg + 1];
        let isolated = spec.surface.contrast(spec.isolated_exposure);
        let mut sum = 0.0;
        for d in degrees {
            sum += if d == 0 {
                isolated
            } else {
                *by_degree[d].get_or_insert_with(|| self.expect_frac(d, |x| spec.surface.contrast(x)))
            };
        }
        Ok(sum / self.n as f64)
    }
}

pub fn oracle_tau_exact(
    spec: &OutcomeSpec,
    graph: &Graph,
    params: &IsingParams,
    condition: Option<bool>,
) -> Result<f64> {
    ExactTau::new(graph.n(), params, condition)?.tau(spec, graph)
}

/// First two moments of the influence term `R_i − E[R_i] + Q_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleKappas {
    pub kappa1: f64,
    pub kappa2: f64,
}

/// `q(u) = E[G(u, U_j) / g(U_j)]` with `g(v) = E[G(U, v)]`, tabulated on
/// Gauss–Legendre nodes of the unit interval.
fn kernel_ratio_moments(kernel: &Kernel) -> (f64, f64) {
    if kernel.is_constant() {
        return (1.0, 1.0);
    }
    let gl = GaussLegendre::new(64);
    let nodes: Vec<f64> = gl.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let w: Vec<f64> = gl.weights.iter().map(|w| 0.5 * w).collect();
    let marg: Vec<f64> = nodes
        .iter()
        .map(|&v| nodes.iter().zip(&w).map(|(&u, &wu)| wu * kernel.eval(u, v)).sum())
        .collect();
    let q: Vec<f64> = nodes
        .iter()
        .map(|&u| {
            nodes
                .iter()
                .zip(&w)
                .zip(&marg)
                .map(|((&v, &wv), &g)| wv * kernel.eval(u, v) / g)
                .sum()
        })
        .collect();
    let m1 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
    let m2 = q.iter().zip(&w).map(|(a, b)| a * a * b).sum();
    (m1, m2)
}

/// Oracle `(κ₁, κ₂)` at fixed point `π` (`π = 0` in the high-temperature
/// regime). With `x* = (1 + π)/2`,
/// `R = f(1, x*)/(1+π) + f(0, x*)/(1−π)` carries the noise twice and
/// `Q_i = ½ q(U_i) (∂f(1, x*) − ∂f(0, x*))`.
pub fn oracle_kappas(spec: &OutcomeSpec, kernel: &Kernel, pi: f64) -> Result<OracleKappas> {
    if !(pi > -1.0 && pi < 1.0) {
        return Err(Error::param("pi", format!("must lie in (-1, 1), got {pi}")));
    }
    let x = 0.5 * (1.0 + pi);
    let slope = 0.5 * (spec.surface.deriv(true, x) - spec.surface.deriv(false, x));
    let (q1, q2) = kernel_ratio_moments(kernel);
    let noise_scale = 1.0 / (1.0 + pi) + 1.0 / (1.0 - pi);
    let var_r = noise_scale * noise_scale * spec.noise_var();
    Ok(OracleKappas {
        kappa1: slope * q1,
        kappa2: var_r + slope * slope * q2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_surface_values() {
        let s = Surface::Quadratic;
        assert_eq!(s.value(true, 0.5), 3.25);
        assert_eq!(s.value(false, 0.5), 0.0);
        assert_eq!(s.deriv(true, 0.5) - s.deriv(false, 0.5), 3.0);
        let c = Surface::Custom(Arc::new(|t, x| if t { x * x } else { 0.0 }));
        assert!((c.deriv(true, 0.5) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn benchmark_kappas() {
        let k = oracle_kappas(&Preset::Quadratic.outcome(), &Kernel::Constant(0.5), 0.0).unwrap();
        assert!((k.kappa1 - 1.5).abs() < 1e-14);
        assert!((k.kappa2 - 2.45).abs() < 1e-12);
        let zero = OutcomeSpec::new(Surface::Linear { a: 0.0, b: 0.0 }, 0.3).unwrap();
        let k = oracle_kappas(&zero, &Kernel::Constant(1.0), 0.0).unwrap();
        assert_eq!(k.kappa1, 0.0);
        assert!((k.kappa2 - 4.0 * 0.09).abs() < 1e-14);
    }

    #[test]
    fn noiseless_kappas_saturate_jensen() {
        let spec = OutcomeSpec::new(Surface::Quadratic, 0.0).unwrap();
        let k = oracle_kappas(&spec, &Kernel::Constant(0.5), 0.0).unwrap();
        assert!((k.kappa2 - k.kappa1 * k.kappa1).abs() < 1e-14);
    }

    #[test]
    fn smooth_kernel_ratio_has_unit_mean() {
        let (m1, m2) = kernel_ratio_moments(&Kernel::Smooth);
        assert!((m1 - 1.0).abs() < 1e-12);
        assert!(m2 > 1.0);
    }

    #[test]
    fn hand_dataset() {
        // path 0-1-2-3 plus isolated unit 4
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let draw = TreatmentDraw::from_treatments(vec![true, false, true, true, false]);
        let spec = OutcomeSpec::new(Surface::Quadratic, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = realize_outcomes(&spec, vec![0.0; 5], g, draw, &mut rng).unwrap();
        // unit 0: x = 0 -> 1 + 1; unit 1: x = 1 -> 0; unit 2: x = 1/2 -> 3.25;
        // unit 3: x = 1 -> 5; unit 4 isolated: x = 1/2 -> 0
        assert_eq!(d.y, vec![2.0, 0.0, 3.25, 5.0, 0.0]);
        assert_eq!(d.isolated, 1);
    }

    #[test]
    fn outcome_equals_treatment() {
        let spec = OutcomeSpec::new(Surface::Linear { a: 1.0, b: 0.0 }, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sampler = CurieWeissSampler::new(30, IsingParams::new(0.3, 0.0).unwrap());
        let g = GraphonSpec::new(0.5, Kernel::Constant(0.5)).unwrap();
        let d = simulate_dataset(&g, &spec, &sampler, &mut rng).unwrap();
        for i in 0..30 {
            assert_eq!(d.y[i], if d.draw.is_treated(i) { 1.0 } else { 0.0 });
        }
        let p = IsingParams::new(0.3, 0.0).unwrap();
        assert_eq!(oracle_tau_exact(&spec, &d.graph, &p, None).unwrap(), 1.0);
        let tau = oracle_tau(&spec, &d.graph, &p, 20, &mut rng, None).unwrap();
        assert_eq!(tau.value, 1.0);
        assert_eq!(tau.se, 0.0);
        let no_direct = OutcomeSpec::new(Surface::Linear { a: 0.0, b: 2.0 }, 0.0).unwrap();
        assert_eq!(oracle_tau_exact(&no_direct, &d.graph, &p, None).unwrap(), 0.0);
    }

    #[test]
    fn exact_tau_matches_enumeration() {
        // all 2^6 assignments weighted by the Curie-Weiss law
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (1, 5)]).unwrap();
        let spec = OutcomeSpec::new(Surface::Quadratic, 0.0).unwrap();
        for &(beta, h) in &[(0.0, 0.0), (0.8, 0.0), (1.5, 0.2)] {
            let p = IsingParams::new(beta, h).unwrap();
            let lp = magnetization_log_pmf(6, &p);
            let mut want = 0.0;
            let mut want_plus = (0.0, 0.0);
            for mask in 0u32..64 {
                let t: Vec<bool> = (0..6).map(|i| mask >> i & 1 == 1).collect();
                let k = mask.count_ones() as usize;
                let binom = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0][k];
                let w = lp[k].exp() / binom;
                let ex = crate::graph::exposures_from(&g, &t).unwrap();
                let v: f64 = ex.iter().map(|e| spec.surface.contrast(e.frac().unwrap())).sum::<f64>() / 6.0;
                want += w * v;
                if k >= 3 {
                    want_plus.0 += w * v;
                    want_plus.1 += w;
                }
            }
            let got = oracle_tau_exact(&spec, &g, &p, None).unwrap();
            assert!((got - want).abs() < 1e-12, "beta={beta}: {got} vs {want}");
            let got_plus = oracle_tau_exact(&spec, &g, &p, Some(true)).unwrap();
            assert!((got_plus - want_plus.0 / want_plus.1).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sampler = CurieWeissSampler::new(25, IsingParams::new(0.5, 0.0).unwrap());
        let d = simulate_dataset(
            &Preset::Quadratic.graphon(0.5).unwrap(),
            &Preset::Quadratic.outcome(),
            &sampler,
            &mut rng,
        )
        .unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = SimDataset::read_csv(buf.as_slice(), d.graph.clone()).unwrap();
        assert_eq!(back.y, d.y);
        assert_eq!(back.traits, d.traits);
        assert_eq!(back.draw, d.draw);
        assert_eq!(back.exposures, d.exposures);
    }

    #[test]
    fn csv_schema_errors() {
        let g = Graph::empty(1);
        assert!(SimDataset::read_csv("a,b\n".as_bytes(), g.clone()).is_err());
        assert!(SimDataset::read_csv("unit,U,T,Y,M,N\n0,0.5,2,1.0,0,0\n".as_bytes(), g.clone()).is_err());
        assert!(SimDataset::read_csv("unit,U,T,Y,M,N\n0,0.5,1,1.0,0,0\n".as_bytes(), g).is_ok());
    }
}
