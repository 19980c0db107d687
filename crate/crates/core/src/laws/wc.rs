//! The `W_c` family with density proportional to `exp(−x⁴/12 − c x²/2)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numeric::{newton_increasing, GaussLegendre};

const PANELS: usize = 600;
const ORDER: usize = 12;
const INVERSE_CELLS: usize = 8192;
/// Proposal precision floor for the rejection sampler.
const C0: f64 = 1.0;

fn gl() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(ORDER))
}

/// Tabulated `W_c` law.
#[derive(Debug)]
pub struct WcLaw {
    c: f64,
    half_width: f64,
    panel: f64,
    log_norm: f64,
    /// CDF at panel edges.
    edge_cdf: Vec<f64>,
    inverse: OnceLock<Vec<f64>>,
}

impl WcLaw {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::param("c", format!("must be finite and >= 0, got {c}")));
        }
        let half_width = if c > 0.0 { (40.0 / c.sqrt()).min(6.0) } else { 6.0 };
        let panel = 2.0 * half_width / PANELS as f64;
        let unnorm = |x: f64| (-x.powi(4) / 12.0 - 0.5 * c * x * x).exp();
        let mut edge = Vec::with_capacity(PANELS + 1);
        edge.push(0.0);
        let mut acc = 0.0;
        for k in 0..PANELS {
            let a = -half_width + k as f64 * panel;
            acc += gl().integrate(a, a + panel, unnorm);
            edge.push(acc);
        }
        for v in edge.iter_mut() {
            *v /= acc;
        }
        // exact symmetry
        for k in 0..=PANELS / 2 {
            let lo = edge[k];
            let hi = 1.0 - edge[PANELS - k];
            let m = 0.5 * (lo + hi);
            edge[k] = m;
            edge[PANELS - k] = 1.0 - m;
        }
        edge[PANELS / 2] = 0.5;
        Ok(WcLaw {
            c,
            half_width,
            panel,
            log_norm: acc.ln(),
            edge_cdf: edge,
            inverse: OnceLock::new(),
        })
    }

    /// Shared instance for `c`, built once per process.
    pub fn shared(c: f64) -> Result<Arc<WcLaw>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<WcLaw>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(law) = cache.lock().unwrap().get(&c.to_bits()) {
            return Ok(law.clone());
        }
        let law = Arc::new(WcLaw::new(c)?);
        cache.lock().unwrap().entry(c.to_bits()).or_insert(law.clone());
        Ok(law)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Truncation point; the mass beyond it is below double precision.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn pdf(&self, x: f64) -> f64 {
        (-x.powi(4) / 12.0 - 0.5 * self.c * x * x - self.log_norm).exp()
    }

    pub fn cdf(&self, w: f64) -> f64 {
        if w.is_nan() {
            return f64::NAN;
        }
        if w == 0.0 {
            return 0.5;
        }
        if w < 0.0 {
            return 1.0 - self.cdf(-w);
        }
        if w >= self.half_width {
            return 1.0;
        }
        let pos = (w + self.half_width) / self.panel;
        let k = (pos.floor() as usize).min(PANELS - 1);
        let a = -self.half_width + k as f64 * self.panel;
        let partial = gl().integrate(a, w, |x| self.pdf(x));
        (self.edge_cdf[k] + partial).min(1.0)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p == 0.5 {
            return 0.0;
        }
        if p < 0.5 {
            return -self.quantile(1.0 - p);
        }
        // panel containing p, then Newton from linear interpolation inside it
        let k = (self.edge_cdf.partition_point(|&e| e < p).max(1) - 1).min(PANELS - 1);
        let a = -self.half_width + k as f64 * self.panel;
        let (ea, eb) = (self.edge_cdf[k], self.edge_cdf[k + 1]);
        let start = if eb > ea { a + self.panel * (p - ea) / (eb - ea) } else { a };
        let lo = a.max(0.0);
        let hi = (a + self.panel).min(self.half_width);
        newton_increasing(|w| self.cdf(w), |w| self.pdf(w), p, lo, hi, start, 1e-13 * self.half_width)
    }

    /// `E[W^k]`.
    pub fn moment(&self, k: i32) -> f64 {
        let mut acc = 0.0;
        for j in 0..PANELS {
            let a = -self.half_width + j as f64 * self.panel;
            acc += gl().integrate(a, a + self.panel, |x| x.powi(k) * self.pdf(x));
        }
        acc
    }

    /// Quadrature nodes and probability weights covering the support.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(PANELS * ORDER);
        let g = gl();
        let half = 0.5 * self.panel;
        for j in 0..PANELS {
            let mid = -self.half_width + (j as f64 + 0.5) * self.panel;
            for (x, w) in g.nodes.iter().zip(&g.weights) {
                let u = mid + half * x;
                out.push((u, w * half * self.pdf(u)));
            }
        }
        out
    }

    /// Fast approximate quantile from a precomputed table, linear between
    /// knots. Accurate to about 1e-6 and meant for bulk transforms.
    pub fn quantile_fast(&self, p: f64) -> f64 {
        let table = self.inverse.get_or_init(|| {
            (0..=INVERSE_CELLS)
                .map(|k| match k {
                    0 => -self.half_width,
                    k if k == INVERSE_CELLS => self.half_width,
                    k => self.quantile(k as f64 / INVERSE_CELLS as f64),
                })
                .collect()
        });
        let pos = p.clamp(0.0, 1.0) * INVERSE_CELLS as f64;
        let k = (pos.floor() as usize).min(INVERSE_CELLS - 1);
        let frac = pos - k as f64;
        table[k] + frac * (table[k + 1] - table[k])
    }

    /// Rejection sampler with a Gaussian envelope of precision `max(c, 1)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let prec = self.c.max(C0);
        let d = prec - self.c;
        let sd = prec.sqrt().recip();
        loop {
            let z: f64 = StandardNormal.sample(rng);
            let x = z * sd;
            let x2 = x * x;
            let log_accept = -x2 * x2 / 12.0 + 0.5 * d * x2 - 0.75 * d * d;
            if rng.random::<f64>().ln() < log_accept {
                return x;
            }
        }
    }
}

pub fn wc_cdf(c: f64, w: f64) -> Result<f64> {
    Ok(WcLaw::shared(c)?.cdf(w))
}

pub fn wc_quantile(c: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
    }
    Ok(WcLaw::shared(c)?.quantile(p))
}

pub fn wc_sample<R: Rng + ?Sized>(c: f64, rng: &mut R) -> Result<f64> {
    Ok(WcLaw::shared(c)?.sample(rng))
}

/// `E[W₀²] = √12 Γ(3/4) / Γ(1/4)`.
pub fn w0_second_moment() -> f64 {
    use statrs::function::gamma::gamma;
    12f64.sqrt() * gamma(0.75) / gamma(0.25)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::norm_quantile;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn median_is_zero() {
        for &c in &[0.0, 0.5, 3.0, 100.0] {
            assert_eq!(wc_cdf(c, 0.0).unwrap(), 0.5);
        }
    }

    #[test]
    fn critical_second_moment() {
        let m2 = WcLaw::new(0.0).unwrap().moment(2);
        assert!((m2 - w0_second_moment()).abs() < 1e-10);
        assert!((m2 - 1.170_829).abs() < 1e-6);
    }

    #[test]
    fn large_drift_is_gaussian() {
        let q = wc_quantile(100.0, 0.975).unwrap();
        let g = norm_quantile(0.975) / 10.0;
        assert!((q / g - 1.0).abs() < 0.01, "{q} vs {g}");
        let law = WcLaw::new(100.0).unwrap();
        assert!((100.0 * law.moment(2) - 1.0).abs() < 0.01);
        let law = WcLaw::new(10.0).unwrap();
        assert!((10.0 * law.moment(2) - 1.0).abs() < 0.1);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &c in &[0.0, 1.3, 20.0] {
            let law = WcLaw::new(c).unwrap();
            for k in 1..100 {
                let p = k as f64 / 100.0;
                let q = law.quantile(p);
                assert!((law.cdf(q) - p).abs() < 1e-10);
                assert!((q + law.quantile(1.0 - p)).abs() < 1e-8);
                assert!((law.quantile_fast(p) - q).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn nodes_carry_unit_mass() {
        let law = WcLaw::new(2.0).unwrap();
        let total: f64 = law.nodes().iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampler_matches_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &c in &[0.0, 0.4, 5.0] {
            let law = WcLaw::new(c).unwrap();
            let xs: Vec<f64> = (0..20_000).map(|_| law.sample(&mut rng)).collect();
            let ks = super::super::ks::ks_distance(&xs, |w| law.cdf(w));
            assert!(ks < 1.628 / (20_000f64).sqrt(), "c={c} ks={ks}");
        }
    }

    #[test]
    fn negative_drift_rejected() {
        assert!(WcLaw::new(-1.0).is_err());
        assert!(wc_quantile(0.0, 1.0).is_err());
    }
}
