//! Limit law of the clipped pseudo-likelihood estimator:
//! `min(max(T⁻² − T²/(3n), 0), 1)` with `T = Z + n^{1/4} W_c`.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::norm_quantile;

use super::wc::WcLaw;

pub const DEFAULT_POINTS: usize = 200_000;
pub const DEFAULT_LAW_SEED: u64 = 0x6d70_6c65;

/// Base-2 and base-3 radical inverses with a Cranley–Patterson shift.
fn halton_points(m: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s1, s2): (f64, f64) = (rng.random(), rng.random());
    let radical = |mut i: usize, base: usize| {
        let mut f = 1.0;
        let mut r = 0.0;
        let inv = 1.0 / base as f64;
        while i > 0 {
            f *= inv;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    };
    (1..=m)
        .map(|i| {
            let u = (radical(i, 2) + s1).fract();
            let v = (radical(i, 3) + s2).fract();
            (u, v)
        })
        .collect()
}

/// Gaussian coordinates shared by every drift for a given point set.
#[derive(Debug, Clone)]
pub struct MpleLawSampler {
    z: Vec<f64>,
    v: Vec<f64>,
}

impl MpleLawSampler {
    pub fn new(points: usize, seed: u64) -> Result<Self> {
        if points == 0 {
            return Err(Error::param("points", "need at least one point"));
        }
        let eps = 0.5 / points as f64;
        let (z, v) = halton_points(points, seed)
            .into_iter()
            .map(|(u, v)| (norm_quantile(u.clamp(eps, 1.0 - eps)), v.clamp(eps, 1.0 - eps)))
            .unzip();
        Ok(MpleLawSampler { z, v })
    }

    pub fn shared_default() -> &'static MpleLawSampler {
        static S: OnceLock<MpleLawSampler> = OnceLock::new();
        S.get_or_init(|| MpleLawSampler::new(DEFAULT_POINTS, DEFAULT_LAW_SEED).expect("default point set"))
    }

    /// Sorted draws of the law at drift `c` and size `n`.
    pub fn draws(&self, c: f64, n: usize) -> Result<Vec<f64>> {
        let mut out = self.unsorted(c, n)?;
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    fn unsorted(&self, c: f64, n: usize) -> Result<Vec<f64>> {
        let wc = WcLaw::shared(c)?;
        let scale = (n as f64).powf(0.25);
        Ok(self
            .z
            .iter()
            .zip(&self.v)
            .map(|(&z, &v)| mple_law_map(z + scale * wc.quantile_fast(v), n))
            .collect())
    }

    /// `inf { q : F(q) ≥ p }` of the empirical law.
    pub fn quantile(&self, p: f64, c: f64, n: usize) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
        }
        let mut draws = self.unsorted(c, n)?;
        let m = draws.len();
        let idx = ((p * m as f64).ceil() as usize).clamp(1, m) - 1;
        Ok(*draws.select_nth_unstable_by(idx, f64::total_cmp).1)
    }
}

pub fn mple_law_map(t: f64, n: usize) -> f64 {
    let v = 1.0 / (t * t) - t * t / (3.0 * n as f64);
    if v.is_nan() {
        return 1.0;
    }
    v.clamp(0.0, 1.0)
}

/// Quantile of the law with the default point set.
pub fn mple_limit_quantile(p: f64, c: f64, n: usize) -> Result<f64> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::param("c", format!("must be finite and >= 0, got {c}")));
    }
    MpleLawSampler::shared_default().quantile(p, c, n)
}
