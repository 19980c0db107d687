//! The uniform law `H_n`: `n^{-1/2} √κ₂ Z + β^{1/2} n^{-1/4} κ₁ W_c` with
//! `c = √n (1 − β)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{newton_increasing, norm_cdf, norm_quantile};

use super::pointwise::LimitLawParams;
use super::wc::WcLaw;

#[derive(Debug, Clone)]
pub struct HnLaw {
    /// Gaussian scale.
    a: f64,
    /// Scale of the `W_c` component.
    b: f64,
    wc: Arc<WcLaw>,
    nodes: Arc<Vec<(f64, f64)>>,
}

impl HnLaw {
    pub fn new(params: &LimitLawParams) -> Result<Self> {
        let nf = params.n as f64;
        let a = (params.kappa2 / nf).sqrt();
        let b = params.beta.sqrt() * nf.powf(-0.25) * params.kappa1;
        let wc = WcLaw::shared(params.c())?;
        let nodes = Arc::new(wc.nodes());
        Ok(HnLaw { a, b, wc, nodes })
    }

    pub fn gaussian_scale(&self) -> f64 {
        self.a
    }

    pub fn wc_scale(&self) -> f64 {
        self.b
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        if b == 0.0 {
            return if a > 0.0 {
                norm_cdf(t / a)
            } else if t >= 0.0 {
                1.0
            } else {
                0.0
            };
        }
        if a == 0.0 {
            return if b > 0.0 {
                self.wc.cdf(t / b)
            } else {
                1.0 - self.wc.cdf(t / b)
            };
        }
        self.nodes
            .iter()
            .map(|&(w, p)| p * norm_cdf((t - b * w) / a))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
        }
        let (a, b) = (self.a, self.b.abs());
        if b == 0.0 {
            return Ok(a * norm_quantile(p));
        }
        if a == 0.0 {
            let q = self.wc.quantile(if self.b > 0.0 { p } else { 1.0 - p });
            return Ok(self.b * q);
        }
        let span = 9.0 * a + b * self.wc.half_width();
        let tol = 1e-11 * span;
        let pdf = |t: f64| {
            self.nodes
                .iter()
                .map(|&(w, q)| {
                    let z = (t - self.b * w) / a;
                    q * (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                / (a * (2.0 * std::f64::consts::PI).sqrt())
        };
        let start = (a * a + b * b * self.wc.moment(2)).sqrt() * norm_quantile(p);
        Ok(newton_increasing(|t| self.cdf(t), pdf, p, -span, span, start, tol))
    }
}

pub fn hn_quantile(p: f64, params: &LimitLawParams) -> Result<f64> {
    HnLaw::new(params)?.quantile(p)
}

pub fn hn_cdf(t: f64, params: &LimitLawParams) -> Result<f64> {
    Ok(HnLaw::new(params)?.cdf(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::pointwise::{ln_quantile, Regime};
    use crate::laws::wc::wc_quantile;
    use crate::numeric::GaussLegendre;

    #[test]
    fn no_interference_is_gaussian() {
        let p = LimitLawParams::new(0.0, 9.2, 500, 0.3).unwrap();
        let q = hn_quantile(0.95, &p).unwrap();
        assert!((q - (9.2f64 / 500.0).sqrt() * norm_quantile(0.95)).abs() < 1e-12);
    }

    #[test]
    fn critical_without_noise() {
        let p = LimitLawParams::new(2.0, 0.0, 256, 1.0).unwrap();
        let q = hn_quantile(0.8, &p).unwrap();
        assert!((q - 0.5 * wc_quantile(0.0, 0.8).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_pointwise_law_at_zero_beta() {
        let p = LimitLawParams::new(3.0, 9.2, 500, 0.0).unwrap();
        let h = hn_quantile(0.95, &p).unwrap();
        let l = ln_quantile(0.95, &p, Regime::High).unwrap();
        assert!((h / l - 1.0).abs() < 0.02);
    }

    #[test]
    fn convolution_matches_alternate_order() {
        // integrate over the Gaussian instead of the W_c component
        let p = LimitLawParams::new(1.7, 2.9, 300, 0.85).unwrap();
        let law = HnLaw::new(&p).unwrap();
        let wc = WcLaw::shared(p.c()).unwrap();
        let gl = GaussLegendre::new(40);
        let (a, b) = (law.gaussian_scale(), law.wc_scale());
        for &t in &[-0.3, -0.05, 0.0, 0.1, 0.25] {
            let mut alt = 0.0;
            for k in 0..40 {
                let lo = -10.0 + 0.5 * k as f64;
                alt += gl.integrate(lo, lo + 0.5, |z| {
                    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt() * wc.cdf((t - a * z) / b)
                });
            }
            assert!((law.cdf(t) - alt).abs() < 1e-9, "t={t}: {} vs {alt}", law.cdf(t));
        }
        let q = law.quantile(0.975).unwrap();
        assert!((law.cdf(q) - 0.975).abs() < 1e-9);
    }

    #[test]
    fn scales_linearly_in_common_bound() {
        let unit = LimitLawParams::new(1.0, 1.0, 500, 0.6).unwrap();
        let big = LimitLawParams::new(3.0, 9.0, 500, 0.6).unwrap();
        let q1 = hn_quantile(0.975, &unit).unwrap();
        let q3 = hn_quantile(0.975, &big).unwrap();
        assert!((q3 - 3.0 * q1).abs() < 1e-8);
    }
}
