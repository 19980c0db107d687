//! Pointwise Gaussian and critical laws for `τ̂ − τ`.

use crate::error::{Error, Result};
use crate::numeric::{norm_cdf, norm_quantile};

use super::wc::WcLaw;

/// `(κ₁, κ₂)` together with the sample size and interaction strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitLawParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub n: usize,
    pub beta: f64,
}

impl LimitLawParams {
    pub fn new(kappa1: f64, kappa2: f64, n: usize, beta: f64) -> Result<Self> {
        if !(kappa2.is_finite() && kappa2 >= 0.0) {
            return Err(Error::param("kappa2", format!("must be finite and >= 0, got {kappa2}")));
        }
        if !kappa1.is_finite() {
            return Err(Error::param("kappa1", "must be finite"));
        }
        if n == 0 {
            return Err(Error::param("n", "must be positive"));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::param("beta", format!("must lie in [0, 1], got {beta}")));
        }
        Ok(LimitLawParams {
            kappa1,
            kappa2,
            n,
            beta,
        })
    }

    /// Drift `c = √n (1 − β)`.
    pub fn c(&self) -> f64 {
        (self.n as f64).sqrt() * (1.0 - self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    High,
    Critical,
}

impl Regime {
    pub fn for_beta(beta: f64) -> Regime {
        if beta < 1.0 {
            Regime::High
        } else {
            Regime::Critical
        }
    }
}

/// Standard deviation of the high-temperature Gaussian law,
/// `√((κ₂ + κ₁² β/(1−β)) / n)`.
pub fn ln_high_sd(params: &LimitLawParams) -> Result<f64> {
    if params.beta >= 1.0 {
        return Err(Error::param("beta", "high-temperature law needs beta < 1"));
    }
    let b = params.beta;
    Ok(((params.kappa2 + params.kappa1 * params.kappa1 * b / (1.0 - b)) / params.n as f64).sqrt())
}

fn critical_scale(params: &LimitLawParams) -> f64 {
    (params.n as f64).powf(-0.25) * params.kappa1
}

pub fn ln_quantile(p: f64, params: &LimitLawParams, regime: Regime) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
    }
    match regime {
        Regime::High => Ok(ln_high_sd(params)? * norm_quantile(p)),
        Regime::Critical => {
            let s = critical_scale(params);
            let q = WcLaw::shared(0.0)?.quantile(if s >= 0.0 { p } else { 1.0 - p });
            Ok(s * q)
        }
    }
}

pub fn ln_cdf(t: f64, params: &LimitLawParams, regime: Regime) -> Result<f64> {
    match regime {
        Regime::High => {
            let sd = ln_high_sd(params)?;
            Ok(if sd > 0.0 {
                norm_cdf(t / sd)
            } else if t >= 0.0 {
                1.0
            } else {
                0.0
            })
        }
        Regime::Critical => {
            let s = critical_scale(params);
            let law = WcLaw::shared(0.0)?;
            Ok(if s > 0.0 {
                law.cdf(t / s)
            } else if s < 0.0 {
                1.0 - law.cdf(t / s)
            } else if t >= 0.0 {
                1.0
            } else {
                0.0
            })
        }
    }
}

fn tilted_sd(kappa1: f64, kappa2: f64, beta: f64, pi: f64, n: usize, squared: bool) -> Result<f64> {
    let s = 1.0 - pi * pi;
    let denom = 1.0 - beta * s;
    if denom <= 0.0 {
        return Err(Error::param(
            "pi",
            format!("unstable root: 1 - beta (1 - pi^2) = {denom} is not positive"),
        ));
    }
    let tilt = if squared { s * s } else { s };
    Ok(((kappa2 * s + kappa1 * kappa1 * beta * tilt / denom) / n as f64).sqrt())
}

/// Standard deviation of the low-temperature law within one sign of the
/// magnetization, `n^{-1/2} √(κ₂(1−π★²) + κ₁² β(1−π★²)/(1−β(1−π★²)))`.
pub fn low_temp_law_sd(kappa1: f64, kappa2: f64, beta: f64, pi_star: f64, n: usize) -> Result<f64> {
    tilted_sd(kappa1, kappa2, beta, pi_star, n, false)
}

/// Standard deviation under an external field with fixed point `π`,
/// `n^{-1/2} √(κ₂(1−π²) + κ₁² β(1−π²)²/(1−β(1−π²)))`.
pub fn asym_law_sd(kappa1: f64, kappa2: f64, beta: f64, pi: f64, n: usize) -> Result<f64> {
    tilted_sd(kappa1, kappa2, beta, pi, n, true)
}
