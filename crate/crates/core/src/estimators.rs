//! Point estimators: Hájek contrasts, the unbiased IPW estimator and the
//! maximum pseudo-likelihood estimator of the interaction strength.

use crate::error::{Error, Result};
use crate::ising::{conditional_prob, BlockIsingParams, IsingParams, TreatmentDraw};

fn check_len(t: &TreatmentDraw, y: &[f64]) -> Result<()> {
    if t.n() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: t.n(),
            got: y.len(),
        });
    }
    Ok(())
}

fn hajek_slice(t: &[bool], y: &[f64]) -> std::result::Result<f64, (usize, usize)> {
    let (mut s1, mut c1, mut s0, mut c0) = (0.0, 0usize, 0.0, 0usize);
    for (&ti, &yi) in t.iter().zip(y) {
        if ti {
            s1 += yi;
            c1 += 1;
        } else {
            s0 += yi;
            c0 += 1;
        }
    }
    if c1 == 0 || c0 == 0 {
        return Err((c1, c0));
    }
    Ok(s1 / c1 as f64 - s0 / c0 as f64)
}

/// Difference between the treated and control means.
pub fn hajek(t: &TreatmentDraw, y: &[f64]) -> Result<f64> {
    check_len(t, y)?;
    hajek_slice(t.treatments(), y)
        .map_err(|(c1, c0)| Error::DegenerateArm(format!("{c1} treated and {c0} control units")))
}

/// Hájek contrast within each block of consecutive units.
pub fn hajek_blockwise(t: &TreatmentDraw, y: &[f64], cfg: &BlockIsingParams) -> Result<Vec<f64>> {
    check_len(t, y)?;
    if cfg.n() != t.n() {
        return Err(Error::DimensionMismatch {
            expected: cfg.n(),
            got: t.n(),
        });
    }
    cfg.ranges()
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            hajek_slice(&t.treatments()[r.clone()], &y[r]).map_err(|(c1, c0)| {
                Error::DegenerateArm(format!("block {k} has {c1} treated and {c0} control units"))
            })
        })
        .collect()
}

/// `n⁻¹ Σ [T_i Y_i / p_i − (1 − T_i) Y_i / (1 − p_i)]` with `p_i` the
/// conditional treatment probability given the other units.
pub fn ipw_unbiased(t: &TreatmentDraw, y: &[f64], params: &IsingParams) -> Result<f64> {
    check_len(t, y)?;
    let n = t.n();
    let sum: f64 = (0..n)
        .map(|i| {
            let p = conditional_prob(i, t, params);
            if t.is_treated(i) {
                y[i] / p
            } else {
                -y[i] / (1.0 - p)
            }
        })
        .sum();
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpleResult {
    /// Maximizer restricted to `[0, 1]`.
    pub beta_hat: f64,
    /// Maximizer over the real line; `±∞` when the pseudo-likelihood is
    /// monotone.
    pub beta_unrestricted: f64,
    pub at_boundary: bool,
    /// `n/((n−1)𝓂) artanh(𝓂 − 1/(n𝓂))` when its argument lies in `(−1, 1)`.
    pub closed_form: Option<f64>,
}

/// Sufficient statistics of the pseudo-likelihood: the units with spin `+1`
/// share the leave-one-out field `a = (S−1)/n`, those with `−1` share
/// `b = (S+1)/n`.
#[derive(Debug, Clone, Copy)]
struct PseudoLik {
    n_plus: f64,
    n_minus: f64,
    a: f64,
    b: f64,
}

impl PseudoLik {
    fn new(n: usize, spin_sum: i64) -> Self {
        let nf = n as f64;
        let n_plus = (n as i64 + spin_sum) / 2;
        PseudoLik {
            n_plus: n_plus as f64,
            n_minus: (n as i64 - n_plus) as f64,
            a: (spin_sum - 1) as f64 / nf,
            b: (spin_sum + 1) as f64 / nf,
        }
    }

    fn value(&self, beta: f64) -> f64 {
        // log((1 + tanh x)/2) = -log(1 + exp(-2x))
        let lp = |x: f64| -softplus(-2.0 * x);
        self.n_plus * lp(beta * self.a) + self.n_minus * lp(-beta * self.b)
    }

    fn score(&self, beta: f64) -> f64 {
        self.n_plus * self.a * (1.0 - (beta * self.a).tanh()) - self.n_minus * self.b * (1.0 + (beta * self.b).tanh())
    }

    fn curvature(&self, beta: f64) -> f64 {
        let s2 = |x: f64| 1.0 - x.tanh().powi(2);
        -self.n_plus * self.a * self.a * s2(beta * self.a) - self.n_minus * self.b * self.b * s2(beta * self.b)
    }

    /// Unrestricted maximizer.
    fn argmax(&self) -> f64 {
        if self.n_minus == 0.0 {
            return f64::INFINITY;
        }
        if self.n_plus == 0.0 {
            return f64::NEG_INFINITY;
        }
        if self.a <= 0.0 && self.b >= 0.0 {
            return f64::NEG_INFINITY;
        }
        let (mut lo, mut hi) = (-1.0, 1.0);
        while self.score(lo) < 0.0 {
            lo *= 2.0;
        }
        while self.score(hi) > 0.0 {
            hi *= 2.0;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let s = self.score(x);
            if s == 0.0 {
                return x;
            }
            if s > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let c = self.curvature(x);
            let newton = x - s / c;
            let next = if c < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 1e-15 * x.abs().max(1.0) || hi - lo <= 1e-15 * x.abs().max(1.0) {
                return next;
            }
            x = next;
        }
        x
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `Σ_i log P_β(W_i | W_{−i})` at `h = 0`.
pub fn pseudo_loglik(t: &TreatmentDraw, beta: f64) -> f64 {
    PseudoLik::new(t.n(), t.spin_sum()).value(beta)
}

pub fn mple_closed_form(n: usize, mag: f64) -> Option<f64> {
    if mag == 0.0 || n < 2 {
        return None;
    }
    let nf = n as f64;
    let arg = mag - 1.0 / (nf * mag);
    (arg.abs() < 1.0).then(|| nf / ((nf - 1.0) * mag) * arg.atanh())
}

/// Maximum pseudo-likelihood estimate from the spin count alone.
pub fn mple_from_counts(n: usize, spin_sum: i64) -> MpleResult {
    let mag = spin_sum as f64 / n as f64;
    let closed_form = mple_closed_form(n, mag);
    if spin_sum == 0 {
        return MpleResult {
            beta_hat: 0.0,
            beta_unrestricted: f64::NEG_INFINITY,
            at_boundary: true,
            closed_form,
        };
    }
    let ur = PseudoLik::new(n, spin_sum).argmax();
    let beta_hat = ur.clamp(0.0, 1.0);
    MpleResult {
        beta_hat,
        beta_unrestricted: ur,
        at_boundary: !(ur > 0.0 && ur < 1.0),
        closed_form,
    }
}

pub fn mple(t: &TreatmentDraw) -> Result<MpleResult> {
    if t.n() < 2 {
        return Err(Error::param("n", "pseudo-likelihood needs at least two units"));
    }
    Ok(mple_from_counts(t.n(), t.spin_sum()))
}

/// Golden-section search of the pseudo-likelihood on `[0, 1]`.
pub fn mple_golden(t: &TreatmentDraw) -> f64 {
    let pl = PseudoLik::new(t.n(), t.spin_sum());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (pl.value(c), pl.value(d));
    while b - a > 1e-12 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = pl.value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = pl.value(d);
        }
    }
    let x = 0.5 * (a + b);
    // endpoints can win for monotone likelihoods
    [0.0, x, 1.0]
        .into_iter()
        .max_by(|&u, &v| pl.value(u).total_cmp(&pl.value(v)))
        .unwrap()
}
