//! Kolmogorov–Smirnov distances.

/// `sup_t |F_m(t) − F(t)|` for a sample against a CDF. Atoms of `F` are
/// handled by also comparing against the left limit at each sample point.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    assert!(!samples.is_empty(), "need at least one sample");
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / m;
        let upto = j as f64 / m;
        let f = cdf(x);
        let f_left = cdf(next_down(x));
        d = d.max((f - upto).abs()).max((f_left - below).abs());
        i = j;
    }
    d
}

fn next_down(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits - 1 } else { bits + 1 })
}

/// Two-sample statistic `sup_t |F_a(t) − F_b(t)|`, ties included.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "both samples must be nonempty");
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic 1% critical value of the one-sample statistic.
pub fn ks_critical_1pct(m: usize) -> f64 {
    1.628 / (m as f64).sqrt()
}

/// Asymptotic 1% critical value of the two-sample statistic.
pub fn ks_two_sample_critical_1pct(m1: usize, m2: usize) -> f64 {
    let (a, b) = (m1 as f64, m2 as f64);
    1.628 * ((a + b) / (a * b)).sqrt()
}
