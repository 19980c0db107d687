use std::collections::HashMap;

use netising::ising::{
    definetti_sample, magnetization_log_pmf, sample_block_treatments, sample_treatments, solve_fixed_points,
    BlockIsingParams, CurieWeissSampler, FixedPoints, IsingParams,
};
use netising::laws::{ks_two_sample, ks_two_sample_critical_1pct};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn params(beta: f64, h: f64) -> IsingParams {
    IsingParams::new(beta, h).unwrap()
}

#[test]
fn fair_coins_pair_frequency() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sampler = CurieWeissSampler::new(7, params(0.0, 0.0));
    let reps = 100_000;
    let both = (0..reps)
        .filter(|_| {
            let d = sampler.sample(&mut rng);
            d.is_treated(0) && d.is_treated(1)
        })
        .count() as f64
        / reps as f64;
    let se = (0.25f64 * 0.75 / reps as f64).sqrt();
    assert!((both - 0.25).abs() < 3.0 * se, "{both}");
}

#[test]
fn two_units_at_critical_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sampler = CurieWeissSampler::new(2, params(1.0, 0.0));
    let p = magnetization_log_pmf(2, &params(1.0, 0.0))[2].exp();
    assert!((p - 0.365529).abs() < 1e-6);
    let reps = 100_000;
    let hits = (0..reps).filter(|_| sampler.sample(&mut rng).spin_sum() == 2).count() as f64 / reps as f64;
    let se = (p * (1.0 - p) / reps as f64).sqrt();
    assert!((hits - p).abs() < 3.0 * se, "{hits} vs {p}");
}

#[test]
fn low_temperature_magnetization_concentrates() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let sampler = CurieWeissSampler::new(500, params(2.0, 0.0));
    let reps = 10_000;
    let mean = (0..reps).map(|_| sampler.sample(&mut rng).magnetization().abs()).sum::<f64>() / reps as f64;
    let pi = match solve_fixed_points(&params(2.0, 0.0)) {
        FixedPoints::Pair { plus, .. } => plus,
        other => panic!("{other:?}"),
    };
    assert!((pi - 0.9575).abs() < 1e-4);
    assert!((mean - pi).abs() < 0.02, "{mean}");
}

#[test]
fn exchangeable_given_count() {
    // n = 4, condition on two treated: all six subsets equally likely
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let sampler = CurieWeissSampler::new(4, params(0.8, 0.3));
    let mut counts: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut total = 0usize;
    while total < 60_000 {
        let d = sampler.sample(&mut rng);
        if d.num_treated() == 2 {
            *counts.entry(d.treatments().to_vec()).or_default() += 1;
            total += 1;
        }
    }
    assert_eq!(counts.len(), 6);
    let expected = total as f64 / 6.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new(5.0).unwrap().cdf(chi2);
    assert!(p > 0.001, "chi2 = {chi2}");
}

#[test]
fn independent_fair_blocks_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let cfg = BlockIsingParams::new(vec![2, 2], vec![params(0.0, 0.0), params(0.0, 0.0)]).unwrap();
    let reps = 100_000;
    let mut counts = [0usize; 16];
    for _ in 0..reps {
        let d = sample_block_treatments(&cfg, &mut rng);
        let code = d.treatments().iter().enumerate().map(|(i, &t)| (t as usize) << i).sum::<usize>();
        counts[code] += 1;
    }
    let expected = reps as f64 / 16.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new(15.0).unwrap().cdf(chi2);
    assert!(p > 0.001, "chi2 = {chi2}");
}

#[test]
fn blocks_follow_their_own_temperature() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let cfg = BlockIsingParams::new(vec![300, 300], vec![params(2.0, 0.0), params(0.5, 0.0)]).unwrap();
    let reps = 2_000;
    let (mut m1, mut m2) = (0.0, 0.0);
    for _ in 0..reps {
        let d = sample_block_treatments(&cfg, &mut rng);
        let mags = d.block_mags().unwrap();
        m1 += mags[0].abs();
        m2 += mags[1];
    }
    m1 /= reps as f64;
    m2 /= reps as f64;
    assert!((m1 - 0.9575).abs() < 0.02, "{m1}");
    assert!(m2.abs() < 0.01, "{m2}");
}

#[test]
fn single_block_matches_plain_sampler() {
    let p = params(0.9, 0.1);
    let cfg = BlockIsingParams::new(vec![150], vec![p]).unwrap();
    let mut r1 = ChaCha8Rng::seed_from_u64(17);
    let mut r2 = ChaCha8Rng::seed_from_u64(18);
    let a: Vec<f64> = (0..5_000).map(|_| sample_block_treatments(&cfg, &mut r1).magnetization()).collect();
    let b: Vec<f64> = (0..5_000).map(|_| sample_treatments(150, &p, &mut r2).magnetization()).collect();
    assert!(ks_two_sample(&a, &b) < ks_two_sample_critical_1pct(a.len(), b.len()));
}

#[test]
fn definetti_agrees_with_field() {
    let p = params(0.7, -0.2);
    let mut r1 = ChaCha8Rng::seed_from_u64(19);
    let mut r2 = ChaCha8Rng::seed_from_u64(20);
    let a: Vec<f64> = (0..5_000).map(|_| definetti_sample(120, &p, &mut r1).unwrap().magnetization()).collect();
    let b: Vec<f64> = (0..5_000).map(|_| sample_treatments(120, &p, &mut r2).magnetization()).collect();
    assert!(ks_two_sample(&a, &b) < ks_two_sample_critical_1pct(a.len(), b.len()));
}
