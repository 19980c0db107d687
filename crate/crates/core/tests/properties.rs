use std::collections::BTreeSet;

use netising::estimators::{hajek, mple, pseudo_loglik};
use netising::graph::{exposures, leave_one_out_exposures, Graph};
use netising::ising::{conditional_prob, magnetization_log_pmf, solve_fixed_points, FixedPoints, IsingParams, TreatmentDraw};
use netising::laws::{hn_cdf, hn_quantile, wc_cdf, wc_quantile, LimitLawParams};
use proptest::prelude::*;

fn edges_strategy(n: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0..n, 0..n), 0..3 * n)
        .prop_map(|v| {
            let set: BTreeSet<(usize, usize)> =
                v.into_iter().filter(|(i, j)| i != j).map(|(i, j)| (i.min(j), i.max(j))).collect();
            set.into_iter().collect::<Vec<_>>()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pmf_normalized(n in 1usize..300, beta in 0.0f64..3.0, h in -1.0f64..1.0) {
        let lp = magnetization_log_pmf(n, &IsingParams::new(beta, h).unwrap());
        prop_assert_eq!(lp.len(), n + 1);
        let total: f64 = lp.iter().map(|v| v.exp()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pmf_symmetric_without_field(n in 1usize..200, beta in 0.0f64..3.0) {
        let lp = magnetization_log_pmf(n, &IsingParams::new(beta, 0.0).unwrap());
        for k in 0..=n {
            prop_assert!((lp[k] - lp[n - k]).abs() < 1e-9);
        }
    }

    #[test]
    fn conditional_prob_is_tanh_form(bits in prop::collection::vec(any::<bool>(), 2..40), beta in 0.0f64..2.0, h in -1.0f64..1.0, i in 0usize..40) {
        let n = bits.len();
        let i = i % n;
        let d = TreatmentDraw::from_treatments(bits);
        let p = IsingParams::new(beta, h).unwrap();
        let v = conditional_prob(i, &d, &p);
        let alt = 0.5 * ((beta * d.loo_magnetization(i) + h).tanh() + 1.0);
        prop_assert!(v > 0.0 && v < 1.0);
        prop_assert!((v - alt).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_residual(beta in 0.0f64..4.0, h in -1.0f64..1.0) {
        let p = IsingParams::new(beta, h).unwrap();
        match solve_fixed_points(&p) {
            FixedPoints::Unique(x) => prop_assert!((x - (beta * x + h).tanh()).abs() <= 1e-12),
            FixedPoints::Pair { minus, plus } => {
                prop_assert!(h == 0.0 && beta > 1.0);
                prop_assert!(minus < 0.0 && plus > 0.0 && (minus + plus).abs() < 1e-12);
                prop_assert!((plus - (beta * plus).tanh()).abs() <= 1e-12);
                let sech2 = 1.0 - (beta * plus).tanh().powi(2);
                prop_assert!(beta * sech2 < 1.0);
            }
        }
    }

    #[test]
    fn magnetization_matches_spins(bits in prop::collection::vec(any::<bool>(), 1..100)) {
        let d = TreatmentDraw::from_treatments(bits.clone());
        let s: i64 = d.spins().iter().map(|&w| w as i64).sum();
        prop_assert_eq!(s, d.spin_sum());
        prop_assert_eq!(d.magnetization(), s as f64 / bits.len() as f64);
        prop_assert!(d.magnetization().abs() <= 1.0);
    }

    #[test]
    fn hajek_shift_invariant(bits in prop::collection::vec(any::<bool>(), 2..60), ys in prop::collection::vec(-5.0f64..5.0, 60), c in -10.0f64..10.0) {
        let n = bits.len();
        prop_assume!(bits.iter().any(|&b| b) && bits.iter().any(|&b| !b));
        let d = TreatmentDraw::from_treatments(bits);
        let y = &ys[..n];
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        prop_assert!((hajek(&d, y).unwrap() - hajek(&d, &shifted).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn pseudo_likelihood_concave(bits in prop::collection::vec(any::<bool>(), 2..80)) {
        let d = TreatmentDraw::from_treatments(bits);
        let h = 0.01;
        for k in 1..100 {
            let b = k as f64 / 100.0;
            let second = pseudo_loglik(&d, b + h) - 2.0 * pseudo_loglik(&d, b) + pseudo_loglik(&d, b - h);
            prop_assert!(second <= 1e-8);
        }
        let m = mple(&d).unwrap();
        prop_assert!((0.0..=1.0).contains(&m.beta_hat));
    }

    #[test]
    fn wc_symmetric_and_inverts(c in 0.0f64..50.0, p in 0.01f64..0.99) {
        prop_assert_eq!(wc_cdf(c, 0.0).unwrap(), 0.5);
        let q = wc_quantile(c, p).unwrap();
        prop_assert!((q + wc_quantile(c, 1.0 - p).unwrap()).abs() < 1e-8);
        prop_assert!((wc_cdf(c, q).unwrap() - p).abs() < 1e-6);
    }

    #[test]
    fn hn_quantile_inverts_cdf(k1 in 0.0f64..4.0, k2 in 0.1f64..10.0, n in 50usize..3000, beta in 0.0f64..1.0, p in 0.02f64..0.98) {
        let params = LimitLawParams::new(k1, k2, n, beta).unwrap();
        let q = hn_quantile(p, &params).unwrap();
        prop_assert!((hn_cdf(q, &params).unwrap() - p).abs() < 1e-6);
    }

    #[test]
    fn loo_exposures_match_deleted_graph(edges in edges_strategy(12), bits in prop::collection::vec(any::<bool>(), 12), i in 0usize..12) {
        let g = Graph::from_edges(12, &edges).unwrap();
        let d = TreatmentDraw::from_treatments(bits.clone());
        let loo = leave_one_out_exposures(&g, &d, i).unwrap();
        let kept: Vec<(usize, usize)> = g.edges().filter(|&(a, b)| a != i && b != i).collect();
        let full = exposures(&g, &d).unwrap();
        let deleted = exposures(&Graph::from_edges(12, &kept).unwrap(), &d).unwrap();
        for j in 0..12 {
            if j == i {
                prop_assert_eq!(loo[j], full[j]);
            } else {
                prop_assert_eq!(loo[j], deleted[j]);
            }
        }
    }
}
