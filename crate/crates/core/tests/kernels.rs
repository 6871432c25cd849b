use pacbound::kernels::{a_of_lambda, binom_tail, entropy_bound, log_sum_exp, phi, phi_inv, psi, xi};
use proptest::prelude::*;

fn nonzero_a() -> impl Strategy<Value = f64> {
    prop_oneof![-5.0..-1e-3f64, 1e-3..5.0f64]
}

proptest! {
    #[test]
    fn phi_inverse_round_trip(a in nonzero_a(), q in 0.0..=1.0f64) {
        let p = phi_inv(a, q);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
        prop_assert!((phi(a, p.clamp(0.0, 1.0)).unwrap() - q).abs() <= 1e-12);
    }

    #[test]
    fn phi_curvature_follows_the_sign_of_a(a in nonzero_a()) {
        let step = 1e-3;
        for i in 1..999 {
            let p = i as f64 * step;
            let second = phi(a, p + step).unwrap() - 2.0 * phi(a, p).unwrap() + phi(a, p - step).unwrap();
            if a > 0.0 {
                prop_assert!(second >= -1e-12);
            } else {
                prop_assert!(second <= 1e-12);
            }
        }
    }

    #[test]
    fn psi_is_a_three_point_log_laplace(a in 1e-3..3.0f64, m in 0.0..=1.0f64, t in -1.0..=1.0f64) {
        let p = t * m;
        let masses = [((m - p) / 2.0, -1.0), (1.0 - m, 0.0), ((m + p) / 2.0, 1.0)];
        let laplace: f64 = masses.iter().map(|(w, x)| w * (-a * x).exp()).sum();
        let expected = -laplace.ln() / a;
        prop_assert!((psi(a, p, m).unwrap() - expected).abs() <= 1e-10 * (1.0 + expected.abs()));
    }

    #[test]
    fn a_of_lambda_is_increasing(n in 1.0..1e4f64, l in 1e-3..1e3f64, f in 1.001..10.0f64) {
        let (x, y) = (l * n / 100.0, l * f * n / 100.0);
        prop_assert!(a_of_lambda(y, n) > a_of_lambda(x, n));
    }

    #[test]
    fn xi_is_below_its_linear_majorant(a in 1e-3..10.0f64, q in 0.0..=1.0f64) {
        prop_assert!(xi(a, q) <= a / a.tanh() * q + 1e-15);
    }

    #[test]
    fn gaussian_lemma_dominance(a in 1e-3..5.0f64, p in 0.0..=1.0f64) {
        let gap = p - phi(a, p).unwrap();
        let cap = if p <= 0.5 { a / 2.0 * p * (1.0 - p) } else { a / 8.0 };
        prop_assert!(gap <= cap + 1e-12);
    }

    #[test]
    fn log_sum_exp_matches_direct_sum(xs in prop::collection::vec(-30.0..30.0f64, 1..20), shift in -500.0..500.0f64) {
        let direct = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        let shifted: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        prop_assert!((log_sum_exp(&shifted) - shift - direct).abs() <= 1e-10);
    }

    #[test]
    fn binomial_tail_below_entropy_bound(n in 1u64..2000, frac in 0.0..=1.0f64) {
        let h = ((n as f64 * frac) as u64).clamp(1, n);
        prop_assert!(binom_tail(n, h).unwrap() <= entropy_bound(n, h).unwrap() + 1e-9);
    }
}

#[test]
fn a_of_lambda_asymptotes() {
    let n = 1000.0;
    let large = 100.0 * n;
    let expected = 1.0 - 2.0 * n / large * std::f64::consts::LN_2;
    assert!((a_of_lambda(large, n) / expected - 1.0).abs() < 0.01);
    let small = 1e-3 * n;
    assert!((a_of_lambda(small, n) / (small / (4.0 * n)) - 1.0).abs() < 0.01);
}

#[test]
fn log_sum_exp_of_nothing() {
    assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 0.0]), 0.0);
}
