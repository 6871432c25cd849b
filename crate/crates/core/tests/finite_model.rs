mod common;

use pacbound::finite_model::gibbs_of;
use pacbound::{kl, FiniteHypothesisClass};
use proptest::prelude::*;

fn class() -> impl Strategy<Value = FiniteHypothesisClass> {
    (any::<u64>(), 1usize..20, 1usize..60).prop_map(|(seed, h, n)| common::random_class(&mut common::rng(seed), h, n))
}

proptest! {
    #[test]
    fn gibbs_risk_is_nonincreasing_and_bracketed(m in class(), l in 0.0..500.0f64, step in 0.0..100.0f64) {
        let (lo, hi) = (m.gibbs_risk(l), m.gibbs_risk(l + step));
        prop_assert!(hi <= lo + 1e-12);
        let rmin = m.risks().iter().copied().fold(f64::INFINITY, f64::min);
        let rmax = m.risks().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(rmin - 1e-12 <= hi && lo <= rmax + 1e-12);
    }

    #[test]
    fn exchange_inequality(m in class(), l1 in 0.0..300.0f64, l2 in 0.0..300.0f64) {
        let g: Vec<f64> = m.risks().iter().map(|r| l1 * r).collect();
        let h: Vec<f64> = m.risks().iter().map(|r| l2 * r).collect();
        let pg = gibbs_of(m.prior_log(), &g, 1.0);
        let ph = gibbs_of(m.prior_log(), &h, 1.0);
        prop_assert!(pg.expect(&g) - ph.expect(&g) <= pg.expect(&h) - ph.expect(&h) + 1e-12);
    }

    #[test]
    fn divergence_is_nonnegative(m in class(), l in 0.0..300.0f64) {
        let rho = m.gibbs(l);
        prop_assert!(kl(&rho, &m.prior()) >= -1e-12);
        prop_assert!(kl(&rho, &rho).abs() <= 1e-12);
        let identity = -l * m.gibbs_risk(l) - m.log_partition(l);
        prop_assert!((kl(&rho, &m.prior()) - identity).abs() <= 1e-9 * (1.0 + identity.abs()));
    }

    #[test]
    fn partition_is_zero_at_zero_and_matches_direct_sum(m in class(), l in 0.0..50.0f64) {
        prop_assert!(m.log_partition(0.0).abs() <= 1e-12);
        let prior = m.prior().weights();
        let direct: f64 = prior.iter().zip(m.risks()).map(|(p, r)| p * (-l * r).exp()).sum::<f64>().ln();
        prop_assert!((m.log_partition(l) - direct).abs() <= 1e-10);
    }

    #[test]
    fn dimension_below_minimizer_prior_mass(m in class()) {
        prop_assert!(m.empirical_dimension() <= m.neg_log_prior_of_minimizers() + 1e-9);
        prop_assert!(m.empirical_dimension() >= 0.0);
    }

    #[test]
    fn text_format_round_trips(m in class()) {
        let back = FiniteHypothesisClass::from_text(&m.to_text()).unwrap();
        prop_assert_eq!(back.risks(), m.risks());
        for (a, b) in back.prior_log().iter().zip(m.prior_log()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
