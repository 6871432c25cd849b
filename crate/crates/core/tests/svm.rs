mod common;

use nalgebra::DMatrix;
use pacbound::svm::{
    gamma_h, gram, margin_to_dimension, predict, solve_dual, solve_dual_traced, FeatureMap, KernelSpec, SolverOptions, SvmModel,
};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_kernel(rng: &mut ChaCha8Rng, depth: u32) -> KernelSpec {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..3) {
            0 => KernelSpec::Linear,
            1 => KernelSpec::Polynomial { coefficients: (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0.0..2.0)).collect() },
            _ => KernelSpec::Gaussian { width: rng.gen_range(0.2..3.0) },
        };
    }
    match rng.gen_range(0..3) {
        0 => KernelSpec::ScaledSum {
            terms: (0..rng.gen_range(1..3)).map(|_| (rng.gen_range(0.0..3.0), random_kernel(rng, depth - 1))).collect(),
        },
        1 => KernelSpec::Product { left: Box::new(random_kernel(rng, depth - 1)), right: Box::new(random_kernel(rng, depth - 1)) },
        _ => {
            let map = if rng.gen_bool(0.5) {
                FeatureMap::Scale { factor: rng.gen_range(-2.0..2.0) }
            } else {
                FeatureMap::Clip { radius: rng.gen_range(0.1..2.0) }
            };
            KernelSpec::FeatureMap { map, inner: Box::new(random_kernel(rng, depth - 1)) }
        }
    }
}

fn separable(rng: &mut ChaCha8Rng, m: usize) -> (Vec<Vec<f64>>, Vec<i8>) {
    loop {
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let offset = rng.gen_range(-0.3..0.3);
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        while pts.len() < m {
            let p = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let s = angle.cos() * p[0] + angle.sin() * p[1] - offset;
            if s.abs() > 0.05 {
                labels.push(if s > 0.0 { 1 } else { -1 });
                pts.push(p);
            }
        }
        if labels.contains(&1) && labels.contains(&-1) {
            return (pts, labels);
        }
    }
}

fn min_eigenvalue(g: &DMatrix<f64>) -> f64 {
    g.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn kernel_algebra_preserves_psd() {
    let mut rng = common::rng(5);
    for _ in 0..100 {
        let kernel = random_kernel(&mut rng, 3);
        kernel.validate().unwrap();
        let d = rng.gen_range(1..4);
        let pts: Vec<Vec<f64>> = (0..12).map(|_| (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect()).collect();
        let g = gram(&kernel, &pts).unwrap();
        assert!(min_eigenvalue(&g) >= -1e-8 * g.trace().max(1.0), "{kernel:?}");
    }
}

#[test]
fn indefinite_similarity_is_rejected() {
    let g_bad = KernelSpec::Polynomial { coefficients: vec![-1.0, 1.0] };
    assert!(g_bad.validate().is_err());
    assert!(gram(&g_bad, &[vec![0.0], vec![1.0]]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dual_objective_decreases_and_converges(seed in any::<u64>(), m in 2usize..25, capped in any::<bool>()) {
        let mut rng = common::rng(seed);
        let (pts, labels) = separable(&mut rng, m);
        let kernel = KernelSpec::Gaussian { width: 0.7 };
        let cap = capped.then_some(1.0);
        let mut trace = Vec::new();
        let sol = solve_dual_traced(&gram(&kernel, &pts).unwrap(), &labels, cap, SolverOptions::default(), Some(&mut trace)).unwrap();
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        prop_assert!(sol.kkt_residual <= 1e-8);
        if let Some(c) = cap {
            prop_assert!(sol.alpha.iter().all(|a| *a <= c + 1e-12));
        }
    }

    #[test]
    fn hard_margin_is_half_the_hull_distance(seed in any::<u64>(), m in 2usize..=10) {
        let mut rng = common::rng(seed);
        let (pts, labels) = separable(&mut rng, m);
        let sol = solve_dual(&gram(&KernelSpec::Linear, &pts).unwrap(), &labels, None).unwrap();
        let side = |s: i8| pts.iter().zip(&labels).filter(|(_, y)| **y == s).map(|(p, _)| p.clone()).collect::<Vec<_>>();
        let oracle = common::half_hull_distance(&side(1), &side(-1));
        prop_assert!((sol.margin.unwrap() - oracle).abs() <= 1e-6);
    }

    #[test]
    fn retraining_on_support_reproduces_predictions(seed in any::<u64>(), m in 3usize..30) {
        let mut rng = common::rng(seed);
        let (pts, labels) = separable(&mut rng, m);
        let kernel = KernelSpec::Polynomial { coefficients: vec![1.0, 1.0, 0.5] };
        let sol = solve_dual(&gram(&kernel, &pts).unwrap(), &labels, None).unwrap();
        let sp: Vec<Vec<f64>> = sol.support.iter().map(|&i| pts[i].clone()).collect();
        let sl: Vec<i8> = sol.support.iter().map(|&i| labels[i]).collect();
        let again = solve_dual(&gram(&kernel, &sp).unwrap(), &sl, None).unwrap();
        for a in 0..10 {
            for b in 0..10 {
                let x = [-0.95 + 0.2 * a as f64, -0.95 + 0.2 * b as f64];
                prop_assert_eq!(predict(&kernel, &sol, &pts, &labels, &x), predict(&kernel, &again, &sp, &sl, &x));
            }
        }
    }

    #[test]
    fn exported_model_agrees_with_the_solution(seed in any::<u64>(), m in 2usize..20) {
        let mut rng = common::rng(seed);
        let (pts, labels) = separable(&mut rng, m);
        let kernel = KernelSpec::Gaussian { width: 1.0 };
        let sol = solve_dual(&gram(&kernel, &pts).unwrap(), &labels, None).unwrap();
        let model = SvmModel::new(&kernel, &sol, &pts, &labels);
        let back: SvmModel = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
        prop_assert_eq!(&back, &model);
        for (x, y) in pts.iter().zip(&labels) {
            prop_assert!(*y as f64 * back.decision_value(x) >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn dimension_decreases_with_margin(r in 0.1..10.0f64, g in 0.01..1.0f64, f in 1.0..3.0f64) {
        let (gamma, radius) = (g * r, r);
        let small = margin_to_dimension(gamma, radius).unwrap();
        let large = margin_to_dimension((gamma * f).min(radius), radius).unwrap();
        prop_assert!(large <= small);
    }
}

#[test]
fn gamma_sequence_decreases() {
    let g: Vec<f64> = (1..200).map(gamma_h).collect();
    assert!(g[0].is_infinite());
    assert!(g.windows(2).all(|w| w[1] < w[0]));
}
