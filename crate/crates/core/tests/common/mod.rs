#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pacbound::threshold::{LabeledDataset, PredictMode, ThresholdModel};
use pacbound::FiniteHypothesisClass;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random prior, and per-hypothesis Bernoulli losses with random error rates.
pub fn random_class(rng: &mut ChaCha8Rng, h: usize, n: usize) -> FiniteHypothesisClass {
    let prior: Vec<f64> = (0..h).map(|_| rng.gen_range(0.1..1.0)).collect();
    let losses: Vec<Vec<bool>> = (0..h)
        .map(|_| {
            let p = rng.gen_range(0.05..0.5);
            (0..n).map(|_| rng.gen_bool(p)).collect()
        })
        .collect();
    FiniteHypothesisClass::new(&prior, &losses).unwrap()
}

/// Coordinates on a coarse grid so that ties occur.
pub fn threshold_fixture(rng: &mut ChaCha8Rng, n: usize, h: usize, labels: usize) -> LabeledDataset {
    let patterns = (0..n).map(|_| (0..h).map(|_| rng.gen_range(1..10) as f64 / 10.0).collect()).collect();
    let ys = (0..n).map(|_| rng.gen_range(1..=labels)).collect();
    LabeledDataset::new(patterns, ys).unwrap()
}

/// Label distribution of ρ_(t,a) by evaluating the rule at one threshold inside each
/// sub-box cut out of the cell by the new pattern.
pub fn cell_posterior_oracle(model: &ThresholdModel, cell: &[usize], response: &[usize], x: &[f64]) -> Vec<f64> {
    let mid = model.midpoint(cell);
    let len = model.cell_lengths(cell);
    let pieces: Vec<Vec<(f64, f64)>> = (0..model.h())
        .map(|j| {
            let (lo, hi) = (mid[j] - len[j] / 2.0, mid[j] + len[j] / 2.0);
            if x[j] > lo && x[j] < hi {
                vec![(0.5 * (lo + x[j]), x[j] - lo), (0.5 * (x[j] + hi), hi - x[j])]
            } else {
                vec![(mid[j], len[j])]
            }
        })
        .collect();
    let mut p = vec![0.0; model.label_count()];
    let total: f64 = len.iter().product();
    let combos: usize = pieces.iter().map(|v| v.len()).product();
    for mut c in 0..combos {
        let mut weight = 1.0;
        let mut code = 0;
        for (j, choices) in pieces.iter().enumerate() {
            let (t, l) = choices[c % choices.len()];
            c /= choices.len();
            weight *= l;
            if x[j] >= t {
                code |= 1 << j;
            }
        }
        p[response[code]] += weight / total;
    }
    p
}

/// Gibbs prediction by explicit enumeration of all (cell, response) pairs.
pub fn gibbs_prediction_oracle(model: &ThresholdModel, lambda: f64, x: &[f64]) -> Vec<f64> {
    let class = model.enumerate().unwrap();
    let weights = class.gibbs(lambda).weights();
    let responses = weights.len() / model.cell_count();
    let mut p = vec![0.0; model.label_count()];
    for (theta, w) in weights.iter().enumerate() {
        let cell = model.cell(theta / responses);
        let response = model.response_of(theta % responses);
        for (y, q) in cell_posterior_oracle(model, &cell, &response, x).iter().enumerate() {
            p[y] += w * q;
        }
    }
    p
}

pub fn predict_gibbs(model: &ThresholdModel, lambda: f64, x: &[f64]) -> Vec<f64> {
    model.predict(PredictMode::Gibbs(lambda), x).unwrap()
}

/// Half the distance between the convex hulls of two point sets, from the minimum-norm
/// point of the hull of pairwise differences, found by trying every small affine face.
pub fn half_hull_distance(pos: &[Vec<f64>], neg: &[Vec<f64>]) -> f64 {
    let diffs: Vec<DVector<f64>> = pos
        .iter()
        .flat_map(|p| neg.iter().map(move |q| DVector::from_iterator(p.len(), p.iter().zip(q).map(|(a, b)| a - b))))
        .collect();
    let d = diffs[0].len();
    let mut best = f64::INFINITY;
    let mut subset = Vec::new();
    faces(&diffs, d + 1, 0, &mut subset, &mut best);
    best.sqrt() / 2.0
}

fn faces(points: &[DVector<f64>], max: usize, start: usize, subset: &mut Vec<usize>, best: &mut f64) {
    if !subset.is_empty() {
        if let Some(v) = affine_min_norm(points, subset) {
            *best = best.min(v);
        }
    }
    if subset.len() == max {
        return;
    }
    for i in start..points.len() {
        subset.push(i);
        faces(points, max, i + 1, subset, best);
        subset.pop();
    }
}

/// Squared norm of the minimum-norm point of the affine hull, if it lies in the simplex.
fn affine_min_norm(points: &[DVector<f64>], subset: &[usize]) -> Option<f64> {
    let s0 = &points[subset[0]];
    let m = subset.len() - 1;
    if m == 0 {
        return Some(s0.norm_squared());
    }
    let e: Vec<DVector<f64>> = subset[1..].iter().map(|&i| &points[i] - s0).collect();
    let g = DMatrix::from_fn(m, m, |a, b| e[a].dot(&e[b]));
    let rhs = DVector::from_fn(m, |a, _| -e[a].dot(s0));
    let c = g.lu().solve(&rhs)?;
    let c0 = 1.0 - c.sum();
    if c0 < -1e-12 || c.iter().any(|v| *v < -1e-12) {
        return None;
    }
    let mut v = s0.clone();
    for (k, ek) in e.iter().enumerate() {
        v += ek * c[k];
    }
    Some(v.norm_squared())
}
