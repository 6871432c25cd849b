//! Kernel support vector machines in dual form, and margin-based bounds.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::CsvTable;
use crate::error::{check_eps, domain, Error, Result};
use crate::optimize::minimize_geometric;
use crate::relative::AtomicMeasure;
use crate::vapnik::{transductive_bound, VapnikQuery};

/// Relative eigenvalue floor accepted when checking a Gram matrix.
pub const PSD_TOLERANCE: f64 = 1e-8;
pub const KKT_TOLERANCE: f64 = 1e-8;
pub const MAX_UPDATES: usize = 100_000;
/// Σα beyond which a hard-margin dual is declared divergent.
const DIVERGENCE: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureMap {
    Scale { factor: f64 },
    /// `x ↦ min(1, radius/‖x‖) x`.
    Clip { radius: f64 },
}

impl FeatureMap {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FeatureMap::Scale { factor } => x.iter().map(|v| v * factor).collect(),
            FeatureMap::Clip { radius } => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let c = if norm > *radius { radius / norm } else { 1.0 };
                x.iter().map(|v| v * c).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    /// `Σ_k c_k ⟨x, y⟩^k` with nonnegative coefficients.
    Polynomial { coefficients: Vec<f64> },
    /// `exp(−‖x − y‖² / (2 width²))`.
    Gaussian { width: f64 },
    ScaledSum { terms: Vec<(f64, KernelSpec)> },
    Product { left: Box<KernelSpec>, right: Box<KernelSpec> },
    /// `K(g(x), g(y))`.
    FeatureMap { map: FeatureMap, inner: Box<KernelSpec> },
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { coefficients } => {
                if coefficients.iter().all(|c| *c >= 0.0) {
                    Ok(())
                } else {
                    domain("polynomial kernel coefficients must be nonnegative")
                }
            }
            KernelSpec::Gaussian { width } => {
                if *width > 0.0 {
                    Ok(())
                } else {
                    domain("gaussian kernel width must be positive")
                }
            }
            KernelSpec::ScaledSum { terms } => {
                for (s, k) in terms {
                    if !(*s >= 0.0) {
                        return domain("kernel sum scales must be nonnegative");
                    }
                    k.validate()?;
                }
                Ok(())
            }
            KernelSpec::Product { left, right } => {
                left.validate()?;
                right.validate()
            }
            KernelSpec::FeatureMap { map, inner } => {
                match map {
                    FeatureMap::Scale { factor } if !factor.is_finite() => return domain("scale must be finite"),
                    FeatureMap::Clip { radius } if !(*radius > 0.0) => return domain("clip radius must be positive"),
                    _ => {}
                }
                inner.validate()
            }
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Polynomial { coefficients } => {
                let s = dot(x, y);
                coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c)
            }
            KernelSpec::Gaussian { width } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * width * width)).exp()
            }
            KernelSpec::ScaledSum { terms } => terms.iter().map(|(s, k)| s * k.eval(x, y)).sum(),
            KernelSpec::Product { left, right } => left.eval(x, y) * right.eval(x, y),
            KernelSpec::FeatureMap { map, inner } => inner.eval(&map.apply(x), &map.apply(y)),
        }
    }
}

/// Gram matrix, rejected when an eigenvalue falls below `−1e-8·trace`.
pub fn gram(kernel: &KernelSpec, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    kernel.validate()?;
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return domain("points must be finite");
    }
    let n = points.len();
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| (0..n).map(|j| kernel.eval(&points[i], &points[j])).collect()).collect();
    let g = DMatrix::from_fn(n, n, |i, j| 0.5 * (rows[i][j] + rows[j][i]));
    if n > 0 {
        let floor = -PSD_TOLERANCE * g.trace().abs().max(f64::MIN_POSITIVE);
        let min = SymmetricEigen::new(g.clone()).eigenvalues.min();
        if min < floor {
            return Err(Error::Domain(format!("kernel error: Gram eigenvalue {min:e} below {floor:e}")));
        }
    }
    Ok(g)
}

/// `max_i ‖φ(x_i) − mean φ‖²` from Gram entries.
pub fn radius_squared(g: &DMatrix<f64>) -> f64 {
    let m = g.nrows() as f64;
    let mean = g.sum() / (m * m);
    (0..g.nrows())
        .map(|i| g[(i, i)] - 2.0 * g.row(i).sum() / m)
        .fold(f64::NEG_INFINITY, f64::max)
        + mean
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub box_cap: Option<f64>,
    pub support: Vec<usize>,
    /// `1/‖w‖`, present when every training point reaches functional margin one.
    pub margin: Option<f64>,
    /// `‖w‖² − 2Σα`.
    pub objective: f64,
    pub kkt_residual: f64,
    pub updates: usize,
}

impl DualSolution {
    pub fn w_norm(&self) -> f64 {
        (self.objective + 2.0 * self.alpha.iter().sum::<f64>()).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_updates: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: KKT_TOLERANCE, max_updates: MAX_UPDATES }
    }
}

fn check_labels(labels: &[i8]) -> Result<()> {
    if labels.iter().any(|y| *y != 1 && *y != -1) {
        return domain("labels must be ±1");
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::Degenerate("both labels must be present".into()));
    }
    Ok(())
}

pub fn solve_dual(g: &DMatrix<f64>, labels: &[i8], box_cap: Option<f64>) -> Result<DualSolution> {
    solve_dual_traced(g, labels, box_cap, SolverOptions::default(), None)
}

/// Maximal-violating-pair coordinate descent on `½αᵀQα − Σα`, `Q_ij = y_i y_j K_ij`.
/// When `trace` is given, the objective `‖w‖² − 2Σα` is pushed after every update.
pub fn solve_dual_traced(
    g: &DMatrix<f64>,
    labels: &[i8],
    box_cap: Option<f64>,
    opts: SolverOptions,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<DualSolution> {
    let n = labels.len();
    if g.nrows() != n || g.ncols() != n {
        return domain("Gram matrix size does not match the labels");
    }
    check_labels(labels)?;
    if let Some(c) = box_cap {
        if !(c > 0.0) {
            return domain("box cap must be positive");
        }
    }
    let cap = box_cap.unwrap_or(f64::INFINITY);
    let y: Vec<f64> = labels.iter().map(|v| *v as f64).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut updates = 0;
    let mut residual;
    loop {
        let (mut i, mut up) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut low) = (usize::MAX, f64::INFINITY);
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = if y[t] > 0.0 { alpha[t] < cap } else { alpha[t] > 0.0 };
            let in_low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < cap };
            if in_up && v > up {
                (i, up) = (t, v);
            }
            if in_low && v < low {
                (j, low) = (t, v);
            }
        }
        residual = up - low;
        if i == usize::MAX || j == usize::MAX || residual < opts.tol {
            residual = residual.max(0.0);
            break;
        }
        if updates >= opts.max_updates {
            return if box_cap.is_none() {
                Err(Error::Inseparable)
            } else {
                Err(Error::Degenerate(format!("dual solver stopped after {updates} updates with KKT residual {residual:e}")))
            };
        }
        let curvature = g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)];
        let room_i = if y[i] > 0.0 { cap - alpha[i] } else { alpha[i] };
        let room_j = if y[j] > 0.0 { alpha[j] } else { cap - alpha[j] };
        let free = if curvature > 1e-12 { residual / curvature } else { f64::INFINITY };
        let t = free.min(room_i).min(room_j);
        if !t.is_finite() {
            return Err(Error::Inseparable);
        }
        alpha[i] = (alpha[i] + y[i] * t).clamp(0.0, cap);
        alpha[j] = (alpha[j] - y[j] * t).clamp(0.0, cap);
        if t == room_i {
            alpha[i] = if y[i] > 0.0 { cap } else { 0.0 };
        }
        if t == room_j {
            alpha[j] = if y[j] > 0.0 { 0.0 } else { cap };
        }
        for k in 0..n {
            grad[k] += y[k] * t * (g[(k, i)] - g[(k, j)]);
        }
        updates += 1;
        if box_cap.is_none() && alpha.iter().sum::<f64>() > DIVERGENCE {
            return Err(Error::Inseparable);
        }
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(objective(&alpha, &grad));
        }
    }
    let scores: Vec<f64> = (0..n).map(|k| y[k] * (grad[k] + 1.0)).collect();
    let max_alpha = alpha.iter().cloned().fold(0.0, f64::max);
    let support: Vec<usize> = (0..n).filter(|&k| alpha[k] > 1e-7 * max_alpha).collect();
    let interior = support.iter().copied().find(|&k| alpha[k] < cap * (1.0 - 1e-9));
    let bias = match interior {
        Some(k) => scores[k] - y[k],
        None => support
            .iter()
            .filter(|&&k| y[k] > 0.0)
            .map(|&k| scores[k] - 1.0)
            .fold(f64::NEG_INFINITY, f64::max),
    };
    if !bias.is_finite() {
        return Err(Error::Degenerate("no support point to place the threshold".into()));
    }
    let obj = objective(&alpha, &grad);
    let w2 = obj + 2.0 * alpha.iter().sum::<f64>();
    let canonical = (0..n).all(|k| y[k] * (scores[k] - bias) >= 1.0 - 1e-6);
    let margin = if w2 > 0.0 && (box_cap.is_none() || canonical) { Some(1.0 / w2.sqrt()) } else { None };
    Ok(DualSolution { alpha, bias, box_cap, support, margin, objective: obj, kkt_residual: residual, updates })
}

/// `αᵀQα − 2Σα` from the gradient `Qα − 1`.
fn objective(alpha: &[f64], grad: &[f64]) -> f64 {
    alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum()
}

/// `Σ α_i y_i K(x_i, x) − b*`.
pub fn decision_value(kernel: &KernelSpec, sol: &DualSolution, points: &[Vec<f64>], labels: &[i8], x: &[f64]) -> f64 {
    sol.support.iter().map(|&i| sol.alpha[i] * labels[i] as f64 * kernel.eval(&points[i], x)).sum::<f64>() - sol.bias
}

/// Sign of the decision value, with `+1` on the boundary.
pub fn predict(kernel: &KernelSpec, sol: &DualSolution, points: &[Vec<f64>], labels: &[i8], x: &[f64]) -> i8 {
    if decision_value(kernel, sol, points, labels, x) >= 0.0 {
        1
    } else {
        -1
    }
}

/// γ_h: `(2m−1)^{−1/2}` for `h = 2m`, `[2m(1 − (2m+1)^{−2})]^{−1/2}` for `h = 2m+1`, and `∞` for `h = 1`.
pub fn gamma_h(h: usize) -> f64 {
    let m = (h / 2) as f64;
    if h % 2 == 0 {
        (2.0 * m - 1.0).powf(-0.5)
    } else {
        let odd = 2.0 * m + 1.0;
        (2.0 * m * (1.0 - 1.0 / (odd * odd))).powf(-0.5)
    }
}

/// Smallest `h` with `R γ_h ≤ margin`.
pub fn margin_to_dimension(margin: f64, radius: f64) -> Result<usize> {
    if !(margin > 0.0 && radius > 0.0) {
        return domain("margin and radius must be positive");
    }
    let ratio = margin / radius;
    let fits = |h: usize| radius * gamma_h(h) <= margin * (1.0 + 1e-12);
    let mut h = ((1.0 / (ratio * ratio)).floor() as usize).max(2);
    while h > 2 && fits(h - 1) {
        h -= 1;
    }
    while !fits(h) {
        h += 1;
    }
    Ok(h)
}

fn log_binomial(n: usize, i: usize) -> f64 {
    (0..i).map(|k| ((n - k) as f64).ln() - ((k + 1) as f64).ln()).sum()
}

/// Log size of a 1-net for `b`-valued functions on `n` points of fat shattering dimension at most `h`.
/// Returns `(closed form, binomial-sum form)`, each capped by `n log b`.
pub fn fat_shattering_cover_log(n: usize, b: usize, h: usize) -> Result<(f64, f64)> {
    if b < 3 {
        return domain("need at least three levels");
    }
    if h == 0 || h > n {
        return domain(format!("need 1 ≤ h ≤ n, got h = {h}, n = {n}"));
    }
    let (nf, bf, hf) = (n as f64, b as f64, h as f64);
    let cap = nf * bf.ln();
    let lead = ((bf - 1.0) * (bf - 2.0) * nf).ln();
    let ln2 = std::f64::consts::LN_2;
    let closed = lead * (((bf - 2.0) * nf / hf).ln() + 1.0) * hf / ln2 + lead + ln2;
    let terms: Vec<f64> = (1..=h).map(|i| log_binomial(n, i) + i as f64 * (bf - 2.0).ln()).collect();
    let sum = crate::kernels::log_sum_exp(&terms);
    let exact = lead * (sum / ln2 + 1.0) + ln2;
    Ok((closed.min(cap), exact.min(cap)))
}

/// Shadow-sample bound for an SVM in the margin model of dimension `h`. Returns `(bound, λ*)`.
pub fn transductive_svm_bound(r1: f64, n: usize, k: u32, h: usize, eps: f64) -> Result<(f64, f64)> {
    check_eps(eps)?;
    if h == 0 || k == 0 {
        return domain("h and k must be positive");
    }
    let total = (k as f64 + 1.0) * n as f64;
    if h as f64 > total {
        return domain(format!("h = {h} exceeds (k+1)N = {total}"));
    }
    let hf = h as f64;
    let mut q = VapnikQuery::new(n, r1, h as u64, eps)?;
    q.complexity_override = Some(hf * (std::f64::consts::E * total / hf).ln() + (hf * (hf + 1.0)).ln());
    transductive_bound(&q, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginBound {
    pub bound: f64,
    pub h: usize,
    pub lambda: f64,
    /// Fraction of training points within `4 R_max γ_h` of the decision surface.
    pub quantile: f64,
    pub complexity: f64,
}

/// Inductive margin-quantile bound. `margins[i] = Y_i g_{w,b}∘t_{R_max}(X_i)` with `‖w‖ = 1`.
pub fn inductive_margin_bound(
    margins: &[f64],
    r_max: f64,
    nu: &AtomicMeasure,
    eps: f64,
    k: u32,
    h_grid: &[usize],
) -> Result<MarginBound> {
    check_eps(eps)?;
    let n = margins.len();
    if n == 0 || k == 0 {
        return domain("need training margins and k ≥ 1");
    }
    let mass = nu.weight(r_max);
    if !(mass > 0.0) {
        return domain(format!("R_max = {r_max} is not an atom of the prior"));
    }
    let (nf, kf) = (n as f64, k as f64);
    let mut best: Option<MarginBound> = None;
    for &h in h_grid {
        let (cover, _) = fat_shattering_cover_log(((k as usize) + 1) * n, 6, h)?;
        let hf = h as f64;
        let d = cover + (hf * (hf + 1.0)).ln() - eps.ln() - mass.ln();
        let level = 4.0 * r_max * gamma_h(h);
        let q = margins.iter().filter(|m| **m <= level).count() as f64 / nf;
        let (inner, lambda) = if q == 0.0 {
            (-(-d / nf).exp_m1(), f64::INFINITY)
        } else {
            let m = minimize_geometric(|l| -(-l * q / nf - d / nf).exp_m1() / -(-l / nf).exp_m1(), 1.0, 10.0 * nf, 1.1);
            (m.value, m.x)
        };
        let bound = (kf + 1.0) / kf * inner - q / kf;
        if best.map_or(true, |b| bound < b.bound) {
            best = Some(MarginBound { bound, h, lambda, quantile: q, complexity: d });
        }
    }
    best.ok_or_else(|| Error::Domain("empty h grid".into()))
}

/// Closed form for a separating hyperplane with margin `gamma` and radius `radius`.
pub fn simplified_margin_bound(gamma: f64, radius: f64, n: usize, k: u32, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if !(gamma > 0.0 && radius > 0.0) || n == 0 || k == 0 {
        return domain("need positive margin, radius, N and k");
    }
    let (nf, kf) = (n as f64, k as f64);
    let total = (kf + 1.0) * nf;
    let (g2, r2) = (gamma * gamma, radius * radius);
    let inner = (20.0 * total).ln() / nf
        * ((16.0 * r2 + 2.0 * g2) / (std::f64::consts::LN_2 * g2) * (std::f64::consts::E * total * g2 / (4.0 * r2)).ln() + 1.0)
        - (eps / 2.0).ln() / nf;
    Ok((kf + 1.0) / kf * -(-inner).exp_m1())
}

/// `Y_i g_{w,b}∘t_{R_max}(X_i)` with `w` normalized, clipping done in feature space.
pub fn clipped_margins(kernel: &KernelSpec, sol: &DualSolution, points: &[Vec<f64>], labels: &[i8], r_max: f64) -> Vec<f64> {
    let w = sol.w_norm();
    points
        .iter()
        .zip(labels)
        .map(|(x, y)| {
            let raw = decision_value(kernel, sol, points, labels, x) + sol.bias;
            let norm = kernel.eval(x, x).max(0.0).sqrt();
            let c = if norm > r_max { r_max / norm } else { 1.0 };
            *y as f64 * (c * raw - sol.bias) / w
        })
        .collect()
}

/// Result of the shadow-sample margin pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransductiveSvm {
    pub h: usize,
    pub margin: f64,
    pub radius: f64,
    pub r1: f64,
    pub bound: f64,
    pub lambda: f64,
    pub support: Vec<usize>,
}

/// Trains on the labeled part, labels every pattern with the sign of that machine,
/// retrains a hard-margin machine on the relabeled extended set and bounds its shadow error.
pub fn transductive_margin_pipeline(
    kernel: &KernelSpec,
    train: &[Vec<f64>],
    labels: &[i8],
    shadow: &[Vec<f64>],
    k: u32,
    eps: f64,
    box_cap: Option<f64>,
) -> Result<TransductiveSvm> {
    let n = train.len();
    if n == 0 || labels.len() != n {
        return domain("training points and labels must match");
    }
    if k == 0 || shadow.len() != k as usize * n {
        return domain(format!("expected k·N = {} shadow patterns, got {}", k as usize * n, shadow.len()));
    }
    let first = solve_dual(&gram(kernel, train)?, labels, box_cap)?;
    let all: Vec<Vec<f64>> = train.iter().chain(shadow).cloned().collect();
    let relabeled: Vec<i8> = all.iter().map(|x| predict(kernel, &first, train, labels, x)).collect();
    let g_all = gram(kernel, &all)?;
    let second = solve_dual(&g_all, &relabeled, None)?;
    let margin = second.margin.ok_or(Error::Inseparable)?;
    let radius = radius_squared(&g_all).max(0.0).sqrt();
    let h = margin_to_dimension(margin, radius)?;
    if h > n {
        return Err(Error::Undefined(format!("margin dimension {h} exceeds N = {n}")));
    }
    let errors = (0..n).filter(|&i| predict(kernel, &second, &all, &relabeled, &train[i]) != labels[i]).count();
    let r1 = errors as f64 / n as f64;
    let (bound, lambda) = transductive_svm_bound(r1, n, k, h, eps)?;
    Ok(TransductiveSvm { h, margin, radius, r1, bound, lambda, support: second.support })
}

/// Is there `(w, b)` with `y_i(⟨w, x_i⟩ − b) ≥ 1` for all `i`?
pub fn linearly_separable(points: &[Vec<f64>], labels: &[i8]) -> bool {
    let d = points.first().map_or(0, |p| p.len());
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let w: Vec<_> = (0..d).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let b = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    for (x, y) in points.iter().zip(labels) {
        let yf = *y as f64;
        let mut row: Vec<_> = w.iter().zip(x).map(|(v, c)| (*v, yf * c)).collect();
        row.push((b, -yf));
        lp.add_constraint(&row, ComparisonOp::Ge, 1.0);
    }
    lp.solve().is_ok()
}

/// Whether half-spaces realize every labeling of `points`.
pub fn shattered(points: &[Vec<f64>]) -> bool {
    let m = points.len();
    (0u64..1 << m).all(|mask| {
        let labels: Vec<i8> = (0..m).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
        linearly_separable(points, &labels)
    })
}

/// VC dimension of half-spaces in `ℝ^d`, checked exhaustively: the origin plus the unit
/// vectors is shattered and each of `trials` seeded `d+2`-point sets is not.
pub fn halfspace_vc_check(d: usize, trials: usize, seed: u64) -> Result<usize> {
    if d == 0 || d > 4 {
        return domain("exhaustive check supports 1 ≤ d ≤ 4");
    }
    let mut simplex = vec![vec![0.0; d]];
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        simplex.push(e);
    }
    if !shattered(&simplex) {
        return Err(Error::Degenerate(format!("simplex of {} points not shattered", d + 1)));
    }
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    for _ in 0..trials {
        let pts: Vec<Vec<f64>> = (0..d + 2).map(|_| (0..d).map(|_| next()).collect()).collect();
        if shattered(&pts) {
            return Err(Error::Degenerate(format!("{} points shattered in dimension {d}", d + 2)));
        }
    }
    Ok(d + 1)
}

/// Labeled points for SVM training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmDataset {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<i8>,
}

impl SvmDataset {
    pub fn from_table(table: &CsvTable) -> Result<Self> {
        let mut labels = Vec::with_capacity(table.labels.len());
        for (&y, &line) in table.labels.iter().zip(&table.lines) {
            match y {
                1 | -1 => labels.push(y as i8),
                _ => return Err(Error::Ingestion(format!("line {line}: label {y} must be +1 or -1"))),
            }
        }
        let d = table.features[0].len();
        if let Some(i) = table.features.iter().position(|x| x.len() != d) {
            return Err(Error::Ingestion(format!("line {}: inconsistent feature count", table.lines[i])));
        }
        Ok(Self { points: table.features.clone(), labels })
    }
}

/// Exported trained machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: KernelSpec,
    pub support: Vec<usize>,
    pub support_points: Vec<Vec<f64>>,
    pub support_labels: Vec<i8>,
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub margin: Option<f64>,
}

impl SvmModel {
    pub fn new(kernel: &KernelSpec, sol: &DualSolution, points: &[Vec<f64>], labels: &[i8]) -> Self {
        Self {
            kernel: kernel.clone(),
            support: sol.support.clone(),
            support_points: sol.support.iter().map(|&i| points[i].clone()).collect(),
            support_labels: sol.support.iter().map(|&i| labels[i]).collect(),
            alpha: sol.support.iter().map(|&i| sol.alpha[i]).collect(),
            bias: sol.bias,
            margin: sol.margin,
        }
    }

    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.support_points
            .iter()
            .zip(&self.support_labels)
            .zip(&self.alpha)
            .map(|((p, y), a)| a * *y as f64 * self.kernel.eval(p, x))
            .sum::<f64>()
            - self.bias
    }
}
