//! Bounds on risk differences: margin functions, relative deviation bounds,
//! comparisons with Gibbs priors and between posteriors.

use serde::{Deserialize, Serialize};

use crate::error::{check_eps, domain, Error, Result};
use crate::finite_model::{excess_dimension, gibbs_of, kl, log_partition_of, support_min};
use crate::finite_model::{FiniteHypothesisClass, PosteriorWeights, BETA_GRID_RATIO};
use crate::kernels::{f_gamma_alpha_inv, log_cosh, log_sum_exp, xi};
use crate::local::{local_root, OracleRisk};
use crate::optimize::log_space;

/// Which hypotheses the supremum of a margin function runs over.
#[derive(Debug, Clone, Copy)]
pub enum MarginMode<'a> {
    /// φ̄: the whole prior support, anchored at the empirical risk minimizer.
    Empirical,
    /// φ̃: the subset Θ₁, still anchored at the minimizer over the whole class.
    EmpiricalSub(&'a [usize]),
    /// φ: oracle risks, anchored at their minimizer. Disagreement is measured
    /// on the sample points of the model.
    Oracle(&'a OracleRisk),
}

/// Piecewise-linear convex function `x ↦ max_θ m_θ − x·Δ_θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginFunction {
    pub anchor: usize,
    /// `(m′(θ, anchor), risk(θ) − risk(anchor))` per hypothesis in the supremum.
    pub pieces: Vec<(f64, f64)>,
}

impl MarginFunction {
    pub fn new(model: &FiniteHypothesisClass, mode: MarginMode<'_>) -> Result<Self> {
        let support: Vec<usize> = (0..model.h()).filter(|&t| model.prior_log()[t] > f64::NEG_INFINITY).collect();
        let (risks, subset): (&[f64], Vec<usize>) = match mode {
            MarginMode::Empirical => (model.risks(), support.clone()),
            MarginMode::EmpiricalSub(sub) => {
                if sub.is_empty() {
                    return domain("empty hypothesis subset");
                }
                if sub.iter().any(|&t| t >= model.h()) {
                    return domain("hypothesis subset index out of range");
                }
                (model.risks(), sub.to_vec())
            }
            MarginMode::Oracle(o) => {
                if o.risk_values.len() != model.h() {
                    return domain("oracle risk length differs from the number of hypotheses");
                }
                (&o.risk_values, support.clone())
            }
        };
        let anchor = lowest_argmin(&support, risks);
        let pieces = subset
            .iter()
            .map(|&t| (model.pair_distance_unchecked(t, anchor), risks[t] - risks[anchor]))
            .collect();
        Ok(Self { anchor, pieces })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces.iter().map(|(m, d)| m - x * d).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn lowest_argmin(candidates: &[usize], values: &[f64]) -> usize {
    let mut best = candidates[0];
    for &t in candidates {
        if values[t] < values[best] {
            best = t;
        }
    }
    best
}

/// Evaluates a margin function at `x`.
pub fn margin_function(model: &FiniteHypothesisClass, mode: MarginMode<'_>, x: f64) -> Result<f64> {
    Ok(MarginFunction::new(model, mode)?.eval(x))
}

/// Excess-risk rate under the margin assumption with exponent `κ` and constant `c`,
/// for a parametric model of dimension `d`. Returns `(rate, λ̄)`.
pub fn margin_rate(kappa: f64, c: f64, d: f64, n: usize) -> Result<(f64, f64)> {
    if !(kappa >= 1.0) {
        return domain(format!("margin exponent must be at least 1, got {kappa}"));
    }
    if !(c > 0.0) || !(d >= 0.0) || n == 0 {
        return domain("need c > 0, d ≥ 0 and N > 0");
    }
    let n = n as f64;
    let e = 2.0 * kappa - 1.0;
    let k8 = 8.0 * std::f64::consts::LN_2 * d;
    let rate = (2.0 - 1.0 / kappa) * (kappa * c).powf(-1.0 / e) * (k8 / n).powf(kappa / e);
    let lambda_bar = 0.5 * k8.powf((kappa - 1.0) / e) * (kappa * c).powf(1.0 / e) * n.powf(kappa / e);
    Ok((rate, lambda_bar))
}

/// `ess inf R` plus the margin rate, with `d` measured on the oracle risks when not given.
pub fn nonrandom_relative(
    model: &FiniteHypothesisClass,
    oracle: &OracleRisk,
    kappa: f64,
    c: f64,
    d: Option<f64>,
) -> Result<f64> {
    if oracle.risk_values.len() != model.h() {
        return domain("oracle risk length differs from the number of hypotheses");
    }
    let prior = model.prior_log();
    let d = d.unwrap_or_else(|| excess_dimension(prior, &oracle.risk_values, 0.0, model.n(), BETA_GRID_RATIO));
    let (rate, _) = margin_rate(kappa, c, d, model.n())?;
    Ok(support_min(prior, &oracle.risk_values) + rate)
}

/// Bound on the expected risk of `π_{exp(−λr)}` through the oracle margin function at `x`.
pub fn oracle_margin_bound(
    model: &FiniteHypothesisClass,
    oracle: &OracleRisk,
    beta: f64,
    lambda: f64,
    x: f64,
) -> Result<f64> {
    let n = model.n() as f64;
    let den = lambda - x * lambda * lambda / (2.0 * n) - beta;
    if !(x >= 0.0 && beta >= 0.0 && den > 0.0) {
        return domain("need x ≥ 0 and 0 ≤ β < λ − xλ²/2N");
    }
    let phi = margin_function(model, MarginMode::Oracle(oracle), x)?;
    let (prior, risk) = (model.prior_log(), &oracle.risk_values);
    let inf = support_min(prior, risk);
    let integral = log_partition_of(prior, risk, beta) - log_partition_of(prior, risk, lambda) - (lambda - beta) * inf;
    Ok(inf + (integral.max(0.0) + phi * lambda * lambda / (2.0 * n)) / den)
}

/// Empirical relative bound on `ρ(R) − inf_{Θ₁} R` in expectation.
#[allow(clippy::too_many_arguments)]
pub fn empirical_relative(
    model: &FiniteHypothesisClass,
    rho: &PosteriorWeights,
    subset: &[usize],
    x: f64,
    alpha: f64,
    lambda: f64,
) -> Result<f64> {
    let n = model.n() as f64;
    let sinh = n * (lambda / n).sinh();
    let tanh = (lambda / (2.0 * n)).tanh();
    let s = sinh * (1.0 - x * tanh);
    if !(x >= 0.0 && alpha >= 0.0 && lambda > 0.0 && alpha < s) {
        return domain(format!("need α < N sinh(λ/N)(1 − x tanh(λ/2N)) = {s}"));
    }
    let full = MarginFunction::new(model, MarginMode::Empirical)?;
    let sub = MarginFunction::new(model, MarginMode::EmpiricalSub(subset))?;
    let w = sinh * tanh;
    let excess = rho.expect(model.risks()) - model.risks()[full.anchor];
    let div = kl(rho, &model.gibbs(alpha));
    Ok((1.0 - (s - lambda) / (s - alpha)) * excess
        + div / (s - alpha)
        + w / (s - alpha) * (full.eval(x) + sub.eval((lambda - alpha) / w)))
}

/// Nonlinear relative deviation bound and the linear quantity `B(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeDeviation {
    pub nonlinear: f64,
    pub linear: f64,
}

/// Solves `−log[(1 − λR)(1 + βR)] ≤ (λ − β)B` for the largest `R`.
pub fn relative_root(lambda: f64, beta: f64, b: f64) -> f64 {
    local_root(lambda, beta, b)
}

/// Temperature `(N/2) log[(1 + t)/((1 − t)(1 − t²)^x)]` attached to a tanh-scale parameter.
pub fn relative_temperature(t: f64, x: f64, n: usize) -> f64 {
    0.5 * n as f64 * ((2.0 * t / (1.0 - t)).ln_1p() - x * (-t * t).ln_1p())
}

/// Deviation bound on `ρ(R) − inf_{Θ₁} R` with tanh-scale parameters `0 ≤ β < λ < 1`.
///
/// `rho` defaults to the Gibbs posterior at the upper temperature, where the
/// divergence term vanishes.
#[allow(clippy::too_many_arguments)]
pub fn relative_deviation(
    model: &FiniteHypothesisClass,
    eps: f64,
    lambda: f64,
    beta: f64,
    x: f64,
    subset: &[usize],
    rho: Option<&PosteriorWeights>,
) -> Result<RelativeDeviation> {
    check_eps(eps)?;
    if !(0.0 <= beta && beta < lambda && lambda < 1.0) || !(x >= 0.0) {
        return domain(format!("need 0 ≤ β < λ < 1 and x ≥ 0, got β={beta}, λ={lambda}, x={x}"));
    }
    let n = model.n();
    let nf = n as f64;
    let hi = relative_temperature(lambda, x, n);
    let lo = relative_temperature(beta, x, n);
    let full = MarginFunction::new(model, MarginMode::Empirical)?;
    let sub = MarginFunction::new(model, MarginMode::EmpiricalSub(subset))?;
    let r_hat = model.risks()[full.anchor];
    let integral = (model.log_partition(lo) - model.log_partition(hi) - (hi - lo) * r_hat).max(0.0);
    let div = match rho {
        Some(rho) => kl(rho, &model.gibbs(hi)),
        None => 0.0,
    };
    let log_prod = (-lambda * lambda).ln_1p() + (-beta * beta).ln_1p();
    let ratio = ((1.0 + lambda) * (1.0 - beta) / ((1.0 - lambda) * (1.0 + beta))).ln() / -log_prod;
    let margin = full.eval(x) + sub.eval(ratio);
    let b = (integral + div - 2.0 * eps.ln()) / (nf * (lambda - beta)) - log_prod / (2.0 * (lambda - beta)) * margin;
    Ok(RelativeDeviation { nonlinear: relative_root(lambda, beta, b), linear: b })
}

/// Atomic probability measure on the positive half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return domain("atoms and weights must be nonempty and of equal length");
        }
        if atoms.iter().any(|a| !(*a > 0.0)) || weights.iter().any(|w| !(*w >= 0.0)) {
            return domain("atoms must be positive and weights nonnegative");
        }
        if weights.iter().sum::<f64>() > 1.0 + 1e-9 {
            return domain("atomic weights sum above one");
        }
        Ok(Self { atoms, weights })
    }

    /// `ν(α^k) = log α / log(αN)` for `α^k < N`.
    pub fn geometric_uniform(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha > 1.0) {
            return domain("grid ratio must exceed 1");
        }
        let n = n as f64;
        let w = alpha.ln() / (alpha * n).ln();
        let atoms: Vec<f64> = (0..).map(|k| alpha.powi(k)).take_while(|a| *a < n).collect();
        let weights = vec![w; atoms.len()];
        Self::new(atoms, weights)
    }

    /// `ν(α^k) = 1/((k+1)(k+2))` for `k < count`.
    pub fn geometric_harmonic(alpha: f64, count: usize) -> Result<Self> {
        if !(alpha > 1.0) {
            return domain("grid ratio must exceed 1");
        }
        let atoms = (0..count).map(|k| alpha.powi(k as i32)).collect();
        let weights = (0..count).map(|k| 1.0 / ((k as f64 + 1.0) * (k as f64 + 2.0))).collect();
        Self::new(atoms, weights)
    }

    /// Mass of the atom at `x` (relative tolerance 1e-12), zero when absent.
    pub fn weight(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| (*a - x).abs() <= 1e-12 * a.abs().max(x.abs()))
            .map(|(_, w)| *w)
            .sum()
    }
}

pub const INNER_GRID_POINTS: usize = 64;

/// Gibbs-comparison bound together with the implied bound on `ρ(R) − π_{exp(−βR)}(R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsComparison {
    pub b: f64,
    pub difference: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

fn mgf_under(prior_log: &[f64], risks: &[f64], lambda: f64, profile: &[f64], xi: f64) -> f64 {
    let g = gibbs_of(prior_log, risks, lambda);
    let terms: Vec<f64> = g.log_weights.iter().zip(profile).map(|(w, p)| w + xi * p).collect();
    log_sum_exp(&terms)
}

/// `B(ρ, β, γ)` minimized over the inner temperatures `λ₁ ≤ γ`, `λ₂ > βγ/(N tanh(γ/N))`.
pub fn gibbs_comparison(
    model: &FiniteHypothesisClass,
    eps: f64,
    nu: &AtomicMeasure,
    rho: &PosteriorWeights,
    beta: f64,
    gamma: f64,
) -> Result<GibbsComparison> {
    check_eps(eps)?;
    if !(beta > 0.0 && gamma > 0.0) {
        return domain("β and γ must be positive");
    }
    let profile = model.pair_profile(rho);
    Ok(gibbs_comparison_with_profile(model, eps, nu, rho, &profile, beta, gamma))
}

fn gibbs_comparison_with_profile(
    model: &FiniteHypothesisClass,
    eps: f64,
    nu: &AtomicMeasure,
    rho: &PosteriorWeights,
    profile: &[f64],
    beta: f64,
    gamma: f64,
) -> GibbsComparison {
    let n = model.n() as f64;
    let (wb, wg) = (nu.weight(beta), nu.weight(gamma));
    if wb == 0.0 || wg == 0.0 {
        return GibbsComparison { b: f64::INFINITY, difference: f64::INFINITY, lambda1: gamma, lambda2: f64::NAN };
    }
    let penalty = -(eps * wb * wg).ln();
    let t = (gamma / n).tanh();
    let xi_c = n * log_cosh(gamma / n);
    let grid = log_space(beta / 4.0, 4.0 * gamma, INNER_GRID_POINTS);
    let floor = beta * gamma / (n * t);

    let mut inner = (f64::INFINITY, f64::NAN);
    for &l2 in grid.iter().filter(|l| **l > floor) {
        let g = model.gibbs(l2);
        let target = model.mgf_pair(l2, &g, xi_c) + penalty;
        let v = match f_gamma_alpha_inv(gamma, beta * gamma / l2, n, target) {
            Ok(f) => -g.expect(model.risks()) + beta / l2 * f,
            Err(_) => f64::INFINITY,
        };
        if v < inner.0 {
            inner = (v, l2);
        }
    }
    let rho_r = rho.expect(model.risks());
    let mut best = (f64::INFINITY, gamma);
    for l1 in grid.iter().copied().filter(|l| *l <= gamma).chain(std::iter::once(gamma)) {
        let slope = gamma - l1;
        let shift = if slope > 0.0 { slope * (rho_r + inner.0) } else { 0.0 };
        let v = kl(rho, &model.gibbs(l1)) + model.mgf_of_profile(l1, profile, xi_c) + penalty + shift;
        if v < best.0 {
            best = (v, l1);
        }
    }
    let b = best.0;
    let slope0 = n * t - beta;
    let difference = if slope0 <= 0.0 || !b.is_finite() {
        f64::INFINITY
    } else if b >= 0.0 {
        f_gamma_alpha_inv(gamma, beta, n, b).unwrap_or(f64::INFINITY)
    } else {
        b / slope0
    };
    let lambda2 = if best.1 < gamma { inner.1 } else { f64::NAN };
    GibbsComparison { b, difference, lambda1: best.1, lambda2 }
}

/// Certified lower bound `β̂` on the inverse effective temperature of `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureEstimate {
    pub beta_hat: f64,
    pub gamma_star: Option<f64>,
    /// `(β, γ)` pairs examined, in scan order.
    pub grid: Vec<(f64, f64)>,
    /// Bound values for the pairs in `grid`.
    pub certificate: Vec<f64>,
}

/// Scans β atoms from the largest down and returns the first with some γ giving `B ≤ 0`.
pub fn effective_temperature(
    model: &FiniteHypothesisClass,
    eps: f64,
    rho: &PosteriorWeights,
    nu: &AtomicMeasure,
) -> Result<TemperatureEstimate> {
    check_eps(eps)?;
    let n = model.n() as f64;
    let profile = model.pair_profile(rho);
    let mut atoms: Vec<f64> = nu.atoms.iter().copied().zip(&nu.weights).filter(|(_, w)| **w > 0.0).map(|(a, _)| a).collect();
    atoms.sort_by(|a, b| b.total_cmp(a));
    atoms.dedup();
    let mut grid = Vec::new();
    let mut certificate = Vec::new();
    for &beta in &atoms {
        for &gamma in atoms.iter().rev().filter(|g| n * (**g / n).tanh() > beta) {
            let b = gibbs_comparison_with_profile(model, eps, nu, rho, &profile, beta, gamma).b;
            grid.push((beta, gamma));
            certificate.push(b);
            if b <= 0.0 {
                return Ok(TemperatureEstimate { beta_hat: beta, gamma_star: Some(gamma), grid, certificate });
            }
        }
    }
    Ok(TemperatureEstimate { beta_hat: 0.0, gamma_star: None, grid, certificate })
}

/// Upper bound on `K(ρ, π_{exp(−βR)})`, valid when `β < N tanh(γ/N)`.
pub fn kl_to_gibbs(model: &FiniteHypothesisClass, eps: f64, rho: &PosteriorWeights, beta: f64, gamma: f64) -> Result<f64> {
    check_eps(eps)?;
    let n = model.n() as f64;
    let t = (gamma / n).tanh();
    if !(beta > 0.0 && gamma > 0.0 && beta < n * t) {
        return domain(format!("need 0 < β < N tanh(γ/N), got β={beta}, γ={gamma}"));
    }
    let ratio = beta / (n * t);
    let temperature = ratio * gamma;
    let xi_c = beta / t * log_cosh(gamma / n);
    let mgf = model.mgf_of_profile(temperature, &model.pair_profile(rho), xi_c);
    Ok((kl(rho, &model.gibbs(temperature)) - ratio * eps.ln() + mgf) / (1.0 - ratio))
}

/// Grids and prior families for comparing two posteriors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGrids {
    /// ν over λ, β and γ.
    pub nu: AtomicMeasure,
    /// Candidate priors `πⁱ` as log-weights over the class.
    pub priors: Vec<Vec<f64>>,
    /// μ over the prior index.
    pub mu: Vec<f64>,
}

impl ComparisonGrids {
    /// The model prior alone, with ν uniform on the geometric grid of ratio `alpha`.
    pub fn single_prior(model: &FiniteHypothesisClass, alpha: f64) -> Result<Self> {
        Ok(Self { nu: AtomicMeasure::geometric_uniform(alpha, model.n())?, priors: vec![model.prior_log().to_vec()], mu: vec![1.0] })
    }

    /// One prior per submodel (the model prior restricted and renormalized), μ uniform.
    pub fn per_submodel(model: &FiniteHypothesisClass, alpha: f64) -> Result<Self> {
        let index = model.submodels().ok_or_else(|| Error::Domain("model carries no submodel index".into()))?;
        let count = index.iter().copied().max().map_or(0, |m| m + 1);
        let mut priors = Vec::new();
        for m in 0..count {
            let raw: Vec<f64> =
                index.iter().zip(model.prior_log()).map(|(s, p)| if *s == m { *p } else { f64::NEG_INFINITY }).collect();
            if let Ok(p) = PosteriorWeights::from_log_weights(raw) {
                priors.push(p.log_weights);
            }
        }
        let mu = vec![1.0 / priors.len() as f64; priors.len()];
        Ok(Self { nu: AtomicMeasure::geometric_uniform(alpha, model.n())?, priors, mu })
    }

    /// Default chain set: `π^i_{exp(−λr)}` for every prior and every λ atom.
    pub fn chain_set(&self, model: &FiniteHypothesisClass) -> Vec<PosteriorWeights> {
        let mut out = Vec::new();
        for p in &self.priors {
            for &l in &self.nu.atoms {
                out.push(gibbs_of(p, model.risks(), l));
            }
        }
        out
    }
}

/// Per-posterior terms `(1 + c)·{K(ρ, πⁱ_β) + log πⁱ_β[exp(β(N/γ) log cosh(γ/N) ρ(m′))]}`.
struct SideTerm {
    value: f64,
    c: f64,
    log_weight: f64,
}

fn side_terms(model: &FiniteHypothesisClass, grids: &ComparisonGrids, rho: &PosteriorWeights) -> Vec<SideTerm> {
    let n = model.n() as f64;
    let profile = model.pair_profile(rho);
    let mut out = Vec::new();
    for (prior, mu) in grids.priors.iter().zip(&grids.mu) {
        if *mu <= 0.0 {
            continue;
        }
        for (&b, &wb) in grids.nu.atoms.iter().zip(&grids.nu.weights) {
            if wb <= 0.0 {
                continue;
            }
            let g = gibbs_of(prior, model.risks(), b);
            let div = kl(rho, &g);
            if !div.is_finite() {
                continue;
            }
            for (&gm, &wg) in grids.nu.atoms.iter().zip(&grids.nu.weights) {
                if gm <= b || wg <= 0.0 {
                    continue;
                }
                let xi_c = b * n / gm * log_cosh(gm / n);
                let value = (div + mgf_under(prior, model.risks(), b, &profile, xi_c)) / (1.0 - b / gm);
                out.push(SideTerm { value, c: 1.0 / (gm / b - 1.0), log_weight: (wb * wg * mu).ln() });
            }
        }
    }
    out
}

/// `B(ρ₁, ρ₂)`, a bound on `ρ₂(R) − ρ₁(R)`.
pub fn posterior_comparison(
    model: &FiniteHypothesisClass,
    eps: f64,
    grids: &ComparisonGrids,
    rho1: &PosteriorWeights,
    rho2: &PosteriorWeights,
) -> Result<f64> {
    check_eps(eps)?;
    if grids.priors.len() != grids.mu.len() {
        return domain("one μ weight per prior required");
    }
    let s1 = side_terms(model, grids, rho1);
    let s2 = side_terms(model, grids, rho2);
    Ok(comparison_from_terms(model, eps, grids, rho1, rho2, &s1, &s2))
}

fn comparison_from_terms(
    model: &FiniteHypothesisClass,
    eps: f64,
    grids: &ComparisonGrids,
    rho1: &PosteriorWeights,
    rho2: &PosteriorWeights,
    s1: &[SideTerm],
    s2: &[SideTerm],
) -> f64 {
    let n = model.n() as f64;
    let diff = rho2.expect(model.risks()) - rho1.expect(model.risks());
    let m = model.expected_pair_distance(rho1, rho2);
    let mut best = f64::INFINITY;
    for (&l, &wl) in grids.nu.atoms.iter().zip(&grids.nu.weights) {
        if wl <= 0.0 {
            continue;
        }
        let base_log = (wl * eps / 3.0).ln();
        let mut inner = f64::INFINITY;
        for a in s1 {
            for b in s2 {
                let log_total = base_log + a.log_weight + b.log_weight;
                let v = a.value + b.value - (a.c + b.c + 1.0) * log_total;
                inner = inner.min(v);
            }
        }
        if !inner.is_finite() {
            continue;
        }
        let q = diff + n / l * log_cosh(l / n) * m + inner / l;
        best = best.min(xi(l / n, q));
    }
    best
}

/// Pairwise bounds over a chain set and their chained (shortest-path) version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainedComparison {
    pub direct: Vec<Vec<f64>>,
    pub chained: Vec<Vec<f64>>,
}

/// Computes `B` on all ordered pairs of `chain_set` and closes it under path sums.
pub fn compare_posteriors(
    model: &FiniteHypothesisClass,
    eps: f64,
    grids: &ComparisonGrids,
    chain_set: &[PosteriorWeights],
) -> Result<ChainedComparison> {
    check_eps(eps)?;
    if grids.priors.len() != grids.mu.len() {
        return domain("one μ weight per prior required");
    }
    let terms: Vec<Vec<SideTerm>> = chain_set.iter().map(|r| side_terms(model, grids, r)).collect();
    let k = chain_set.len();
    let mut direct = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            direct[i][j] = comparison_from_terms(model, eps, grids, &chain_set[i], &chain_set[j], &terms[i], &terms[j]);
        }
    }
    let chained = chain(&direct)?;
    Ok(ChainedComparison { direct, chained })
}

/// Floyd–Warshall closure of a bound matrix.
pub fn chain(direct: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let k = direct.len();
    let mut d = direct.to_vec();
    for via in 0..k {
        for i in 0..k {
            for j in 0..k {
                let through = d[i][via] + d[via][j];
                if through < d[i][j] {
                    d[i][j] = through;
                }
            }
        }
    }
    if (0..k).any(|i| d[i][i] < 0.0) {
        return Err(Error::Degenerate("negative cycle in pairwise bounds".into()));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> FiniteHypothesisClass {
        let losses = vec![
            vec![false, false, true, false],
            vec![true, false, true, false],
            vec![false, true, true, true],
            vec![true, true, false, false],
        ];
        FiniteHypothesisClass::new(&[1.0, 1.0, 1.0, 1.0], &losses).unwrap()
    }

    #[test]
    fn relative_root_example() {
        let v = relative_root(0.5, 0.2, 0.1);
        assert!((v - 0.095476).abs() < 1e-6, "{v}");
        assert_eq!(relative_root(0.5, 0.2, 0.0), 0.0);
    }

    #[test]
    fn margin_zero_error() {
        let losses = vec![vec![false, false, false], vec![true, false, false], vec![true, true, false]];
        let m = FiniteHypothesisClass::new(&[1.0, 1.0, 1.0], &losses).unwrap();
        assert_eq!(margin_function(&m, MarginMode::Empirical, 1.0).unwrap(), 0.0);
        let sub = [1, 2];
        for x in [1.0, 1.5, 3.0] {
            let v = margin_function(&m, MarginMode::EmpiricalSub(&sub), x).unwrap();
            assert!(v <= -(x - 1.0) / 3.0 + 1e-12);
        }
        assert!(margin_function(&m, MarginMode::EmpiricalSub(&[]), 1.0).is_err());
    }

    #[test]
    fn rate_kappa_one() {
        let (rate, _) = margin_rate(1.0, 1.0, 1.0, 1000).unwrap();
        assert!((rate * 1000.0 - 8.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!(margin_rate(0.5, 1.0, 1.0, 10).is_err());
    }

    #[test]
    fn comparison_drops_slope_terms_at_gamma() {
        let m = model();
        let nu = AtomicMeasure::geometric_uniform(2.0, m.n()).unwrap();
        let rho = m.gibbs(2.0);
        let c = gibbs_comparison(&m, 0.1, &nu, &rho, 1.0, 2.0).unwrap();
        let xi_c = 4.0 * log_cosh(0.5);
        let at_gamma = kl(&rho, &m.gibbs(2.0)) + m.mgf_pair(2.0, &rho, xi_c) - (0.1 * nu.weight(1.0) * nu.weight(2.0)).ln();
        assert!(c.b <= at_gamma + 1e-12);
        let missing = gibbs_comparison(&m, 0.1, &nu, &rho, 3.0, 2.0).unwrap();
        assert!(missing.b.is_infinite());
    }

    #[test]
    fn chained_is_subadditive() {
        let d = vec![vec![1.0, 0.2, 5.0], vec![0.3, 1.0, 0.1], vec![0.4, 0.6, 1.0]];
        let c = chain(&d).unwrap();
        assert!((c[0][2] - 0.3).abs() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!(c[i][k] <= c[i][j] + c[j][k] + 1e-12);
                }
            }
        }
    }
}
