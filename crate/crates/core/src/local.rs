//! Localized bounds, where the prior is replaced by a Gibbs measure.

use serde::{Deserialize, Serialize};

use crate::error::{check_eps, domain, Error, Result};
use crate::finite_model::{excess_dimension, kl, log_partition_of, support_min, FiniteHypothesisClass, PosteriorWeights};
use crate::finite_model::BETA_GRID_RATIO;
use crate::kernels::{log_sum_exp, phi_tilde_inv, phi_tilde_max_b};

/// Source of the integrals `∫_β^λ π_{exp(−ξr)}(r) dξ`.
pub trait GibbsIntegral {
    fn gibbs_integral(&self, beta: f64, lambda: f64) -> Result<f64>;
}

impl GibbsIntegral for FiniteHypothesisClass {
    fn gibbs_integral(&self, beta: f64, lambda: f64) -> Result<f64> {
        self.gibbs_risk_integral(beta, lambda)
    }
}

/// Stand-in for a model known only through its lowest empirical risk and its
/// empirical dimension: `∫_β^λ = (λ − β)·ess inf r + d_e log(λ/β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticIntegral {
    pub ess_inf: f64,
    pub dimension: f64,
}

impl GibbsIntegral for SyntheticIntegral {
    fn gibbs_integral(&self, beta: f64, lambda: f64) -> Result<f64> {
        if beta > lambda {
            return domain(format!("integration bounds reversed: {beta} > {lambda}"));
        }
        if beta <= 0.0 {
            return Err(Error::Undefined("synthetic integral needs β > 0".into()));
        }
        Ok((lambda - beta) * self.ess_inf + self.dimension * (lambda / beta).ln())
    }
}

/// True risks supplied for synthetic experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRisk {
    pub risk_values: Vec<f64>,
}

impl OracleRisk {
    pub fn new(risk_values: Vec<f64>) -> Result<Self> {
        if risk_values.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return domain("oracle risks must lie in [0,1]");
        }
        Ok(Self { risk_values })
    }
}

/// Parameters of the local deviation bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalBoundQuery {
    pub n: usize,
    pub eps: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl LocalBoundQuery {
    pub fn new(n: usize, eps: f64, alpha: f64, gamma: f64) -> Result<Self> {
        check_eps(eps)?;
        if n == 0 {
            return domain("N must be positive");
        }
        if !(0.0 <= gamma && gamma < alpha && alpha < 1.0) {
            return domain(format!("need 0 ≤ γ < α < 1, got α={alpha}, γ={gamma}"));
        }
        Ok(Self { n, eps, alpha, gamma })
    }

    /// Parametrization by temperatures `β < λ`: `α = 1 − e^{−λ/N}`, `γ = e^{β/N} − 1`.
    pub fn from_temperatures(n: usize, eps: f64, beta: f64, lambda: f64) -> Result<Self> {
        let nf = n as f64;
        Self::new(n, eps, -(-lambda / nf).exp_m1(), (beta / nf).exp_m1())
    }

    /// Temperature `−N log(1 − α)` of the localized posterior.
    pub fn lambda(&self) -> f64 {
        -(self.n as f64) * (-self.alpha).ln_1p()
    }

    /// Temperature `N log(1 + γ)` of the localized prior.
    pub fn beta(&self) -> f64 {
        self.n as f64 * self.gamma.ln_1p()
    }

    fn scale(&self) -> f64 {
        self.n as f64 * (self.alpha - self.gamma)
    }
}

/// Bounds on the expected risk of a localized posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalUnbiased {
    pub tight: f64,
    pub linear: f64,
    /// `(1 − 2β/N)⁻¹(ρ(r) + KL/β)`, available when `β < N/2`.
    pub simple: Option<f64>,
    /// `ρ(r) − KL(ρ, π_{exp(−βr)})/β`.
    pub lower: f64,
}

/// Bound in expectation for `ρ = π_{exp(−βr)}`.
pub fn local_unbiased(model: &FiniteHypothesisClass, beta: f64, lambda: f64) -> Result<LocalUnbiased> {
    local_unbiased_posterior(model, &model.gibbs(beta), beta, lambda)
}

/// Bound in expectation for an arbitrary posterior, localized at temperature `β`.
pub fn local_unbiased_posterior(
    model: &FiniteHypothesisClass,
    rho: &PosteriorWeights,
    beta: f64,
    lambda: f64,
) -> Result<LocalUnbiased> {
    let n = model.n() as f64;
    if !(lambda > 0.0) || !(beta >= 0.0) || beta >= n * -(-lambda / n).exp_m1() {
        return domain(format!("need 0 ≤ β < N(1 − e^{{−λ/N}}), got β={beta}, λ={lambda}"));
    }
    let risk = rho.expect(model.risks());
    let div = kl(rho, &model.gibbs(beta));
    let target = risk + div / (lambda - beta);
    let linear = (lambda - beta) / (n * -(-lambda / n).exp_m1() - beta) * target;
    let b = (beta / lambda).min(phi_tilde_max_b(lambda / n));
    let tight = if target >= 1.0 || !target.is_finite() { linear } else { phi_tilde_inv(lambda / n, b, target)? };
    let simple = (beta > 0.0 && beta < n / 2.0).then(|| (risk + div / beta) / (1.0 - 2.0 * beta / n));
    let lower = if beta > 0.0 { risk - div / beta } else { risk };
    Ok(LocalUnbiased { tight, linear, simple, lower })
}

/// `inf_λ (λ − β)/(N(1 − e^{−λ/N}) − β) · π_{exp(−βr)}(r)` over `λ > −N log(1 − β/N)`.
pub fn gibbs_unbiased_optimized(model: &FiniteHypothesisClass, beta: f64) -> Result<(f64, f64)> {
    let n = model.n() as f64;
    if !(beta > 0.0 && beta < n) {
        return domain(format!("need 0 < β < N, got {beta}"));
    }
    let risk = model.gibbs_risk(beta);
    let lo = -n * (-beta / n).ln_1p();
    let coefficient = |l: f64| {
        let den = n * -(-l / n).exp_m1() - beta;
        if den > 0.0 {
            (l - beta) / den
        } else {
            f64::INFINITY
        }
    };
    let m = crate::optimize::minimize_log_scale(coefficient, lo * (1.0 + 1e-9), 100.0 * n);
    Ok((m.value * risk, m.x))
}

/// Nonlinear and linear local deviation bounds together with `M(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalDeviation {
    pub nonlinear: f64,
    pub linear: f64,
}

/// Solves the quadratic `(1 − aR)(1 + cR) ≥ e^{−(a−c)M}` for the largest admissible `R`.
pub fn local_root(alpha: f64, gamma: f64, m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    if alpha * gamma == 0.0 {
        return m;
    }
    let d = alpha - gamma;
    let inner = 4.0 * alpha * gamma / (d * d) * -(-d * m).exp_m1();
    d / (2.0 * alpha * gamma) * sqrt1pm1(inner)
}

/// `√(1 + x) − 1` without cancellation.
pub(crate) fn sqrt1pm1(x: f64) -> f64 {
    x / ((1.0 + x).sqrt() + 1.0)
}

/// `M(ρ)` for the Gibbs posterior at temperature `−N log(1 − α)` plus `kl`,
/// the divergence of the caller's posterior from it.
pub fn local_m<S: GibbsIntegral + ?Sized>(source: &S, query: &LocalBoundQuery, kl: f64) -> Result<f64> {
    let integral = source.gibbs_integral(query.beta(), query.lambda())?;
    Ok((kl + integral - 2.0 * query.eps.ln()) / query.scale())
}

/// Local deviation bound for the Gibbs posterior `π_{exp(N log(1−α) r)}`.
pub fn local_deviation<S: GibbsIntegral + ?Sized>(source: &S, query: &LocalBoundQuery) -> Result<LocalDeviation> {
    local_deviation_with_kl(source, query, 0.0)
}

/// Local deviation bound for a posterior at divergence `kl` from `π_{exp(N log(1−α) r)}`.
pub fn local_deviation_with_kl<S: GibbsIntegral + ?Sized>(
    source: &S,
    query: &LocalBoundQuery,
    kl: f64,
) -> Result<LocalDeviation> {
    let m = local_m(source, query, kl)?;
    Ok(LocalDeviation { nonlinear: local_root(query.alpha, query.gamma, m), linear: m })
}

/// Linear bound for `π_{exp(−2βr)}` obtained with `λ = 2β`.
pub fn local_deviation_double<S: GibbsIntegral + ?Sized>(source: &S, n: usize, eps: f64, beta: f64) -> Result<f64> {
    let nf = n as f64;
    let den = nf * (2.0 - (beta / nf).exp() - (-2.0 * beta / nf).exp());
    if !(beta > 0.0) || den <= 0.0 {
        return domain(format!("need e^{{β/N}} + e^{{−2β/N}} < 2, got β={beta}"));
    }
    check_eps(eps)?;
    Ok((source.gibbs_integral(beta, 2.0 * beta)? - 2.0 * eps.ln()) / den)
}

/// Non-random rate achieved by the Gibbs posterior, in terms of `d_η`.
pub fn gibbs_rate(ess_inf: f64, eta: f64, d_eta: f64, n: usize) -> f64 {
    let n = n as f64;
    let base = ess_inf + eta;
    base + 4.0 * d_eta / n + 2.0 * (2.0 * d_eta * base / n + 4.0 * d_eta * d_eta / (n * n)).sqrt()
}

/// Dimension `d_η` measured on the oracle risk, and the resulting rate.
pub fn nonrandom_local(model: &FiniteHypothesisClass, oracle: &OracleRisk, eta: f64) -> Result<(f64, f64)> {
    if oracle.risk_values.len() != model.h() {
        return domain("oracle risk length differs from the number of hypotheses");
    }
    if !(eta >= 0.0) {
        return domain("margin η must be nonnegative");
    }
    let prior = model.prior_log();
    let d = excess_dimension(prior, &oracle.risk_values, eta, model.n(), BETA_GRID_RATIO);
    let ess_inf = support_min(prior, &oracle.risk_values);
    Ok((d, gibbs_rate(ess_inf, eta, d, model.n())))
}

/// Partially local bound over the submodels of a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartiallyLocal {
    pub nonlinear: f64,
    pub linear: f64,
    /// Weights of the submodel posterior `ν`.
    pub nu: Vec<f64>,
    /// Submodels left out because they carry no prior mass.
    pub excluded: Vec<usize>,
}

struct SubmodelIntegrals {
    integrals: Vec<f64>,
    mu: Vec<f64>,
    excluded: Vec<usize>,
}

fn submodel_integrals(
    model: &FiniteHypothesisClass,
    query: &LocalBoundQuery,
    mu: Option<&[f64]>,
) -> Result<SubmodelIntegrals> {
    let index = model
        .submodels()
        .ok_or_else(|| Error::Domain("model carries no submodel index".into()))?;
    let count = index.iter().copied().max().map_or(0, |m| m + 1);
    if let Some(mu) = mu {
        if mu.len() != count || mu.iter().any(|w| !(*w >= 0.0)) {
            return domain("submodel weights must be nonnegative, one per submodel");
        }
    }
    let (beta, lambda) = (query.beta(), query.lambda());
    let mut integrals = vec![f64::INFINITY; count];
    let mut mass = vec![0.0; count];
    let mut excluded = Vec::new();
    for (m, slot) in integrals.iter_mut().enumerate() {
        let (prior, risks): (Vec<f64>, Vec<f64>) = index
            .iter()
            .zip(model.prior_log().iter().zip(model.risks()))
            .filter(|(s, (p, _))| **s == m && **p > f64::NEG_INFINITY)
            .map(|(_, (p, r))| (*p, *r))
            .unzip();
        if prior.is_empty() {
            excluded.push(m);
            continue;
        }
        mass[m] = log_sum_exp(&prior).exp();
        *slot = (log_partition_of(&prior, &risks, beta) - log_partition_of(&prior, &risks, lambda)).max(0.0);
    }
    let mut mu: Vec<f64> = mu.map_or(mass, |w| w.to_vec());
    for &m in &excluded {
        mu[m] = 0.0;
    }
    let total: f64 = mu.iter().sum();
    if !(total > 0.0) {
        return domain("no submodel carries positive weight");
    }
    mu.iter_mut().for_each(|w| *w /= total);
    Ok(SubmodelIntegrals { integrals, mu, excluded })
}

/// Partially local bound for an explicit submodel posterior `nu`, with the
/// within-submodel Gibbs posteriors at temperature `−N log(1 − α)`.
///
/// `mu` defaults to the prior mass of each submodel.
pub fn partially_local_with_nu(
    model: &FiniteHypothesisClass,
    query: &LocalBoundQuery,
    mu: Option<&[f64]>,
    nu: &[f64],
) -> Result<PartiallyLocal> {
    let s = submodel_integrals(model, query, mu)?;
    if nu.len() != s.mu.len() {
        return domain("one ν weight per submodel required");
    }
    let nu_total: f64 = nu.iter().sum();
    let nu: Vec<f64> = nu.iter().map(|w| w / nu_total).collect();
    let mut value = -2.0 * query.eps.ln();
    for ((v, m), i) in nu.iter().zip(&s.mu).zip(&s.integrals) {
        if *v > 0.0 {
            if *m == 0.0 {
                return Ok(vacuous_partial(nu, s.excluded));
            }
            value += v * i + 2.0 * v * (v / m).ln();
        }
    }
    let linear = value / query.scale();
    Ok(PartiallyLocal { nonlinear: local_root(query.alpha, query.gamma, linear), linear, nu, excluded: s.excluded })
}

fn vacuous_partial(nu: Vec<f64>, excluded: Vec<usize>) -> PartiallyLocal {
    PartiallyLocal { nonlinear: f64::INFINITY, linear: f64::INFINITY, nu, excluded }
}

/// Partially local bound at the optimal `ν ∝ μ·exp(−½∫_m)`.
pub fn partially_local(model: &FiniteHypothesisClass, query: &LocalBoundQuery, mu: Option<&[f64]>) -> Result<PartiallyLocal> {
    let s = submodel_integrals(model, query, mu)?;
    let logs: Vec<f64> = s
        .mu
        .iter()
        .zip(&s.integrals)
        .map(|(m, i)| if *m > 0.0 { m.ln() - 0.5 * i } else { f64::NEG_INFINITY })
        .collect();
    let z = log_sum_exp(&logs);
    let nu: Vec<f64> = logs.iter().map(|l| (l - z).exp()).collect();
    let linear = (-2.0 * z - 2.0 * query.eps.ln()) / query.scale();
    Ok(PartiallyLocal { nonlinear: local_root(query.alpha, query.gamma, linear), linear, nu, excluded: s.excluded })
}
