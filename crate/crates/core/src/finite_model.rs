//! Exact Gibbs-posterior computations over an explicit finite hypothesis class.
//!
//! All weights live in log space. A hypothesis with prior log-weight `−∞` is
//! outside the prior support.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::log_sum_exp;
use crate::optimize::golden_section;

/// Finite weighted hypothesis class with binary losses on `n` sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteHypothesisClass {
    n: usize,
    prior_log: Vec<f64>,
    /// Loss bits per hypothesis, packed into 64-bit words.
    bits: Vec<Vec<u64>>,
    risks: Vec<f64>,
    submodel: Option<Vec<usize>>,
}

/// Distribution over the hypotheses of a class, stored as log-weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorWeights {
    pub log_weights: Vec<f64>,
}

impl PosteriorWeights {
    /// Normalizes arbitrary log-weights.
    pub fn from_log_weights(mut log_weights: Vec<f64>) -> Result<Self> {
        let z = log_sum_exp(&log_weights);
        if !z.is_finite() {
            return domain("posterior has no mass");
        }
        for w in &mut log_weights {
            *w -= z;
        }
        Ok(Self { log_weights })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return domain("weights must be finite and nonnegative");
        }
        Self::from_log_weights(weights.iter().map(|w| w.ln()).collect())
    }

    pub fn dirac(h: usize, at: usize) -> Self {
        let mut log_weights = vec![f64::NEG_INFINITY; h];
        log_weights[at] = 0.0;
        Self { log_weights }
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    /// Expectation of `values` under this distribution.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.log_weights
            .iter()
            .zip(values)
            .filter(|(w, _)| **w > f64::NEG_INFINITY)
            .map(|(w, v)| w.exp() * v)
            .sum()
    }
}

/// K(ρ, π) = Σ ρ log(ρ/π); `+∞` when ρ charges a point outside the support of π.
pub fn kl(rho: &PosteriorWeights, pi: &PosteriorWeights) -> f64 {
    assert_eq!(rho.len(), pi.len(), "distributions over different index sets");
    let mut total = 0.0;
    for (r, p) in rho.log_weights.iter().zip(&pi.log_weights) {
        if *r == f64::NEG_INFINITY {
            continue;
        }
        if *p == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        total += r.exp() * (r - p);
    }
    total.max(0.0)
}

/// log Σ π(θ) e^{−λ v(θ)} for an arbitrary value vector.
pub fn log_partition_of(prior_log: &[f64], values: &[f64], lambda: f64) -> f64 {
    let terms: Vec<f64> = prior_log
        .iter()
        .zip(values)
        .map(|(p, v)| if *p == f64::NEG_INFINITY { *p } else { p - lambda * v })
        .collect();
    log_sum_exp(&terms)
}

/// Gibbs distribution π_{exp(−λ v)} for an arbitrary value vector.
pub fn gibbs_of(prior_log: &[f64], values: &[f64], lambda: f64) -> PosteriorWeights {
    let z = log_partition_of(prior_log, values, lambda);
    let log_weights = prior_log
        .iter()
        .zip(values)
        .map(|(p, v)| if *p == f64::NEG_INFINITY { *p } else { p - lambda * v - z })
        .collect();
    PosteriorWeights { log_weights }
}

/// Minimum of `values` over the support of the prior.
pub fn support_min(prior_log: &[f64], values: &[f64]) -> f64 {
    prior_log
        .iter()
        .zip(values)
        .filter(|(p, _)| **p > f64::NEG_INFINITY)
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min)
}

/// Default ratio of the geometric β-grid used for suprema over temperatures.
pub const BETA_GRID_RATIO: f64 = 1.05;
const BETA_GRID_START: f64 = 1e-3;

/// sup_β β [π_{exp(−βv)}(v) − ess inf v − η] over a geometric β-grid, refined
/// locally by golden-section search around the best grid point.
pub fn excess_dimension(prior_log: &[f64], values: &[f64], eta: f64, n: usize, ratio: f64) -> f64 {
    let floor = support_min(prior_log, values) + eta;
    sup_over_beta(|beta| beta * (gibbs_of(prior_log, values, beta).expect(values) - floor), n, ratio)
}

/// Supremum of a nonnegative-at-zero objective over the geometric β-grid.
pub(crate) fn sup_over_beta<F: Fn(f64) -> f64>(objective: F, n: usize, ratio: f64) -> f64 {
    let beta_max = 1e7 * n as f64;
    let mut best = (0.0, 0.0);
    let mut beta = BETA_GRID_START;
    while beta <= beta_max {
        let v = objective(beta);
        if v > best.1 {
            best = (beta, v);
        }
        if v <= 0.0 {
            break;
        }
        beta *= ratio;
    }
    if best.1 <= 0.0 {
        return 0.0;
    }
    let (lo, hi) = (best.0.ln() - ratio.ln(), best.0.ln() + ratio.ln());
    let m = golden_section(|t| -objective(t.exp()), lo, hi, 60);
    best.1.max(-m.value)
}

impl FiniteHypothesisClass {
    /// Builds a class from prior weights (normalized internally) and one loss
    /// vector of length `n` per hypothesis.
    pub fn new(prior_weights: &[f64], losses: &[Vec<bool>]) -> Result<Self> {
        let prior = PosteriorWeights::from_weights(prior_weights)?;
        Self::from_log_prior(prior.log_weights, losses)
    }

    pub fn from_log_prior(prior_log: Vec<f64>, losses: &[Vec<bool>]) -> Result<Self> {
        let h = losses.len();
        if h == 0 {
            return domain("a hypothesis class needs at least one hypothesis");
        }
        if prior_log.len() != h {
            return domain(format!("{} prior weights for {h} hypotheses", prior_log.len()));
        }
        let n = losses[0].len();
        if n == 0 {
            return domain("a hypothesis class needs at least one sample point");
        }
        if losses.iter().any(|l| l.len() != n) {
            return domain("loss vectors have different lengths");
        }
        let prior = PosteriorWeights::from_log_weights(prior_log)?;
        let words = n.div_ceil(64);
        let mut bits = Vec::with_capacity(h);
        let mut risks = Vec::with_capacity(h);
        for l in losses {
            let mut w = vec![0u64; words];
            let mut count = 0usize;
            for (i, &b) in l.iter().enumerate() {
                if b {
                    w[i / 64] |= 1 << (i % 64);
                    count += 1;
                }
            }
            bits.push(w);
            risks.push(count as f64 / n as f64);
        }
        Ok(Self { n, prior_log: prior.log_weights, bits, risks, submodel: None })
    }

    /// Attaches a submodel id to every hypothesis.
    pub fn with_submodels(mut self, index: Vec<usize>) -> Result<Self> {
        if index.len() != self.h() {
            return domain("submodel index must have one entry per hypothesis");
        }
        self.submodel = Some(index);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> usize {
        self.risks.len()
    }

    pub fn risks(&self) -> &[f64] {
        &self.risks
    }

    pub fn prior_log(&self) -> &[f64] {
        &self.prior_log
    }

    pub fn submodels(&self) -> Option<&[usize]> {
        self.submodel.as_deref()
    }

    pub fn prior(&self) -> PosteriorWeights {
        PosteriorWeights { log_weights: self.prior_log.clone() }
    }

    pub fn loss(&self, theta: usize, i: usize) -> bool {
        self.bits[theta][i / 64] >> (i % 64) & 1 == 1
    }

    pub fn gibbs(&self, lambda: f64) -> PosteriorWeights {
        gibbs_of(&self.prior_log, &self.risks, lambda)
    }

    pub fn log_partition(&self, lambda: f64) -> f64 {
        log_partition_of(&self.prior_log, &self.risks, lambda)
    }

    /// π_{exp(−λr)}(r), equal to −d/dλ of the log-partition function.
    pub fn gibbs_risk(&self, lambda: f64) -> f64 {
        self.gibbs(lambda).expect(&self.risks)
    }

    /// ess inf of r over the prior support.
    pub fn min_risk(&self) -> f64 {
        support_min(&self.prior_log, &self.risks)
    }

    /// All minimizers of r on the prior support.
    pub fn argmin_risk(&self) -> Vec<usize> {
        let m = self.min_risk();
        (0..self.h()).filter(|&t| self.prior_log[t] > f64::NEG_INFINITY && self.risks[t] == m).collect()
    }

    /// −log π(r = ess inf r).
    pub fn neg_log_prior_of_minimizers(&self) -> f64 {
        let terms: Vec<f64> = self.argmin_risk().iter().map(|&t| self.prior_log[t]).collect();
        -log_sum_exp(&terms)
    }

    /// Empirical dimension d_e = sup_β β [π_{exp(−βr)}(r) − ess inf r].
    pub fn empirical_dimension(&self) -> f64 {
        self.empirical_dimension_with_ratio(BETA_GRID_RATIO)
    }

    pub fn empirical_dimension_with_ratio(&self, ratio: f64) -> f64 {
        excess_dimension(&self.prior_log, &self.risks, 0.0, self.n, ratio)
    }

    /// m′(θ₁, θ₂): fraction of sample points where exactly one of the two errs.
    pub fn pair_distance(&self, t1: usize, t2: usize) -> Result<f64> {
        if t1 >= self.h() || t2 >= self.h() {
            return Err(Error::Domain(format!("hypothesis index out of range ({t1}, {t2})")));
        }
        Ok(self.pair_distance_unchecked(t1, t2))
    }

    pub(crate) fn pair_distance_unchecked(&self, t1: usize, t2: usize) -> f64 {
        let d: u32 = self.bits[t1].iter().zip(&self.bits[t2]).map(|(a, b)| (a ^ b).count_ones()).sum();
        d as f64 / self.n as f64
    }

    /// g(θ) = Σ_θ′ ρ(θ′) m′(θ, θ′) for every θ. Costs O(H² N / 64).
    pub fn pair_profile(&self, rho: &PosteriorWeights) -> Vec<f64> {
        let support: Vec<(usize, f64)> = rho
            .log_weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > f64::NEG_INFINITY)
            .map(|(i, w)| (i, w.exp()))
            .collect();
        (0..self.h())
            .map(|t| support.iter().map(|&(s, w)| w * self.pair_distance_unchecked(t, s)).sum())
            .collect()
    }

    /// ρ₁ ⊗ ρ₂ (m′).
    pub fn expected_pair_distance(&self, rho1: &PosteriorWeights, rho2: &PosteriorWeights) -> f64 {
        rho1.expect(&self.pair_profile(rho2))
    }

    /// ∫_β^λ π_{exp(−ξr)}(r) dξ = log Z(β) − log Z(λ).
    pub fn gibbs_risk_integral(&self, beta: f64, lambda: f64) -> Result<f64> {
        if beta > lambda {
            return domain(format!("integration bounds reversed: {beta} > {lambda}"));
        }
        Ok((self.log_partition(beta) - self.log_partition(lambda)).max(0.0))
    }

    /// log π_{exp(−λ₁r)}[exp(ξ ρ(m′(·, θ′)))].
    pub fn mgf_pair(&self, lambda1: f64, rho: &PosteriorWeights, xi: f64) -> f64 {
        let g = self.pair_profile(rho);
        self.mgf_of_profile(lambda1, &g, xi)
    }

    pub(crate) fn mgf_of_profile(&self, lambda1: f64, profile: &[f64], xi: f64) -> f64 {
        let gibbs = self.gibbs(lambda1);
        let terms: Vec<f64> = gibbs.log_weights.iter().zip(profile).map(|(w, g)| w + xi * g).collect();
        log_sum_exp(&terms)
    }

    /// One line per hypothesis: prior weight, a space, then the `n` loss bits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in 0..self.h() {
            out.push_str(&format!("{:e} ", self.prior_log[t].exp()));
            for i in 0..self.n {
                out.push(if self.loss(t, i) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut weights = Vec::new();
        let mut losses = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::Ingestion(format!("line {}: {what}", lineno + 1));
            let (w, b) = line.split_once(char::is_whitespace).ok_or_else(|| bad("expected weight and bits"))?;
            weights.push(w.parse::<f64>().map_err(|_| bad("unparsable weight"))?);
            let bits: Result<Vec<bool>> = b
                .trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(bad("loss bits must be 0 or 1")),
                })
                .collect();
            losses.push(bits?);
        }
        Self::new(&weights, &losses).map_err(|e| match e {
            Error::Domain(m) => Error::Ingestion(m),
            other => other,
        })
    }
}
