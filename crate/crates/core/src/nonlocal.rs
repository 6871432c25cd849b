//! Non-localized bounds driven by a scalar summary of the posterior.

use serde::{Deserialize, Serialize};

use crate::error::{check_eps, domain, Result};
use crate::finite_model::{kl, FiniteHypothesisClass, PosteriorWeights};
use crate::kernels::phi_inv;
use crate::optimize::{minimize_log_scale, Minimum};

pub const DEFAULT_ALPHA: f64 = 1.1;

/// Sample size, empirical risk, complexity and confidence for the closed-form bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarBoundQuery {
    pub n: usize,
    pub q: f64,
    pub d: f64,
    pub eps: f64,
    pub lambda_grid: Option<Vec<f64>>,
    pub alpha: f64,
}

impl ScalarBoundQuery {
    pub fn new(n: usize, q: f64, d: f64, eps: f64) -> Result<Self> {
        let query = Self { n, q, d, eps, lambda_grid: None, alpha: DEFAULT_ALPHA };
        query.validate()?;
        Ok(query)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        self.lambda_grid = Some(grid);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return domain("N must be positive");
        }
        if !(0.0..=1.0).contains(&self.q) {
            return domain(format!("empirical risk {} outside [0,1]", self.q));
        }
        if !(self.d >= 0.0) || !self.d.is_finite() {
            return domain(format!("complexity {} must be finite and nonnegative", self.d));
        }
        check_eps(self.eps)?;
        if !(self.alpha > 1.0) || !self.alpha.is_finite() {
            return domain(format!("grid ratio {} must exceed 1", self.alpha));
        }
        if let Some(grid) = &self.lambda_grid {
            if grid.is_empty() || grid.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
                return domain("lambda grid must be nonempty and positive");
            }
        }
        Ok(())
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Upper end of the default λ search range.
    pub fn lambda_max(&self) -> f64 {
        10.0 * self.nf()
    }

    /// Minimizes `f` over the caller's λ grid, or over `[1, 10N]` when none is set.
    fn minimize_lambda<F: Fn(f64) -> f64>(&self, f: F) -> Minimum {
        match &self.lambda_grid {
            Some(grid) => grid
                .iter()
                .map(|&x| Minimum { x, value: f(x) })
                .filter(|m| !m.value.is_nan())
                .fold(Minimum { x: grid[0], value: f64::INFINITY }, |a, b| if b.value < a.value { b } else { a }),
            None => minimize_log_scale(f, 1.0, self.lambda_max()),
        }
    }
}

/// The two closed forms of the bound in expectation at a fixed λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForms {
    /// `(1 − exp(−(λq + d)/N)) / (1 − e^{−λ/N})`
    pub tight: f64,
    /// `λ/(N(1 − e^{−λ/N})) · (q + d/λ)`
    pub linear: f64,
}

/// `λ / (N(1 − e^{−λ/N}))`, always in `[1, (1 − λ/2N)⁻¹]`.
pub fn linear_coefficient(lambda: f64, n: f64) -> f64 {
    let a = lambda / n;
    if a.abs() < 1e-8 {
        1.0 + a / 2.0
    } else {
        a / -(-a).exp_m1()
    }
}

fn closed_forms(q: f64, d: f64, lambda: f64, n: f64) -> ClosedForms {
    ClosedForms {
        tight: phi_inv(lambda / n, q + d / lambda),
        linear: linear_coefficient(lambda, n) * (q + d / lambda),
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        domain(format!("lambda must be positive, got {lambda}"))
    }
}

/// Bound on the expected risk with complexity `d` taken as a plain KL term.
pub fn unbiased_bound(query: &ScalarBoundQuery, lambda: f64) -> Result<ClosedForms> {
    query.validate()?;
    check_lambda(lambda)?;
    Ok(closed_forms(query.q, query.d, lambda, query.nf()))
}

/// Evaluates the tight form at `λ* = sqrt(2Nd / (q(1−q)))`.
///
/// When `q` is 0 or 1 the stationary point is undefined and the tight form is
/// minimized numerically instead.
pub fn optimized_unbiased_bound(query: &ScalarBoundQuery) -> Result<(f64, f64)> {
    query.validate()?;
    let (n, q, d) = (query.nf(), query.q, query.d);
    if d == 0.0 {
        return Ok((q, f64::INFINITY));
    }
    if q > 0.0 && q < 1.0 {
        let lambda = (2.0 * n * d / (q * (1.0 - q))).sqrt();
        return Ok((closed_forms(q, d, lambda, n).tight, lambda));
    }
    let m = query.minimize_lambda(|l| closed_forms(q, d, l, n).tight);
    Ok((m.value, m.x))
}

/// Gaussian approximation `B̄(q, d)` of `inf_λ Φ⁻¹_{λ/N}(q + d/λ)`.
pub fn sqrt_bound(query: &ScalarBoundQuery) -> Result<f64> {
    query.validate()?;
    Ok(gaussian_bound(query.q, query.d, query.nf()))
}

pub(crate) fn gaussian_bound(q: f64, d: f64, n: f64) -> f64 {
    let b = (q + d / n + (2.0 * d * q * (1.0 - q) / n + d * d / (n * n)).sqrt()) / (1.0 + 2.0 * d / n);
    if b <= 0.5 {
        b
    } else {
        q + (d / (2.0 * n)).sqrt()
    }
}

/// Deviation bound `Φ⁻¹_{λ/N}(q + (kl − log ε)/λ)` with its weaker linear form.
pub fn deviation_bound_forms(query: &ScalarBoundQuery, kl: f64, lambda: f64) -> Result<ClosedForms> {
    query.validate()?;
    check_lambda(lambda)?;
    check_kl(kl)?;
    Ok(closed_forms(query.q, kl - query.eps.ln(), lambda, query.nf()))
}

pub fn deviation_bound(query: &ScalarBoundQuery, kl: f64, lambda: f64) -> Result<f64> {
    deviation_bound_forms(query, kl, lambda).map(|f| f.tight)
}

/// Minimizes the deviation bound over λ. Returns `(bound, λ*)`.
pub fn optimized_deviation_bound(query: &ScalarBoundQuery, kl: f64) -> Result<(f64, f64)> {
    query.validate()?;
    check_kl(kl)?;
    let (n, q, d) = (query.nf(), query.q, kl - query.eps.ln());
    let m = query.minimize_lambda(|l| closed_forms(q, d, l, n).tight);
    Ok((m.value, m.x))
}

fn check_kl(kl: f64) -> Result<()> {
    if kl >= 0.0 {
        Ok(())
    } else {
        domain(format!("KL divergence must be nonnegative, got {kl}"))
    }
}

/// Deviation bound made uniform over the grid `λ = α^k ≤ 10N`.
///
/// Returns the bound and the minimizing `k`. When `q = 0` the bound
/// `1 − exp(−(kl − log ε)/N)` applies directly and `k` is `None`.
pub fn uniform_deviation_bound(query: &ScalarBoundQuery, kl: f64) -> Result<(f64, Option<u32>)> {
    query.validate()?;
    check_kl(kl)?;
    let (n, q) = (query.nf(), query.q);
    let d = kl - query.eps.ln();
    if q == 0.0 {
        return Ok((-(-d / n).exp_m1(), None));
    }
    let mut best = (f64::INFINITY, 0u32);
    let mut k = 0u32;
    loop {
        let lambda = query.alpha.powi(k as i32);
        if lambda > query.lambda_max() {
            break;
        }
        let surcharge = ((k as f64 + 1.0) * (k as f64 + 2.0)).ln();
        let value = -(-(lambda * q + d + surcharge) / n).exp_m1() / -(-lambda / n).exp_m1();
        if value < best.0 {
            best = (value, k);
        }
        k += 1;
    }
    Ok((best.0, Some(best.1)))
}

/// Deviation bound for `ρ` in terms of the empirical dimension of the model.
pub fn empirical_dim_deviation(
    model: &FiniteHypothesisClass,
    rho: &PosteriorWeights,
    eps: f64,
    lambda: f64,
) -> Result<f64> {
    check_eps(eps)?;
    check_lambda(lambda)?;
    let de = model.empirical_dimension();
    let n = model.n() as f64;
    let dim_term = if de > 0.0 { de / lambda * (std::f64::consts::E * lambda / de).ln() } else { 0.0 };
    let kl_term = kl(rho, &model.gibbs(lambda));
    Ok(phi_inv(lambda / n, model.min_risk() + dim_term + (kl_term - eps.ln()) / lambda))
}
