//! Scalar special functions shared by every bound: the Φ family, its
//! relative-loss analogue Ψ, the localized Φ̃, the convex map F, A(λ) and
//! binomial-tail counting terms.

use crate::error::{domain, Error, Result};
use crate::optimize::solve_increasing;

const TAYLOR_CUTOFF: f64 = 1e-6;

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be finite, got {v}"))
    }
}

/// Φ_a(p) = −a⁻¹ log(1 − p(1 − e^{−a})), extended by continuity at a = 0.
pub fn phi(a: f64, p: f64) -> Result<f64> {
    check_finite("a", a)?;
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("p must lie in [0,1], got {p}"));
    }
    Ok(phi_unchecked(a, p))
}

pub(crate) fn phi_unchecked(a: f64, p: f64) -> f64 {
    if a.abs() < TAYLOR_CUTOFF {
        let u = p * (p - 1.0);
        let c1 = u / 2.0;
        let c2 = u * (2.0 * p - 1.0) / 6.0;
        let c3 = u * (6.0 * p * p - 6.0 * p + 1.0) / 24.0;
        let c4 = u * (2.0 * p - 1.0) * (12.0 * p * p - 12.0 * p + 1.0) / 120.0;
        return p + a * (c1 + a * (c2 + a * (c3 + a * c4)));
    }
    -(p * (-a).exp_m1()).ln_1p() / a
}

/// Inverse of Φ_a, valid for any real q: (1 − e^{−aq}) / (1 − e^{−a}).
pub fn phi_inv(a: f64, q: f64) -> f64 {
    if a.abs() * q.abs().max(1.0) < TAYLOR_CUTOFF {
        let u = q * (q - 1.0);
        let c1 = -u / 2.0;
        let c2 = u * (2.0 * q - 1.0) / 12.0;
        let c3 = -u * u / 24.0;
        let c4 = u * (2.0 * q - 1.0) * (3.0 * q * q - 3.0 * q - 1.0) / 720.0;
        return q + a * (c1 + a * (c2 + a * (c3 + a * c4)));
    }
    (-a * q).exp_m1() / (-a).exp_m1()
}

/// Ψ_a(p, m) = −a⁻¹ log(1 − sinh(a)(p − m·tanh(a/2))).
///
/// Returns [`Error::Undefined`] when the argument of the logarithm is not positive.
pub fn psi(a: f64, p: f64, m: f64) -> Result<f64> {
    check_finite("a", a)?;
    check_finite("p", p)?;
    check_finite("m", m)?;
    if a.abs() < TAYLOR_CUTOFF {
        let c1 = (p * p - m) / 2.0;
        let c2 = p * (2.0 * p * p - 3.0 * m + 1.0) / 6.0;
        let c3 = (3.0 * m * m - 12.0 * m * p * p - m + 6.0 * p.powi(4) + 4.0 * p * p) / 24.0;
        return Ok(p + a * (c1 + a * (c2 + a * c3)));
    }
    let x = -a.sinh() * (p - m * (a / 2.0).tanh());
    if x <= -1.0 {
        return Err(Error::Undefined(format!("psi: log argument {} is not positive", 1.0 + x)));
    }
    Ok(-x.ln_1p() / a)
}

/// Φ̃_{a,b}(p) = (1 − b)⁻¹ (Φ_a(p) − b p).
pub fn phi_tilde(a: f64, b: f64, p: f64) -> Result<f64> {
    check_tilde_params(a, b)?;
    Ok((phi(a, p)? - b * p) / (1.0 - b))
}

fn check_tilde_params(a: f64, b: f64) -> Result<()> {
    check_finite("a", a)?;
    if a <= 0.0 {
        return domain(format!("a must be positive, got {a}"));
    }
    if !(0.0..1.0).contains(&b) {
        return domain(format!("b must lie in [0,1), got {b}"));
    }
    Ok(())
}

/// Largest `b` for which Φ̃_{a,b} is an increasing bijection of [0,1].
pub fn phi_tilde_max_b(a: f64) -> f64 {
    -(-a).exp_m1() / a
}

/// Inverse of Φ̃_{a,b} on [0,1].
pub fn phi_tilde_inv(a: f64, b: f64, y: f64) -> Result<f64> {
    check_tilde_params(a, b)?;
    if b > phi_tilde_max_b(a) * (1.0 + 1e-12) {
        return domain(format!("phi_tilde is not monotone for a={a}, b={b}"));
    }
    if !(0.0..=1.0).contains(&y) {
        return domain(format!("phi_tilde_inv target must lie in [0,1], got {y}"));
    }
    let u = -(-a).exp_m1();
    let f = |p: f64| (phi_unchecked(a, p) - b * p) / (1.0 - b);
    let df = |p: f64| (u / (a * (1.0 - p * u)) - b) / (1.0 - b);
    solve_increasing(f, Some(df), y, 0.0, 1.0)
}

/// F_{γ,α}(x) = −N log(1 − tanh(γ/N) x) − α x.
pub fn f_gamma_alpha(gamma: f64, alpha: f64, n: f64, x: f64) -> Result<f64> {
    let t = (gamma / n).tanh();
    if t * x >= 1.0 {
        return domain(format!("tanh(gamma/N)*x must be < 1, got {}", t * x));
    }
    Ok(-n * (-t * x).ln_1p() - alpha * x)
}

/// Inverse of F_{γ,α} on its increasing branch inside [0, tanh(γ/N)⁻¹).
pub fn f_gamma_alpha_inv(gamma: f64, alpha: f64, n: f64, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return domain(format!("F inverse needs y >= F(0) = 0, got {y}"));
    }
    let t = (gamma / n).tanh();
    if !(t > 0.0) {
        return domain("gamma must be positive");
    }
    let f = |x: f64| -n * (-t * x).ln_1p() - alpha * x;
    let df = |x: f64| n * t / (1.0 - t * x) - alpha;
    let x_max = 1.0 / t;
    let lo = if alpha > n * t { (1.0 - n * t / alpha) / t } else { 0.0 };
    let mut hi = lo + 0.5 * (x_max - lo);
    let mut k = 0;
    while f(hi) < y {
        hi = x_max - (x_max - hi) * 0.5;
        k += 1;
        if k > 1100 || hi >= x_max {
            return domain(format!("F inverse target {y} is out of reach"));
        }
    }
    if f(lo) >= y {
        return Ok(lo);
    }
    solve_increasing(f, Some(df), y, lo, hi)
}

/// log cosh(x) without overflow or cancellation.
pub fn log_cosh(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-3 {
        let x2 = x * x;
        return x2 * (0.5 - x2 * (1.0 / 12.0 - x2 / 45.0));
    }
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

/// A(λ) = (2N/λ) log cosh(λ/2N).
pub fn a_of_lambda(lambda: f64, n: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    2.0 * n / lambda * log_cosh(lambda / (2.0 * n))
}

/// Ξ_a(q) = tanh(a)⁻¹ (1 − e^{−aq}).
pub fn xi(a: f64, q: f64) -> f64 {
    if a.abs() < TAYLOR_CUTOFF {
        return q * (1.0 - a * q / 2.0);
    }
    -(-a * q).exp_m1() / a.tanh()
}

/// log Σ_{k ≤ h} C(n, k), computed in log space.
pub fn binom_tail(n: u64, h: u64) -> Result<f64> {
    if h > n {
        return domain(format!("h = {h} exceeds n = {n}"));
    }
    let mut log_c = 0.0;
    let mut terms = Vec::with_capacity(h as usize + 1);
    terms.push(0.0);
    for k in 1..=h {
        log_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        terms.push(log_c);
    }
    Ok(log_sum_exp(&terms))
}

/// h (log(n/h) + 1), the entropy-style upper bound on [`binom_tail`].
pub fn entropy_bound(n: u64, h: u64) -> Result<f64> {
    if h > n {
        return domain(format!("h = {h} exceeds n = {n}"));
    }
    if h == 0 {
        return Ok(0.0);
    }
    let h = h as f64;
    Ok(h * ((n as f64 / h).ln() + 1.0))
}

/// Numerically stable log Σ exp(xᵢ). Empty input gives −∞.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
