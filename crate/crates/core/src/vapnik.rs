//! Shadow-sample (transductive) bounds and the inductive bounds derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{check_eps, domain, Result};
use crate::kernels::{a_of_lambda, phi_inv};
use crate::nonlocal::gaussian_bound;
use crate::optimize::{minimize_geometric, Minimum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexityKind {
    Vc,
    Compression,
    User,
}

/// Complexity in nats, confidence term included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityTerm {
    pub value: f64,
    pub kind: ComplexityKind,
}

/// `h log(e(k+1)N/h) − log ε + extra_logs`.
pub fn complexity(kind: ComplexityKind, h: u64, n: usize, k: u32, eps: f64, extra_logs: f64) -> Result<ComplexityTerm> {
    check_eps(eps)?;
    let total = (k as f64 + 1.0) * n as f64;
    if h as f64 > total {
        return domain(format!("h = {h} exceeds the extended sample size {total}"));
    }
    let shatter = if h == 0 { 0.0 } else { h as f64 * (std::f64::consts::E * total / h as f64).ln() };
    Ok(ComplexityTerm { value: shatter - eps.ln() + extra_logs, kind })
}

/// Additive constant turning `d′_k` into `d″_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Slack {
    /// 3.7 up to N = 10³, 4.4 up to 10⁶, 4.7 up to 10⁹.
    Registry,
    /// Computed from the η sequence and ε.
    Exact,
    Fixed(f64),
}

/// Tabulated slack for the default η sequence.
pub fn slack_registry(n: usize) -> Result<f64> {
    match n {
        0 => domain("N must be positive"),
        1..=1_000 => Ok(3.7),
        1_001..=1_000_000 => Ok(4.4),
        1_000_001..=1_000_000_000 => Ok(4.7),
        _ => domain(format!("no tabulated slack beyond N = 10⁹, got {n}")),
    }
}

/// `d″_k − d′_k` for a decreasing sequence `1 > η₁ > … > η_J > 0`.
pub fn exact_slack(eta: &[f64], eps: f64) -> Result<f64> {
    check_eta(eta)?;
    let j = eta.len() as f64;
    let last = eta[eta.len() - 1];
    let chain: f64 = eta.windows(2).map(|w| w[0] * (w[0] / w[1]).ln()).sum();
    Ok(j.ln() - eta[0].ln() + chain + (eps * last / j).ln() * last)
}

fn check_eta(eta: &[f64]) -> Result<()> {
    if eta.is_empty() || eta.iter().any(|e| !(*e > 0.0 && *e < 1.0)) || eta.windows(2).any(|w| w[0] <= w[1]) {
        return domain("η sequence must be strictly decreasing inside (0,1)");
    }
    Ok(())
}

/// Default `(1/log(10N), 1/(10N))`.
pub fn default_eta(n: usize) -> Vec<f64> {
    let ten_n = 10.0 * n as f64;
    vec![1.0 / ten_n.ln(), 1.0 / ten_n]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VapnikQuery {
    pub n: usize,
    pub r1: f64,
    pub h: u64,
    pub eps: f64,
    pub k_grid: Vec<u32>,
    pub alpha: f64,
    pub eta_seq: Vec<f64>,
    pub slack: Slack,
    /// Expected log trace size, replacing `h log(e(k+1)N/h)` for every k.
    pub complexity_override: Option<f64>,
}

impl VapnikQuery {
    pub fn new(n: usize, r1: f64, h: u64, eps: f64) -> Result<Self> {
        let q = Self {
            n,
            r1,
            h,
            eps,
            k_grid: (1..=64).collect(),
            alpha: 1.1,
            eta_seq: default_eta(n.max(1)),
            slack: Slack::Registry,
            complexity_override: None,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return domain("N must be positive");
        }
        if !(0.0..=1.0).contains(&self.r1) {
            return domain(format!("empirical risk {} outside [0,1]", self.r1));
        }
        check_eps(self.eps)?;
        if self.k_grid.is_empty() || self.k_grid.contains(&0) {
            return domain("k grid must be nonempty positive integers");
        }
        if !(self.alpha > 1.0) {
            return domain("grid ratio must exceed 1");
        }
        if let Some(c) = self.complexity_override {
            if !(c >= 0.0) {
                return domain("complexity override must be nonnegative");
            }
        }
        check_eta(&self.eta_seq)
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `d′_k`.
    pub fn d_prime(&self, k: u32) -> Result<f64> {
        match self.complexity_override {
            Some(c) => Ok(c - self.eps.ln()),
            None => complexity(ComplexityKind::Vc, self.h, self.n, k, self.eps, 0.0).map(|c| c.value),
        }
    }

    pub fn slack_value(&self) -> Result<f64> {
        match &self.slack {
            Slack::Registry => slack_registry(self.n),
            Slack::Exact => exact_slack(&self.eta_seq, self.eps),
            Slack::Fixed(s) => Ok(*s),
        }
    }

    pub fn eta_last(&self) -> f64 {
        self.eta_seq[self.eta_seq.len() - 1]
    }

    fn minimize_lambda<F: Fn(f64) -> f64>(&self, f: F) -> Minimum {
        minimize_geometric(f, 1.0, 10.0 * self.nf(), self.alpha)
    }
}

/// Bound on the shadow-sample error rate for a shadow sample `k` times larger.
/// Returns `(bound, λ*)`.
pub fn transductive_bound(q: &VapnikQuery, k: u32) -> Result<(f64, f64)> {
    q.validate()?;
    if k == 0 {
        return domain("k must be positive");
    }
    let (n, r, d, kf) = (q.nf(), q.r1, q.d_prime(k)?, k as f64);
    if r == 0.0 {
        return Ok(((kf + 1.0) / kf * -(-d / n).exp_m1(), f64::INFINITY));
    }
    let m = q.minimize_lambda(|l| phi_inv(l / n, r + d / l));
    Ok(((kf + 1.0) / kf * m.value - r / kf, m.x))
}

/// Equal shadow and training sizes, using `A(λ)`.
pub fn transductive_bound_k1(q: &VapnikQuery) -> Result<(f64, f64)> {
    q.validate()?;
    let (n, r, d) = (q.nf(), q.r1, q.d_prime(1)?);
    let m = q.minimize_lambda(|l| {
        let den = 1.0 - a_of_lambda(l, n);
        if den > 0.0 {
            (r + d / l) / den
        } else {
            f64::INFINITY
        }
    });
    Ok((2.0 * m.value - r, m.x))
}

/// Equal sizes under exchangeability.
pub fn exchangeable_bound(q: &VapnikQuery) -> Result<(f64, f64)> {
    q.validate()?;
    let (n, r, d) = (q.nf(), q.r1, q.d_prime(1)?);
    let m = q.minimize_lambda(|l| {
        let a = a_of_lambda(l, n);
        let den = 1.0 - a * (1.0 - 2.0 * r);
        if den > 0.0 {
            (r * (1.0 + a) + 2.0 * d / l) / den
        } else {
            f64::INFINITY
        }
    });
    Ok((m.value, m.x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InductiveBound {
    pub bound: f64,
    pub k: u32,
    pub lambda: f64,
}

/// Inductive bound on the true risk, optimized over `k` and `λ`.
pub fn inductive_bound(q: &VapnikQuery) -> Result<InductiveBound> {
    q.validate()?;
    let (n, r) = (q.nf(), q.r1);
    let level = r + q.eta_last() * (1.0 - r);
    let slack = q.slack_value()?;
    let mut best = InductiveBound { bound: f64::INFINITY, k: 0, lambda: f64::NAN };
    for &k in &q.k_grid {
        let kf = k as f64;
        let d = q.d_prime(k)? + slack + (kf * (kf + 1.0)).ln();
        let m = q.minimize_lambda(|l| phi_inv(l / n, level + d / l));
        let bound = (kf + 1.0) / kf * m.value - r / kf;
        if bound < best.bound {
            best = InductiveBound { bound, k, lambda: m.x };
        }
    }
    Ok(best)
}

/// Inductive bound with `λ` restricted to `α^j`, weighted by `1/(j(j+1))`.
/// Returns the bound, `k*` and `j*`.
pub fn inductive_bound_alpha_grid(q: &VapnikQuery) -> Result<(f64, u32, u32)> {
    q.validate()?;
    let (n, r) = (q.nf(), q.r1);
    let mut best = (f64::INFINITY, 0, 0);
    for &k in &q.k_grid {
        let kf = k as f64;
        let d = q.d_prime(k)?;
        let mut j = 1u32;
        loop {
            let l = q.alpha.powi(j as i32);
            if l > 10.0 * n {
                break;
            }
            let jf = j as f64;
            let penalty = d + (kf * (kf + 1.0) * jf * (jf + 1.0)).ln();
            let v = -(-l * r / n - penalty / n).exp_m1() / (kf / (kf + 1.0) * -(-l / n).exp_m1()) - r / kf;
            if v < best.0 {
                best = (v, k, j);
            }
            j += 1;
        }
    }
    Ok(best)
}

/// Gaussian approximation of [`inductive_bound`]. Returns the bound and `k*`.
pub fn inductive_bound_gaussian(q: &VapnikQuery) -> Result<(f64, u32)> {
    q.validate()?;
    let (n, r) = (q.nf(), q.r1);
    let slack = q.slack_value()?;
    let mut best = (f64::INFINITY, 0);
    for &k in &q.k_grid {
        let kf = k as f64;
        let d = q.d_prime(k)? + (kf * (kf + 1.0)).ln() + slack;
        let v = (kf + 1.0) / kf * gaussian_bound(r + q.eta_last(), d, n) - r / kf;
        if v < best.0 {
            best = (v, k);
        }
    }
    Ok(best)
}

/// `d″₁`.
fn d_second_1(q: &VapnikQuery) -> Result<f64> {
    Ok(q.d_prime(1)? + q.slack_value()?)
}

/// Inductive bound for equal sizes in the i.i.d. case. Returns `(bound, λ*)`.
pub fn inductive_bound_k1_iid(q: &VapnikQuery) -> Result<(f64, f64)> {
    q.validate()?;
    let (n, r, eta) = (q.nf(), q.r1, q.eta_last());
    let d = d_second_1(q)?;
    let m = q.minimize_lambda(|l| {
        let a = a_of_lambda(l, n);
        let den = 1.0 - a * (1.0 - 2.0 * r);
        if den > 0.0 {
            ((1.0 + a) * r + 2.0 * d / l + 2.0 * eta * (1.0 - r)) / den
        } else {
            f64::INFINITY
        }
    });
    Ok((m.value, m.x))
}

/// Closed-form Gaussian approximation of [`inductive_bound_k1_iid`].
pub fn inductive_bound_k1_gaussian(q: &VapnikQuery) -> Result<f64> {
    q.validate()?;
    let (n, r, eta) = (q.nf(), q.r1, q.eta_last());
    let d = d_second_1(q)?;
    let s = 1.0 - 2.0 * r;
    Ok(r + d * s / n + 2.0 * eta + (4.0 * d * (1.0 - r) * r / n + d * d * s * s / (n * n) + 4.0 * d * s * eta / n).sqrt())
}

/// The classical Vapnik bound with `d_V = h log(2eN/h) + log(4/ε)`.
pub fn vapnik_classical(q: &VapnikQuery) -> Result<f64> {
    q.validate()?;
    let (n, r) = (q.nf(), q.r1);
    let growth = match q.complexity_override {
        Some(c) => c,
        None => complexity(ComplexityKind::Vc, q.h, q.n, 1, 1.0, 0.0)?.value,
    };
    let d = growth + (4.0 / q.eps).ln();
    Ok(r + 2.0 * d / n + (4.0 * d * r / n + 4.0 * d * d / (n * n)).sqrt())
}

/// Lower envelope of `Φ_a(p)` used by the Gaussian approximations:
/// `p − (a/2)p(1−p)` for `p ≤ 1/2`, `p − a/8` otherwise.
pub fn gaussian_phi_floor(a: f64, p: f64) -> f64 {
    if p <= 0.5 {
        p - 0.5 * a * p * (1.0 - p)
    } else {
        p - a / 8.0
    }
}
