//! One-dimensional search and root finding used by the bound evaluators.

use crate::error::{domain, Result};

pub const ROOT_TOL: f64 = 1e-12;
pub const ROOT_MAX_ITER: usize = 200;
pub const GOLDEN_ITERS: usize = 120;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a scalar minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, iters: usize) -> Minimum {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (fa, fb) = (f(lo), f(hi));
    let mut best = if fc <= fd { Minimum { x: c, value: fc } } else { Minimum { x: d, value: fd } };
    for (x, v) in [(lo, fa), (hi, fb)] {
        if v < best.value {
            best = Minimum { x, value: v };
        }
    }
    best
}

/// Minimizes `f(λ)` over `λ ∈ [lo, hi]` on a log scale.
///
/// A coarse geometric scan locates the best bracket, golden-section search
/// refines it, and a parabolic step through three points polishes the result.
/// Non-finite values are treated as `+∞`.
pub fn minimize_log_scale<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Minimum {
    assert!(lo > 0.0 && hi >= lo, "invalid search interval [{lo}, {hi}]");
    let g = |t: f64| {
        let v = f(t.exp());
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (ll, lh) = (lo.ln(), hi.ln());
    if lh - ll < 1e-15 {
        return Minimum { x: lo, value: g(ll) };
    }
    const SCAN: usize = 64;
    let step = (lh - ll) / SCAN as f64;
    let mut best_j = 0;
    let mut best_v = f64::INFINITY;
    for j in 0..=SCAN {
        let v = g(ll + step * j as f64);
        if v < best_v {
            best_v = v;
            best_j = j;
        }
    }
    let a = ll + step * best_j.saturating_sub(1) as f64;
    let b = (ll + step * (best_j + 1) as f64).min(lh);
    let m = golden_section(g, a, b, GOLDEN_ITERS);
    let polished = parabolic_polish(&g, m, (b - a) * 1e-6);
    let scan = Minimum { x: ll + step * best_j as f64, value: best_v };
    let t = if polished.value <= scan.value { polished } else { scan };
    Minimum { x: t.x.exp(), value: t.value }
}

/// Minimizes `f` over the geometric grid `ratio^j` in `[lo, hi]`, then refines
/// by golden-section search between the neighbours of the best grid point.
pub fn minimize_geometric<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, ratio: f64) -> Minimum {
    let grid = geometric_grid(lo, hi, ratio);
    let g = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut best = (0, f64::INFINITY);
    for (j, &x) in grid.iter().enumerate() {
        let v = g(x);
        if v < best.1 {
            best = (j, v);
        }
    }
    let a = grid[best.0.saturating_sub(1)];
    let b = *grid.get(best.0 + 1).unwrap_or(&grid[best.0]);
    let m = golden_section(|t| g(t.exp()), a.ln(), b.ln(), GOLDEN_ITERS);
    if m.value < best.1 {
        Minimum { x: m.x.exp(), value: m.value }
    } else {
        Minimum { x: grid[best.0], value: best.1 }
    }
}

fn parabolic_polish<G: Fn(f64) -> f64>(g: &G, m: Minimum, h: f64) -> Minimum {
    if h <= 0.0 || !m.value.is_finite() {
        return m;
    }
    let (fl, fr) = (g(m.x - h), g(m.x + h));
    let denom = fl - 2.0 * m.value + fr;
    if denom > 0.0 && fl.is_finite() && fr.is_finite() {
        let x = m.x + 0.5 * h * (fl - fr) / denom;
        let v = g(x);
        if v < m.value {
            return Minimum { x, value: v };
        }
    }
    m
}

/// Solves `f(x) = target` for nondecreasing `f` on `[lo, hi]` by bisection,
/// accelerated with Newton steps when a derivative is supplied.
pub fn solve_increasing<F, D>(f: F, df: Option<D>, target: f64, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a) - target, f(b) - target);
    if fa > 0.0 || fb < 0.0 {
        return domain(format!("target {target} not bracketed on [{lo}, {hi}]"));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..ROOT_MAX_ITER {
        let fx = f(x) - target;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        if b - a <= ROOT_TOL * (1.0 + x.abs()) {
            break;
        }
        let mut next = 0.5 * (a + b);
        if let Some(d) = df.as_ref() {
            let slope = d(x);
            if slope > 0.0 && slope.is_finite() {
                let newton = x - fx / slope;
                if newton > a && newton < b {
                    next = newton;
                }
            }
        }
        if (next - x).abs() <= ROOT_TOL * (1.0 + x.abs()) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Geometric grid `start, start·ratio, …` up to and including `end`.
pub fn geometric_grid(start: f64, end: f64, ratio: f64) -> Vec<f64> {
    assert!(start > 0.0 && ratio > 1.0);
    let mut out = Vec::new();
    let mut x = start;
    while x <= end * (1.0 + 1e-12) {
        out.push(x);
        x *= ratio;
    }
    out
}

/// `n` log-spaced points spanning `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let m = golden_section(|x| (x - 1.3).powi(2) + 2.0, 0.0, 5.0, GOLDEN_ITERS);
        assert!((m.x - 1.3).abs() < 1e-6);
        assert!((m.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_scale_minimum() {
        let m = minimize_log_scale(|l| (l.ln() - 5.0).powi(2), 1.0, 1e4);
        assert!((m.x - 5f64.exp()).abs() < 1e-4);
    }

    #[test]
    fn geometric_minimum() {
        let m = minimize_geometric(|l| (l.ln() - 5.0).powi(2), 1.0, 1e4, 1.1);
        assert!((m.x - 5f64.exp()).abs() < 1e-4);
    }

    #[test]
    fn solves_cubic() {
        let x = solve_increasing(|x| x * x * x, Some(|x: f64| 3.0 * x * x), 2.0, 0.0, 2.0).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-12);
        assert!(solve_increasing(|x| x, None::<fn(f64) -> f64>, 5.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn grids() {
        let g = geometric_grid(1.0, 1000.0, 10.0);
        assert_eq!(g.len(), 4);
        let l = log_space(1.0, 100.0, 3);
        assert!((l[1] - 10.0).abs() < 1e-12);
    }
}
