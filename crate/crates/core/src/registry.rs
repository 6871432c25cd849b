//! Reference numeric examples with their tolerances, shared by the acceptance
//! suite and the `repro` command.

use crate::error::Result;
use crate::local::{gibbs_rate, local_deviation, local_deviation_double, LocalBoundQuery, SyntheticIntegral};
use crate::nonlocal::{optimized_deviation_bound, optimized_unbiased_bound, sqrt_bound, ScalarBoundQuery};
use crate::relative::relative_root;
use crate::vapnik::{
    exchangeable_bound, inductive_bound, inductive_bound_alpha_grid, inductive_bound_gaussian, inductive_bound_k1_gaussian,
    inductive_bound_k1_iid, slack_registry, transductive_bound, transductive_bound_k1, vapnik_classical, VapnikQuery,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relation {
    Within { expected: f64, tol: f64 },
    AtMost(f64),
    AtLeast(f64),
}

impl Relation {
    pub fn holds(&self, value: f64) -> bool {
        match *self {
            Relation::Within { expected, tol } => (value - expected).abs() <= tol,
            Relation::AtMost(limit) => value <= limit,
            Relation::AtLeast(limit) => value >= limit,
        }
    }

    /// Reference value printed next to the computed one.
    pub fn reference(&self) -> f64 {
        match *self {
            Relation::Within { expected, .. } => expected,
            Relation::AtMost(l) | Relation::AtLeast(l) => l,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Relation::Within { expected, tol } => format!("{expected} ± {tol:e}"),
            Relation::AtMost(l) => format!("≤ {}", compact(l)),
            Relation::AtLeast(l) => format!("≥ {}", compact(l)),
        }
    }
}

fn compact(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub struct Example {
    pub id: &'static str,
    /// Acceptance criterion number this example belongs to.
    pub criterion: u8,
    pub description: &'static str,
    pub relation: Relation,
    pub compute: fn() -> Result<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: &'static str,
    pub criterion: u8,
    pub relation: Relation,
    pub computed: Result<f64>,
    pub pass: bool,
}

impl Example {
    pub fn run(&self) -> Outcome {
        let computed = (self.compute)();
        let pass = matches!(computed, Ok(v) if self.relation.holds(v));
        Outcome { id: self.id, criterion: self.criterion, relation: self.relation, computed, pass }
    }
}

const fn within(expected: f64, tol: f64) -> Relation {
    Relation::Within { expected, tol }
}

fn scalar(q: f64, d: f64, eps: f64) -> Result<ScalarBoundQuery> {
    ScalarBoundQuery::new(1000, q, d, eps)
}

fn vq() -> Result<VapnikQuery> {
    VapnikQuery::new(1000, 0.2, 10, 0.01)
}

fn synthetic() -> SyntheticIntegral {
    SyntheticIntegral { ess_inf: 0.2, dimension: 10.0 }
}

fn local() -> Result<crate::local::LocalDeviation> {
    local_deviation(&synthetic(), &LocalBoundQuery::new(1000, 0.01, 0.5, 0.1)?)
}

macro_rules! ex {
    ($id:expr, $c:expr, $desc:expr, $rel:expr, $f:expr) => {
        Example { id: $id, criterion: $c, description: $desc, relation: $rel, compute: $f }
    };
}

/// All registered examples, in criterion order.
pub fn examples() -> Vec<Example> {
    vec![
        ex!("basic-0.2402", 1, "deviation bound, N=1000, r=0.2, ε=0.01, KL=0", within(0.2402, 5e-4), || {
            Ok(optimized_deviation_bound(&scalar(0.2, 0.0, 0.01)?, 0.0)?.0)
        }),
        ex!("basic-0.2402-lambda", 1, "optimal λ of the deviation bound", within(234.0, 2.0), || {
            Ok(optimized_deviation_bound(&scalar(0.2, 0.0, 0.01)?, 0.0)?.1)
        }),
        ex!("unbiased-0.2604", 2, "optimized bound on the Gibbs expected risk, q=0.2, d=10", Relation::AtMost(0.2604 + 5e-4), || {
            Ok(optimized_unbiased_bound(&scalar(0.2, 10.0, 1.0)?)?.0)
        }),
        ex!("sqrt-0.2622", 2, "square-root form of the same bound", Relation::AtLeast(0.2622 - 5e-4), || {
            sqrt_bound(&scalar(0.2, 10.0, 1.0)?)
        }),
        ex!("unbiased-below-sqrt", 2, "square-root form minus optimized form", Relation::AtLeast(1e-12), || {
            let q = scalar(0.2, 10.0, 1.0)?;
            Ok(sqrt_bound(&q)? - optimized_unbiased_bound(&q)?.0)
        }),
        ex!("gibbs-rate-0.373", 3, "non-random rate, d=10, N=1000, ess inf R=0.2", within(0.373, 1e-3), || {
            Ok(gibbs_rate(0.2, 0.0, 10.0, 1000))
        }),
        ex!("local-0.332", 4, "local deviation, nonlinear form, α=0.5, γ=0.1", within(0.332, 2e-3), || Ok(local()?.nonlinear)),
        ex!("local-0.372", 4, "local deviation, linear form", within(0.372, 2e-3), || Ok(local()?.linear)),
        ex!("local-double-0.475", 4, "local deviation with λ = 2β, β=100", within(0.475, 2e-3), || {
            local_deviation_double(&synthetic(), 1000, 0.01, 100.0)
        }),
        ex!("relative-root-0.096", 5, "relative nonlinear root at (λ, β, B) = (0.5, 0.2, 0.1)", within(0.096, 5e-4), || {
            Ok(relative_root(0.5, 0.2, 0.1))
        }),
        ex!("transductive-k15", 6, "shadow-sample bound, k=15", within(0.4093, 5e-4), || Ok(transductive_bound(&vq()?, 15)?.0)),
        ex!("transductive-k15-lambda", 6, "optimal λ, k=15", within(965.0, 3.0), || Ok(transductive_bound(&vq()?, 15)?.1)),
        ex!("transductive-k16", 6, "shadow-sample bound, k=16", within(0.4093, 5e-4), || Ok(transductive_bound(&vq()?, 16)?.0)),
        ex!("transductive-k16-lambda", 6, "optimal λ, k=16", within(968.0, 3.0), || Ok(transductive_bound(&vq()?, 16)?.1)),
        ex!("transductive-k17", 6, "shadow-sample bound, k=17", within(0.4093, 5e-4), || Ok(transductive_bound(&vq()?, 17)?.0)),
        ex!("transductive-k17-lambda", 6, "optimal λ, k=17", within(971.0, 3.0), || Ok(transductive_bound(&vq()?, 17)?.1)),
        ex!("transductive-k1-0.539", 6, "shadow-sample bound, k=1", within(0.539, 1e-3), || Ok(transductive_bound(&vq()?, 1)?.0)),
        ex!("equal-size-0.5033", 7, "equal shadow size, A(λ) form", within(0.5033, 1e-3), || Ok(transductive_bound_k1(&vq()?)?.0)),
        ex!("exchangeable-0.4450", 7, "equal shadow size, exchangeable form", within(0.4450, 1e-3), || Ok(exchangeable_bound(&vq()?)?.0)),
        ex!("inductive-0.4211", 8, "inductive bound over k and λ", within(0.4211, 5e-4), || Ok(inductive_bound(&vq()?)?.bound)),
        ex!("inductive-0.4211-k", 8, "optimal k", within(15.0, 0.0), || Ok(inductive_bound(&vq()?)?.k as f64)),
        ex!("inductive-0.4211-lambda", 8, "optimal λ", within(1010.0, 5.0), || Ok(inductive_bound(&vq()?)?.lambda)),
        ex!("gaussian-0.4325", 8, "Gaussian approximation of the inductive bound", within(0.4325, 1e-3), || {
            Ok(inductive_bound_gaussian(&vq()?)?.0)
        }),
        ex!("gaussian-0.4325-k", 8, "optimal k of the Gaussian approximation", within(15.0, 0.0), || {
            Ok(inductive_bound_gaussian(&vq()?)?.1 as f64)
        }),
        ex!("alpha-grid-0.4271", 8, "inductive bound on the λ = 1.1^j grid", within(0.4271, 1e-3), || {
            Ok(inductive_bound_alpha_grid(&vq()?)?.0)
        }),
        ex!("alpha-grid-0.4271-k", 8, "optimal k on the λ grid", within(16.0, 0.0), || Ok(inductive_bound_alpha_grid(&vq()?)?.1 as f64)),
        ex!("iid-0.453", 9, "equal-size i.i.d. inductive bound", within(0.453, 1e-3), || Ok(inductive_bound_k1_iid(&vq()?)?.0)),
        ex!("iid-0.453-lambda", 9, "optimal λ of the i.i.d. bound", within(1195.0, 10.0), || Ok(inductive_bound_k1_iid(&vq()?)?.1)),
        ex!("iid-gaussian-0.461", 9, "closed-form i.i.d. bound", within(0.461, 1e-3), || inductive_bound_k1_gaussian(&vq()?)),
        ex!("vapnik-classical", 9, "classical Vapnik bound", within(0.610, 1e-3), || vapnik_classical(&vq()?)),
        ex!("iid-ordering", 9, "1 if 0.4211-type < 0.453-type < 0.461-type < classical", within(1.0, 0.0), || {
            let q = vq()?;
            let chain = [inductive_bound(&q)?.bound, inductive_bound_k1_iid(&q)?.0, inductive_bound_k1_gaussian(&q)?, vapnik_classical(&q)?];
            Ok(if chain.windows(2).all(|w| w[0] < w[1]) { 1.0 } else { 0.0 })
        }),
        ex!("slack-1e3", 10, "tabulated slack at N = 10³", within(3.7, 0.0), || slack_registry(1_000)),
        ex!("slack-1e6", 10, "tabulated slack at N = 10⁶", within(4.4, 0.0), || slack_registry(1_000_000)),
        ex!("slack-1e9", 10, "tabulated slack at N = 10⁹", within(4.7, 0.0), || slack_registry(1_000_000_000)),
    ]
}

pub fn find(id: &str) -> Option<Example> {
    examples().into_iter().find(|e| e.id == id)
}
