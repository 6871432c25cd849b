use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use pacbound::dataset::read_csv;
use pacbound::local::{gibbs_rate, local_deviation, local_deviation_double, local_deviation_with_kl, LocalBoundQuery, SyntheticIntegral};
use pacbound::nonlocal::{
    deviation_bound, optimized_deviation_bound, optimized_unbiased_bound, sqrt_bound, unbiased_bound, ScalarBoundQuery,
};
use pacbound::registry::{examples, find, Outcome};
use pacbound::relative::{effective_temperature, relative_root, AtomicMeasure};
use pacbound::svm::{
    clipped_margins, gram, inductive_margin_bound, predict, radius_squared, simplified_margin_bound, solve_dual,
    transductive_margin_pipeline, KernelSpec, SvmDataset, SvmModel,
};
use pacbound::threshold::{LabeledDataset, ThresholdModel};
use pacbound::vapnik::{
    exchangeable_bound, inductive_bound, inductive_bound_alpha_grid, inductive_bound_gaussian, inductive_bound_k1_gaussian,
    inductive_bound_k1_iid, slack_registry, transductive_bound, transductive_bound_k1, vapnik_classical, VapnikQuery,
};
use pacbound::{BoundReport, Error, Optimized};
use rayon::prelude::*;

const EXIT_PRECONDITION: u8 = 1;
const EXIT_INGESTION: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "pacbound", version, about = "PAC-Bayesian and Vapnik-style generalization bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute the registered reference examples.
    Repro {
        /// `all` or one example id.
        #[arg(default_value = "all")]
        suite: String,
    },
    /// Evaluate one bound on explicit inputs.
    Eval {
        /// Bound id; `pacbound eval list` prints them.
        bound: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Fit the threshold model on a CSV sample and export its empirical risk minimizer.
    ThresholdTrain {
        csv: PathBuf,
        /// Number of labels; defaults to the largest label present.
        #[arg(long)]
        labels: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound the risk of the threshold classifier fitted on a CSV sample.
    ThresholdBound {
        csv: PathBuf,
        #[arg(long, value_enum, default_value = "deviation")]
        bound: ThresholdBoundKind,
        #[arg(long)]
        labels: Option<usize>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Train a hard- or box-constrained SVM on a CSV sample.
    SvmTrain {
        csv: PathBuf,
        /// Kernel as JSON, e.g. '{"type":"gaussian","width":1.0}'.
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        box_cap: Option<f64>,
        /// Where to write the exported machine.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound the risk of an SVM trained on a CSV sample.
    SvmBound {
        csv: PathBuf,
        #[arg(long, value_enum)]
        mode: SvmMode,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        box_cap: Option<f64>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ThresholdBoundKind {
    Deviation,
    Local,
    EffectiveTemperature,
}

#[derive(Clone, Copy, ValueEnum)]
enum SvmMode {
    Transductive,
    Compression,
    Margin,
}

#[derive(Args, Default, Clone)]
struct Flags {
    #[arg(long)]
    n: Option<usize>,
    /// Empirical risk (or its essential infimum for the rate bounds).
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    kl: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    h: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Linear quantity fed to the relative root.
    #[arg(long)]
    b: Option<f64>,
    /// Data radius for the closed-form margin bound.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure carrying its exit status.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Ingestion(_)) { EXIT_INGESTION } else { EXIT_PRECONDITION };
        Failure { code, message: e.to_string() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure { code: EXIT_INGESTION, message: format!("{e:#}") }
    }
}

fn precondition(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_PRECONDITION, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn need<T: Copy>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| precondition(format!("missing required flag --{name}")))
}

const BOUND_IDS: &[(&str, &str)] = &[
    ("deviation", "deviation bound on the risk of a posterior: --n --r --kl --eps [--lambda]"),
    ("unbiased", "bound on the Gibbs expected risk: --n --r --d [--lambda]"),
    ("sqrt", "square-root form of the expected-risk bound: --n --r --d"),
    ("gibbs-rate", "non-random local rate: --n --r --d [--eta]"),
    ("local", "local deviation bound: --n --eps --r --d and (--alpha --gamma) or (--lambda --beta) [--kl]"),
    ("local-double", "local deviation bound with λ = 2β: --n --eps --r --d --beta"),
    ("relative-root", "relative nonlinear root: --lambda --beta --b"),
    ("transductive", "shadow-sample bound: --n --r1 --h --eps --k"),
    ("equal-size", "equal shadow size, A(λ) form: --n --r1 --h --eps"),
    ("exchangeable", "equal shadow size, exchangeable form: --n --r1 --h --eps"),
    ("inductive", "inductive bound optimized over k and λ: --n --r1 --h --eps"),
    ("inductive-gaussian", "Gaussian approximation of the inductive bound: --n --r1 --h --eps"),
    ("inductive-grid", "inductive bound on the λ = α^j grid: --n --r1 --h --eps [--alpha]"),
    ("iid", "equal-size i.i.d. inductive bound: --n --r1 --h --eps"),
    ("iid-gaussian", "closed-form i.i.d. bound: --n --r1 --h --eps"),
    ("vapnik-classical", "classical Vapnik bound: --n --r1 --h --eps"),
    ("slack", "tabulated slack: --n"),
    ("svm-margin", "closed-form margin bound: --n --gamma --radius --k --eps"),
];

fn vapnik_query(f: &Flags) -> CliResult<VapnikQuery> {
    let mut q = VapnikQuery::new(need(f.n, "n")?, need(f.r1, "r1")?, need(f.h, "h")?, need(f.eps, "eps")?)?;
    if let Some(a) = f.alpha {
        q.alpha = a;
        q.validate()?;
    }
    Ok(q)
}

fn vapnik_inputs(r: BoundReport, f: &Flags) -> BoundReport {
    r.input("n", f.n).input("r1", f.r1).input("h", f.h).input("eps", f.eps)
}

fn synthetic(f: &Flags) -> CliResult<SyntheticIntegral> {
    Ok(SyntheticIntegral { ess_inf: need(f.r, "r")?, dimension: need(f.d, "d")? })
}

fn eval(id: &str, f: &Flags) -> CliResult<BoundReport> {
    let report = match id {
        "deviation" => {
            let q = ScalarBoundQuery::new(need(f.n, "n")?, need(f.r, "r")?, 0.0, need(f.eps, "eps")?)?;
            let kl = f.kl.unwrap_or(0.0);
            let (value, lambda) = match f.lambda {
                Some(l) => (deviation_bound(&q, kl, l)?, l),
                None => optimized_deviation_bound(&q, kl)?,
            };
            BoundReport::new(id, value, "deviation bound with the Φ family")
                .input("n", q.n)
                .input("r", q.q)
                .input("kl", kl)
                .input("eps", q.eps)
                .with_optimized(Optimized::default().lambda(lambda))
        }
        "unbiased" => {
            let q = ScalarBoundQuery::new(need(f.n, "n")?, need(f.r, "r")?, need(f.d, "d")?, 1.0)?;
            let (value, lambda) = match f.lambda {
                Some(l) => (unbiased_bound(&q, l)?.tight, l),
                None => optimized_unbiased_bound(&q)?,
            };
            BoundReport::new(id, value, "expected-risk bound for the Gibbs posterior")
                .input("n", q.n)
                .input("r", q.q)
                .input("d", q.d)
                .with_optimized(Optimized::default().lambda(lambda))
        }
        "sqrt" => {
            let q = ScalarBoundQuery::new(need(f.n, "n")?, need(f.r, "r")?, need(f.d, "d")?, 1.0)?;
            BoundReport::new(id, sqrt_bound(&q)?, "square-root expected-risk bound").input("n", q.n).input("r", q.q).input("d", q.d)
        }
        "gibbs-rate" => {
            let (r, d, n, eta) = (need(f.r, "r")?, need(f.d, "d")?, need(f.n, "n")?, f.eta.unwrap_or(0.0));
            if n == 0 || !(d >= 0.0) || !(0.0..=1.0).contains(&r) {
                return Err(precondition("need N > 0, d ≥ 0 and r in [0,1]"));
            }
            BoundReport::new(id, gibbs_rate(r, eta, d, n), "non-random local rate")
                .input("n", n)
                .input("r", r)
                .input("d", d)
                .input("eta", eta)
        }
        "local" => {
            let (n, eps) = (need(f.n, "n")?, need(f.eps, "eps")?);
            let q = match (f.alpha, f.gamma, f.lambda, f.beta) {
                (Some(a), Some(g), _, _) => LocalBoundQuery::new(n, eps, a, g)?,
                (_, _, Some(l), Some(b)) => LocalBoundQuery::from_temperatures(n, eps, b, l)?,
                _ => return Err(precondition("local needs --alpha and --gamma, or --lambda and --beta")),
            };
            let dev = local_deviation_with_kl(&synthetic(f)?, &q, f.kl.unwrap_or(0.0))?;
            BoundReport::new(id, dev.nonlinear, "local deviation bound, nonlinear form")
                .input("n", n)
                .input("eps", eps)
                .input("r", f.r)
                .input("d", f.d)
                .input("alpha", q.alpha)
                .input("gamma", q.gamma)
                .input("linear", dev.linear)
                .with_optimized(Optimized::default().lambda(q.lambda()).beta(q.beta()))
        }
        "local-double" => {
            let (n, eps, beta) = (need(f.n, "n")?, need(f.eps, "eps")?, need(f.beta, "beta")?);
            let value = local_deviation_double(&synthetic(f)?, n, eps, beta)?;
            BoundReport::new(id, value, "local deviation bound with λ = 2β")
                .input("n", n)
                .input("eps", eps)
                .input("r", f.r)
                .input("d", f.d)
                .input("beta", beta)
        }
        "relative-root" => {
            let (l, b, m) = (need(f.lambda, "lambda")?, need(f.beta, "beta")?, need(f.b, "b")?);
            if !(0.0 <= b && b < l && l < 1.0) {
                return Err(precondition(format!("need 0 ≤ β < λ < 1, got β={b}, λ={l}")));
            }
            BoundReport::new(id, relative_root(l, b, m), "relative nonlinear root").input("lambda", l).input("beta", b).input("b", m)
        }
        "transductive" => {
            let q = vapnik_query(f)?;
            let k = need(f.k, "k")?;
            if k == 0 {
                return Err(precondition("k must be positive"));
            }
            let (value, lambda) = transductive_bound(&q, k)?;
            vapnik_inputs(BoundReport::new(id, value, "shadow-sample bound"), f)
                .input("k", k)
                .with_optimized(Optimized::default().lambda(lambda))
        }
        "equal-size" => {
            let (value, lambda) = transductive_bound_k1(&vapnik_query(f)?)?;
            vapnik_inputs(BoundReport::new(id, value, "equal shadow size bound"), f).with_optimized(Optimized::default().lambda(lambda))
        }
        "exchangeable" => {
            let (value, lambda) = exchangeable_bound(&vapnik_query(f)?)?;
            vapnik_inputs(BoundReport::new(id, value, "exchangeable equal-size bound"), f)
                .with_optimized(Optimized::default().lambda(lambda))
        }
        "inductive" => {
            let b = inductive_bound(&vapnik_query(f)?)?;
            vapnik_inputs(BoundReport::new(id, b.bound, "inductive bound from shadow samples"), f)
                .with_optimized(Optimized::default().lambda(b.lambda).k(b.k))
        }
        "inductive-gaussian" => {
            let (value, k) = inductive_bound_gaussian(&vapnik_query(f)?)?;
            vapnik_inputs(BoundReport::new(id, value, "Gaussian approximation of the inductive bound"), f)
                .with_optimized(Optimized::default().k(k))
        }
        "inductive-grid" => {
            let q = vapnik_query(f)?;
            let (value, k, j) = inductive_bound_alpha_grid(&q)?;
            vapnik_inputs(BoundReport::new(id, value, "inductive bound on a geometric λ grid"), f)
                .input("alpha", q.alpha)
                .with_optimized(Optimized::default().k(k).lambda(q.alpha.powi(j as i32)))
        }
        "iid" => {
            let (value, lambda) = inductive_bound_k1_iid(&vapnik_query(f)?)?;
            vapnik_inputs(BoundReport::new(id, value, "equal-size i.i.d. bound"), f).with_optimized(Optimized::default().lambda(lambda))
        }
        "iid-gaussian" => {
            let value = inductive_bound_k1_gaussian(&vapnik_query(f)?)?;
            vapnik_inputs(BoundReport::new(id, value, "closed-form i.i.d. bound"), f)
        }
        "vapnik-classical" => {
            let value = vapnik_classical(&vapnik_query(f)?)?;
            vapnik_inputs(BoundReport::new(id, value, "classical Vapnik bound"), f)
        }
        "slack" => {
            let n = need(f.n, "n")?;
            BoundReport::new(id, slack_registry(n)?, "tabulated slack").input("n", n)
        }
        "svm-margin" => {
            let (n, g, r, k, eps) = (need(f.n, "n")?, need(f.gamma, "gamma")?, need(f.radius, "radius")?, f.k.unwrap_or(1), need(f.eps, "eps")?);
            BoundReport::new(id, simplified_margin_bound(g, r, n, k, eps)?, "closed-form margin bound")
                .input("n", n)
                .input("gamma", g)
                .input("radius", r)
                .input("k", k)
                .input("eps", eps)
        }
        _ => return Err(precondition(format!("unknown bound id `{id}`; run `pacbound eval list`"))),
    };
    Ok(match f.seed {
        Some(s) => report.input("seed", s),
        None => report,
    })
}

fn emit(report: &BoundReport, out: Option<&Path>) -> CliResult<()> {
    println!("{}", report.summary_line());
    if let Some(path) = out {
        fs::write(path, report.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn repro(suite: &str) -> CliResult<bool> {
    let selected = if suite == "all" {
        examples()
    } else {
        vec![find(suite).ok_or_else(|| precondition(format!("unknown example id `{suite}`")))?]
    };
    let mut outcomes: Vec<Outcome> = selected.par_iter().map(|e| e.run()).collect();
    outcomes.sort_by(|a, b| a.id.cmp(b.id));
    println!("{:<26} {:>22} {:>14}  status", "id", "expected", "computed");
    for o in &outcomes {
        let computed = match &o.computed {
            Ok(v) => format!("{v:.6}"),
            Err(e) => format!("error: {e}"),
        };
        println!("{:<26} {:>22} {:>14}  {}", o.id, o.relation.describe(), computed, if o.pass { "pass" } else { "FAIL" });
    }
    Ok(outcomes.iter().all(|o| o.pass))
}

fn load_threshold(csv: &Path, labels: Option<usize>) -> CliResult<ThresholdModel> {
    let file = fs::File::open(csv).with_context(|| format!("opening {}", csv.display()))?;
    let data = LabeledDataset::from_table(&read_csv(file)?)?;
    let label_count = labels.unwrap_or_else(|| data.max_label());
    Ok(ThresholdModel::build(&data, label_count)?)
}

fn threshold_bound(csv: &Path, kind: ThresholdBoundKind, labels: Option<usize>, f: &Flags) -> CliResult<BoundReport> {
    let model = load_threshold(csv, labels)?;
    let erm = model.erm();
    let eps = need(f.eps, "eps")?;
    let n = model.n();
    let base = |id: &str, value: f64, anchor: &str| {
        BoundReport::new(id, value, anchor)
            .input("csv", csv.display().to_string())
            .input("n", n)
            .input("h", model.h())
            .input("labels", model.label_count())
            .input("eps", eps)
    };
    let report = match kind {
        ThresholdBoundKind::Deviation => {
            let kl = model.kl_of_cell(&erm.cell);
            let q = ScalarBoundQuery::new(n, erm.risk, 0.0, eps)?;
            let (value, lambda) = match f.lambda {
                Some(l) => (deviation_bound(&q, kl, l)?, l),
                None => optimized_deviation_bound(&q, kl)?,
            };
            base("threshold-deviation", value, "deviation bound for the cell posterior of the empirical risk minimizer")
                .input("r", erm.risk)
                .input("kl", kl)
                .with_optimized(Optimized::default().lambda(lambda))
        }
        ThresholdBoundKind::Local => {
            let q = match (f.alpha, f.gamma, f.lambda, f.beta) {
                (Some(a), Some(g), _, _) => LocalBoundQuery::new(n, eps, a, g)?,
                (_, _, Some(l), Some(b)) => LocalBoundQuery::from_temperatures(n, eps, b, l)?,
                _ => return Err(precondition("local needs --alpha and --gamma, or --lambda and --beta")),
            };
            let dev = local_deviation(&model, &q)?;
            base("threshold-local", dev.nonlinear, "local deviation bound for the Gibbs posterior")
                .input("alpha", q.alpha)
                .input("gamma", q.gamma)
                .input("linear", dev.linear)
                .with_optimized(Optimized::default().lambda(q.lambda()).beta(q.beta()))
        }
        ThresholdBoundKind::EffectiveTemperature => {
            let lambda = need(f.lambda, "lambda")?;
            let class = model.enumerate()?;
            let rho = class.gibbs(lambda);
            let nu = AtomicMeasure::geometric_uniform(f.alpha.unwrap_or(1.1), n)?;
            let est = effective_temperature(&class, eps, &rho, &nu)?;
            let mut opt = Optimized::default().beta(est.beta_hat);
            if let Some(g) = est.gamma_star {
                opt = opt.gamma(g);
            }
            base("threshold-effective-temperature", class.gibbs_risk(lambda), "certified inverse temperature in beta; value is the empirical Gibbs risk")
                .input("lambda", lambda)
                .input("certified", est.gamma_star.is_some())
                .with_optimized(opt)
        }
    };
    Ok(report)
}

fn parse_kernel(text: Option<&str>) -> CliResult<KernelSpec> {
    let kernel = match text {
        Some(t) => serde_json::from_str(t).map_err(|e| precondition(format!("invalid kernel JSON: {e}")))?,
        None => KernelSpec::Linear,
    };
    kernel.validate()?;
    Ok(kernel)
}

fn load_svm(csv: &Path) -> CliResult<SvmDataset> {
    let file = fs::File::open(csv).with_context(|| format!("opening {}", csv.display()))?;
    Ok(SvmDataset::from_table(&read_csv(file)?)?)
}

fn training_error(kernel: &KernelSpec, sol: &pacbound::svm::DualSolution, data: &SvmDataset) -> f64 {
    let wrong = data.points.iter().zip(&data.labels).filter(|(x, y)| predict(kernel, sol, &data.points, &data.labels, x) != **y).count();
    wrong as f64 / data.points.len() as f64
}

fn svm_train(csv: &Path, kernel: Option<&str>, box_cap: Option<f64>, model: Option<&Path>) -> CliResult<BoundReport> {
    let kernel = parse_kernel(kernel)?;
    let data = load_svm(csv)?;
    let g = gram(&kernel, &data.points)?;
    let sol = solve_dual(&g, &data.labels, box_cap)?;
    write_json(&SvmModel::new(&kernel, &sol, &data.points, &data.labels), model)?;
    let mut report = BoundReport::new("svm-train", training_error(&kernel, &sol, &data), "training error of the trained machine")
        .input("csv", csv.display().to_string())
        .input("n", data.points.len())
        .input("support", sol.support.len())
        .input("radius", radius_squared(&g).max(0.0).sqrt())
        .input("separable", sol.margin.is_some());
    if let Some(m) = sol.margin {
        report = report.input("margin", m);
    }
    if let Some(c) = box_cap {
        report = report.input("box_cap", c);
    }
    Ok(report)
}

fn svm_bound(csv: &Path, mode: SvmMode, kernel: Option<&str>, box_cap: Option<f64>, f: &Flags) -> CliResult<BoundReport> {
    let kernel = parse_kernel(kernel)?;
    let data = load_svm(csv)?;
    let eps = need(f.eps, "eps")?;
    let rows = data.points.len();
    let report = match mode {
        SvmMode::Transductive => {
            let k = need(f.k, "k")?;
            if k == 0 || rows % (k as usize + 1) != 0 {
                return Err(precondition(format!("{rows} rows cannot be split into N training rows and k·N = {k}·N shadow rows")));
            }
            let n = rows / (k as usize + 1);
            let t = transductive_margin_pipeline(&kernel, &data.points[..n], &data.labels[..n], &data.points[n..], k, eps, box_cap)?;
            BoundReport::new("svm-transductive", t.bound, "shadow-sample margin bound")
                .input("n", n)
                .input("k", k)
                .input("eps", eps)
                .input("margin", t.margin)
                .input("radius", t.radius)
                .input("r1", t.r1)
                .with_optimized(Optimized::default().lambda(t.lambda).h(t.h as u64))
        }
        SvmMode::Compression => {
            let sol = solve_dual(&gram(&kernel, &data.points)?, &data.labels, box_cap)?;
            let r1 = training_error(&kernel, &sol, &data);
            let q = VapnikQuery::new(rows, r1, sol.support.len() as u64, eps)?;
            let b = inductive_bound(&q)?;
            BoundReport::new("svm-compression", b.bound, "compression-scheme bound with the support set")
                .input("n", rows)
                .input("eps", eps)
                .input("r1", r1)
                .input("support", sol.support.len())
                .with_optimized(Optimized::default().lambda(b.lambda).k(b.k).h(q.h))
        }
        SvmMode::Margin => {
            let k = f.k.unwrap_or(1);
            let sol = solve_dual(&gram(&kernel, &data.points)?, &data.labels, box_cap)?;
            let max_norm = data.points.iter().map(|x| kernel.eval(x, x).max(0.0).sqrt()).fold(0.0, f64::max);
            let (atoms, weights): (Vec<f64>, Vec<f64>) = (-30i32..=30)
                .map(|j| (2f64.powi(j), 1.0 / (2.0 * (j.unsigned_abs() as f64 + 1.0) * (j.unsigned_abs() as f64 + 2.0))))
                .unzip();
            let r_max = atoms
                .iter()
                .copied()
                .find(|a| *a >= max_norm)
                .ok_or_else(|| precondition("feature norms exceed the largest prior atom 2^30"))?;
            let nu = AtomicMeasure::new(atoms, weights)?;
            let margins = clipped_margins(&kernel, &sol, &data.points, &data.labels, r_max);
            let h_grid: Vec<usize> = (1..=rows).collect();
            let b = inductive_margin_bound(&margins, r_max, &nu, eps, k, &h_grid)?;
            BoundReport::new("svm-margin-quantile", b.bound, "inductive margin-quantile bound")
                .input("n", rows)
                .input("k", k)
                .input("eps", eps)
                .input("r_max", r_max)
                .input("quantile", b.quantile)
                .with_optimized(Optimized::default().lambda(b.lambda).h(b.h as u64))
        }
    };
    Ok(report.input("csv", csv.display().to_string()))
}

fn configure_threads() {
    if let Some(n) = std::env::var("PACBOUND_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Repro { suite } => Ok(if repro(&suite)? { 0 } else { EXIT_MISMATCH }),
        Command::Eval { bound, flags } => {
            if bound == "list" {
                for (id, help) in BOUND_IDS {
                    println!("{id:<20} {help}");
                }
                return Ok(0);
            }
            emit(&eval(&bound, &flags)?, flags.out.as_deref())?;
            Ok(0)
        }
        Command::ThresholdTrain { csv, labels, out } => {
            let model = load_threshold(&csv, labels)?;
            let erm = model.erm();
            eprintln!("empirical risk {:.6}, thresholds {:?}", erm.risk, erm.thresholds);
            write_json(&serde_json::json!({ "summary": model.summary(), "classifier": erm }), out.as_deref())?;
            Ok(0)
        }
        Command::ThresholdBound { csv, bound, labels, flags } => {
            emit(&threshold_bound(&csv, bound, labels, &flags)?, flags.out.as_deref())?;
            Ok(0)
        }
        Command::SvmTrain { csv, kernel, box_cap, model, out } => {
            let report = svm_train(&csv, kernel.as_deref(), box_cap, model.as_deref())?;
            if model.is_some() || out.is_some() {
                emit(&report, out.as_deref())?;
            }
            Ok(0)
        }
        Command::SvmBound { csv, mode, kernel, box_cap, flags } => {
            emit(&svm_bound(&csv, mode, kernel.as_deref(), box_cap, &flags)?, flags.out.as_deref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
