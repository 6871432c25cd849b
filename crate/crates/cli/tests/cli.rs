use std::path::Path;
use std::process::{Command, Output};

use pacbound::nonlocal::{deviation_bound, ScalarBoundQuery};
use pacbound::threshold::{LabeledDataset, ThresholdModel};
use pacbound::BoundReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pacbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pacbound")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(path: &Path) -> BoundReport {
    BoundReport::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn eval_basic_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = pacbound(&["eval", "deviation", "--n", "1000", "--r", "0.2", "--kl", "0", "--eps", "0.01", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("deviation = 0.2401"));
    let r = report(&out);
    assert!((r.value - 0.2402).abs() < 5e-4);
    assert!((r.optimized.lambda.unwrap() - 234.0).abs() < 2.0);
    assert!(!r.vacuous);
}

#[test]
fn eval_inductive_reports_k() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = pacbound(&["eval", "inductive", "--n", "1000", "--h", "10", "--r1", "0.2", "--eps", "0.01", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let r = report(&out);
    assert!((r.value - 0.4211).abs() < 5e-4);
    assert_eq!(r.optimized.k, Some(15));
}

#[test]
fn precondition_errors_name_the_constraint() {
    let o = pacbound(&["eval", "deviation", "--n", "1000", "--r", "0.2", "--eps", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("eps"));
    let o = pacbound(&["eval", "transductive", "--n", "1000", "--r1", "0.2", "--eps", "0.01", "--k", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--h"));
    let o = pacbound(&["eval", "no-such-bound"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repro_exit_codes() {
    let o = pacbound(&["repro", "vapnik-classical"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0.610364"));
    assert!(pacbound(&["repro", "basic-0.2402"]).status.success());
    assert_eq!(pacbound(&["repro", "nonexistent-id"]).status.code(), Some(1));
    assert_eq!(pacbound(&["repro", "relative-root-0.096"]).status.code(), Some(3));
}

#[test]
fn repro_all_is_sorted_and_thread_independent() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_pacbound")).args(["repro", "all"]).env("PACBOUND_THREADS", threads).output().unwrap();
        (o.status.code(), stdout(&o))
    };
    let (code, one) = run("1");
    assert_eq!(code, Some(3));
    assert_eq!((code, one.clone()), run("4"));
    let ids: Vec<&str> = one.lines().skip(1).map(|l| l.split_whitespace().next().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

const FOUR_ROWS: &str = "x1,x2,y\n0.1,0.7,1\n0.4,0.2,2\n0.6,0.9,1\n0.8,0.3,2\n";

#[test]
fn threshold_bound_matches_library_call() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("four.csv");
    std::fs::write(&csv, FOUR_ROWS).unwrap();
    let out = dir.path().join("r.json");
    let o = pacbound(&[
        "threshold-bound",
        csv.to_str().unwrap(),
        "--bound",
        "deviation",
        "--lambda",
        "2",
        "--eps",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let data = LabeledDataset::new(
        vec![vec![0.1, 0.7], vec![0.4, 0.2], vec![0.6, 0.9], vec![0.8, 0.3]],
        vec![1, 2, 1, 2],
    )
    .unwrap();
    let model = ThresholdModel::build(&data, 2).unwrap();
    let erm = model.erm();
    let q = ScalarBoundQuery::new(4, erm.risk, 0.0, 0.05).unwrap();
    let expected = deviation_bound(&q, model.kl_of_cell(&erm.cell), 2.0).unwrap();
    let r = report(&out);
    assert_eq!(serde_json::to_string(&r.value).unwrap(), serde_json::to_string(&expected).unwrap());
    assert_eq!(r.vacuous, !(expected < 1.0));
}

#[test]
fn reports_are_deterministic_up_to_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("four.csv");
    std::fs::write(&csv, FOUR_ROWS).unwrap();
    let mut seen = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let o = pacbound(&["threshold-bound", csv.to_str().unwrap(), "--bound", "local", "--lambda", "3", "--beta", "1", "--eps", "0.05", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let mut r = report(&out);
        r.timestamp = 0;
        seen.push(r.to_json());
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn threshold_train_exports_minimizer() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("four.csv");
    std::fs::write(&csv, FOUR_ROWS).unwrap();
    let o = pacbound(&["threshold-train", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["classifier"]["risk"], 0.0);
    assert_eq!(v["summary"]["h"], 2);
}

#[test]
fn svm_train_reports_margin() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("two.csv");
    std::fs::write(&csv, "0,0,-1\n1,1,1\n").unwrap();
    let (out, model) = (dir.path().join("r.json"), dir.path().join("m.json"));
    let o = pacbound(&["svm-train", csv.to_str().unwrap(), "--out", out.to_str().unwrap(), "--model", model.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let margin = report(&out).inputs["margin"].as_f64().unwrap();
    assert!((margin - 0.5f64.sqrt()).abs() < 1e-9);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(model).unwrap()).unwrap();
    assert_eq!(m["support"].as_array().unwrap().len(), 2);
}

#[test]
fn svm_inseparable_request_is_explicit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("xor.csv");
    std::fs::write(&csv, "0,0,1\n1,1,1\n0,1,-1\n1,0,-1\n").unwrap();
    let o = pacbound(&["svm-train", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not separable"));
}

#[test]
fn svm_transductive_bound_is_nonvacuous() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rows: String = (0..500)
        .map(|_| {
            let y: i32 = if rng.gen_bool(0.5) { 1 } else { -1 };
            format!("{:.4},{:.4},{y}\n", 3.0 * y as f64 + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sep.csv");
    std::fs::write(&csv, rows).unwrap();
    let out = dir.path().join("r.json");
    let o = pacbound(&["svm-bound", csv.to_str().unwrap(), "--mode", "transductive", "--k", "4", "--eps", "0.01", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&out);
    assert!(r.value.is_finite() && r.value < 1.0);
    assert_eq!(r.inputs["n"], 100);
}

#[test]
fn malformed_csv_is_an_ingestion_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "0,0,1\n1,x,-1\n").unwrap();
    let o = pacbound(&["svm-train", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
    let o = pacbound(&["threshold-train", dir.path().join("missing.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
