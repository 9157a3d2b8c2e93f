//! End-to-end runs of the `smallball` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use smallball::cli::{recheck_bound_csv, Status};
use smallball::constants::Constants;
use smallball::formats::{read_distribution, write_json, ClaimReport};

fn smallball(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smallball")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fair_chain(dir: &Path) -> String {
    let p = dir.join("fair.json");
    fs::write(&p, r#"{"n_states": 2, "transition": [[0.5, 0.5], [0.5, 0.5]]}"#).unwrap();
    p.to_str().unwrap().to_owned()
}

/// Committed constants with `name` scaled by `factor`.
fn scaled_constants(dir: &Path, name: &str, factor: f64) -> String {
    let cdir = dir.join("constants");
    fs::create_dir_all(&cdir).unwrap();
    let mut f = Constants::embedded().files().iter().find(|f| f.name == name).unwrap().clone();
    f.value *= factor;
    write_json(&cdir.join(format!("{name}.json")), &f).unwrap();
    cdir.to_str().unwrap().to_owned()
}

#[test]
fn exact_dist_of_ten_fair_signs() {
    let dir = tempfile::tempdir().unwrap();
    let chain = fair_chain(dir.path());
    let o = smallball(&["exact-dist", "--chain", &chain, "--weights", "all-ones", "--n", "10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dist = read_distribution(o.stdout.as_slice()).unwrap();
    assert_eq!(dist.iter().find(|(s, _)| *s == 0).unwrap().1, 252.0 / 1024.0);

    let o = smallball(&["exact-dist", "--chain", &chain, "--weights", "all-ones", "--n", "10", "--rational"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("\n0,63/256\n"));
}

#[test]
fn spectral_gap_reports_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("lazy.json");
    fs::write(&p, r#"{"n_states": 2, "transition": [[0.8, 0.2], [0.2, 0.8]]}"#).unwrap();
    let o = smallball(&["spectral-gap", "--chain", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["lambda"].as_f64().unwrap() - 0.6).abs() < 1e-12);
}

#[test]
fn malformed_chain_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, r#"{"n_states": 2, "transition": [[0.9, 0.2], [0.2, 0.8]]}"#).unwrap();
    let o = smallball(&["spectral-gap", "--chain", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("stochastic"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&smallball(&["smallball"])), 2);
    assert_eq!(code(&smallball(&["no-such-command"])), 2);
}

#[test]
fn missing_weights_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fair_chain(dir.path());
    let cfg = dir.path().join("exp.json");
    fs::write(&cfg, r#"{"kind": "smallball-exact", "chain": "fair.json", "weights": "missing.json"}"#).unwrap();
    let o = smallball(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("missing.json"), "{}", stderr(&o));
}

#[test]
fn config_errors_cite_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(&cfg, r#"{"kind": "tightness", "lambda_list": [0.0], "n_list": []}"#).unwrap();
    let o = smallball(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("n_list"), "{}", stderr(&o));

    fs::write(&cfg, r#"{"kind": "tightness", "lambda_list": [0.0], "n_list": [8], "colour": 1}"#).unwrap();
    let o = smallball(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn tightness_config_writes_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.json");
    fs::write(
        &cfg,
        r#"{"kind": "tightness", "lambda_list": [0, 0.3, 0.6], "n_list": [64, 128, 256, 512, 1024], "out": "tight.csv"}"#,
    )
    .unwrap();
    let o = smallball(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("tight.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "lambda,n,prob,normalized,slope");
    let rows: Vec<Vec<f64>> =
        lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().all(|r| (-0.55..=-0.45).contains(&r[4])));
}

#[test]
fn bound_csv_round_trip_reproduces_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("diff.json");
    fs::write(&cfg, r#"{"kind": "diff-scaling", "n_list": [9, 16, 25, 36, 49], "out": "diff.csv"}"#).unwrap();
    let csv = dir.path().join("diff.csv");

    let o = smallball(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(recheck_bound_csv(&csv).unwrap(), Status::Pass);

    let cdir = scaled_constants(dir.path(), "C_diff", 0.5);
    let o = smallball(&["--constants", &cdir, "run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_eq!(recheck_bound_csv(&csv).unwrap(), Status::Violation);
}

#[test]
fn smallball_check_against_theorem() {
    let dir = tempfile::tempdir().unwrap();
    let chain = fair_chain(dir.path());
    let out = dir.path().join("b.csv");
    let args = ["smallball", "--chain", &chain, "--n", "12", "--check", "scalar", "--out", out.to_str().unwrap()];
    let o = smallball(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(recheck_bound_csv(&out).unwrap(), Status::Pass);

    let o = smallball(&[&args[..], &["--mode", "sampled", "--samples", "20000", "--seed", "3"]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8(o.stdout).unwrap().contains("99% CI"));

    let o = smallball(&["smallball", "--chain", &chain, "--n", "6", "--weights", "random-unit(3, 7)", "--mode", "sampled", "--radius", "0.8"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn unbalanced_signs_warn() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    fs::write(&p, r#"{"n_states": 2, "transition": [[0.5, 0.5], [0.5, 0.5]], "signs": [[1, 1]]}"#).unwrap();
    let o = smallball(&["exact-dist", "--chain", p.to_str().unwrap(), "--n", "3"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("not balanced"));
}

#[test]
fn esseen_and_zp_commands() {
    let dir = tempfile::tempdir().unwrap();
    let chain = fair_chain(dir.path());
    let w = dir.path().join("w.json");
    fs::write(&w, "[1, 2, 3, 5, 8]").unwrap();
    let w = w.to_str().unwrap();
    let o = smallball(&["esseen", "--chain", &chain, "--weights", w]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = smallball(&["zp-average", "--chain", &chain, "--weights", w, "--x0", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["prime"], 17);
    assert!(v["point_probability"].as_f64().unwrap() <= v["residue_probability"].as_f64().unwrap());
}

#[test]
fn prg_build_then_test_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g4.json");
    let o = smallball(&["prg-build", "--k", "4", "--out", g.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8(o.stdout).unwrap().contains("certified lambda"));
    let from_file = smallball(&["prg-test", "--graph", g.to_str().unwrap(), "--n", "10", "--pad-to-multiple"]);
    let built = smallball(&["prg-test", "--k", "4", "--n", "10", "--pad-to-multiple"]);
    assert_eq!(code(&from_file), 0, "{}", stderr(&from_file));
    assert_eq!(from_file.stdout, built.stdout);
    let o = smallball(&["prg-test", "--k", "4", "--n", "10"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_claims_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("claims.json");
    let o = smallball(&["verify-claims", "--budget", "4096", "--seed", "5", "--out", out.to_str().unwrap()]);
    let report: ClaimReport = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    // The L1 form of the decomposition inequality fails on random instances.
    assert!(!report["decomposition_l1"].pass);
    assert_eq!(code(&o), 1);
    for (id, r) in &report {
        assert!(r.pass || id == "decomposition_l1", "{id}: {r:?}");
        assert!(r.instances > 0);
    }
}

#[test]
fn verify_all_is_deterministic_and_catches_a_halved_constant() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let o = smallball(&[extra, &["verify-all", "--seed", "12345", "--out", out.to_str().unwrap()]].concat());
        (o, fs::read(out.join("report.json")).unwrap(), fs::read(out.join("bounds.csv")).unwrap())
    };
    let (a, report_a, bounds_a) = run("a", &[]);
    let (_, report_b, bounds_b) = run("b", &[]);
    assert_eq!(report_a, report_b);
    assert_eq!(bounds_a, bounds_b);
    // Only the known-false decomposition criterion fails.
    assert_eq!(code(&a), 1);
    let v: serde_json::Value = serde_json::from_slice(&report_a).unwrap();
    let failed: Vec<u64> =
        v["criteria"].as_array().unwrap().iter().filter(|c| c["pass"] == false).map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(failed, vec![7]);

    let cdir = scaled_constants(dir.path(), "C_equal", 0.5);
    let (c, report_c, _) = run("c", &["--constants", &cdir]);
    assert_eq!(code(&c), 1);
    let v: serde_json::Value = serde_json::from_slice(&report_c).unwrap();
    assert_eq!(v["criteria"][2]["pass"], false);
}
