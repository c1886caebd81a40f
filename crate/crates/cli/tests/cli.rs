use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mfl_cli::commands::{run_verify, standard_oracles};
use mfl_cli::config::RunConfig;
use mfl_core::norms::{morrey_norm, NormError};
use mfl_core::verify::ExactOracle;
use mfl_core::{BallFamily, GridFunction};

fn mfl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfl")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn empty_config_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.cfg"), "# no sections\n").unwrap();
    let o = mfl(&["verify", "--config", "empty.cfg", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 0);
    assert_eq!(json["metadata"]["command"], "verify");
}

#[test]
fn expected_refusal_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    // p = n/alpha violates the Lebesgue hypothesis
    fs::write(dir.path().join("r.cfg"), "G = 64\n[2.1i]\nalpha = 0.5\np = 4, 4\nexpect: refusal\n").unwrap();
    let o = mfl(&["verify", "--config", "r.cfg", "--out", "."], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let refusals = json["metadata"]["refusals"].as_array().unwrap();
    assert_eq!(refusals.len(), 1);
    assert!(refusals[0].as_str().unwrap().contains("p < n/alpha"));
}

#[test]
fn unexpected_refusal_fails() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.cfg"), "G = 64\n[2.1i]\nalpha = 0.5\np = 4, 4\n").unwrap();
    let o = mfl(&["verify", "--config", "r.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

/// Morrey–Hölder with the right side halved: wrong for every nonzero pair.
struct BrokenMorreyHolder;

impl ExactOracle for BrokenMorreyHolder {
    fn name(&self) -> &str {
        "broken-morrey-holder"
    }

    fn cases(&self) -> usize {
        1
    }

    fn evaluate(&self, f: &GridFunction, g: &GridFunction, family: &BallFamily, _case: usize) -> Result<(f64, f64), NormError> {
        let fg = f.product(g).map_err(|_| NormError::DomainMismatch)?;
        let lhs = morrey_norm(&fg, 1.5, 0.2, family)?;
        Ok((lhs, 0.5 * morrey_norm(f, 3.0, 0.2, family)? * morrey_norm(g, 3.0, 0.2, family)?))
    }
}

#[test]
fn tampered_oracle_is_a_hard_failure() {
    let cfg = RunConfig::parse("G = 64\ncorpus_size = 6\nexact_pairs = 4\n").unwrap();
    let honest = run_verify(&cfg, &standard_oracles()).unwrap();
    assert_eq!(honest.exit_code(), 0, "{:?}", honest.metadata.failures);
    let broken = run_verify(&cfg, &[&BrokenMorreyHolder]).unwrap();
    assert_ne!(broken.exit_code(), 0);
    assert!(broken.metadata.failures[0].contains("broken-morrey-holder"));
}

#[test]
fn unknown_key_is_reported_with_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "n = 1\n[2.1i]\nalpha = 0.5\np = 3,3\ngamma = 2\n").unwrap();
    let o = mfl(&["verify", "--config", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gamma") && err.contains('5'), "{err}");
}

#[test]
fn kappa_sweep_tabulates_q() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfl(
        &["sweep", "--param", "kappa", "--range", "0:0.24:0.04", "--theorem", "4.3i", "--alpha", "0.5", "--p", "3,3", "--G", "64"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let q_col = rdr.headers().unwrap().iter().position(|h| h == "q").unwrap();
    let qs: Vec<f64> = rdr.records().map(|r| r.unwrap()[q_col].parse().unwrap()).collect();
    assert_eq!(qs.len(), 7);
    assert!(qs.windows(2).all(|w| w[1] > w[0]), "{qs:?}");
    assert!((qs[0] - 6.0).abs() < 1e-12);
}

#[test]
fn hls_command_is_close_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["hls", "--n", "1", "--lambda", "0.5", "--L", "50", "--G", "4096"];
    let a = mfl(&args, dir.path());
    let b = mfl(&args, dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let gap_col = rdr.headers().unwrap().iter().position(|h| h == "gap").unwrap();
    let gap: f64 = rdr.records().last().unwrap().unwrap()[gap_col].parse().unwrap();
    assert!(gap.abs() < 0.02, "{gap}");
}

#[test]
fn constant_command_prints_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfl(
        &["constant", "--theorem", "2.1i", "--alpha", "0.5", "--p", "3,3", "--seed", "4", "--out", "c"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theorem_id,m,n,alpha,s,p_list,kappa,h,lhs,rhs,ratio,c_emp,seed");
    assert!(lines[1].starts_with("2.1i,2,1,0.5,inf,3;3,"));
    assert!(lines[1].ends_with(",4"));
    assert_eq!(fs::read_to_string(dir.path().join("c/report.csv")).unwrap(), text);
}

#[test]
fn list_theorems_covers_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&mfl(&["list-theorems"], dir.path()));
    for id in ["2.1i", "3.2", "4.3i", "5.2", "6.1", "6.6i"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
}
