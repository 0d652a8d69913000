use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pkcap::gen;
use pkcap::io::{parse_distribution, parse_protocol, Body, ReportDoc};
use pkcap::protocol::library;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn pkcap() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pkcap"));
    for (k, _) in std::env::vars() {
        if k.starts_with("PKCAP_") {
            cmd.env_remove(k);
        }
    }
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn compute_writes_a_parseable_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(pkcap()
        .args(["compute", "--restarts", "8", "--input"])
        .arg(data("worked_source.json"))
        .arg("--output")
        .arg(&out));
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = ReportDoc::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc.config.restarts, 8);
    let Body::Compute(c) = doc.body else { panic!("wrong kind") };
    assert_eq!(c.conditions.components, 2);
    assert!(c.conditions.det_correlated);
    assert_eq!(c.regions.outer.vertices.len(), 3);
}

#[test]
fn reports_are_byte_identical() {
    let go = || {
        let o = run(pkcap().args(["compute", "--seed", "11", "--input"]).arg(data("doubly_symmetric.json")));
        assert!(o.status.success(), "{}", stderr(&o));
        o.stdout
    };
    assert_eq!(go(), go());
}

#[test]
fn bad_sum_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.json");
    std::fs::write(
        &input,
        r#"{"variables":["X","Y","Z"],"cardinalities":[2,1,1],"pmf":[0.5,0.4]}"#,
    )
    .unwrap();
    let out = dir.path().join("report.json");
    let o = run(pkcap().arg("compute").arg("--input").arg(&input).arg("--output").arg(&out));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("SUM_OUT_OF_TOLERANCE"), "{}", stderr(&o));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn loose_sum_tolerance_accepts_the_same_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("loose.json");
    std::fs::write(
        &input,
        r#"{"variables":["X","Y","Z"],"cardinalities":[2,1,1],"pmf":[0.5,0.4999]}"#,
    )
    .unwrap();
    let o = run(pkcap().args(["check", "--tol-sum", "1e-3", "--input"]).arg(&input));
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn budget_overrun_exits_3() {
    let o = run(pkcap()
        .args(["simulate", "--budget", "100", "--input"])
        .arg(data("direct_source.json"))
        .arg("--protocol")
        .arg(data("protocol_direct_n2.json")));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("BUDGET_EXCEEDED"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = run(pkcap().args(["compute", "--bogus"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn env_sets_defaults_and_flags_win() {
    let seed_of = |cmd: &mut Command, extra: &[&str]| {
        let o = run(cmd
            .args(["compute", "--restarts", "2", "--input"])
            .arg(data("independent.json"))
            .args(extra));
        assert!(o.status.success(), "{}", stderr(&o));
        ReportDoc::parse(&String::from_utf8(o.stdout).unwrap()).unwrap().config.seed
    };
    assert_eq!(seed_of(pkcap().env("PKCAP_SEED", "5"), &[]), 5);
    assert_eq!(seed_of(pkcap().env("PKCAP_SEED", "5"), &["--seed", "6"]), 6);
}

#[test]
fn simulate_reports_verdicts() {
    let o = run(pkcap()
        .args(["simulate", "--input"])
        .arg(data("direct_source.json"))
        .arg("--protocol")
        .arg(data("protocol_broadcast.json")));
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = ReportDoc::parse(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let Body::Simulate(s) = doc.body else { panic!("wrong kind") };
    assert_eq!(s.evaluation.leak_xy, 1.0);
    assert!(!s.eps_pk_xy);
    assert!(s.eps_pk_xz);
    assert!(s.rate_point_in_outer);
}

#[test]
fn check_prints_conditions() {
    let o = run(pkcap().args(["check", "--input"]).arg(data("shared.json")));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("components: 3"), "{text}");
    assert!(text.contains("det-correlated: true"), "{text}");
}

#[test]
fn version_lists_schemas() {
    let o = run(pkcap().arg("version"));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("pkcap-report/1"));
    assert!(text.contains("pkcap-protocol/1"));
}

#[test]
fn bundled_files_match_the_generators() {
    let dist = |name: &str| parse_distribution(&std::fs::read_to_string(data(name)).unwrap(), 1e-9).unwrap();
    let proto = |name: &str| parse_protocol(&std::fs::read_to_string(data(name)).unwrap()).unwrap();
    assert_eq!(dist("worked_source.json"), gen::worked_source());
    assert_eq!(dist("doubly_symmetric.json"), gen::doubly_symmetric(0.1));
    assert_eq!(dist("shared.json"), gen::shared_source(3));
    assert_eq!(dist("direct_source.json"), gen::direct_extraction_source());
    assert_eq!(proto("protocol_direct_n2.json"), library::direct_extraction(2));
    assert_eq!(proto("protocol_broadcast.json"), library::public_broadcast());
    assert_eq!(proto("protocol_worked_helper.json"), library::worked_source_helper());
}
