use std::process::{Command, Output};

use qtwist::cli::{DecomposeRow, ReduceRow, StatsReport};
use qtwist::heuristics::HeuristicBoundReport;
use qtwist::lattice::RootSet;
use qtwist::psi::RankRow;
use qtwist::verify::VerifyReport;
use qtwist::SumReport;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn qtwist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtwist"))
        .args(args)
        .env_remove("QTWIST_THREADS")
        .output()
        .expect("binary runs")
}

fn ok_json<T: DeserializeOwned + Serialize + PartialEq + std::fmt::Debug>(args: &[&str]) -> T {
    let out = qtwist(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let value: T = serde_json::from_slice(&out.stdout).expect("report parses");
    // re-serialising and re-parsing gives back the same value
    let again: T = serde_json::from_str(&serde_json::to_string(&value).unwrap()).unwrap();
    assert_eq!(again, value);
    value
}

#[test]
fn sum_reports_round_trip() {
    let s: SumReport = ok_json(&["sum", "--curve", "0,-1,0", "--series", "S", "--box", "2"]);
    assert!((s.value - 4.0 / 3.0).abs() < 1e-12);
    let r: SumReport =
        ok_json(&["sum", "--curve", "0,-1,0", "--series", "R", "--box", "30", "--window", "broad", "--breakdown"]);
    assert_eq!(r.window.as_deref(), Some("-3..-2,2..3"));
    assert!(r.breakdown.is_some());
    let q: SumReport = ok_json(&["sum", "--curve", "0,0,-2", "--series", "Q", "--bound", "1"]);
    assert_eq!(q.value, 1.0);
}

#[test]
fn other_subcommands_round_trip() {
    let roots: RootSet = ok_json(&["omega", "--curve", "0,-1,0", "--d", "6"]);
    assert_eq!(roots.residues.len(), 9);
    let rows: Vec<RankRow> = ok_json(&["rank", "--curve", "0,-1,0", "--box", "40", "--top", "3"]);
    assert_eq!(rows.len(), 3);
    let rows: Vec<ReduceRow> = ok_json(&["reduce", "--curve", "0,-1,0", "--bound", "12"]);
    assert!(rows.iter().all(|r| r.d * r.d_prime <= 12));
    let rows: Vec<DecomposeRow> = ok_json(&["decompose", "--curve", "0,-1,0", "--u", "-4", "--v", "5"]);
    assert!(rows.iter().all(|r| r.u == -4 && r.v == 5));
    let stats: StatsReport = ok_json(&["stats", "--curve", "0,0,-2", "--b", "10,20", "--c", "0.5,1"]);
    assert_eq!(stats.rows.len(), 4);
    assert_eq!(stats.fit_bound, Some(40));
    let bound: HeuristicBoundReport =
        ok_json(&["stats", "--kind", "bound", "--c1", "1", "--t-max", "1000"]);
    assert_eq!(bound.checkpoints[0].four_nu_sum, 61);
    let report: VerifyReport = ok_json(&["verify", "--curve", "0,0,-2", "--quick"]);
    assert!(report.passed);
}

#[test]
fn exit_codes() {
    let out = qtwist(&["sum", "--curve", "0,0,0", "--box", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("repeated root"));

    let out = qtwist(&["verify", "--curve", "0,-3,2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qtwist(&["omega", "--d", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid d"));

    let out = qtwist(&["decompose", "--u", "2", "--v", "1", "--t", "3"]);
    assert_eq!(out.status.code(), Some(1));

    let out = qtwist(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(qtwist(&["--help"]).status.code(), Some(0));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["sum", "--curve", "0,0,-2", "--series", "R", "--box", "60", "--k", "1.5"];
    let one = qtwist(&[&["--threads", "1"], &args[..]].concat());
    let many = qtwist(&[&["--threads", "3"], &args[..]].concat());
    assert_eq!(one.stdout, many.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_qtwist"))
        .args(args)
        .env("QTWIST_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(env.stdout, one.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_qtwist"))
        .args(args)
        .env("QTWIST_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn csv_and_output_file() {
    let dir = std::env::temp_dir().join(format!("qtwist-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("omega.csv");
    let out = qtwist(&["omega", "--d", "2", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "d,residue\n2,0\n2,1\n2,3\n");
    std::fs::remove_dir_all(&dir).unwrap();

    let out = qtwist(&["reduce", "--curve", "0,0,-2", "--alpha", "3", "--d", "5", "--d-prime", "1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("alpha,d,d_prime,omega,omega_prime,norm_sq,in_psi,term_value"));
}
