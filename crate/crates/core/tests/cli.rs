use std::path::Path;
use std::process::{Command, Output};

use pdhg::bench::{run_suite, RecordStatus, SuiteOptions, SuiteSummary};
use pdhg::instance_gen::gen_random_lp;
use pdhg::lp_model::write_mps;
use pdhg::SolverParams;

fn pdhg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdhg")).args(args).env("RUST_LOG", "error").output().unwrap()
}

fn write_random(dir: &Path, name: &str, m: usize, n: usize, seed: u64) {
    std::fs::write(dir.join(name), write_mps(&gen_random_lp(m, n, 0.5, seed), "R")).unwrap();
}

#[test]
fn solve_writes_solution_json() {
    let dir = tempfile::tempdir().unwrap();
    write_random(dir.path(), "a.mps", 6, 5, 1);
    let out = dir.path().join("sol.json");
    let o = pdhg(&["solve", dir.path().join("a.mps").to_str().unwrap(), "--eps", "1e-6", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["status"], "Optimal");
    for key in ["primal_objective", "dual_objective", "iterations", "restarts"] {
        assert!(v[key].is_number(), "{key}");
    }
    assert_eq!(v["x"].as_array().unwrap().len(), 5);
    assert_eq!(v["y"].as_array().unwrap().len(), 6);
    assert_eq!(v["lambda"].as_array().unwrap().len(), 5);
    for key in ["primal_res", "dual_res", "gap_abs", "rel_primal", "rel_dual", "rel_gap"] {
        assert!(v["residuals"][key].is_number(), "{key}");
    }
    let rel = v["residuals"]["rel_gap"].as_f64().unwrap();
    assert!(rel <= 1e-6);
}

#[test]
fn iteration_limit_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write_random(dir.path(), "a.mps", 20, 20, 3);
    let o = pdhg(&["solve", dir.path().join("a.mps").to_str().unwrap(), "--eps", "1e-12", "--iter-limit", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mps");
    std::fs::write(&bad, "NAME X\nROWS\n N obj\nCOLUMNS\nENDATA\n").unwrap();
    assert_eq!(pdhg(&["solve", bad.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(pdhg(&["solve", "/nonexistent.mps"]).status.code(), Some(3));
    write_random(dir.path(), "a.mps", 3, 3, 0);
    let a = dir.path().join("a.mps");
    assert_eq!(pdhg(&["solve", a.to_str().unwrap(), "--eps=-1"]).status.code(), Some(3));
    assert_eq!(pdhg(&["solve", a.to_str().unwrap(), "--bogus"]).status.code(), Some(3));
    assert_eq!(pdhg(&["--help"]).status.code(), Some(0));
}

#[test]
fn gen_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let pr = dir.path().join("pr.mps");
    let o = pdhg(&["gen", "pagerank", "--nodes", "50", "--seed", "2", "--out", pr.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rnd = dir.path().join("r.mps");
    let o = pdhg(&["gen", "random", "--rows", "8", "--cols", "6", "--seed", "4", "--out", rnd.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for f in [&pr, &rnd] {
        let o = pdhg(&["solve", f.to_str().unwrap(), "--eps", "1e-6"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn bench_command_reports() {
    let dir = tempfile::tempdir().unwrap();
    for s in 0..3 {
        write_random(dir.path(), &format!("r{s}.mps"), 5, 4, s);
    }
    let out = tempfile::tempdir().unwrap();
    let json = out.path().join("report.json");
    let csv = out.path().join("report.csv");
    let o = pdhg(&[
        "bench",
        dir.path().to_str().unwrap(),
        "--eps",
        "1e-6",
        "--report",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = SuiteSummary::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(s.records.len(), 3);
    assert_eq!(s.solved_count, 3);
    assert!(s.sgm10.is_some());
    let lines = std::fs::read_to_string(&csv).unwrap().lines().count();
    assert_eq!(lines, 4);
}

#[test]
fn suite_records_errors_and_limits() {
    let dir = tempfile::tempdir().unwrap();
    write_random(dir.path(), "a.mps", 4, 4, 1);
    write_random(dir.path(), "b.mps", 4, 4, 2);
    std::fs::write(dir.path().join("broken.mps"), "garbage\n").unwrap();
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let params = SolverParams { eps: 1e-6, ..Default::default() };
    let s = run_suite(dir.path(), &params, &SuiteOptions::default()).unwrap();
    let names: Vec<&str> = s.records.iter().map(|r| r.instance.as_str()).collect();
    assert_eq!(names, ["a.mps", "b.mps", "broken.mps"]);
    assert_eq!(s.records[2].status, RecordStatus::Error);
    assert!(s.records[2].message.is_some());
    assert_eq!(s.solved_count, 2);

    // an unsolved instance counts as the time limit
    let tight = SolverParams { eps: 1e-12, iter_limit: Some(5), time_limit: 50.0, ..Default::default() };
    let s = run_suite(dir.path(), &tight, &SuiteOptions::default()).unwrap();
    assert_eq!(s.solved_count, 0);
    assert!((s.sgm10.unwrap() - 50.0).abs() < 1e-9);
}

#[test]
fn summary_json_roundtrip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    write_random(dir.path(), "a.mps", 5, 5, 7);
    let s = run_suite(dir.path(), &SolverParams { eps: 1e-6, ..Default::default() }, &SuiteOptions::default()).unwrap();
    let text = s.to_json().unwrap();
    let back = SuiteSummary::from_json(&text).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.to_json().unwrap(), text);
}

#[test]
fn overflowing_model_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("ovf.mps");
    let text = "NAME O\nROWS\n N obj\n G r1\nCOLUMNS\n x obj 1e300 r1 1e300\n y obj -1e300 r1 1e-300\nRHS\n rhs r1 1e300\nENDATA\n";
    std::fs::write(&f, text).unwrap();
    assert_eq!(pdhg(&["solve", f.to_str().unwrap(), "--no-scaling"]).status.code(), Some(4));
}
