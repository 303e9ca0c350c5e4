use std::path::Path;
use std::process::{Command, Output};

fn ftbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftbench")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ftbench(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn records(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn pair_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    ok(&["generate", "weak-strong-pair", "--out", p(&inst)]);
    let file = inst.join("weak-strong-pair.json");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(json["n"], 16);
    assert!((json["metadata"]["reference_energy"].as_f64().unwrap() + 40.48).abs() < 1e-9);

    let brute = dir.path().join("brute.jsonl");
    ok(&["solve", "brute", p(&file), "--out", p(&brute)]);
    let r = records(&brute);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0]["success"], true);
    assert!((r[0]["energy"].as_f64().unwrap() + 40.48).abs() < 1e-9);

    let sa = dir.path().join("sa.jsonl");
    ok(&["solve", "sa", p(&file), "--runs", "20", "--sweeps", "200", "--beta-final", "5", "--out", p(&sa), "--seed", "3"]);
    let r = records(&sa);
    assert_eq!(r.len(), 20);
    assert!(r.iter().all(|x| x["success"].is_boolean() && x["error"].is_null()));

    let qmc = dir.path().join("qmc.jsonl");
    ok(&["solve", "qmc", p(&file), "--runs", "4", "--sweeps", "50", "--trotter", "8", "--beta", "4", "--out", p(&qmc)]);
    assert_eq!(records(&qmc).len(), 4);

    let summary = dir.path().join("summary.csv");
    let csv = ok(&["bench", p(&sa), p(&qmc), "--quantiles", "0.5", "--boot", "50", "--out", p(&summary)]);
    assert!(csv.starts_with("N,quantile,tts_seconds,ci_lo,ci_hi,algorithm"));
    assert_eq!(std::fs::read_to_string(&summary).unwrap(), csv);
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["generate", "random-ising", "--graph", "complete", "--n", "10", "--count", "2", "--out", p(dir.path()), "--seed", "5"]);
    let files: Vec<String> = (0..2).map(|i| p(&dir.path().join(format!("random-10-{i:03}.json"))).to_owned()).collect();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["solve", "sa", "--runs", "8", "--sweeps", "50", "--seed", "9", "--workers", workers, "--out", p(&out)];
        args.extend(files.iter().map(String::as_str));
        ok(&args);
        std::fs::read_to_string(out).unwrap()
    };
    assert_eq!(run("a.jsonl", "1"), run("b.jsonl", "2"));
}

#[test]
fn network_batch() {
    let dir = tempfile::tempdir().unwrap();
    let listed = ok(&["generate", "weak-strong-network", "--rows", "2", "--cols", "2", "--count", "3", "--out", p(dir.path())]);
    assert_eq!(listed.lines().count(), 3);
    for line in listed.lines() {
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(line).unwrap()).unwrap();
        assert!(json["metadata"]["reference_energy"].is_number());
        assert_eq!(json["metadata"]["reference_optimum"].as_array().unwrap().len(), json["n"].as_u64().unwrap() as usize);
    }
}

#[test]
fn npp_instances() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["generate", "npp", "--n", "20", "--out", p(dir.path())]);
    let file = dir.path().join("npp-N20-b20-000.json");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(json["format"], "npp-1");
    assert_eq!(json["N"], 20);

    let brute = dir.path().join("brute.jsonl");
    ok(&["solve", "brute", p(&file), "--out", p(&brute)]);
    assert_eq!(records(&brute)[0]["success"], true);

    // unsupported pairings become error records, not failures
    let qmc = dir.path().join("qmc.jsonl");
    ok(&["solve", "qmc", p(&file), "--runs", "2", "--out", p(&qmc)]);
    let r = records(&qmc);
    assert!(r.iter().all(|x| x["error"].as_str().unwrap().contains("does not support")));

    let sa = dir.path().join("sa.jsonl");
    ok(&["solve", "sa", p(&file), "--runs", "3", "--sweeps", "20", "--beta-init", "0", "--beta-final", "50", "--out", p(&sa)]);
    assert!(records(&sa).iter().all(|x| x["target_energy"].is_number()));
}

#[test]
fn exact_spectrum_csv() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["generate", "random-ising", "--graph", "complete", "--n", "6", "--out", p(dir.path())]);
    let file = dir.path().join("random-6-000.json");
    let out = dir.path().join("spectra");
    ok(&["solve", "exact", p(&file), "--points", "11", "--levels", "3", "--out", p(&out)]);
    let csv = std::fs::read_to_string(out.join("random-6-000-spectrum.csv")).unwrap();
    assert!(csv.starts_with("s,E0,E1,E2\n"));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn absent_quantiles_are_marked() {
    let dir = tempfile::tempdir().unwrap();
    let rec = |id: &str, success: bool| {
        format!(
            r#"{{"instance_id":"{id}","algorithm":"sa","params_digest":"x","seed":1,"n":8,"n_sweeps":10,"success":{success},"run_seconds":1e-6,"update_seconds":2e-10}}"#
        )
    };
    let lines = [rec("a", true), rec("b", false), rec("c", false)].join("\n");
    let path = dir.path().join("r.jsonl");
    std::fs::write(&path, lines).unwrap();
    let csv = ok(&["bench", p(&path), "--quantiles", "0.3,0.9", "--boot", "20", "--out", p(&dir.path().join("s.csv"))]);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(!rows[0].split(',').nth(2).unwrap().contains("absent"), "{csv}");
    assert!(rows[1].contains("absent"), "{csv}");
}

#[test]
fn npp_study_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("study.csv");
    let csv = ok(&["npp-study", "--sizes", "8,10", "--ensemble", "10", "--heuristics", "greedy,kk,brute", "--out", p(&out)]);
    assert!(csv.starts_with("N,heuristic,median_residue"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn exit_codes() {
    assert_eq!(ftbench(&["solve", "sa", "/nonexistent/x.json", "--out", "/tmp/x"]).status.code(), Some(1));
    assert_eq!(ftbench(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ftbench(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{not json}\n").unwrap();
    assert_eq!(ftbench(&["bench", p(&bad), "--out", p(&dir.path().join("s.csv"))]).status.code(), Some(1));
    // exhaustive search beyond its guard is refused as bad input
    let study = ftbench(&["npp-study", "--sizes", "31", "--ensemble", "1", "--heuristics", "brute", "--out", p(&dir.path().join("t.csv"))]);
    assert_eq!(study.status.code(), Some(1));
}
