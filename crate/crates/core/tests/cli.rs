use std::path::Path;
use std::process::{Command, Output};

use mrct::cli::ingest::ingest_dense;
use mrct::mrct::MrctEngine;
use mrct::MrctConfig;

fn mrct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrct")).args(args).output().expect("binary runs")
}

fn simulate(dir: &Path, model: &str, n: &str, p: &str, seed: &str) -> String {
    let path = dir.join(format!("sim_{model}_{seed}.csv"));
    let out = mrct(&[
        "simulate", "--model", model, "--n", n, "--p", p, "--c", "0.2", "--seed", seed, "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn simulate_writes_grid_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(dir.path(), "2", "20", "15", "4");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("#grid,0.0000000000000000e0,"));
    assert!(header.ends_with(",label"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",1")).count(), 4);

    let again = mrct(&["simulate", "--model", "2", "--n", "20", "--p", "15", "--seed", "4"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn fit_outputs_are_deterministic_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "1", "60", "30", "7");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = mrct(&["fit", "--input", &data, "--alpha", "0.05", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["report.json", "distances.csv", "scree.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(!a.join("alpha_objective.csv").exists());

    // Same fit in-process; the CSV must reproduce it bit for bit.
    let sample = ingest_dense(std::fs::File::open(&data).unwrap(), false).unwrap();
    let fit = MrctEngine::new(&sample, &MrctConfig::new(60), 0.05).unwrap().fit().unwrap();
    let rows = read_csv(&a.join("distances.csv"));
    assert_eq!(rows.len(), 60);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], i.to_string());
        let d: f64 = row[1].parse().unwrap();
        assert_eq!(d.to_bits(), fit.distances[i].to_bits());
        assert_eq!(row[2] == "1", fit.flags[i]);
    }

    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["h"], 45);
    assert_eq!(report["config"]["seed"], 0);
    assert_eq!(report["h"], 45);
    let subset: Vec<usize> = report["subset"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() as usize)
        .collect();
    assert_eq!(subset, fit.subset.indices());
    let cutoff = report["cutoff"].as_f64().unwrap();
    for c in report["curves"].as_array().unwrap() {
        let d = c["distance"].as_f64().unwrap();
        assert_eq!(c["flagged"].as_bool().unwrap(), d > cutoff);
    }
    let scree = read_csv(&a.join("scree.csv"));
    assert_eq!(scree.len(), fit.eigvals.len());
}

#[test]
fn auto_alpha_writes_objective_curve() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "1", "50", "20", "1");
    let out = dir.path().join("sel");
    let o = mrct(&["select-alpha", "--input", &data, "--out", out.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0) | Some(4)));
    let rows = read_csv(&out.join("alpha_objective.csv"));
    assert_eq!(rows.len(), 30);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "select-alpha");
    assert_eq!(report["config"]["alpha"], "auto");
    let chosen = report["alpha_selection"]["chosen_alpha"].as_f64().unwrap();
    assert!(rows.iter().any(|r| (r[0].parse::<f64>().unwrap() - chosen).abs() <= 1e-12 * chosen));

    let o = mrct(&["select-alpha", "--input", &data, "--alpha", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_h_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "2", "40", "20", "2");
    let out = dir.path().join("scan");
    let o = mrct(&[
        "scan-h", "--input", &data, "--alpha", "0.01", "--h-min", "25", "--h-max", "40", "--h-step",
        "5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.join("h_scan.csv"));
    let hs: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(hs, ["25", "30", "35", "40"]);
    assert!(rows[0][2].is_empty() && !rows[1][2].is_empty());

    let bad = mrct(&["scan-h", "--input", &data, "--alpha", "0.01", "--h-min", "10"]);
    assert_eq!(bad.status.code(), Some(2));

    let ev = dir.path().join("eval");
    let o = mrct(&[
        "evaluate", "--input", &data, "--alpha", "0.01", "--model", "2", "--out",
        ev.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0) | Some(4)));
    let e: serde_json::Value =
        serde_json::from_slice(&std::fs::read(ev.join("evaluation.json")).unwrap()).unwrap();
    let tpr = e["tpr"].as_f64().unwrap();
    let fnr = e["fnr"].as_f64().unwrap();
    assert!((tpr + fnr - 1.0).abs() < 1e-15);
    assert!(e["ise_clean"].as_f64().unwrap() >= 0.0);
}

#[test]
fn sparse_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("curve_id,t,value\n");
    for i in 0..24 {
        let a = (i as f64 * 0.37).sin();
        for j in 0..12 {
            let t = (j as f64 + 0.3 * ((i + j) % 3) as f64) / 12.0;
            let shift = if i < 3 { 4.0 * t } else { 0.0 };
            text += &format!("s{i},{t},{}\n", a * (6.0 * t).sin() + shift + 0.01 * ((i * j) % 5) as f64);
        }
    }
    let path = dir.path().join("sparse.csv");
    std::fs::write(&path, text).unwrap();
    let out = dir.path().join("out");
    let o = mrct(&[
        "fit", "--format", "sparse", "--input", path.to_str().unwrap(), "--basis-m", "6", "--alpha",
        "0.01", "--out", out.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0) | Some(4)), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["input"]["basis_m"], 6);
    assert_eq!(report["curves"][0]["id"], "s0");

    std::fs::write(&path, "curve_id,t,value\na,0.1,1\nb,0.1,1\nb,0.5,2\nb,0.9,3\nb,0.7,1\n").unwrap();
    let o = mrct(&["fit", "--format", "sparse", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("curve a"));
}

#[test]
fn parse_errors_exit_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "1,2,3\n4,5,6\n7,8\n").unwrap();
    let o = mrct(&["fit", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = mrct(&["fit", "--input", path.to_str().unwrap(), "--selection", "median"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mrct(&["fit", "--h", "3", "--h-frac", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}
