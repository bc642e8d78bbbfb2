//! End-to-end checks of the command-line surface: artifact formats,
//! determinism, exit codes, and agreement with the in-process library path.

use std::path::Path;
use std::process::{Command, Output};

use netprior::eval::correct_curve;
use netprior::pipeline::{Prediction, PredictionSet};
use netprior::{load_edge_list, load_mask};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netprior"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "command {:?} failed: {}\n{}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path_str(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn generate_roundtrip_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let truth = path_str(dir.path(), "truth.tsv");
    run_ok(&["generate", "--p", "40", "--m", "2", "--seed", "3", "--out", &truth]);
    let contents = std::fs::read_to_string(&truth).unwrap();
    assert!(contents.starts_with("# netprior generate"));
    assert!(contents.contains("# seed=3"));
    let net = load_edge_list(&truth).unwrap();
    assert_eq!(net.p(), 40);
    assert_eq!(net.num_edges(), 2 * 38 + 1);
}

#[test]
fn sample_report_matches_mask() {
    let dir = tempfile::tempdir().unwrap();
    let truth = path_str(dir.path(), "truth.tsv");
    let mask_path = path_str(dir.path(), "mask.tsv");
    run_ok(&["generate", "--p", "60", "--m", "3", "--seed", "1", "--out", &truth]);
    let out = run_ok(&[
        "sample", "--input", &truth, "--mode", "over", "--rate-hub", "0.95", "--rate-nonhub",
        "0.90", "--seed", "4", "--out", &mask_path,
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);

    let report = std::fs::read_to_string(format!("{mask_path}.report")).unwrap();
    let field = |name: &str| -> usize {
        report
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{name}=")))
            .unwrap_or_else(|| panic!("missing {name} in report:\n{report}"))
            .parse()
            .unwrap()
    };

    let truth_net = load_edge_list(&truth).unwrap();
    let mask = load_mask(&mask_path).unwrap();
    assert!(mask.is_subset_of(&truth_net));
    assert_eq!(field("kept"), mask.num_observed());
    assert_eq!(field("total"), truth_net.num_edges());
    assert_eq!(field("hub_kept") + field("nonhub_kept"), mask.num_observed());

    let hubs = truth_net.hub_set(0.2).unwrap();
    let hub_kept = mask
        .observed()
        .filter(|&(u, v)| hubs.contains(&u) || hubs.contains(&v))
        .count();
    assert_eq!(field("hub_kept"), hub_kept);
    assert!(stdout.contains("hub_kept="));
}

fn quick_infer_args<'a>(mask: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        "infer", "--mask", mask, "--k", "30", "--method", "tri_degree", "--rank", "10",
        "--outer-iters", "8", "--seed", "5", "--out", out,
    ]
}

#[test]
fn infer_deterministic_and_eval_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let truth = path_str(dir.path(), "truth.tsv");
    let mask_path = path_str(dir.path(), "mask.tsv");
    let preds_a = path_str(dir.path(), "a.tsv");
    let preds_b = path_str(dir.path(), "b.tsv");
    run_ok(&["generate", "--p", "40", "--m", "2", "--seed", "2", "--out", &truth]);
    run_ok(&[
        "sample", "--input", &truth, "--mode", "uniform", "--rate-hub", "0.9", "--rate-nonhub",
        "0.9", "--seed", "3", "--out", &mask_path,
    ]);

    // byte-identical artifacts for an identical run configuration
    let status_a = bin().args(quick_infer_args(&mask_path, &preds_a)).output().unwrap();
    let status_b = bin().args(quick_infer_args(&mask_path, &preds_b)).output().unwrap();
    assert_eq!(status_a.status.code(), status_b.status.code());
    let bytes_a = std::fs::read(&preds_a).unwrap();
    let bytes_b = std::fs::read(&preds_b).unwrap();
    let norm = |b: &[u8], from: &str, to: &str| {
        String::from_utf8(b.to_vec()).unwrap().replace(from, to)
    };
    assert_eq!(
        norm(&bytes_a, &preds_a, "OUT"),
        norm(&bytes_b, &preds_b, "OUT"),
        "identical configs must produce identical artifacts"
    );

    // eval on the artifact reproduces the in-process curve
    let curve_path = path_str(dir.path(), "curve.csv");
    run_ok(&[
        "eval", "--input", &preds_a, "--truth", &truth, "--mask", &mask_path, "--k", "5,15,30",
        "--out", &curve_path,
    ]);
    let truth_net = load_edge_list(&truth).unwrap();
    let mask = load_mask(&mask_path).unwrap();
    let mut entries = Vec::new();
    for line in std::fs::read_to_string(&preds_a).unwrap().lines() {
        if line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        entries.push(Prediction {
            u: f[0].parse().unwrap(),
            v: f[1].parse().unwrap(),
            score: f[2].parse().unwrap(),
        });
    }
    let preds = PredictionSet::from_entries(entries).unwrap();
    let curve = correct_curve(&preds, &truth_net, &mask, &[5, 15, 30]).unwrap();
    let csv = std::fs::read_to_string(&curve_path).unwrap();
    let data_lines: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("k,"))
        .collect();
    for (line, (k, correct)) in data_lines.iter().zip(curve.ks.iter().zip(&curve.correct)) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0].parse::<usize>().unwrap(), *k);
        assert_eq!(f[2].parse::<usize>().unwrap(), *correct);
    }
}

#[test]
fn infer_rejects_oversized_k() {
    let dir = tempfile::tempdir().unwrap();
    let truth = path_str(dir.path(), "truth.tsv");
    let mask_path = path_str(dir.path(), "mask.tsv");
    run_ok(&["generate", "--p", "10", "--m", "1", "--seed", "1", "--out", &truth]);
    run_ok(&[
        "sample", "--input", &truth, "--mode", "uniform", "--rate-hub", "1.0", "--rate-nonhub",
        "1.0", "--seed", "1", "--out", &mask_path,
    ]);
    let out = bin()
        .args([
            "infer", "--mask", &mask_path, "--k", "9999", "--out",
            &path_str(dir.path(), "p.tsv"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unobserved pairs"), "stderr: {stderr}");
}

#[test]
fn usage_error_exits_one() {
    let out = bin().args(["infer", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["--help"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn missing_file_exits_two() {
    let out = bin()
        .args(["infer", "--mask", "/nonexistent/mask.tsv", "--k", "5", "--out", "/tmp/x.tsv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cv_writes_cells_and_best() {
    let dir = tempfile::tempdir().unwrap();
    let truth = path_str(dir.path(), "truth.tsv");
    let mask_path = path_str(dir.path(), "mask.tsv");
    let grid_path = path_str(dir.path(), "grid.csv");
    let cells_path = path_str(dir.path(), "cells.csv");
    run_ok(&["generate", "--p", "30", "--m", "2", "--seed", "6", "--out", &truth]);
    run_ok(&[
        "sample", "--input", &truth, "--mode", "uniform", "--rate-hub", "0.9", "--rate-nonhub",
        "0.9", "--seed", "2", "--out", &mask_path,
    ]);
    std::fs::write(&grid_path, "rho,0.3\nlambda,0.1,0.5\nc,1.5\nalpha,1\n").unwrap();
    let out = bin()
        .env("DEGREEPRIOR_THREADS", "2")
        .args([
            "cv", "--mask", &mask_path, "--k", "57", "--grid", &grid_path, "--holdout", "0.2",
            "--n-seeds", "2", "--rank", "8", "--outer-iters", "6", "--out", &cells_path,
        ])
        .output()
        .unwrap();
    assert!(
        matches!(out.status.code(), Some(0) | Some(3)),
        "unexpected exit: {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    let cells = std::fs::read_to_string(&cells_path).unwrap();
    let data: Vec<&str> = cells
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("rho,"))
        .collect();
    // 2 grid cells x 2 seeds
    assert_eq!(data.len(), 4, "cells file:\n{cells}");
    let best = std::fs::read_to_string(format!("{cells_path}.best")).unwrap();
    for key in ["rho=", "lambda=", "c=", "alpha="] {
        assert!(best.contains(key), "best file:\n{best}");
    }
}

#[test]
fn releases_prints_ratio_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let old_path = path_str(dir.path(), "old.tsv");
    let new_path = path_str(dir.path(), "new.tsv");
    run_ok(&["generate", "--p", "30", "--m", "2", "--seed", "9", "--out", &old_path]);
    // newer release: same nodes plus extra edges
    let old = load_edge_list(&old_path).unwrap();
    let mut lines = vec!["#p=30".to_string()];
    for (u, v) in old.edges() {
        lines.push(format!("{u}\t{v}"));
    }
    for (u, v) in [(0usize, 9usize), (3, 17), (5, 22), (11, 28)] {
        if !old.contains(u, v) {
            lines.push(format!("{u}\t{v}"));
        }
    }
    std::fs::write(&new_path, lines.join("\n")).unwrap();
    let out = bin()
        .args([
            "releases", "--old", &old_path, "--new", &new_path, "--method", "tri", "--rank", "8",
            "--outer-iters", "6", "--k", "20",
        ])
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let line = stdout.lines().find(|l| l.starts_with("tri\t")).expect("ratio line");
    let ratio: f64 = line.split('\t').nth(1).unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&ratio));
}

#[test]
fn bound_prints_diagnostics() {
    let out = run_ok(&[
        "bound", "--t", "3", "--r", "12", "--s", "80", "--d-star-max", "9", "--d-max", "1",
        "--alpha", "2", "--rho", "0.5", "--q", "0.5", "--delta", "0.05",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("gamma=8"), "stdout: {stdout}");
    assert!(stdout.contains("b_term=12"), "stdout: {stdout}");
}
