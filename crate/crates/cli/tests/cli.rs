use std::path::Path;
use std::process::{Command, Output};

fn siee(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siee")).args(args).arg("--out").arg(out).output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn demo_scalar_reaches_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let run = siee(&["demo-scalar"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let (header, rows) = read_csv(&dir.path().join("demo_scalar.csv"));
    assert_eq!(header, ["iter", "method", "x", "ratio"]);
    for method in ["dinkelbach", "transform"] {
        let last = rows.iter().rev().find(|r| r[1] == method).unwrap();
        let x: f64 = last[2].parse().unwrap();
        assert!((x - 10.0).abs() < 1e-3, "{method}: {x}");
    }
    assert!(dir.path().join("demo_scalar_manifest.csv").exists());
}

#[test]
fn solve_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let run = siee(&["solve", "--seed", "7"], dir.path());
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    for name in
        ["solve_users.csv", "solve_trajectory.csv", "solve_residual.csv", "solve_summary.csv", "solve_manifest.csv"]
    {
        let x = std::fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let (header, rows) = read_csv(&a.path().join("solve_trajectory.csv"));
    assert_eq!(header, ["outer_iter", "objective", "admm_iterations"]);
    let values: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
}

#[test]
fn fairness_two_terms_is_one_hundred_percent() {
    let dir = tempfile::tempdir().unwrap();
    let run = siee(&["fairness-mc", "--terms", "2", "--range", "50", "--trials", "2000"], dir.path());
    assert!(run.status.success());
    let (header, rows) = read_csv(&dir.path().join("fairness_mc.csv"));
    assert_eq!(header, ["metric", "range_max", "n_terms", "percentage"]);
    let row = rows.iter().find(|r| r[0] == "max_min_ratio").unwrap();
    assert_eq!(row[3], "100");
}

#[test]
fn compare_and_diag_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(siee(&["compare-baseline", "--n-bs", "2", "--resolution", "32"], dir.path()).status.success());
    let (_, rows) = read_csv(&dir.path().join("compare_baseline.csv"));
    assert_eq!(rows.len(), 4);
    assert!(siee(&["admm-diag", "--n-bs", "3"], dir.path()).status.success());
    let (_, rows) = read_csv(&dir.path().join("admm_penalty.csv"));
    assert_eq!(rows.len(), 3);
    let (header, _) = read_csv(&dir.path().join("admm_residual.csv"));
    assert_eq!(header, ["n_users", "admm_iter", "primal_residual_w"]);
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "n_bs = 2\nseed = 3\np_max = 0.5 mW\ntrials = 100\n").unwrap();
    let run = siee(&["solve", "--config", cfg.to_str().unwrap(), "--seed", "5"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let (_, manifest) = read_csv(&dir.path().join("solve_manifest.csv"));
    let get = |k: &str| manifest.iter().find(|r| r[0] == k).unwrap()[1].clone();
    assert_eq!(get("seed"), "5");
    assert_eq!(get("n_bs"), "2");
    assert_eq!(get("p_max_w"), "0.0005");
    assert_eq!(get("command"), "solve");
    assert!(!get("version").is_empty());
}

#[test]
fn errors_are_json_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    for args in
        [&["solve", "--bogus"][..], &["solve", "--config", "/nonexistent/run.cfg"], &["fairness-mc", "--terms", "1"]]
    {
        let run = siee(args, dir.path());
        assert!(!run.status.success());
        let err: serde_json::Value = serde_json::from_slice(&run.stderr).unwrap();
        assert!(err["error"].is_string() && err["message"].is_string(), "{err}");
    }
}
