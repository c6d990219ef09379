//! End-to-end runs of the `threeclass` binary.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_threeclass"));
    cmd.args(args).env_remove("THREECLASS_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Three classes of 15 with increasing means, written by a simple
/// deterministic recurrence so the file needs no RNG.
fn write_marker_csv(dir: &Path) -> String {
    let mut text = String::from("id,grp,marker\n");
    let mut state: u64 = 7;
    for i in 0..45 {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let u = (state >> 11) as f64 / (1u64 << 53) as f64;
        let (label, mean) = [("lo", 0.0), ("mid", 1.0), ("hi", 2.0)][i % 3];
        text.push_str(&format!("{i},{label},{:.4}\n", mean + 2.0 * u));
    }
    text.push_str("99,mid,NA\n");
    let path = dir.join("marker.csv");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn marker_args<'a>(sub: &'a str, path: &'a str) -> Vec<&'a str> {
    vec![
        sub,
        "--input",
        path,
        "--value",
        "marker",
        "--class",
        "grp",
        "--order",
        "lo,mid,hi",
    ]
}

#[test]
fn estimate_json_is_parseable_and_seeded() {
    let dir = TempDir::new().unwrap();
    let path = write_marker_csv(dir.path());
    let mut args = marker_args("estimate", &path);
    args.extend(["--B", "40", "--json"]);
    let a = run(&args, &[("THREECLASS_SEED", "11")]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(&args, &[("THREECLASS_SEED", "11")]);
    assert_eq!(stdout(&a), stdout(&b));
    let json: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(json["sizes"], serde_json::json!([15, 15, 15]));
    assert_eq!(json["dropped_rows"], 1);
    let estimates = json["estimates"].as_array().unwrap();
    assert!(!estimates.is_empty());
    for e in estimates {
        let v = e["value"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v));
        assert!(e["ci"]["lo"].as_f64().unwrap() <= e["ci"]["hi"].as_f64().unwrap());
    }
}

#[test]
fn normality_and_density_grid() {
    let dir = TempDir::new().unwrap();
    let path = write_marker_csv(dir.path());
    let grid = dir.path().join("grid.csv");
    let mut args = marker_args("normality", &path);
    args.extend([
        "--json",
        "--density-grid",
        grid.to_str().unwrap(),
        "--points",
        "25",
    ]);
    let o = run(&args, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for c in json["classes"].as_array().unwrap() {
        let p = c["p_value"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert!(c["w"].as_f64().unwrap() <= 1.0);
    }
    let lines = std::fs::read_to_string(grid).unwrap().lines().count();
    assert_eq!(lines, 1 + 3 * 25);
}

#[test]
fn test_subcommand_runs() {
    let dir = TempDir::new().unwrap();
    let path = write_marker_csv(dir.path());
    let mut args = marker_args("test", &path);
    args.extend(["--B", "30", "--seed", "2"]);
    let o = run(&args, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!stdout(&o).is_empty());
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["estimate"], &[]).status.code(), Some(1));
    assert_eq!(
        run(&["reproduce-table", "power/no-such-table"], &[])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["simulate", "--scenario", "no-such-scenario"], &[])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let path = write_marker_csv(dir.path());
    let mut args = marker_args("estimate", &path);
    args[4] = "missing_column";
    assert_eq!(run(&args, &[]).status.code(), Some(2));
    let bad = dir.path().join("bad.csv");
    std::fs::write(
        &bad,
        "grp,marker\nlo,1\nlo,2\nmid,3\nmid,4\nhi,5\nother,6\n",
    )
    .unwrap();
    let o = run(&marker_args("estimate", bad.to_str().unwrap()), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("other"));
}

#[test]
fn list_tables() {
    let o = run(&["reproduce-table", "--list"], &[]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.trim() == "power/normal-location"));
    assert!(out.lines().any(|l| l.trim() == "bias/tt1"));
}

#[test]
fn simulate_scenario_file() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("scenarios.txt");
    std::fs::write(
        &file,
        "# small check\nid = tiny\nf1 = normal(0,1)\nf2 = normal(1,1)\nf3 = normal(2,1)\nsizes = 10,10,10\nreps = 6\nB = 20\n",
    )
    .unwrap();
    let args = [
        "simulate",
        "--scenario",
        file.to_str().unwrap(),
        "--out",
        "json",
    ];
    let a = run(&args, &[("THREECLASS_SEED", "5")]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert_eq!(r["scenario"], "tiny");
        let p = r["value"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
    let b = run(&args, &[("THREECLASS_SEED", "5")]);
    assert_eq!(stdout(&a), stdout(&b));
    let mut serial = args.to_vec();
    serial.push("--serial");
    assert_eq!(
        stdout(&run(&serial, &[("THREECLASS_SEED", "5")])),
        stdout(&a)
    );
}
