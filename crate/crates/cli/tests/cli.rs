use std::fs;
use std::process::Command;

use serde_json::Value;

fn synbreak(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_synbreak")).args(args).output().expect("binary runs");
    (out.status.success(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn catalog_verdicts() {
    let (ok, out, _) = synbreak(&["catalog", "2", "4"]);
    assert!(ok);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["counts_by_verdict"].get("Exotic").is_none());
    let first = &v["entries"][0];
    for key in ["case", "coloring", "rho", "split", "verdict"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cat.json");
    let (ok, _, _) = synbreak(&["catalog", "4", "6", "--catalog", path.to_str().unwrap()]);
    assert!(ok);
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["counts_by_verdict"]["Exotic"].as_u64().unwrap() >= 1);

    let (ok, out, _) = synbreak(&["catalog", "3", "6"]);
    assert!(ok);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["entries"].as_array().unwrap().iter().any(|e| e["case"] == "A" && e["rho"] == "1/3"));
}

#[test]
fn catalog_guard() {
    let (ok, _, err) = synbreak(&["catalog", "7", "7"]);
    assert!(!ok);
    assert!(err.contains("budget"), "{err}");
}

#[test]
fn classify_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    fs::write(&path, "1.0,-1.0,-1.0\n1.0,-1.0,-1.0\n").unwrap();
    let (ok, out, _) = synbreak(&["classify", path.to_str().unwrap()]);
    assert!(ok);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["class"], "Consensus");
    assert_eq!(v["option_clusters"], serde_json::json!([[0], [1, 2]]));
}

#[test]
fn synthesize_balanced_and_reject_unbalanced() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.txt");
    fs::write(&path, "0 0 1 1 2 2\n1 1 2 2 0 0\n2 2 0 0 1 1\n").unwrap();
    let (ok, out, _) = synbreak(&["synthesize", path.to_str().unwrap(), "--seed", "3"]);
    assert!(ok);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["stable"], true);
    assert!(v["max_eigenvalue_deviation"].as_f64().unwrap() < 1e-8);

    fs::write(&path, "0 2 1 2\n1 0 2 1\n2 1 0 0\n").unwrap();
    let (ok, _, err) = synbreak(&["synthesize", path.to_str().unwrap()]);
    assert!(!ok);
    assert!(err.contains("not balanced"), "{err}");
}

#[test]
fn simulate_writes_reproducible_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.json");
    fs::write(
        &config,
        r#"{"name":"small","shape":{"m":2,"n":3},
            "coefficients":{"c_d":1.0,"c_c":-1.0,"c_dl":-1.0,"c_s":-1.0},
            "sigmoids":{"s1":-0.1,"s2":-0.3},"epsilon":0.2,
            "integrator":{"step":0.01,"t_max":400,"equilibrium_tol":1e-9,"record_stride":50}}"#,
    )
    .unwrap();
    let run = |out: &str| {
        let (ok, stdout, err) =
            synbreak(&["simulate", "--config", config.to_str().unwrap(), "--seeds", "0..3", "--out-dir", out]);
        assert!(ok, "{err}");
        stdout
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let census: Value = serde_json::from_str(&run(a.to_str().unwrap())).unwrap();
    assert_eq!(census["runs"], 3);
    run(b.to_str().unwrap());
    for f in ["seed_000.json", "seed_001.csv", "seed_002.svg", "summary.json"] {
        let x = fs::read(a.join("small").join(f)).unwrap();
        let y = fs::read(b.join("small").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
    let svg = fs::read_to_string(a.join("small/seed_000.svg")).unwrap();
    assert_eq!(svg.matches("<rect").count(), 6);
}

#[test]
fn sweep_crosses_threshold() {
    let (ok, out, err) = synbreak(&[
        "sweep",
        "--scenario",
        "dissensus-exotic-4x6",
        "--seeds",
        "0..4",
        "--lambda-list",
        "0.5,0.9,1.1,1.3",
    ]);
    assert!(ok, "{err}");
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    // λ well below the threshold: every run returns to the origin
    assert_eq!(rows[0][3], "1");
    assert_eq!(rows[1][3], "1");
    assert_eq!(rows[3][3], "0");
    assert!(err.contains("observed transition between λ = 0.9 and λ = 1.1"), "{err}");
}

#[test]
fn bad_invocations() {
    assert!(!synbreak(&["simulate"]).0);
    assert!(!synbreak(&["simulate", "--scenario", "nope"]).0);
    assert!(!synbreak(&["simulate", "--scenario", "consensus-4x6", "--epsilon", "-1"]).0);
}
