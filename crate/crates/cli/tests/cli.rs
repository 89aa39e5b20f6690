use std::process::{Command, Output};

use serde_json::Value;

fn gz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gz")).args(args).env_remove("GZ_DEFAULT_BUDGET").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn gaussian_disc(r: f64) -> f64 {
    1.0 - (-0.5 * r * r).exp()
}

#[test]
fn gap_of_two_discs() {
    let out = gz(&["gap", "--measure", "gaussian", "--dim", "2", "--K", "ball:1", "--L", "ball:2", "--lambda", "0.5", "--p", "0.25", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let oracle = gaussian_disc(1.5).powf(0.25) - 0.5 * gaussian_disc(1.0).powf(0.25) - 0.5 * gaussian_disc(2.0).powf(0.25);
    let got = v["result"]["reports"][0]["gap"]["value"].as_f64().unwrap();
    assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
    assert!((got - 0.028).abs() < 1e-3);
    for key in ["tool", "version", "config", "seed", "wall_time_s"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
    assert_eq!(v["seed"], 7);
}

#[test]
fn alpha_at_zero() {
    let out = gz(&["alpha", "--R", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["values"][0]["alpha"].as_f64(), Some(0.0));
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(gz(&["gap", "--bogus"]).status.code(), Some(2));
    assert_eq!(gz(&["frobnicate"]).status.code(), Some(2));
    let dir = std::env::temp_dir().join(format!("gz-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spec = dir.join("bad.json");
    std::fs::write(&spec, "{\n  \"dim\": 2,\n  \"type\": \"ball\",\n  \"radius\": \n}\n").unwrap();
    let out = gz(&["measure", "--K", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 5"), "{msg}");
    let spec = dir.join("field.json");
    std::fs::write(&spec, r#"{"dim": 2, "type": "box", "half_widths": [1.0]}"#).unwrap();
    let out = gz(&["measure", "--K", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("half_widths"));
}

#[test]
fn reports_are_byte_identical_without_timing() {
    let args = ["gap", "--K", "square", "--L", "ball:1.5", "--method", "mc", "--budget", "50000", "--seed", "3", "--no-timing", "--p", "0.25"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_gz"))
            .args(args)
            .env("RAYON_NUM_THREADS", threads)
            .env_remove("GZ_DEFAULT_BUDGET")
            .output()
            .unwrap()
            .stdout
    };
    let a = run("1");
    assert!(!a.is_empty());
    assert_eq!(a, run("1"));
    assert_eq!(a, run("3"));
    let other = gz(&["gap", "--K", "square", "--L", "ball:1.5", "--method", "mc", "--budget", "50000", "--seed", "4", "--no-timing", "--p", "0.25"]);
    assert_ne!(a, other.stdout);
}

#[test]
fn budget_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_gz"))
        .args(["measure", "--K", "square", "--method", "mc"])
        .env("GZ_DEFAULT_BUDGET", "1234")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["budget"], 1234);
    let out = Command::new(env!("CARGO_BIN_EXE_gz"))
        .args(["measure", "--K", "square", "--method", "mc", "--budget", "999"])
        .env("GZ_DEFAULT_BUDGET", "1234")
        .output()
        .unwrap();
    assert_eq!(json(&out)["result"]["budget"], 999);
    let out = Command::new(env!("CARGO_BIN_EXE_gz")).args(["measure", "--K", "square"]).env("GZ_DEFAULT_BUDGET", "lots").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_has_fixed_columns() {
    let out = gz(&["bochner", "--R", "0.5:2:0.5", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "R,lhs,bulk,boundary,residual");
    assert_eq!(lines.len(), 5);
    assert!(text.starts_with("# gz "));
}

#[test]
fn lemmas_skip_unmet_hypotheses() {
    let out = gz(&["lemmas", "--body", "ball:1", "--dim", "3", "--method", "mc", "--budget", "20000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let checks = v["result"]["checks"].as_array().unwrap();
    let est2 = checks.iter().find(|c| c["check"] == "est2").unwrap();
    assert_eq!(est2["status"], "skipped");
    let star = checks.iter().find(|c| c["check"] == "star_moment").unwrap();
    assert_eq!(star["verdict"], "holds");
}

#[test]
fn variation_and_local_constant() {
    let out = gz(&["variation", "--body", "ball:1", "--psi", "1", "--format", "csv", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().find(|l| l.starts_with("1,")).unwrap();
    let formula: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((formula - (-0.5f64).exp()).abs() < 1e-9);
    let out = gz(&["localc", "--body", "ball:1"]);
    assert!((json(&out)["result"]["c"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(gz(&["variation", "--body", "square"]).status.code(), Some(2));
}

#[test]
fn search_writes_trajectory() {
    let dir = std::env::temp_dir().join(format!("gz-search-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("traj.csv");
    let args = [
        "search", "--class", "sym", "--p", "0.25", "--dim", "2", "--seed", "5", "--restarts", "2", "--evals", "15", "--order", "4",
        "--grid-size", "128", "--no-timing", "--trajectory", path.to_str().unwrap(),
    ];
    let out = gz(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["result"]["certified_violation"], false);
    assert_eq!(v["result"]["trajectory_rows"], 30);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 31);
    assert_eq!(out.stdout, gz(&args).stdout);
}

#[test]
fn acceptance_subset() {
    let out = gz(&["acceptance", "--suite", "primary", "--only", "1,4,6", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["criteria"].as_array().unwrap().len(), 3);
    assert_eq!(gz(&["acceptance", "--suite", "secondary"]).status.code(), Some(2));
}
