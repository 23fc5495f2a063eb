use std::path::PathBuf;
use std::process::{Command, Output};

use chaotic_cavity::algebra::{format_rational, parse_rational, to_f64};
use serde_json::Value;

fn cavity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity")).args(args).output().expect("spawn cavity")
}

fn json_of(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cavity-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn wigner_fourth_cumulant() {
    let v = json_of(&cavity(&["cumulants", "wigner", "--beta", "2", "--n", "4", "--max-order", "4"]));
    assert_eq!(v["result"]["values"][3], "257/525");
    assert_eq!(v["result"]["values"][0], "1");
}

#[test]
fn uniform_conductance() {
    let v = json_of(&cavity(&["cumulants", "conductance", "--beta", "2", "--alpha", "0", "--delta", "0", "--n", "1", "--max-order", "2"]));
    assert_eq!(v["result"]["values"], serde_json::json!(["1/2", "1/12"]));
    let floats = v["result"]["floats"].as_array().unwrap();
    assert_eq!(floats[0].as_f64(), Some(0.5));
}

#[test]
fn chazy_passes() {
    let o = cavity(&["verify", "chazy", "--n", "10", "--order", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_of(&o);
    assert_eq!(v["result"]["pass"], true);
}

#[test]
fn exit_codes() {
    // Nonexistent cumulant: computation error carrying the token.
    let o = cavity(&["cumulants", "wigner", "--beta", "2", "--n", "4", "--max-order", "9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent-cumulant"));
    let o = cavity(&["cumulants", "conductance", "--beta", "3", "--n", "2", "--max-order", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported-beta"));
    // Usage errors.
    let o = cavity(&["cumulants", "conductance", "--beta", "2", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--max-order"));
    assert_eq!(cavity(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cavity(&["cumulants", "conductance", "--beta", "2", "--n", "1", "--max-order", "2", "--alpha", "x/y"]).status.code(), Some(2));
}

#[test]
fn no_partial_file_on_error() {
    let out = scratch("missing.json");
    let o = cavity(&["cumulants", "wigner", "--beta", "2", "--n", "4", "--max-order", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert!(!out.with_extension("partial").exists());
}

#[test]
fn json_round_trip() {
    let out = scratch("joint.json");
    let o = cavity(&["cumulants", "joint", "--beta", "1", "--alpha", "1/2", "--delta", "1", "--n", "3", "--max-l", "3", "--max-k", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["manifest"]["params"]["alpha"], "1/2");
    assert_eq!(v["manifest"]["params"]["beta"], 1);
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);
    // Exact strings parse back and agree with the advisory floats.
    let entries = v["result"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3 * 4 - 1);
    for e in entries {
        let q = parse_rational(e["value"].as_str().unwrap()).unwrap();
        assert_eq!(format_rational(&q), e["value"]);
        assert_eq!(to_f64(&q), e["float"].as_f64().unwrap());
    }
    let p = &v["result"]["params"];
    assert_eq!(parse_rational(p["delta"].as_str().unwrap()).unwrap(), parse_rational("1").unwrap());
    let stdout = json_of(&cavity(&["cumulants", "joint", "--beta", "1", "--alpha", "1/2", "--delta", "1", "--n", "3", "--max-l", "3", "--max-k", "2"]));
    assert_eq!(stdout["result"], v["result"]);
    assert_eq!(stdout["manifest"]["checksum_sha256"], v["manifest"]["checksum_sha256"]);
}

#[test]
fn monte_carlo_is_reproducible() {
    let run = |seed: &str, name: &str| {
        let out = scratch(name);
        let o = cavity(&["mc", "sample", "--statistic", "tauW", "--beta", "1", "--n", "6", "--count", "500", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let m: Value = serde_json::from_str(&std::fs::read_to_string(format!("{}.manifest.json", out.display())).unwrap()).unwrap();
        (std::fs::read_to_string(&out).unwrap(), m["checksum_sha256"].as_str().unwrap().to_string())
    };
    let (a, ca) = run("7", "a.csv");
    let (b, cb) = run("7", "b.csv");
    let (_, cc) = run("8", "c.csv");
    assert_eq!(a, b);
    assert_eq!(ca, cb);
    assert_ne!(ca, cc);
    assert_eq!(a.lines().count(), 501);
}

#[test]
fn edgeworth_columns() {
    let o = cavity(&["mc", "edgeworth", "--beta", "1", "--n", "20", "--grid", "0.5:1.5:4", "--count", "1000", "--format", "csv"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("x,edgeworth,gaussian,histogram_density"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn asymptotic_limits() {
    let v = json_of(&cavity(&["asymptotic", "conductance", "--beta", "1", "--alpha", "-1/2", "--max-index", "4"]));
    let s = v["result"].to_string();
    assert!(s.contains("\"1/16\"") && s.contains("\"-3/128\""), "{s}");
}

#[test]
fn report_flags_the_erratum() {
    let v = json_of(&cavity(&["report", "--n-list", "64,128,256"]));
    let s = v["result"].to_string();
    assert!(s.contains("suspected erratum"), "{s}");
    assert!(s.contains("12698673120"));
}
