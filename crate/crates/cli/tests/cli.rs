use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gaussftpl"));
    c.env_remove("GAUSSFTPL_OUT");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn")
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn separation_of_parity_class() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["separation", "--hadamard", "4", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(t.path().join("out/separation.json"));
    let rho = v["result"]["rho"].as_f64().unwrap();
    assert!((rho - 0.5f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["result"]["is_separator_set"], Value::Bool(true));
    assert_eq!(v["command"], "separation");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn separation_of_indicator_class_file() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("id.txt"), "4 4\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n").unwrap();
    let o = run(t.path(), &["separation", "--class", "id.txt", "--out", "out"]);
    assert_eq!(code(&o), 0);
    let r = &json(t.path().join("out/separation.json"))["result"];
    let want = 0.5f64.sqrt();
    assert!((r["rho"].as_f64().unwrap() - want).abs() < 1e-12);
    assert!((r["singular_value_bound"].as_f64().unwrap() - want).abs() < 1e-12);
}

#[test]
fn out_of_range_entry_is_a_validation_error() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("bad.txt"), "2 2\n1 0\n0 1.5\n").unwrap();
    let o = run(t.path(), &["separation", "--class", "bad.txt", "--out", "out"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("entry out of [-1,1]"));
}

#[test]
fn single_expert_has_zero_regret_on_every_seed() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("one.txt"), "1 3\n1 -1 1\n").unwrap();
    let o = run(
        t.path(),
        &["online", "--class", "one.txt", "--horizon", "10", "--seeds", "4", "--env", "iid", "--out", "out"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(t.path().join("out/summary.json"));
    for seed in s["result"]["seeds"].as_array().unwrap() {
        assert_eq!(seed["regret"].as_f64().unwrap(), 0.0);
        assert_eq!(seed["account_calls"].as_u64().unwrap(), 10);
    }
    let csv = fs::read_to_string(t.path().join("out/trace_seed3.csv")).unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn zero_eta_is_flagged() {
    let t = TempDir::new().unwrap();
    let o = run(
        t.path(),
        &[
            "online",
            "--hadamard",
            "3",
            "--horizon",
            "200",
            "--seeds",
            "2",
            "--eta",
            "0",
            "--flip-prob",
            "0.2",
            "--out",
            "out",
        ],
    );
    assert_eq!(code(&o), 0);
    let s = json(t.path().join("out/summary.json"));
    let w = s["result"]["warnings"].as_array().unwrap();
    assert!(w.iter().any(|m| m.as_str().unwrap().contains("below the theorem threshold")));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let t = TempDir::new().unwrap();
    let args = |out: &'static str| {
        ["online", "--hadamard", "3", "--horizon", "500", "--seeds", "3", "--seed", "9", "--out", out]
    };
    assert_eq!(code(&run(t.path(), &args("a"))), 0);
    assert_eq!(code(&run(t.path(), &args("b"))), 0);
    for f in ["summary.json", "trace_seed0.csv", "trace_seed2.csv"] {
        assert_eq!(fs::read(t.path().join("a").join(f)).unwrap(), fs::read(t.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_and_environment_output_directory() {
    let t = TempDir::new().unwrap();
    fs::write(
        t.path().join("cfg.json"),
        r#"{"command": "online", "hadamard": 3, "horizon": 50, "seeds": 2, "noise": "laplace", "eta": 5.0}"#,
    )
    .unwrap();
    let o = bin()
        .current_dir(t.path())
        .env("GAUSSFTPL_OUT", "from-env")
        .args(["--config", "cfg.json", "--seeds", "3"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(t.path().join("from-env/summary.json"));
    assert_eq!(s["params"]["seeds"], 3);
    assert_eq!(s["params"]["horizon"], 50);
    assert_eq!(s["result"]["noise"], "laplace");
    assert_eq!(s["result"]["seeds"].as_array().unwrap().len(), 3);
}

#[test]
fn privacy_audit_of_identical_datasets() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("c.txt"), "4 3\n1 1 1\n1 -1 1\n-1 1 -1\n-1 -1 1\n").unwrap();
    let data = r#"[{"point":0,"label":1},{"point":1,"label":-1},{"point":2,"label":1},{"point":1,"label":-1}]"#;
    fs::write(t.path().join("s.json"), data).unwrap();
    let o = run(
        t.path(),
        &[
            "privacy",
            "--class",
            "c.txt",
            "--dataset",
            "s.json",
            "--neighbor",
            "s.json",
            "--trials",
            "20000",
            "--out",
            "out",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a = json(t.path().join("out/audit.json"));
    assert!(a["result"]["epsilon_hat"].as_f64().unwrap() < 0.1);
    assert!(a["result"]["per_function"][0].get("freq_Sprime").is_some());
}

#[test]
fn privacy_preset_passes_and_nonprivate_audit_fails() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["privacy", "--out", "ok"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let p = json(t.path().join("ok/privacy.json"));
    assert_eq!(p["result"]["audit_pass"], Value::Bool(true));
    let o = run(t.path(), &["privacy", "--audit-eta", "0", "--trials", "20000", "--out", "bad"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(t.path().join("bad/audit.json"))["result"]["epsilon_hat"], "infinity");
}

#[test]
fn zero_epsilon_is_rejected() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["privacy", "--epsilon", "0", "--out", "out"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn stability_fixtures() {
    let t = TempDir::new().unwrap();
    fs::write(
        t.path().join("same.json"),
        r#"{"mean":[0,1,0.5],"mean_prime":[0,1,0.5],"kernel":[[1,0,0],[0,1,0],[0,0,1]],"eta":50,"rho":1,"tau":0.5,"delta":0.05}"#,
    )
    .unwrap();
    let o = run(t.path(), &["stability", "--fixture", "same.json", "--trials", "20000", "--out", "a"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(t.path().join("a/verdict.json"))["result"]["pass"], Value::Bool(true));

    fs::write(
        t.path().join("kappa.json"),
        r#"{"mean":[0,0],"kernel":[[1,0],[0,0.25]],"eta":5,"rho":0.5,"tau":1,"delta":0.05,"kappa":1}"#,
    )
    .unwrap();
    let o = run(t.path(), &["stability", "--fixture", "kappa.json", "--check", "conditioned", "--out", "b"]);
    assert_eq!(code(&o), 1);
    let err = json(t.path().join("b/error.json"));
    assert!(err["result"]["error"].as_str().unwrap().contains("precondition"));

    fs::write(
        t.path().join("npsd.json"),
        r#"{"mean":[0,0],"kernel":[[1,2],[2,1]],"eta":5,"rho":0.5,"tau":1,"delta":0.05}"#,
    )
    .unwrap();
    let o = run(t.path(), &["stability", "--fixture", "npsd.json", "--out", "c"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn hadamard_gap_tables() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["hadamard-gap", "--horizon", "500", "--seeds", "2", "--check", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(t.path().join("out/gap_curves.csv")).unwrap();
    let header = csv.lines().nth(1).unwrap();
    assert!(header.contains("gaussian_bound") && header.contains("competitor_bound"));
    assert_eq!(csv.lines().count(), 2 + 2 * 5);
    let s = json(t.path().join("out/summary.json"));
    let ratios = s["result"]["ratios"].as_array().unwrap();
    assert!((ratios[0]["ratio"].as_f64().unwrap() - 16.0).abs() < 1e-9);
    assert_eq!(s["result"]["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let t = TempDir::new().unwrap();
    assert_eq!(code(&run(t.path(), &["nonsense"])), 1);
    assert_eq!(code(&run(t.path(), &["online", "--horizon", "abc"])), 1);
    assert_eq!(code(&run(t.path(), &["--help"])), 0);
}
