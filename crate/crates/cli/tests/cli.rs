use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qauth(args: &[&str]) -> Output {
    qauth_env(args, &[])
}

fn qauth_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qauth"));
    cmd.args(args).env_remove("QAUTH_MAX_N");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn family_reports_code_count_and_bound() {
    let out = qauth(&["family", "--r", "2", "--s", "3", "--no-timestamp"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["codes"], 9);
    assert_eq!(v["epsilon_bound"], "4/9");
    assert_eq!(v["degenerate"], false);
    assert_eq!(v["seed"], 0);
}

#[test]
fn family_with_no_message_qubits_is_flagged() {
    let out = qauth(&["family", "--r", "1", "--s", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["codes"], 3);
    assert_eq!(v["m"], 0);
    assert_eq!(v["degenerate"], true);
}

#[test]
fn family_rejects_zero_r() {
    let out = qauth(&["family", "--r", "0", "--s", "3"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn family_file_roundtrip_and_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f.json");
    let out = qauth(&["family", "--r", "2", "--s", "2", "--out", path_str(&file)]);
    assert_eq!(code(&out), 0);
    let out = qauth(&["epsilon", "--family", path_str(&file)]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["epsilon_exact"], "3/5");
    assert_eq!(v["bound"], "4/5");
    assert_eq!(v["pass"], true);

    let out = qauth(&["epsilon", "--family", path_str(&file), "--format", "csv"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("weight,max_undetected,"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn epsilon_passes_at_2_3() {
    let out = qauth(&["epsilon", "--r", "2", "--s", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["bound"], "4/9");
}

#[test]
fn corrupted_family_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f.json");
    qauth(&["family", "--r", "2", "--s", "2", "--out", path_str(&file)]);
    let text = std::fs::read_to_string(&file).unwrap();
    std::fs::write(&file, text.replacen("\"m\": 2", "\"m\": 3", 1)).unwrap();
    let out = qauth(&["epsilon", "--family", path_str(&file)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));

    std::fs::write(&file, "{ not json").unwrap();
    assert_eq!(code(&qauth(&["epsilon", "--family", path_str(&file)])), 2);
}

#[test]
fn exhaustive_cap_is_enforced() {
    let out = qauth_env(
        &["epsilon", "--r", "2", "--s", "2"],
        &[("QAUTH_MAX_N", "3")],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("QAUTH_MAX_N=4"));
    let out = qauth_env(
        &["epsilon", "--r", "2", "--s", "2"],
        &[("QAUTH_MAX_N", "13")],
    );
    assert_eq!(code(&out), 2);
    let out = qauth_env(
        &["epsilon", "--r", "2", "--s", "2"],
        &[("QAUTH_MAX_N", "4")],
    );
    assert_eq!(code(&out), 0);
}

#[test]
fn identity_attack_accepts_everywhere() {
    let out = qauth(&["attack", "--r", "2", "--s", "2", "--error", "IIII"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["corruption_probability"], "0/1");
    for o in v["outcomes"].as_array().unwrap() {
        assert_eq!(o["verdict"], "A");
        assert_eq!(o["logical_effect"], "0");
    }
}

#[test]
fn exhaustive_attack_matches_epsilon() {
    let out = qauth(&["attack", "--r", "2", "--s", "2", "--exhaustive"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["max_corruption"], "3/5");
    assert_eq!(v["max_corruption"], v["epsilon_exact"]);
}

#[test]
fn attack_rejects_wrong_length_and_bad_letters() {
    assert_eq!(
        code(&qauth(&[
            "attack", "--r", "2", "--s", "2", "--error", "III"
        ])),
        2
    );
    assert_eq!(
        code(&qauth(&[
            "attack", "--r", "2", "--s", "2", "--error", "IIQI"
        ])),
        2
    );
    assert_eq!(code(&qauth(&["attack", "--r", "2", "--s", "2"])), 2);
}

#[test]
fn dense_completeness_and_encryption() {
    for suite in ["completeness", "encryption"] {
        let out = qauth(&["dense-verify", suite, "--r", "2", "--s", "2"]);
        assert_eq!(code(&out), 0, "{suite}");
        let v = json(&out);
        assert_eq!(v["pass"], true);
        assert_eq!(v["suite"], suite);
    }
    let out = qauth(&["dense-verify", "completeness", "--r", "2", "--s", "2"]);
    assert_eq!(json(&out)["cases_run"], 320);
    let out = qauth(&["dense-verify", "encryption", "--r", "2", "--s", "2"]);
    assert!(json(&out)["max_pairwise_distance"].as_f64().unwrap() < 1e-10);
}

#[test]
fn dense_random_unitary_seed_42() {
    let out = qauth(&[
        "dense-verify",
        "random-unitary",
        "--r",
        "2",
        "--s",
        "2",
        "--seed",
        "42",
        "--cases",
        "100",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["cases_run"], 100);
    assert_eq!(v["seed"], 42);
}

#[test]
fn dense_fidelity_floor_has_vacuous_case() {
    let out = qauth(&[
        "dense-verify",
        "fidelity-floor",
        "--r",
        "2",
        "--s",
        "2",
        "--cases",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let cases = v["cases"].as_array().unwrap();
    assert_eq!(cases[0]["attack"], "identity");
    assert!((cases[0]["p_acc"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(cases[1]["vacuous"], true);
}

#[test]
fn tensor_power_row_at_t_10() {
    let out = qauth(&["lowerbound", "tensor-power"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let last = v["records"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["name"], "delta=0.5,t=10");
    assert!((last["rhs"].as_f64().unwrap() - 0.427).abs() < 1e-3);
    assert!(last["lhs"].as_f64().unwrap() >= last["rhs"].as_f64().unwrap());
}

#[test]
fn phase_attack_on_orthogonal_pures() {
    let out = qauth(&["lowerbound", "phase-attack", "--cases", "5"]);
    assert_eq!(code(&out), 0);
    let first = json(&out)["records"][0].clone();
    assert_eq!(first["name"], "orthogonal-pure");
    assert!((first["lhs"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn unknown_demo_is_usage_error() {
    assert_eq!(code(&qauth(&["lowerbound", "bogus"])), 2);
    assert_eq!(
        code(&qauth(&["dense-verify", "bogus", "--r", "2", "--s", "2"])),
        2
    );
}

#[test]
fn product_soundness_default_parameters() {
    let out = qauth(&["lowerbound", "product-soundness", "--cases", "3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!((v["r"].clone(), v["s"].clone()), (2.into(), 1.into()));
    assert_eq!(v["records"].as_array().unwrap().len(), 2 * (256 + 3));
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "dense-verify",
        "random-unitary",
        "--r",
        "2",
        "--s",
        "2",
        "--seed",
        "9",
        "--cases",
        "5",
        "--no-timestamp",
    ];
    let (a, b) = (qauth(&args), qauth(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(json(&a).get("timestamp").is_none());
    let stamped = qauth(&["family", "--r", "2", "--s", "1"]);
    assert!(json(&stamped)["timestamp"].is_u64());
}

#[test]
fn keygen_send_receive_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let key = dir.path().join("key.json");
    let env = dir.path().join("env.bin");
    let out = qauth(&[
        "keygen",
        "--r",
        "2",
        "--s",
        "2",
        "--seed",
        "5",
        "--out",
        path_str(&key),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["key_bits"], 9);
    let out = qauth(&[
        "send",
        "--r",
        "2",
        "--s",
        "2",
        "--key",
        path_str(&key),
        "--message",
        "1",
        "--out",
        path_str(&env),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["pad"], 1);

    let out = qauth(&[
        "receive",
        "--key",
        path_str(&key),
        "--envelope",
        path_str(&env),
    ]);
    let v = json(&out);
    assert_eq!(v["verdict"], "A");
    assert_eq!(v["outcomes"][0]["bits"], "1");
    assert!((v["outcomes"][0]["probability"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let out = qauth(&[
        "receive",
        "--key",
        path_str(&key),
        "--envelope",
        path_str(&env),
        "--error",
        "XIII",
    ]);
    assert_eq!(json(&out)["verdict"], "R");

    let out = qauth(&[
        "send",
        "--r",
        "2",
        "--s",
        "2",
        "--key",
        path_str(&key),
        "--message",
        "101",
        "--out",
        path_str(&env),
    ]);
    assert_eq!(code(&out), 2);
    let out = qauth(&["send", "--r", "2", "--s", "2", "--key", path_str(&key)]);
    assert_eq!(code(&out), 2);
}
