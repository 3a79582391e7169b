use std::path::PathBuf;
use std::process::Command;

use minaff::cli::run;
use serde_json::Value;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.json"))
}

/// Runs in-process; returns (exit code, stdout, stderr).
fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = vec![];
    let mut err = vec![];
    let argv = std::iter::once("minaff").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn qchar_t020_has_one_dominant_monomial() {
    let (code, out, _) = call(&["--no-cache", "qchar", "--n", "3", "--label", "T:0:0,2,0"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["summary"]["dominant"].as_array().unwrap().len(), 1);
    assert_eq!(v["summary"]["special"], true);
    let hw: minaff::Monomial = serde_json::from_value(v["highest"].clone()).unwrap();
    assert_eq!(hw.to_string(), "2_-3 2_-1");
}

#[test]
fn qchar_rank_one_kr() {
    let (code, out, _) = call(&["qchar", "--n", "1", "--label", "sl2:0:1"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn qchar_truncated() {
    let (code, out, _) = call(&[
        "--no-cache",
        "qchar",
        "--n",
        "3",
        "--label",
        "Tt:-2:0,0,1",
        "--trunc",
        "s<=-1",
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["complete"], false);
    assert_eq!(v["region"]["bound"], -1);
}

#[test]
fn unknown_variant_is_usage_error() {
    let (code, out, err) = call(&["qchar", "--n", "3", "--label", "X:0:1,0,0"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    let e = json(err.trim());
    assert_eq!(e["error"], "InvalidLabel");
    assert_eq!(e["exit_code"], 2);
}

#[test]
fn bad_arguments_are_usage_errors() {
    let (code, _, err) = call(&["qchar", "--n"]);
    assert_eq!(code, 2);
    assert_eq!(json(err.trim())["error"], "Usage");
    let (code, _, _) = call(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn custom_equation_with_bad_constraints() {
    let (code, _, err) = call(&["verify", "--n", "3", "--family", "eqn1", "--k", "0,0,1"]);
    assert_eq!(code, 2);
    assert_eq!(json(err.trim())["error"], "ConstraintViolated");
}

#[test]
fn custom_equation_passes() {
    let (code, out, _) = call(&[
        "--no-cache",
        "verify",
        "--n",
        "3",
        "--family",
        "eqn1",
        "--s",
        "-2",
        "--k",
        "1,1,0",
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["equations"][0]["residual_terms"], 0);
}

#[test]
fn suites_match_goldens() {
    for suite in [
        "c3-examples",
        "c3-dual-examples",
        "table1-sample",
        "c4-examples",
    ] {
        let g = golden(suite);
        let (code, out, err) = call(&[
            "--no-cache",
            "verify",
            "--suite",
            suite,
            "--golden",
            g.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{suite}: {err}");
        let v = json(&out);
        assert_eq!(v["verdict"], "pass", "{suite}");
        assert_eq!(v["golden"]["match"], true, "{suite}");
    }
}

#[test]
fn corrupted_golden_fails() {
    let text = std::fs::read_to_string(golden("c3-examples")).unwrap();
    let corrupted = text.replacen("\"residual_terms\": 0", "\"residual_terms\": 1", 1);
    assert_ne!(text, corrupted);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c3-examples.json");
    std::fs::write(&p, corrupted).unwrap();
    let (code, out, _) = call(&[
        "--no-cache",
        "verify",
        "--suite",
        "c3-examples",
        "--golden",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["golden"]["match"], false);
}

#[test]
fn reports_are_deterministic() {
    let args = ["--no-cache", "verify", "--suite", "c3-examples"];
    assert_eq!(call(&args).1, call(&args).1);
    let args = ["replay", "--case", "2", "--k", "1,0,1"];
    assert_eq!(call(&args).1, call(&args).1);
}

#[test]
fn dual_label_and_equation() {
    let (code, out, _) = call(&["dual", "--n", "3", "--label", "T:-2:1,1,0"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["dual"], "Tt:-2:1,1,0");
    assert_eq!(v["mirror_consistent"], true);
    assert_eq!(v["iota_involutive"], true);
    let (code, out, _) = call(&["dual", "--n", "3", "--family", "eqn1", "--k", "1,1,0"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["dual_family"], "eqn6");
}

#[test]
fn cartan_and_hw() {
    let (code, out, _) = call(&["cartan", "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["C"][1][2], -2);
    let (_, out, _) = call(&["hw", "--n", "3", "--label", "T:0:1,1,0"]);
    assert!(json(&out)["highest"]["factors"].is_array());
}

#[test]
fn seed_and_schedule() {
    let (code, out, _) = call(&["seed", "--n", "3", "--depth", "3"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["quiver"]["vertices"].as_array().unwrap().len(), 12);
    let (code, out, _) = call(&["seed", "--n", "3", "--depth", "2", "--dot"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("digraph"));
    let (code, out, _) = call(&["schedule", "--case", "1", "--k", "1,1,0"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["columns"], serde_json::json!([1, 1]));
    assert_eq!(v["target"], "T:0:1,1,0");
}

#[test]
fn replay_window_too_small() {
    let (code, _, err) = call(&["replay", "--case", "2", "--k", "1,0,1", "--depth", "1"]);
    assert_eq!(code, 2);
    let e = json(err.trim());
    assert_eq!(e["error"], "WindowTooSmall");
    assert!(e["required_depth"].as_u64().unwrap() > 1);
}

#[test]
fn replay_label_and_payload_modes_agree() {
    let families = |payloads: bool| {
        let mut args = vec!["--no-cache", "replay", "--case", "2", "--k", "1,0,1"];
        if payloads {
            args.push("--payloads");
        }
        let (code, out, _) = call(&args);
        assert_eq!(code, 0);
        let v = json(&out);
        assert_eq!(v["target_reached"], true);
        assert_eq!(v["summary"]["unmatched"], 0);
        v["records"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["family"].clone())
            .collect::<Vec<_>>()
    };
    let label = families(false);
    assert!(label.contains(&Value::String("eqn5211".into())));
    assert_eq!(label, families(true));
}

#[test]
fn binary_exit_codes_and_cache_env() {
    let bin = env!("CARGO_BIN_EXE_minaff");
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(bin)
        .args(["qchar", "--n", "3", "--label", "T:0:1,1,0"])
        .env("MINAFF_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(bin)
        .args(["cache", "stats"])
        .env("MINAFF_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    let v = json(std::str::from_utf8(&out.stdout).unwrap());
    assert!(v["entries"].as_u64().unwrap() >= 1);
    let out = Command::new(bin)
        .args(["--no-cache", "cache"])
        .env("MINAFF_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(bin)
        .args(["qchar", "--n", "3", "--label", "Q:0:1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let e = json(std::str::from_utf8(&out.stderr).unwrap().trim());
    assert_eq!(e["error"], "InvalidLabel");
}
