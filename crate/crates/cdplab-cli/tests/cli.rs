//! End-to-end tests against the compiled binary: exit codes, report schemas,
//! pinned values on the shipped fixtures, and byte-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdplab"))
        .args(args)
        .env_remove("CDPLAB_THREADS")
        .output()
        .expect("binary spawns")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn osd_reports_the_isotropic_spectrum() {
    let out = run(&["osd", "--input", fixture("iso_d2_p50.json").to_str().unwrap()]);
    let doc = stdout_json(&out);
    let coeffs: Vec<f64> = doc["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let want = [0.5, 0.25, 0.25, 0.25];
    assert_eq!(coeffs.len(), 4);
    for (c, w) in coeffs.iter().zip(want) {
        assert!((c - w).abs() < 1e-10, "{coeffs:?}");
    }
    assert_eq!(doc["rank"], 4);
    assert_eq!(doc["realignment_verdict"], "fails (entangled)");
    assert!(doc["cap_comparison"]["cap_rederived"].as_f64().unwrap() > 0.0);
}

#[test]
fn osd_product_state_has_rank_one_and_passes_realignment() {
    let out = run(&[
        "osd",
        "--input",
        fixture("product_d2.json").to_str().unwrap(),
        "--format",
        "text",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rank: 1"), "{text}");
    assert!(text.contains("passes"), "{text}");
}

#[test]
fn diamond_reports_both_methods_on_the_routing_pair() {
    let out = run(&[
        "diamond",
        "--input",
        fixture("eq9_pair_d2_first.json").to_str().unwrap(),
        "--input-b",
        fixture("eq9_pair_d2_second.json").to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    assert!((doc["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(doc["method"], "both");
    let sdp = doc["sdp_value"].as_f64().unwrap();
    let ascent = doc["ascent_value"].as_f64().unwrap();
    assert!((sdp - ascent).abs() < 1e-5, "sdp {sdp} vs ascent {ascent}");
    assert!(doc["witness_input"].is_array());
}

#[test]
fn diamond_identical_channels_give_zero() {
    let path = fixture("dephase_d2.json");
    let out = run(&[
        "diamond",
        "--input",
        path.to_str().unwrap(),
        "--input-b",
        path.to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    assert!(doc["value"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn diamond_identity_vs_dephasing_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let identity = dir.path().join("identity.json");
    fs::write(
        &identity,
        r#"{"d_in":2,"d_out":2,"kraus":[{"real":[[1.0,0.0],[0.0,1.0]],"imag":[[0.0,0.0],[0.0,0.0]]}]}"#,
    )
    .unwrap();
    let out = run(&[
        "diamond",
        "--input",
        identity.to_str().unwrap(),
        "--input-b",
        fixture("dephase_d2.json").to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    assert!((doc["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn diamond_dimension_mismatch_exits_2() {
    let out = run(&[
        "diamond",
        "--input",
        fixture("eq9_pair_d2_first.json").to_str().unwrap(),
        "--input-b",
        fixture("dephase_d2.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn cdp_bell_state_is_exactly_half() {
    let out = run(&["cdp", "--input", fixture("bell_d2.json").to_str().unwrap()]);
    let doc = stdout_json(&out);
    assert!((doc["exact"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((doc["adversarial_estimate"].as_f64().unwrap() - 0.5).abs() < 1e-7);
    let tags: Vec<&str> = doc["bound_provenance"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["tag"].as_str().unwrap())
        .collect();
    for tag in ["thm1", "thm2-lower", "thm2-upper", "eq12-lower", "eq12-upper", "discord", "osr-reduction", "adversarial"] {
        assert!(tags.contains(&tag), "missing {tag} in {tags:?}");
    }
    assert_eq!(doc["witness_channels"].as_array().unwrap().len(), 2);
    assert_eq!(doc["witness_channels"][0]["d_in"], 2);
}

#[test]
fn cdp_weighted_pure_state_is_exactly_its_second_weight() {
    let out = run(&["cdp", "--input", fixture("pure_82.json").to_str().unwrap()]);
    let doc = stdout_json(&out);
    assert!((doc["exact"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert!((doc["adversarial_estimate"].as_f64().unwrap() - 0.2).abs() < 1e-7);
    let lower = doc["lower_bound"].as_f64().unwrap();
    let upper = doc["upper_bound"].as_f64().unwrap();
    assert!(lower <= 0.2 + 1e-9 && 0.2 <= upper + 1e-9);
}

#[test]
fn cdp_isotropic_bracket_stays_inside_the_band() {
    let out = run(&["cdp", "--input", fixture("iso_d2_p50.json").to_str().unwrap()]);
    let doc = stdout_json(&out);
    assert!(doc["exact"].is_null());
    let est = doc["adversarial_estimate"].as_f64().unwrap();
    assert!((0.2 - 1e-7..=0.5 + 1e-7).contains(&est), "estimate {est}");
    let tag = |name: &str| -> f64 {
        doc["bound_provenance"]
            .as_array()
            .unwrap()
            .iter()
            .find(|b| b["tag"] == name)
            .unwrap_or_else(|| panic!("no {name} tag"))["value"]
            .as_f64()
            .unwrap()
    };
    assert!((tag("eq12-lower") - 0.2).abs() < 1e-12);
    assert!((tag("eq12-upper") - 0.5).abs() < 1e-12);
}

#[test]
fn cdp_json_is_byte_identical_under_a_fixed_seed() {
    let input = fixture("iso_d2_p50.json");
    let args = [
        "cdp",
        "--input",
        input.to_str().unwrap(),
        "--seed",
        "123",
        "--budget",
        "6",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report.json");
    let mut with_output = args.to_vec();
    with_output.extend(["--output", file.to_str().unwrap()]);
    let third = run(&with_output);
    assert!(third.status.success());
    assert!(third.stdout.is_empty());
    assert_eq!(fs::read(&file).unwrap(), first.stdout);
}

#[test]
fn worker_pool_size_does_not_change_the_bytes() {
    let input = fixture("bell_d2.json");
    let args = ["cdp", "--input", input.to_str().unwrap(), "--seed", "9"];
    let unrestricted = run(&args);
    let pinned = Command::new(env!("CARGO_BIN_EXE_cdplab"))
        .args(args)
        .env("CDPLAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(pinned.status.success());
    assert_eq!(unrestricted.stdout, pinned.stdout);
}

#[test]
fn invalid_worker_pool_size_exits_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_cdplab"))
        .args(["osd", "--input", fixture("bell_d2.json").to_str().unwrap()])
        .env("CDPLAB_THREADS", "zebra")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_and_invalid_states_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{ this is not json").unwrap();
    let out = run(&["osd", "--input", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    // Valid JSON, invalid state: trace 2.
    let unnormalized = dir.path().join("unnormalized.json");
    fs::write(
        &unnormalized,
        r#"{"dA":1,"dB":2,"matrix_real":[[1.0,0.0],[0.0,1.0]],"matrix_imag":[[0.0,0.0],[0.0,0.0]]}"#,
    )
    .unwrap();
    let out = run(&["cdp", "--input", unnormalized.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let out = run(&["osd", "--input", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn tomography_probe_mode_reconstructs_and_reports_noise() {
    let out = run(&[
        "tomography",
        "--input",
        fixture("bell_d2.json").to_str().unwrap(),
        "--input-b",
        fixture("random_unitary_d2.json").to_str().unwrap(),
        "--budget",
        "3",
    ]);
    let doc = stdout_json(&out);
    assert!(doc["residual_to_truth"].as_f64().unwrap() <= 1e-8);
    assert!((doc["conditioning"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    let noise = doc["noise"].as_array().unwrap();
    assert_eq!(noise.len(), 2);
    assert!(noise[0]["mean_residual"].as_f64().unwrap() <= 1e-9);
    assert!(noise[1]["mean_residual"].as_f64().unwrap() <= 1e-4);
}

#[test]
fn tomography_rejects_a_rank_deficient_probe() {
    let out = run(&[
        "tomography",
        "--input",
        fixture("classical_on_A_d2.json").to_str().unwrap(),
        "--input-b",
        fixture("random_unitary_d2.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("tomographically"));
}

#[test]
fn tomography_sweep_emits_the_documented_csv() {
    let out = run(&["tomography", "--format", "csv", "--budget", "3", "--seed", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p,r_min,noise_level,mean_residual,max_residual,trials"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 15, "5 mixing parameters x 3 noise levels");
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[0], "1");
    assert_eq!(first[1], "0.5");
    assert_eq!(first[5], "3");
}

#[test]
fn verify_suite_passes_on_the_shipped_fixtures() {
    let out = run(&[
        "verify-suite",
        "--fixtures",
        fixture_dir().to_str().unwrap(),
        "--budget",
        "4",
        "--restarts",
        "8",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{text}");
    assert!(text.contains("0 failed, 0 skipped"), "{text}");
}

#[test]
fn verify_suite_skips_rank_checks_under_a_threshold_override() {
    let out = run(&[
        "verify-suite",
        "--fixtures",
        fixture_dir().to_str().unwrap(),
        "--budget",
        "4",
        "--restarts",
        "8",
        "--osr-threshold",
        "0.3",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{text}");
    assert!(text.contains("skipped: threshold override"), "{text}");
    assert!(text.contains("5 skipped"), "{text}");
}

#[test]
fn verify_suite_names_a_corrupted_fixture_and_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(fixture_dir()).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    fs::write(dir.path().join("bell_d2.json"), "corrupted").unwrap();
    let out = run(&[
        "verify-suite",
        "--fixtures",
        dir.path().to_str().unwrap(),
        "--budget",
        "4",
        "--restarts",
        "8",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 4);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let files = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "fixture-files")
        .unwrap();
    assert_eq!(files["status"], "fail");
    assert!(files["message"].as_str().unwrap().contains("bell_d2"));
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["osd", "diamond", "cdp", "tomography", "verify-suite"] {
        assert!(text.contains(sub), "{text}");
    }
}
