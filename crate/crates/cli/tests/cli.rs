//! End-to-end tests of the `ckw` binary: exit codes, file formats, report
//! determinism and witness round-trips.

use std::path::Path;
use std::process::{Command, Output};

use ckw_core::channels::{i2_arrow, QubitChannel};
use ckw_core::io;
use ckw_core::measures::tangle_pure_split;
use ckw_core::qlinalg::DimsVector;
use ckw_core::states::{maximally_mixed_qubit, random_pure, PureState};

fn ckw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ckw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn first_value(out: &Output) -> f64 {
    stdout_of(out).lines().next().unwrap().trim().parse().unwrap()
}

fn bell() -> PureState {
    let s = 1.0 / 2.0_f64.sqrt();
    let text = format!(
        r#"{{"kind":"pure","dims":[2,2],"vector":[[{s},0],[0,0],[0,0],[{s},0]]}}"#
    );
    match io::state_from_json(&text).unwrap() {
        io::LoadedState::Pure(p) => p,
        _ => unreachable!(),
    }
}

#[test]
fn verify_ckw_small_campaign_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ckw.json");
    let result = ckw(&[
        "verify", "--campaign", "ckw", "--qubits", "4", "--samples", "200", "--seed", "7",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["violations"], 0);
    assert_eq!(report["samples"], 200);
    assert_eq!(report["campaign"], "ckw");
}

#[test]
fn verify_saturation_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sat.json");
    let result = ckw(&[
        "verify", "--campaign", "saturation", "--qubits", "5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["violations"], 0);
    assert!(report["min_residual"].as_f64().unwrap().abs() <= 1e-9);
}

#[test]
fn verify_rerun_is_byte_identical_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rerun.json");
    let args = [
        "verify", "--campaign", "sigma-max", "--samples", "25", "--seed", "19",
        "--out", out.to_str().unwrap(),
    ];
    assert_eq!(ckw(&args).status.code(), Some(0));
    let first = std::fs::read_to_string(&out).unwrap();
    assert_eq!(ckw(&args).status.code(), Some(0));
    let second = std::fs::read_to_string(&out).unwrap();

    let strip = |text: &str| -> String {
        text.lines().filter(|l| !l.contains("wall_time_s")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(&first), strip(&second));
}

#[test]
fn verify_reports_are_reproducible_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for (out, threads) in [(&out_a, "1"), (&out_b, "3")] {
        let result = ckw(&[
            "verify", "--campaign", "tau-le-i2", "--samples", "50", "--seed", "11",
            "--threads", threads, "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(result.status.code(), Some(0));
    }
    let mut a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_a).unwrap()).unwrap();
    let mut b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_b).unwrap()).unwrap();
    a["wall_time_s"] = 0.into();
    b["wall_time_s"] = 0.into();
    // The config echo records the out path and thread count; normalize them
    // before comparing the scientific content.
    a["config"]["out"] = "".into();
    b["config"]["out"] = "".into();
    a["config"]["threads"] = 1.into();
    b["config"]["threads"] = 1.into();
    assert_eq!(a, b);
}

#[test]
fn verify_rejects_bad_config_without_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let result = ckw(&[
        "verify", "--campaign", "ckw", "--samples", "0", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(!out.exists(), "no partial report on exit 1");

    let result = ckw(&["verify", "--campaign", "no-such-campaign"]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn verify_violations_exit_two_with_witnesses() {
    // The Koashi-Winter residual always sits a hair below zero (roof slack),
    // so an impossibly tight tolerance must trip every sample.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("kw.json");
    let result = ckw(&[
        "verify", "--campaign", "koashi-winter", "--samples", "2", "--seed", "3",
        "--tol", "1e-300", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(2));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let witnesses = report["witnesses"].as_array().unwrap();
    assert!(!witnesses.is_empty());
    for w in witnesses {
        let path = w.as_str().unwrap();
        assert!(Path::new(path).exists(), "witness file {path} written");
        io::read_state(Path::new(path)).expect("witness file parses");
    }
}

#[test]
fn measure_s2_and_concurrence() {
    let dir = tempfile::tempdir().unwrap();
    let mixed = dir.path().join("mixed.json");
    io::write_mixed(&mixed, &maximally_mixed_qubit()).unwrap();
    let result = ckw(&["measure", "s2", mixed.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0));
    assert_eq!(first_value(&result), 1.0);

    let bell_path = dir.path().join("bell.json");
    io::write_pure(&bell_path, &bell()).unwrap();
    let result = ckw(&["measure", "concurrence", bell_path.to_str().unwrap()]);
    assert!((first_value(&result) - 1.0).abs() < 1e-12);
    let result = ckw(&["measure", "tangle", bell_path.to_str().unwrap()]);
    assert!((first_value(&result) - 1.0).abs() < 1e-12);
    let result = ckw(&["measure", "i2arrow", bell_path.to_str().unwrap()]);
    assert!((first_value(&result) - 1.0).abs() < 1e-9);

    // Wrong dims: a two-qubit file fed to a single-qubit measure.
    let result = ckw(&["measure", "s2", bell_path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("wrong dims"));
}

#[test]
fn measure_tangle_roof_matches_identity_value() {
    // Roof of the AC marginal of a pure tripartite state must reproduce
    // S2(rho_A) - I2<-(rho_AB) within the optimizer tolerance.
    let dir = tempfile::tempdir().unwrap();
    let psi = random_pure(&DimsVector::new(&[2, 2, 4]).unwrap(), 12345).unwrap();
    let identity_value = tangle_pure_split(&psi, 0).unwrap()
        - i2_arrow(&psi.marginal(&[0, 1]).unwrap()).unwrap();
    let marginal_path = dir.path().join("ac.json");
    io::write_mixed(&marginal_path, &psi.marginal(&[0, 2]).unwrap()).unwrap();

    let result = ckw(&[
        "measure", "tangle-roof", marginal_path.to_str().unwrap(), "--restarts", "20",
        "--seed", "5", "--json",
    ]);
    assert_eq!(result.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&result)).unwrap();
    let value = doc["value"].as_f64().unwrap();
    assert!(
        (value - identity_value).abs() <= 1e-4,
        "roof {value} vs identity {identity_value}"
    );
    assert!(doc["ensemble"].as_array().unwrap().len() >= 1);
}

#[test]
fn channel_commands() {
    let dir = tempfile::tempdir().unwrap();
    let id_path = dir.path().join("identity.json");
    io::write_channel(&id_path, &QubitChannel::identity()).unwrap();
    let state_path = dir.path().join("mixed.json");
    io::write_mixed(&state_path, &maximally_mixed_qubit()).unwrap();

    let result = ckw(&[
        "channel", "chi2", "--channel", id_path.to_str().unwrap(),
        "--state", state_path.to_str().unwrap(),
    ]);
    assert_eq!(first_value(&result), 1.0);

    // Depolarizing p = 0.5: Bloch form is L = I/2, l = 0.
    let dep_path = dir.path().join("dep.json");
    io::write_channel(&dep_path, &QubitChannel::depolarizing(0.5).unwrap()).unwrap();
    let result = ckw(&["channel", "bloch", "--channel", dep_path.to_str().unwrap(), "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&result)).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 0.5 } else { 0.0 };
            let got = doc["L"][i][j].as_f64().unwrap();
            assert!((got - want).abs() < 1e-12);
        }
        assert!(doc["l"][i].as_f64().unwrap().abs() < 1e-12);
    }

    // Closed form vs brute force through the CLI round trip.
    let closed = first_value(&ckw(&[
        "channel", "chi2", "--channel", dep_path.to_str().unwrap(),
        "--state", state_path.to_str().unwrap(),
    ]));
    let brute = first_value(&ckw(&[
        "channel", "chi2-brute", "--channel", dep_path.to_str().unwrap(),
        "--state", state_path.to_str().unwrap(), "--grid", "4096",
    ]));
    assert!((closed - brute).abs() <= 1e-6, "closed {closed} vs brute {brute}");

    // Non-trace-preserving Kraus file: exit 1.
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kraus":[[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#).unwrap();
    let result = ckw(&[
        "channel", "chi2", "--channel", bad.to_str().unwrap(),
        "--state", state_path.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("trace-preserving"));
}

#[test]
fn bound_command() {
    let result = ckw(&["bound", "--d", "4", "--m", "0"]);
    assert_eq!(result.status.code(), Some(0));
    assert_eq!(stdout_of(&result).trim(), "0.5 0.25");

    let result = ckw(&["bound", "--d", "1", "--m", "1"]);
    assert_eq!(stdout_of(&result).trim(), "0 0");

    let result = ckw(&["bound", "--d", "2", "--m", "0.3"]);
    let line = stdout_of(&result);
    let mut parts = line.trim().split(' ');
    let b: f64 = parts.next().unwrap().parse().unwrap();
    let g: f64 = parts.next().unwrap().parse().unwrap();
    assert!((b - 0.91 / 2.0_f64.sqrt()).abs() < 1e-15);
    assert!((g - 0.91 / (2.0 * 2.0_f64.sqrt())).abs() < 1e-15);

    let result = ckw(&["bound", "--d", "0", "--m", "0"]);
    assert_eq!(result.status.code(), Some(1));
    let result = ckw(&["bound", "--d", "4", "--m", "1.5"]);
    assert_eq!(result.status.code(), Some(1));
}
