use std::fs;
use std::process::{Command, Output};

use kerrcat::scenarios::ScenarioConfig;
use kerrcat::synth::PulseSchedule;

fn kerrcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kerrcat"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn version_and_help() {
    let v = kerrcat(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).starts_with("kerrcat 0.1.0"));
    let h = kerrcat(&["--help"]);
    assert_eq!(h.status.code(), Some(0));
    for cmd in [
        "synth",
        "gate",
        "cnot",
        "noise",
        "decoherence",
        "squeeze",
        "circuit",
        "scenario",
        "selftest",
    ] {
        assert!(stdout(&h).contains(cmd), "{cmd}");
    }
}

#[test]
fn every_config_key_has_a_flag() {
    let h = stdout(&kerrcat(&["scenario", "--help"]));
    for key in ScenarioConfig::KEYS {
        let flag = format!("--{}", key.replace('_', "-"));
        assert!(h.contains(&flag), "missing {flag}");
    }
}

#[test]
fn exit_codes_separate_usage_from_bad_values() {
    assert_eq!(kerrcat(&["gate", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(kerrcat(&["frobnicate"]).status.code(), Some(1));
    let bare = kerrcat(&["gate", "--kerr", "12.5"]);
    assert_eq!(bare.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bare.stderr).contains("no unit"));
    assert_eq!(
        kerrcat(&["gate", "--kappa", "0.1mhz"]).status.code(),
        Some(1)
    );
    assert_eq!(
        kerrcat(&["decoherence", "--kappa", "0.1mhz"]).status.code(),
        Some(3)
    );
    assert_eq!(
        kerrcat(&["circuit", "--error-max", "0.7"]).status.code(),
        Some(3)
    );
    assert_eq!(
        kerrcat(&["scenario", "--id", "fig9"]).status.code(),
        Some(3)
    );
}

#[test]
fn synth_output_reloads_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("p.csv");
    let o = kerrcat(&[
        "synth",
        "--gate",
        "hadamard",
        "--steps",
        "500",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let bytes = fs::read(&path).unwrap();
    let sched = PulseSchedule::read_csv(bytes.as_slice()).unwrap();
    assert_eq!(sched.len(), 501);
    let mut again = Vec::new();
    sched.write_csv(&mut again).unwrap();
    assert_eq!(again, bytes);

    // without --out the same CSV goes to standard output
    let o = kerrcat(&["synth", "--gate", "hadamard", "--steps", "500"]);
    assert_eq!(o.stdout, bytes);
}

#[test]
fn gate_reports_fidelity_and_writes_a_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("g.csv");
    let o = kerrcat(&[
        "gate",
        "--name",
        "not",
        "--k-mhz",
        "12.5",
        "--alpha",
        "0.5",
        "--dim",
        "20",
        "--steps",
        "4000",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    let line = text
        .lines()
        .find(|l| l.starts_with("average gate fidelity (not):"))
        .unwrap();
    let f: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(f > 0.999, "{f}");
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("t,input,p_plus,p_minus,leakage,photon_number\n"));
}

#[test]
fn scenario_writes_its_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("t1");
    let o = kerrcat(&[
        "scenario",
        "--id",
        "table1",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(dir.join("manifest.json").exists());
    assert!(dir.join("table1.csv").exists());

    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"id": "table1", "surprise": true}"#).unwrap();
    assert_eq!(
        kerrcat(&["scenario", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}
