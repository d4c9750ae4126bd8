use std::fs;
use std::path::Path;
use std::process::Command;

use uwauth_cli::commands::{analytic, emit_scenarios, scenario_presets, simulate, validate, RunOptions};
use uwauth_cli::config::{parse_config, ExperimentConfig};
use uwauth_cli::output::CURVE_HEADER;
use uwauth_cli::CliError;

const SMALL: &str = r#"{
    "scenario_id": "golden",
    "geometry": {"d0": 500, "M": 10},
    "eve": {"kind": "inside_uniform"},
    "plan": {"snr_grid_db": [-5, 0, 10], "n_trials": 3000, "seed": 7}
}"#;

fn opts(dir: &Path) -> RunOptions {
    RunOptions { out: Some(dir.to_path_buf()), ..RunOptions::default() }
}

fn validation_msg(r: Result<ExperimentConfig, CliError>) -> String {
    match r {
        Err(CliError::Validation(m)) => m,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn minimal_config_resolves_every_default() {
    let cfg = parse_config(r#"{"geometry": {"d0": 500, "M": 10}}"#).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
    let resolved = serde_json::to_value(cfg.resolved()).unwrap();
    for key in ["scenario_id", "geometry", "eve", "channel", "thresholds", "plan", "analytic", "outputs"] {
        assert!(resolved.get(key).is_some(), "missing {key}");
    }
    assert_eq!(resolved["plan"]["detection_mode"], "full");
    assert_eq!(resolved["thresholds"]["eps_d"], 1.0);
    assert_eq!(resolved["channel"]["colored"]["pt_db"], 250.0);
    assert_eq!(resolved["plan"]["snr_grid_db"].as_array().unwrap().len(), 9);
}

#[test]
fn config_errors_name_the_field() {
    let m = validation_msg(parse_config(r#"{"thresholds": {"eps_d": -1}}"#));
    assert!(m.contains("thresholds.eps_d"), "{m}");
    let m = validation_msg(parse_config(r#"{"channel": {"colored": {"acoustic": {"band_hi_khz": 200}}}}"#));
    assert!(m.contains("band_hi_khz") && m.contains("1-100 kHz"), "{m}");
    let m = validation_msg(parse_config(r#"{"plan": {"n_trials": 0}}"#));
    assert!(m.contains("plan.n_trials"), "{m}");
    let m = validation_msg(parse_config(r#"{"plan": {"snr_grid_db": []}}"#));
    assert!(m.contains("plan.snr_grid_db"), "{m}");
    let m = validation_msg(parse_config(r#"{"channel": {"mode": "colored_waveform"}, "plan": {"detection_mode": "full"}}"#));
    assert!(m.contains("detection_mode"), "{m}");
    let m = validation_msg(parse_config(r#"{"eve": {"kind": "worst_case_aoa", "target": 10, "radial_offset": 5}}"#));
    assert!(m.contains("eve.target"), "{m}");
}

#[test]
fn unknown_keys_are_all_listed() {
    let m = validation_msg(parse_config(r#"{"geometry": {"d0": 500, "radius": 3}, "plan": {"trials": 5}, "colour": 1}"#));
    for k in ["geometry.radius", "plan.trials", "colour"] {
        assert!(m.contains(k), "{k} missing from: {m}");
    }
}

#[test]
fn simulate_writes_every_family_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config(SMALL).unwrap();
    let out = simulate(&cfg, &opts(tmp.path())).unwrap();
    let mut names: Vec<String> = out.files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into()).collect();
    names.sort();
    assert_eq!(
        names,
        [
            "manifest_simulate.json",
            "mc_final.csv",
            "mc_fusion_and.csv",
            "mc_fusion_mv.csv",
            "mc_fusion_or.csv",
            "mc_identification.csv",
            "mc_step1.csv",
            "mc_test2a_position.csv",
            "mc_test2b_distance.csv",
            "mc_test2c_aoa.csv",
        ]
    );
    let text = fs::read_to_string(tmp.path().join("mc_identification.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CURVE_HEADER.join(","));
    // Identification has no P_fa/P_md: empty fields, not zeros.
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), CURVE_HEADER.len());
    assert_eq!(&row[5..9], ["", "", "", ""]);
    assert!(!row[9].is_empty());
}

#[test]
fn golden_csv_bodies() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config(SMALL).unwrap();
    simulate(&cfg, &opts(tmp.path())).unwrap();
    analytic(&cfg, &opts(tmp.path())).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for name in ["mc_step1.csv", "mc_test2b_distance.csv", "analytic_test2b_distance.csv"] {
        let got = fs::read_to_string(tmp.path().join(name)).unwrap();
        if std::env::var_os("UWAUTH_BLESS").is_some() {
            fs::create_dir_all(&golden).unwrap();
            fs::write(golden.join(name), &got).unwrap();
        }
        let want = fs::read_to_string(golden.join(name)).unwrap();
        assert_eq!(got, want, "{name} drifted from its golden copy");
    }
}

#[test]
fn embedded_config_reproduces_the_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = parse_config(SMALL).unwrap();
    simulate(&cfg, &RunOptions { seed: Some(99), ..opts(a.path()) }).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("manifest_simulate.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
    assert!(manifest["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
    let embedded = parse_config(&manifest["config"].to_string()).unwrap();
    simulate(&embedded, &opts(b.path())).unwrap();
    for f in manifest["files"].as_array().unwrap() {
        let f = f.as_str().unwrap();
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unwritable_output_fails_before_compute() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let mut cfg = parse_config(SMALL).unwrap();
    // Large enough that a late failure would be noticeable.
    cfg.plan.n_trials = 50_000_000;
    let t = std::time::Instant::now();
    let r = simulate(&cfg, &opts(&blocker.join("out")));
    assert!(matches!(r, Err(CliError::Io(_))), "{:?}", r.err());
    assert!(t.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn sigma_hook_breaks_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.plan.n_trials = 20_000;
    let ok = validate(&cfg, &opts(tmp.path())).unwrap();
    assert!(ok.pass(), "{} flags", ok.report.flags());
    let bad = validate(&cfg, &RunOptions { sigma_scale: 2.0, ..opts(tmp.path()) }).unwrap();
    assert!(!bad.pass());
    let csv = fs::read_to_string(tmp.path().join("validation.csv")).unwrap();
    assert!(csv.lines().any(|l| l.ends_with(",true,flag")));
}

#[test]
fn presets_cover_the_attacker_placements() {
    let ids: Vec<String> = scenario_presets().unwrap().into_iter().map(|c| c.scenario_id).collect();
    assert_eq!(
        ids,
        [
            "outside_k1.2",
            "outside_k1.5",
            "outside_k2.0",
            "inside",
            "worst_aoa",
            "worst_distance"
        ]
    );
    let tmp = tempfile::tempdir().unwrap();
    for p in emit_scenarios(tmp.path()).unwrap() {
        parse_config(&fs::read_to_string(&p).unwrap()).unwrap();
    }
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_uwauth"));
    c.env("RUST_LOG", "error");
    c
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");

    fs::write(&cfg, r#"{"thresholds": {"eps_d": -1}}"#).unwrap();
    let s = bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(tmp.path()).status().unwrap();
    assert_eq!(s.code(), Some(1));

    fs::write(&cfg, r#"{"plan": {"n_trials": 5000, "snr_grid_db": [0, 10]}}"#).unwrap();
    let run = |extra: &[&str]| {
        bin().arg("validate").arg("--config").arg(&cfg).arg("--out").arg(tmp.path()).args(extra).output().unwrap()
    };
    assert_eq!(run(&[]).status.code(), Some(0));
    let o = run(&["--sigma-scale", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FLAG"));

    let s = bin().args(["simulate", "--workers", "0", "--out"]).arg(tmp.path()).status().unwrap();
    assert_eq!(s.code(), Some(1));
}
