use std::path::{Path, PathBuf};

use clap::Parser;

use perchlab::cli::{run, Cli, RunManifest};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/configs")
}

fn cli(args: &[&str], config: &Path, out: &Path) -> Cli {
    let mut v: Vec<String> = std::iter::once("perchlab".to_string()).chain(args.iter().map(|s| s.to_string())).collect();
    v.extend([
        "--config".into(),
        config.display().to_string(),
        "--out".into(),
        out.display().to_string(),
    ]);
    Cli::try_parse_from(v).unwrap()
}

#[test]
fn schema_error_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"gyro_csv": "g.csv", "setup": {"mass": 0.03, "string_separation": "wide", "string_length": 0.5}}"#,
    )
    .unwrap();
    let err = run(&cli(&["sysid", "inertia"], &cfg, &dir.path().join("out"))).unwrap_err().to_string();
    assert!(err.contains("setup.string_separation"), "{err}");
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"dataset": "d.jsonl", "titel": "x"}"#).unwrap();
    let err = run(&cli(&["plot"], &cfg, &dir.path().join("out"))).unwrap_err().to_string();
    assert!(err.contains("titel"), "{err}");
}

#[test]
fn missing_input_names_expected_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("motor.json");
    std::fs::write(&cfg, r#"{"tachometer_csv": "nope.csv", "thrust_per_rpm2": 1e-10, "direction": "up"}"#).unwrap();
    let err = run(&cli(&["sysid", "motor"], &cfg, &dir.path().join("out"))).unwrap_err().to_string();
    assert!(err.contains("nope.csv") && err.contains("t,rpm"), "{err}");
}

#[test]
fn missing_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let err = run(&cli(&["train"], &dir.path().join("absent.json"), &dir.path().join("out")))
        .unwrap_err()
        .to_string();
    assert!(err.contains("absent.json"), "{err}");
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut c = cli(&["learn"], &configs().join("learn_smoke.json"), &out);
    c.dry_run = true;
    let summary = run(&c).unwrap();
    assert!(summary.messages.iter().any(|m| m.contains("cells")));
    assert!(!out.join("dataset.jsonl").exists());
}

#[test]
fn learn_resumes_and_refuses_a_different_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let c = cli(&["learn"], &configs().join("learn_smoke.json"), &out);
    run(&c).unwrap();
    let first = std::fs::read(out.join("dataset.jsonl")).unwrap();

    // Drop one finished cell; the rerun recomputes only that one.
    std::fs::remove_file(out.join("cells/cell_0001.json")).unwrap();
    std::fs::remove_file(out.join("dataset.jsonl")).unwrap();
    let mut c2 = c.clone();
    c2.dry_run = true;
    let plan = run(&c2).unwrap();
    assert!(plan.messages.iter().any(|m| m.contains("1 already complete")), "{:?}", plan.messages);
    run(&c).unwrap();
    assert_eq!(std::fs::read(out.join("dataset.jsonl")).unwrap(), first);

    let mut other = c.clone();
    other.seed = Some(99);
    let err = run(&other).unwrap_err().to_string();
    assert!(err.contains("holds a different sweep"), "{err}");
}

#[test]
fn plot_of_sample_dataset_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&cli(&["plot"], &configs().join("plot.json"), &a)).unwrap();
    run(&cli(&["plot"], &configs().join("plot.json"), &b)).unwrap();
    for f in ["polar.csv", "polar.svg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let m: RunManifest = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.subcommand, "plot");
    assert!(m.outputs.contains_key("polar.svg"));
    assert_eq!(m.inputs.len(), 1);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = cli(&["simulate"], &configs().join("simulate.json"), &dir.path().join("out"));
    c.seed = Some(42);
    let s = run(&c).unwrap();
    assert_eq!(s.manifest.unwrap().seed, Some(42));
}
