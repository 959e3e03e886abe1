use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use lagrad::cli::{
    check_command, run_checks, run_command, sweep_command, CheckTolerances, Classification,
};
use lagrad::config::SchemeVariant;
use lagrad::io::read_snapshot;
use lagrad::{load_config, Error, RunConfig};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.toml"))
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn shipped_scenarios_load() {
    for name in [
        "reference",
        "reactive",
        "stiff",
        "equilibrium",
        "expanding",
        "floor_violation",
    ] {
        let cfg = load_config(scenario(name)).unwrap();
        assert!(cfg.warnings().is_empty(), "{name}");
    }
}

#[test]
fn equilibrium_run_has_constant_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load_config(scenario("equilibrium")).unwrap();
    let summary = run_command(&cfg, "eq", dir.path()).unwrap();
    assert_eq!(summary.t_final, 0.1);
    let rows = csv_rows(&dir.path().join("diagnostics.csv"));
    assert_eq!(rows.len(), summary.steps + 1);
    for r in &rows[1..] {
        assert_eq!(r[2..], rows[0][2..], "only t and dt may change");
    }
    // output_every = 0: initial and final snapshots only
    let snaps = fs::read_dir(dir.path().join("snapshots")).unwrap().count();
    assert_eq!(snaps, 2);
    assert!(!dir.path().join("failure.toml").exists());
}

#[test]
fn snapshots_follow_output_cadence_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load_config(scenario("reference")).unwrap();
    cfg.t_end = 0.05;
    cfg.output_every = 10;
    let summary = run_command(&cfg, "ref", dir.path()).unwrap();
    let mut names: Vec<String> = fs::read_dir(dir.path().join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let expected = 1 + summary.steps / 10 + usize::from(!summary.steps.is_multiple_of(10));
    assert_eq!(names.len(), expected);
    assert_eq!(names[0], "snap_0000000.csv");

    let last = read_snapshot(&dir.path().join("snapshots").join(names.last().unwrap())).unwrap();
    assert_eq!(last.run_id, "ref");
    assert_eq!(last.state.t, summary.t_final);
    assert_eq!(last.params, cfg.params);
    let echoed = load_config(dir.path().join("config.toml")).unwrap();
    assert_eq!(echoed, cfg);
}

#[test]
fn floor_violation_writes_failure_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load_config(scenario("floor_violation")).unwrap();
    let err = run_command(&cfg, "fv", dir.path()).unwrap_err();
    assert!(matches!(err, Error::SimulationFailure { .. }), "{err}");
    assert_eq!(err.exit_code(), 2);
    let manifest: toml::Table = fs::read_to_string(dir.path().join("failure.toml"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(manifest["exit_code"].as_integer(), Some(2));
    let snap = dir.path().join(manifest["last_snapshot"].as_str().unwrap());
    let last = read_snapshot(&snap).unwrap();
    last.state.check_invariants().unwrap();
    let summary = csv_rows(&dir.path().join("summary.csv"));
    assert_eq!(summary[0][8], "failed");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = load_config(scenario("reactive")).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_command(&cfg, "r", a.path()).unwrap();
    run_command(&cfg, "r", b.path()).unwrap();
    for f in [
        "diagnostics.csv",
        "summary.csv",
        "snapshots/snap_0000050.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn check_passes_on_shipped_scenarios() {
    for name in ["reference", "reactive", "equilibrium"] {
        let cfg = load_config(scenario(name)).unwrap();
        let mut out = Vec::new();
        let report = check_command(&cfg, &mut out).unwrap();
        assert!(report.passed());
        let table = String::from_utf8(out).unwrap();
        assert_eq!(table.lines().count(), report.items.len());
        assert!(
            table.lines().all(|l| l.starts_with("PASS")),
            "{name}:\n{table}"
        );
    }
}

#[test]
fn check_catches_leaky_species_boundary() {
    let mut cfg = load_config(scenario("reactive")).unwrap();
    cfg.variant = SchemeVariant::LeakySpeciesBoundary;
    let report = run_checks(&cfg, &CheckTolerances::default()).unwrap();
    let failed: Vec<&str> = report
        .items
        .iter()
        .filter(|i| !i.passed)
        .map(|i| i.name)
        .collect();
    assert!(failed.contains(&"z balance"), "{}", report.table());
    let err = check_command(&cfg, &mut Vec::new()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

fn write_manifest(dir: &Path, base: &RunConfig, grid: &str) -> PathBuf {
    fs::write(dir.join("base.toml"), base.to_toml_string()).unwrap();
    let path = dir.join("sweep.toml");
    fs::write(&path, format!("base = \"base.toml\"\n[grid]\n{grid}")).unwrap();
    path
}

fn short_reference() -> RunConfig {
    let mut cfg = load_config(scenario("reactive")).unwrap();
    cfg.n_cells = 32;
    cfg.t_end = 0.05;
    cfg
}

#[test]
fn single_point_sweep_matches_run_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_reference();
    let manifest = write_manifest(dir.path(), &cfg, "");
    let sweep_dir = dir.path().join("sweep");
    let rows = sweep_command(&manifest, &sweep_dir, Some(1)).unwrap();
    assert_eq!(rows.len(), 1);
    let run_dir = dir.path().join("run");
    run_command(&cfg, "single", &run_dir).unwrap();
    assert_eq!(
        fs::read_to_string(sweep_dir.join("summary.csv")).unwrap(),
        fs::read_to_string(run_dir.join("summary.csv")).unwrap()
    );
    assert_eq!(
        fs::read(sweep_dir.join("run_0000/diagnostics.csv")).unwrap(),
        fs::read(run_dir.join("diagnostics.csv")).unwrap()
    );
}

#[test]
fn zero_rate_sweep_is_quiescent() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        &short_reference(),
        "k_rate = [0.0]\na_act = [1.0, 4.0]\nbeta = [0.0, 2.0]\n",
    );
    let rows = sweep_command(&manifest, &dir.path().join("out"), None).unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert_eq!(r.classification, Classification::Quiescent);
        assert_eq!((r.min_z, r.max_z, r.consumed_fraction), (1.0, 1.0, 0.0));
    }
}

#[test]
fn pressure_sweep_widths_are_finite_and_order_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        &short_reference(),
        "p_ext = [-0.1, 0.0, 0.5]\na_act = [-1.0, 4.0]\n",
    );
    let serial = sweep_command(&manifest, &dir.path().join("serial"), Some(1)).unwrap();
    sweep_command(&manifest, &dir.path().join("parallel"), Some(4)).unwrap();
    assert_eq!(
        fs::read(dir.path().join("serial/summary.csv")).unwrap(),
        fs::read(dir.path().join("parallel/summary.csv")).unwrap()
    );
    assert_eq!(serial.len(), 6);
    for (k, r) in serial.iter().enumerate() {
        if r.config.params.a_act < 0.0 {
            assert_eq!(r.classification, Classification::Failed, "run {k}");
            assert!(!r.message.is_empty());
        } else {
            assert!(r.completed(), "run {k}: {}", r.message);
            assert!(r.width.is_finite() && r.width > 0.0);
        }
    }
    // the expanding case ends wider than the compressed one
    assert!(serial[1].width > serial[5].width);
}

fn lagrad() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lagrad"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let status = |cmd: &mut Command| cmd.output().unwrap().status.code();

    let out = lagrad()
        .arg("check")
        .arg(scenario("equilibrium"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS  energy drift"));

    assert_eq!(
        status(
            lagrad()
                .arg("run")
                .arg(scenario("floor_violation"))
                .arg("--out")
                .arg(dir.path().join("fv"))
        ),
        Some(2)
    );
    assert!(dir.path().join("fv/failure.toml").exists());

    assert_eq!(
        status(lagrad().arg("run").arg(dir.path().join("missing.toml"))),
        Some(3)
    );

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[params]\nkappa1 = 5.0\n").unwrap();
    assert_eq!(status(lagrad().arg("check").arg(&bad)), Some(1));
    fs::write(&bad, "n_cells = \"many\"\n").unwrap();
    assert_eq!(status(lagrad().arg("check").arg(&bad)), Some(1));

    assert_eq!(status(lagrad().arg("bogus")), Some(1));
    assert_eq!(status(lagrad().args(["mms", "c"])), Some(1));
    assert_eq!(status(lagrad().arg("--help")), Some(0));
}

#[test]
fn binary_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    fs::write(&cfg, short_reference().to_toml_string()).unwrap();
    let out = lagrad()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "diagnostics.csv",
        "summary.csv",
        "config.toml",
        "snapshots/snap_0000000.csv",
    ] {
        assert!(dir.path().join("o").join(f).exists(), "{f}");
    }
    let snap = read_snapshot(&dir.path().join("o/snapshots/snap_0000000.csv")).unwrap();
    assert_eq!(snap.run_id, "short");
}
