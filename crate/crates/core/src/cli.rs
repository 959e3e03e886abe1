//! Command implementations behind the `lagrad` binary.
//!
//! Every command returns `Result`; the binary maps errors to exit codes with
//! [`Error::exit_code`].

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{load_config, RunConfig};
use crate::diagnostics::{z_balance_residual, DiagnosticsRecord};
use crate::driver::Simulation;
use crate::error::{Error, Result};
use crate::io::{diagnostics_csv, ensure_dir, fmt_f64, snapshot_path, write_snapshot, write_text};
use crate::mesh::{mean_velocity, width, State};
use crate::verify::convergence_order;
use crate::verify::mms::{spatial_study, temporal_study, Field, MmsCase, MmsPreset, StudyLevel};

/// Fraction of the initial reactant that must be consumed for a run to count as burned.
pub const BURNED_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Quiescent,
    Burned,
    Failed,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Quiescent => "quiescent",
            Classification::Burned => "burned",
            Classification::Failed => "failed",
        }
    }
}

/// Terminal state of one run, as written to `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub config: RunConfig,
    pub classification: Classification,
    pub steps: usize,
    pub t_final: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub min_theta: f64,
    pub max_theta: f64,
    pub min_z: f64,
    pub max_z: f64,
    pub width: f64,
    pub consumed_fraction: f64,
    pub message: String,
}

pub const SUMMARY_COLUMNS: [&str; 20] = [
    "run",
    "q_cond",
    "beta",
    "p_ext",
    "a_act",
    "k_rate",
    "in_theorem_range",
    "status",
    "classification",
    "steps",
    "t_final",
    "min_v",
    "max_v",
    "min_theta",
    "max_theta",
    "min_z",
    "max_z",
    "width",
    "consumed_fraction",
    "message",
];

impl RunSummary {
    fn new(
        config: &RunConfig,
        initial: &State,
        last: &State,
        steps: usize,
        failure: Option<&Error>,
    ) -> Self {
        let min = |xs: &[f64]| xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = |xs: &[f64]| xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z0: f64 = initial.z.iter().sum();
        let z1: f64 = last.z.iter().sum();
        let consumed = if z0 > 0.0 { 1.0 - z1 / z0 } else { 0.0 };
        let classification = match failure {
            Some(_) => Classification::Failed,
            None if consumed >= BURNED_FRACTION => Classification::Burned,
            None => Classification::Quiescent,
        };
        RunSummary {
            config: config.clone(),
            classification,
            steps,
            t_final: last.t,
            min_v: min(&last.v),
            max_v: max(&last.v),
            min_theta: min(&last.theta),
            max_theta: max(&last.theta),
            min_z: min(&last.z),
            max_z: max(&last.z),
            width: width(&last.v, last.grid().dx),
            consumed_fraction: consumed,
            message: failure.map(|e| e.to_string()).unwrap_or_default(),
        }
    }

    /// Summary for a configuration that never started.
    fn rejected(config: &RunConfig, err: &Error) -> Self {
        RunSummary {
            config: config.clone(),
            classification: Classification::Failed,
            steps: 0,
            t_final: 0.0,
            min_v: f64::NAN,
            max_v: f64::NAN,
            min_theta: f64::NAN,
            max_theta: f64::NAN,
            min_z: f64::NAN,
            max_z: f64::NAN,
            width: f64::NAN,
            consumed_fraction: f64::NAN,
            message: err.to_string(),
        }
    }

    pub fn completed(&self) -> bool {
        self.classification != Classification::Failed
    }

    pub fn csv_row(&self, run: usize) -> String {
        let p = &self.config.params;
        let mut cells = vec![run.to_string()];
        cells.extend([p.q_cond, p.beta, p.p_ext, p.a_act, p.k_rate].map(fmt_f64));
        cells.push(p.in_theorem_range().to_string());
        cells.push(
            if self.completed() {
                "completed"
            } else {
                "failed"
            }
            .into(),
        );
        cells.push(self.classification.as_str().into());
        cells.push(self.steps.to_string());
        cells.extend(
            [
                self.t_final,
                self.min_v,
                self.max_v,
                self.min_theta,
                self.max_theta,
                self.min_z,
                self.max_z,
                self.width,
                self.consumed_fraction,
            ]
            .map(fmt_f64),
        );
        cells.push(csv_quote(&self.message));
        cells.join(",")
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

pub fn summary_csv(rows: &[RunSummary]) -> String {
    let mut out = SUMMARY_COLUMNS.join(",");
    out.push('\n');
    for (k, r) in rows.iter().enumerate() {
        out.push_str(&r.csv_row(k));
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
struct FailureManifest<'a> {
    run_id: &'a str,
    reason: String,
    exit_code: i32,
    step: usize,
    t: f64,
    last_snapshot: String,
}

/// Runs one configuration, writing into `out_dir`:
///
/// * `config.toml`: the effective configuration
/// * `snapshots/snap_<step>.csv`: every `output_every` steps plus the initial and final states
/// * `diagnostics.csv`: one row for the initial state and one per accepted step
/// * `summary.csv`: a single summary row
/// * `failure.toml`: only when the run fails
///
/// The summary is returned even for failed runs; the error is returned alongside it.
pub fn execute_run(
    config: &RunConfig,
    run_id: &str,
    out_dir: &Path,
) -> Result<(RunSummary, Option<Error>)> {
    let mut sim = Simulation::new(config.clone())?;
    ensure_dir(&out_dir.join("snapshots"))?;
    write_text(&out_dir.join("config.toml"), &config.to_toml_string())?;
    let params = &config.params;
    let initial = sim.state.clone();
    write_snapshot(&snapshot_path(out_dir, 0), run_id, params, &sim.state)?;

    let mut records = vec![sim.record()?];
    let mut failure = None;
    let mut last_written = 0;
    while !sim.finished() {
        match sim.advance().and_then(|_| sim.record()) {
            Ok(r) => records.push(r),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
        if config.output_every > 0 && sim.steps % config.output_every == 0 {
            write_snapshot(
                &snapshot_path(out_dir, sim.steps),
                run_id,
                params,
                &sim.state,
            )?;
            last_written = sim.steps;
        }
    }
    if last_written != sim.steps {
        write_snapshot(
            &snapshot_path(out_dir, sim.steps),
            run_id,
            params,
            &sim.state,
        )?;
    }
    write_text(&out_dir.join("diagnostics.csv"), &diagnostics_csv(&records))?;

    let summary = RunSummary::new(config, &initial, &sim.state, sim.steps, failure.as_ref());
    write_text(
        &out_dir.join("summary.csv"),
        &summary_csv(std::slice::from_ref(&summary)),
    )?;

    if let Some(err) = &failure {
        let manifest = FailureManifest {
            run_id,
            reason: err.to_string(),
            exit_code: err.exit_code(),
            step: sim.steps,
            t: sim.state.t,
            last_snapshot: format!("snapshots/snap_{:07}.csv", sim.steps),
        };
        let text = toml::to_string(&manifest).expect("manifest serializes");
        write_text(&out_dir.join("failure.toml"), &text)?;
    }
    Ok((summary, failure))
}

/// [`execute_run`], turning a simulation failure into an error after the artifacts are written.
pub fn run_command(config: &RunConfig, run_id: &str, out_dir: &Path) -> Result<RunSummary> {
    match execute_run(config, run_id, out_dir)? {
        (summary, None) => Ok(summary),
        (_, Some(err)) => Err(err),
    }
}

/// Thresholds applied by [`run_checks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckTolerances {
    /// Relative drift of the total energy over the run.
    pub energy_drift: f64,
    /// Species balance residual after removing the implicit-Euler defect `1/2 sum (dz)^2 dx`.
    pub z_balance: f64,
    /// Growth of `max z` allowed per step.
    pub max_principle: f64,
    /// Width identity residual per step, relative to `max(1, width)`.
    pub width_identity: f64,
    /// Mass-weighted mean velocity.
    pub momentum: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            energy_drift: 1e-3,
            z_balance: 1e-11,
            max_principle: 1e-14,
            width_identity: 1e-12,
            momentum: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
    pub steps: usize,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> usize {
        self.items.iter().filter(|i| !i.passed).count()
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            let tag = if item.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{tag}  {:<22} {}", item.name, item.detail);
        }
        out
    }
}

#[derive(Default)]
struct StepChecks {
    positivity: Option<String>,
    z_range: Option<String>,
    max_principle: (f64, usize),
    width_identity: f64,
    z_defect: f64,
}

/// Runs the configuration to `t_end` and evaluates the invariant suite.
pub fn run_checks(config: &RunConfig, tol: &CheckTolerances) -> Result<CheckReport> {
    let mut sim = Simulation::new(config.clone())?;
    let mut records: Vec<DiagnosticsRecord> = vec![sim.record()?];
    let mut sc = StepChecks::default();
    let mut failure = None;

    while !sim.finished() {
        let prev = sim.state.clone();
        let report = match sim.advance() {
            Ok(r) => r,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let s = &sim.state;
        let k = sim.steps;
        if sc.positivity.is_none() {
            if let Some(i) = s.v.iter().position(|&v| v.is_nan() || v <= config.v_floor) {
                sc.positivity = Some(format!("step {k}: v[{i}] = {}", s.v[i]));
            } else if let Some(i) = s
                .theta
                .iter()
                .position(|&t| t.is_nan() || t <= config.theta_floor)
            {
                sc.positivity = Some(format!("step {k}: theta[{i}] = {}", s.theta[i]));
            }
        }
        if sc.z_range.is_none() {
            if let Some(i) = s.z.iter().position(|z| !(0.0..=1.0).contains(z)) {
                sc.z_range = Some(format!("step {k}: z[{i}] = {}", s.z[i]));
            }
        }
        let zmax_prev = prev.z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let zmax = s.z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if zmax - zmax_prev > tol.max_principle {
            sc.max_principle.1 += 1;
        }
        sc.max_principle.0 = sc.max_principle.0.max(zmax - zmax_prev);
        let dx = s.grid().dx;
        let (w0, w1) = (width(&prev.v, dx), width(&s.v, dx));
        let n = s.n_cells();
        let gap = (w1 - w0 - report.dt * (s.u[n] - s.u[0])).abs() / w1.max(1.0);
        sc.width_identity = sc.width_identity.max(gap);
        sc.z_defect +=
            s.z.iter()
                .zip(&prev.z)
                .map(|(a, b)| 0.5 * (a - b) * (a - b) * dx)
                .sum::<f64>();
        match sim.record() {
            Ok(r) => records.push(r),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    let mut items = Vec::new();
    let mut push = |name, passed, detail: String| {
        items.push(CheckItem {
            name,
            passed,
            detail,
        })
    };

    push(
        "run completes",
        failure.is_none(),
        match &failure {
            None => format!("{} steps to t = {}", sim.steps, sim.state.t),
            Some(e) => format!("failed at t = {}: {e}", sim.state.t),
        },
    );
    push(
        "positivity",
        sc.positivity.is_none(),
        sc.positivity.unwrap_or_else(|| {
            format!(
                "v > {} and theta > {} on every step",
                config.v_floor, config.theta_floor
            )
        }),
    );
    push(
        "z in [0, 1]",
        sc.z_range.is_none(),
        sc.z_range.unwrap_or_else(|| "every step".into()),
    );
    push(
        "maximum principle",
        sc.max_principle.1 == 0,
        format!(
            "largest per-step rise of max z {:.3e}, {} violations",
            sc.max_principle.0.max(0.0),
            sc.max_principle.1
        ),
    );
    push(
        "width identity",
        sc.width_identity <= tol.width_identity,
        format!(
            "max residual {:.3e} (tol {:.0e})",
            sc.width_identity, tol.width_identity
        ),
    );

    let min_u = records
        .iter()
        .map(|r| r.u_entropy)
        .fold(f64::INFINITY, f64::min);
    let min_v = records
        .iter()
        .map(|r| r.v_dissipation)
        .fold(f64::INFINITY, f64::min);
    push("U >= 0", min_u >= 0.0, format!("min U = {min_u:.6e}"));
    push("V >= 0", min_v >= 0.0, format!("min V = {min_v:.6e}"));

    let budget = records
        .iter()
        .map(|r| r.entropy_budget())
        .fold(
            0.0f64,
            |a, b| if b.is_finite() { a.max(b) } else { f64::NAN },
        );
    push(
        "U + int V bounded",
        budget.is_finite() && budget <= config.run_cap,
        format!("max {budget:.6e} (cap {:.0e})", config.run_cap),
    );

    let (first, last) = (records[0], records[records.len() - 1]);
    let drift = ((last.e_total - first.e_total) / first.e_total).abs();
    push(
        "energy drift",
        drift <= tol.energy_drift,
        format!("relative {drift:.3e} (tol {:.0e})", tol.energy_drift),
    );

    let zb = if records.len() >= 2 {
        z_balance_residual(&records)?
    } else {
        0.0
    };
    let zb_gap = zb + sc.z_defect;
    push(
        "z balance",
        zb_gap.abs() <= tol.z_balance,
        format!(
            "residual {zb:.3e}, step defect {:.3e}, mismatch {zb_gap:.3e} (tol {:.0e})",
            0.0 - sc.z_defect,
            tol.z_balance
        ),
    );

    let momentum = mean_velocity(&sim.state.u, &sim.state.grid());
    push(
        "momentum",
        momentum.abs() <= tol.momentum,
        format!(
            "final mean velocity {momentum:.3e} (tol {:.0e})",
            tol.momentum
        ),
    );

    Ok(CheckReport {
        items,
        steps: sim.steps,
    })
}

/// Prints the check table to `out`; returns an invariant error when any item fails.
pub fn check_command(config: &RunConfig, out: &mut dyn Write) -> Result<CheckReport> {
    let report = run_checks(config, &CheckTolerances::default())?;
    out.write_all(report.table().as_bytes())
        .map_err(|e| Error::io("<stdout>", e))?;
    if report.passed() {
        Ok(report)
    } else {
        Err(Error::Invariant(format!(
            "{} of {} checks failed",
            report.failures(),
            report.items.len()
        )))
    }
}

/// Parameter axes of a sweep; absent axes keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub q_cond: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub p_ext: Option<Vec<f64>>,
    pub a_act: Option<Vec<f64>>,
    pub k_rate: Option<Vec<f64>>,
}

/// Sweep manifest: a base configuration file (relative to the manifest) and a grid.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepManifest {
    pub base: PathBuf,
    #[serde(default)]
    pub grid: SweepGrid,
}

/// Cartesian product in the order `q_cond, beta, p_ext, a_act, k_rate`, last axis fastest.
pub fn expand_grid(base: &RunConfig, grid: &SweepGrid) -> Vec<RunConfig> {
    let axis = |a: &Option<Vec<f64>>, default: f64| a.clone().unwrap_or_else(|| vec![default]);
    let p = &base.params;
    let mut out = Vec::new();
    for &q in &axis(&grid.q_cond, p.q_cond) {
        for &b in &axis(&grid.beta, p.beta) {
            for &pe in &axis(&grid.p_ext, p.p_ext) {
                for &a in &axis(&grid.a_act, p.a_act) {
                    for &k in &axis(&grid.k_rate, p.k_rate) {
                        let mut c = base.clone();
                        c.params.q_cond = q;
                        c.params.beta = b;
                        c.params.p_ext = pe;
                        c.params.a_act = a;
                        c.params.k_rate = k;
                        out.push(c);
                    }
                }
            }
        }
    }
    out
}

pub fn load_manifest(path: &Path) -> Result<(SweepManifest, RunConfig)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: SweepManifest = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base_path = path.parent().unwrap_or(Path::new(".")).join(&manifest.base);
    let base = load_config(&base_path)?;
    Ok((manifest, base))
}

/// Runs every grid point concurrently on `jobs` workers (all cores when `None`).
///
/// Each run writes into `out_dir/run_<k>`; `out_dir/summary.csv` holds one row per
/// run in manifest order. Failed or invalid runs are recorded and do not stop the sweep.
pub fn sweep_command(
    manifest_path: &Path,
    out_dir: &Path,
    jobs: Option<usize>,
) -> Result<Vec<RunSummary>> {
    use rayon::prelude::*;
    let (manifest, base) = load_manifest(manifest_path)?;
    let configs = expand_grid(&base, &manifest.grid);
    ensure_dir(out_dir)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let results: Vec<Result<RunSummary>> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(k, cfg)| {
                let run_id = format!("run_{k:04}");
                let dir = out_dir.join(&run_id);
                match cfg.validate().and_then(|_| execute_run(cfg, &run_id, &dir)) {
                    Ok((summary, _)) => Ok(summary),
                    Err(e @ Error::Io { .. }) => Err(e),
                    Err(e) => Ok(RunSummary::rejected(cfg, &e)),
                }
            })
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    write_text(&out_dir.join("summary.csv"), &summary_csv(&rows))?;
    Ok(rows)
}

pub const MMS_COLUMNS: [&str; 12] = [
    "study",
    "n_cells",
    "dt",
    "l2_v",
    "l2_u",
    "l2_theta",
    "l2_z",
    "order_v",
    "order_u",
    "order_theta",
    "order_z",
    "preset",
];

/// Spatial study settings: `n = 64 * 2^k`, `dt = 0.5 dx^2`, `T = 0.1`.
pub const MMS_SPATIAL: (usize, f64, f64) = (64, 0.5, 0.1);
/// Temporal study settings: `n = 256`, `dt = 1.6e-3 / 2^k`, `T = 0.2`.
pub const MMS_TEMPORAL: (usize, f64, f64) = (256, 1.6e-3, 0.2);

pub fn mms_spatial(preset: MmsPreset, levels: usize) -> Result<Vec<StudyLevel>> {
    let (n0, coeff, t_end) = MMS_SPATIAL;
    let cells: Vec<usize> = (0..levels).map(|k| n0 << k).collect();
    spatial_study(&MmsCase::new(preset), &cells, t_end, coeff)
}

pub fn mms_temporal(preset: MmsPreset, levels: usize) -> Result<Vec<StudyLevel>> {
    let (n, dt0, t_end) = MMS_TEMPORAL;
    let dts: Vec<f64> = (0..levels).map(|k| dt0 / (1u64 << k) as f64).collect();
    temporal_study(&MmsCase::new(preset), n, t_end, &dts)
}

/// Observed L2 orders between consecutive levels (refinement ratio 2).
pub fn study_orders(levels: &[StudyLevel]) -> Result<Vec<[f64; 4]>> {
    levels
        .windows(2)
        .map(|w| {
            let mut o = [0.0; 4];
            for (k, f) in Field::ALL.iter().enumerate() {
                o[k] = convergence_order(w[0].errors.l2(*f), w[1].errors.l2(*f), 2.0)?;
            }
            Ok(o)
        })
        .collect()
}

/// Spatial and temporal convergence tables for one preset, as CSV.
pub fn mms_command(preset: MmsPreset, levels: usize, out: &mut dyn Write) -> Result<()> {
    if levels < 2 {
        return Err(Error::Config("--levels must be at least 2".into()));
    }
    let name = match preset {
        MmsPreset::Trig => "a",
        MmsPreset::TanhReactive => "b",
    };
    let mut text = MMS_COLUMNS.join(",");
    text.push('\n');
    for (study, table) in [
        ("space", mms_spatial(preset, levels)?),
        ("time", mms_temporal(preset, levels)?),
    ] {
        let orders = study_orders(&table)?;
        for (k, lvl) in table.iter().enumerate() {
            let mut row = vec![study.to_string(), lvl.n_cells.to_string(), fmt_f64(lvl.dt)];
            row.extend(lvl.errors.l2.map(fmt_f64));
            match k.checked_sub(1) {
                Some(j) => row.extend(orders[j].map(|o| format!("{o:.4}"))),
                None => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
            row.push(name.into());
            text.push_str(&row.join(","));
            text.push('\n');
        }
    }
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}
