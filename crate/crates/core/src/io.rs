//! Snapshot and diagnostics serialization.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which reads back
//! to the identical `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::constitutive::PhysParams;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::mesh::{physical_coordinates, State};

pub const SNAPSHOT_COLUMNS: [&str; 7] = [
    "i",
    "x_center",
    "y_center",
    "v",
    "theta",
    "z",
    "u_left_edge",
];

/// Formats a float so that parsing it back yields the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub run_id: String,
    pub params: PhysParams,
    pub state: State,
}

/// Renders a snapshot: `#`-prefixed header lines, a column line, one row per cell.
///
/// The right-boundary velocity has no row of its own and is carried in the header.
pub fn snapshot_to_string(run_id: &str, params: &PhysParams, state: &State) -> String {
    let grid = state.grid();
    let y = physical_coordinates(state);
    let mut out = String::new();
    let _ = writeln!(out, "# run_id = {run_id}");
    let _ = writeln!(out, "# t = {}", fmt_f64(state.t));
    let _ = writeln!(out, "# n_cells = {}", grid.n_cells);
    let _ = writeln!(out, "# a_pos = {}", fmt_f64(state.a_pos));
    let _ = writeln!(
        out,
        "# u_right_boundary = {}",
        fmt_f64(state.u[grid.n_cells])
    );
    let params_toml = toml::to_string(params).expect("parameters serialize");
    for line in params_toml.lines() {
        let _ = writeln!(out, "# params.{line}");
    }
    let _ = writeln!(out, "{}", SNAPSHOT_COLUMNS.join(","));
    for i in 0..grid.n_cells {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{}",
            fmt_f64(grid.center(i)),
            fmt_f64(0.5 * (y[i] + y[i + 1])),
            fmt_f64(state.v[i]),
            fmt_f64(state.theta[i]),
            fmt_f64(state.z[i]),
            fmt_f64(state.u[i]),
        );
    }
    out
}

pub fn write_snapshot(path: &Path, run_id: &str, params: &PhysParams, state: &State) -> Result<()> {
    fs::write(path, snapshot_to_string(run_id, params, state)).map_err(|e| Error::io(path, e))
}

pub fn parse_snapshot(text: &str, origin: &Path) -> Result<Snapshot> {
    let bad = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let num = |line: usize, s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| bad(line, format!("'{s}': {e}")))
    };

    let mut run_id = None;
    let (mut t, mut n_cells, mut a_pos, mut u_right) = (None, None, None, None);
    let mut params_toml = String::new();
    let mut rows: Vec<[f64; 4]> = Vec::new();
    let mut seen_columns = false;

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        if let Some(rest) = raw.strip_prefix("# ") {
            if let Some(p) = rest.strip_prefix("params.") {
                params_toml.push_str(p);
                params_toml.push('\n');
                continue;
            }
            let (key, value) = rest
                .split_once(" = ")
                .ok_or_else(|| bad(line_no, format!("malformed header '{raw}'")))?;
            match key {
                "run_id" => run_id = Some(value.to_string()),
                "t" => t = Some(num(line_no, value)?),
                "n_cells" => {
                    n_cells = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| bad(line_no, format!("n_cells: {e}")))?,
                    )
                }
                "a_pos" => a_pos = Some(num(line_no, value)?),
                "u_right_boundary" => u_right = Some(num(line_no, value)?),
                other => return Err(bad(line_no, format!("unknown header key '{other}'"))),
            }
        } else if !seen_columns {
            if raw != SNAPSHOT_COLUMNS.join(",") {
                return Err(bad(line_no, format!("unexpected column line '{raw}'")));
            }
            seen_columns = true;
        } else {
            let fields: Vec<&str> = raw.split(',').collect();
            if fields.len() != SNAPSHOT_COLUMNS.len() {
                return Err(bad(
                    line_no,
                    format!("expected 7 fields, got {}", fields.len()),
                ));
            }
            if fields[0].parse::<usize>().ok() != Some(rows.len()) {
                return Err(bad(
                    line_no,
                    format!("row index '{}' out of order", fields[0]),
                ));
            }
            rows.push([
                num(line_no, fields[3])?,
                num(line_no, fields[4])?,
                num(line_no, fields[5])?,
                num(line_no, fields[6])?,
            ]);
        }
    }

    let missing = |what: &str| Error::Parse {
        path: origin.to_path_buf(),
        message: format!("missing header '{what}'"),
    };
    let n_cells = n_cells.ok_or_else(|| missing("n_cells"))?;
    if rows.len() != n_cells {
        return Err(Error::Parse {
            path: origin.to_path_buf(),
            message: format!("expected {n_cells} rows, found {}", rows.len()),
        });
    }
    let params: PhysParams = toml::from_str(&params_toml).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: format!("params: {e}"),
    })?;
    let mut u: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    u.push(u_right.ok_or_else(|| missing("u_right_boundary"))?);
    Ok(Snapshot {
        run_id: run_id.ok_or_else(|| missing("run_id"))?,
        params,
        state: State {
            v: rows.iter().map(|r| r[0]).collect(),
            theta: rows.iter().map(|r| r[1]).collect(),
            z: rows.iter().map(|r| r[2]).collect(),
            u,
            t: t.ok_or_else(|| missing("t"))?,
            a_pos: a_pos.ok_or_else(|| missing("a_pos"))?,
        },
    })
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot(&text, path)
}

/// Diagnostics header line, in [`DiagnosticsRecord::COLUMNS`] order.
pub fn diagnostics_header() -> String {
    DiagnosticsRecord::COLUMNS.join(",")
}

pub fn diagnostics_row(r: &DiagnosticsRecord) -> String {
    r.values()
        .iter()
        .map(|&x| fmt_f64(x))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = diagnostics_header();
    out.push('\n');
    for r in records {
        out.push_str(&diagnostics_row(r));
        out.push('\n');
    }
    out
}

/// `<dir>/snapshots/snap_<step>.csv`
pub fn snapshot_path(out_dir: &Path, step: usize) -> PathBuf {
    out_dir
        .join("snapshots")
        .join(format!("snap_{step:07}.csv"))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
