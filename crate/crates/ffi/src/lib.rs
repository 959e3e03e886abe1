//! C interface to the simulator.
//!
//! A `LagradSim` is an opaque handle created from a TOML configuration and
//! released with `lagrad_sim_free`. Every fallible function returns a
//! `LagradStatus`; on failure the message is available from
//! `lagrad_last_error_message` on the same thread until the next failing call.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lagrad::{load_config, DiagnosticsRecord, Error, RunConfig, Simulation};

/// Status codes. Values 1 to 3 match the exit codes of the command-line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagradStatus {
    Ok = 0,
    /// Invalid configuration, parse failure or bad argument.
    Validation = 1,
    /// Rejected step, solver failure or violated invariant.
    Simulation = 2,
    Io = 3,
    NullPointer = 4,
    /// Destination buffer shorter than the field.
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagradField {
    /// Specific volume, `n_cells` values.
    V = 0,
    /// Temperature, `n_cells` values.
    Theta = 1,
    /// Reactant mass fraction, `n_cells` values.
    Z = 2,
    /// Edge velocity, `n_cells + 1` values.
    U = 3,
}

/// Integral diagnostics of the current state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LagradDiagnostics {
    pub t: f64,
    pub dt: f64,
    pub e_total: f64,
    pub u_entropy: f64,
    pub v_dissipation: f64,
    pub v_dissipation_accum: f64,
    pub z_l2: f64,
    pub z_diff_accum: f64,
    pub z_react_accum: f64,
    pub width: f64,
    pub min_v: f64,
    pub min_theta: f64,
    pub min_z: f64,
    pub max_z: f64,
    pub momentum: f64,
}

impl From<DiagnosticsRecord> for LagradDiagnostics {
    fn from(r: DiagnosticsRecord) -> Self {
        LagradDiagnostics {
            t: r.t,
            dt: r.dt,
            e_total: r.e_total,
            u_entropy: r.u_entropy,
            v_dissipation: r.v_dissipation,
            v_dissipation_accum: r.v_dissipation_accum,
            z_l2: r.z_l2,
            z_diff_accum: r.z_diff_accum,
            z_react_accum: r.z_react_accum,
            width: r.width,
            min_v: r.min_v,
            min_theta: r.min_theta,
            min_z: r.min_z,
            max_z: r.max_z,
            momentum: r.momentum,
        }
    }
}

/// Opaque simulation handle.
pub struct LagradSim {
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> LagradStatus {
    match err.exit_code() {
        1 => LagradStatus::Validation,
        3 => LagradStatus::Io,
        _ => LagradStatus::Simulation,
    }
}

/// Runs `f`, recording the message of any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (LagradStatus, String)>) -> LagradStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LagradStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LagradStatus::Panic
        }
    }
}

fn lift(err: Error) -> (LagradStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (LagradStatus, String) {
    (LagradStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (LagradStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| {
        (
            LagradStatus::Validation,
            format!("{what} is not UTF-8: {e}"),
        )
    })
}

unsafe fn create(
    cfg: Result<RunConfig, Error>,
    out: *mut *mut LagradSim,
) -> Result<(), (LagradStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = ptr::null_mut();
    let sim = Simulation::new(cfg.map_err(lift)?).map_err(lift)?;
    *out = Box::into_raw(Box::new(LagradSim { sim }));
    Ok(())
}

/// Creates a simulation from TOML text. `*out` is null on failure.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lagrad_sim_from_toml(
    toml: *const c_char,
    out: *mut *mut LagradSim,
) -> LagradStatus {
    guard(|| {
        let text = read_str(toml, "toml")?;
        create(RunConfig::from_toml_str(text), out)
    })
}

/// Creates a simulation from a TOML file. `*out` is null on failure.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lagrad_sim_from_file(
    path: *const c_char,
    out: *mut *mut LagradSim,
) -> LagradStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        create(load_config(path), out)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must come from a constructor above and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lagrad_sim_free(sim: *mut LagradSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

unsafe fn handle<'a>(sim: *const LagradSim) -> Result<&'a LagradSim, (LagradStatus, String)> {
    sim.as_ref().ok_or_else(|| null("sim"))
}

unsafe fn handle_mut<'a>(sim: *mut LagradSim) -> Result<&'a mut LagradSim, (LagradStatus, String)> {
    sim.as_mut().ok_or_else(|| null("sim"))
}

/// Advances one accepted step. `dt_out` may be null.
///
/// On failure the handle keeps the last valid state.
///
/// # Safety
/// `sim` must be a live handle; `dt_out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn lagrad_sim_step(sim: *mut LagradSim, dt_out: *mut f64) -> LagradStatus {
    guard(|| {
        let h = handle_mut(sim)?;
        if h.sim.finished() {
            return Err((
                LagradStatus::Validation,
                "simulation already reached t_end".into(),
            ));
        }
        let report = h.sim.advance().map_err(lift)?;
        if !dt_out.is_null() {
            *dt_out = report.dt;
        }
        Ok(())
    })
}

/// Steps until `t`, landing on it exactly. `t` is capped at the configured `t_end`.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lagrad_sim_run_until(sim: *mut LagradSim, t: f64) -> LagradStatus {
    guard(|| {
        let h = handle_mut(sim)?;
        if !t.is_finite() {
            return Err((
                LagradStatus::Validation,
                format!("target time {t} is not finite"),
            ));
        }
        let t_end = h.sim.config.t_end;
        h.sim.config.t_end = t.min(t_end);
        let mut result = Ok(());
        while !h.sim.finished() {
            if let Err(e) = h.sim.advance() {
                result = Err(lift(e));
                break;
            }
        }
        h.sim.config.t_end = t_end;
        result
    })
}

/// # Safety
/// `sim` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lagrad_sim_time(sim: *const LagradSim, out: *mut f64) -> LagradStatus {
    guard(|| {
        let h = handle(sim)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = h.sim.state.t;
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lagrad_sim_n_cells(
    sim: *const LagradSim,
    out: *mut usize,
) -> LagradStatus {
    guard(|| {
        let h = handle(sim)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = h.sim.state.n_cells();
        Ok(())
    })
}

/// Number of accepted steps so far.
///
/// # Safety
/// `sim` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lagrad_sim_steps(sim: *const LagradSim, out: *mut usize) -> LagradStatus {
    guard(|| {
        let h = handle(sim)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = h.sim.steps;
        Ok(())
    })
}

/// Copies a field into `buf`, which must hold at least `len` doubles.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lagrad_sim_copy_field(
    sim: *const LagradSim,
    field: LagradField,
    buf: *mut f64,
    len: usize,
) -> LagradStatus {
    guard(|| {
        let h = handle(sim)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let s = &h.sim.state;
        let src = match field {
            LagradField::V => &s.v,
            LagradField::Theta => &s.theta,
            LagradField::Z => &s.z,
            LagradField::U => &s.u,
        };
        if len < src.len() {
            return Err((
                LagradStatus::BufferTooSmall,
                format!("field needs {} values, buffer holds {len}", src.len()),
            ));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn lagrad_sim_diagnostics(
    sim: *const LagradSim,
    out: *mut LagradDiagnostics,
) -> LagradStatus {
    guard(|| {
        let h = handle(sim)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = h.sim.record().map_err(lift)?.into();
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn lagrad_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lagrad_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
