//! Run configuration: physical parameters, numerical controls and initial profiles.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constitutive::PhysParams;
use crate::error::{Error, Result};

/// Closed-form initial profile evaluated on the unit mass interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `base + amplitude * exp(-((x - center) / width)^2)`
    GaussianBump {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `base + amplitude * sin(2 pi wavenumber x + phase)`
    Sine {
        base: f64,
        amplitude: f64,
        wavenumber: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `left + (right - left) * (1 + tanh((x - center) / width)) / 2`
    TanhLayer {
        left: f64,
        right: f64,
        center: f64,
        width: f64,
    },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Constant { value } => value,
            Profile::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => {
                let s = (x - center) / width;
                base + amplitude * (-s * s).exp()
            }
            Profile::Sine {
                base,
                amplitude,
                wavenumber,
                phase,
            } => base + amplitude * (2.0 * PI * wavenumber * x + phase).sin(),
            Profile::TanhLayer {
                left,
                right,
                center,
                width,
            } => left + (right - left) * 0.5 * (1.0 + ((x - center) / width).tanh()),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let width = match *self {
            Profile::GaussianBump { width, .. } | Profile::TanhLayer { width, .. } => Some(width),
            _ => None,
        };
        if let Some(w) = width {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Config(format!("initial.{name}: width must be > 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialProfiles {
    pub v: Profile,
    pub u: Profile,
    pub theta: Profile,
    pub z: Profile,
}

impl Default for InitialProfiles {
    fn default() -> Self {
        InitialProfiles {
            v: Profile::Constant { value: 1.0 },
            u: Profile::Constant { value: 0.0 },
            theta: Profile::Constant { value: 1.0 },
            z: Profile::Constant { value: 1.0 },
        }
    }
}

/// Alternative discretizations used only as negative controls for the invariant checker.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemeVariant {
    #[default]
    Standard,
    /// Species diffusion with absorbing (`z = 0`) ghost cells instead of zero flux.
    LeakySpeciesBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n_cells: usize,
    pub t_end: f64,
    pub cfl_number: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Snapshot cadence in steps; 0 writes only the initial and final snapshots.
    pub output_every: usize,
    pub v_floor: f64,
    pub theta_floor: f64,
    /// Upper bound used by the checker for quantities that must stay bounded.
    pub run_cap: f64,
    pub params: PhysParams,
    pub initial: InitialProfiles,
    #[serde(skip)]
    #[doc(hidden)]
    pub variant: SchemeVariant,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_cells: 128,
            t_end: 0.1,
            cfl_number: 0.5,
            dt_max: 1e-2,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            output_every: 100,
            v_floor: 1e-8,
            theta_floor: 1e-8,
            run_cap: 1e6,
            params: PhysParams::default(),
            initial: InitialProfiles::default(),
            variant: SchemeVariant::Standard,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_cells < 4 {
            return Err(Error::Config(format!(
                "n_cells must be >= 4, got {}",
                self.n_cells
            )));
        }
        let positive = [
            ("t_end", self.t_end),
            ("cfl_number", self.cfl_number),
            ("dt_max", self.dt_max),
            ("newton_tol", self.newton_tol),
            ("v_floor", self.v_floor),
            ("theta_floor", self.theta_floor),
            ("run_cap", self.run_cap),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {value}")));
            }
        }
        if self.newton_max_iter == 0 {
            return Err(Error::Config("newton_max_iter must be >= 1".into()));
        }
        self.initial.v.validate("v")?;
        self.initial.u.validate("u")?;
        self.initial.theta.validate("theta")?;
        self.initial.z.validate("z")?;
        Ok(())
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.params.in_theorem_range() {
            w.push(format!(
                "(q_cond, beta) = ({}, {}) is outside 0 <= beta < q + 9",
                self.params.q_cond, self.params.beta
            ));
        }
        w
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<string>".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("RunConfig is always representable as TOML")
    }
}

/// Reads and validates a TOML run configuration. Unknown keys are rejected.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}
