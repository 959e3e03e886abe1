//! One-dimensional Lagrangian simulator for a viscous, self-gravitating,
//! radiative and reactive gas bounded by two free surfaces.
//!
//! The gas occupies the mass interval `[0, 1]`. Specific volume `v`,
//! temperature `theta` and reactant mass fraction `z` are cell averages;
//! velocity `u` lives on cell edges. See [`solver`] for the time step and
//! [`diagnostics`] for the integral functionals used to check runs.

pub mod cli;
pub mod config;
pub mod constitutive;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod io;
pub mod mesh;
pub mod solver;
pub mod tridiag;
pub mod verify;

pub use config::{load_config, InitialProfiles, Profile, RunConfig};
pub use constitutive::{CondModel, PhysParams};
pub use diagnostics::DiagnosticsRecord;
pub use driver::Simulation;
pub use error::{Error, Result};
pub use mesh::{Grid, State};
pub use solver::StepReport;
