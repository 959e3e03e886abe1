//! One IMEX step of the Lagrangian system.
//!
//! Sub-steps run in the order momentum, volume, boundary position, species,
//! energy. Viscosity, species diffusion and heat conduction are backward
//! Euler; pressure, compression work and gravity are explicit; the reaction
//! rate is frozen at the old temperature. Every implicit solve is a scalar
//! tridiagonal system written in increment form, so exact fixed points of the
//! discrete operators are preserved bit for bit.

use crate::config::{RunConfig, SchemeVariant};
use crate::constitutive::{
    conductivity, de_dtheta, internal_energy, pressure, reaction_rate, reaction_rate_dtheta,
    PhysParams,
};
use crate::error::{Error, Rejection, Result};
use crate::mesh::{advance_boundary, Grid, State};
use crate::tridiag::Tridiagonal;

/// Smallest step the CFL controller will hand out before declaring blow-up.
pub const DT_UNDERFLOW: f64 = 1e-12;
/// Consecutive rejected attempts tolerated by [`step`].
pub const MAX_ATTEMPTS: usize = 10;
/// Round-off allowance when enforcing `0 <= z <= 1` after the species solve.
pub const Z_ROUNDOFF: f64 = 1e-12;

const REACTION_EPS: f64 = 1e-12;

/// Manufactured source terms added to the right-hand side of each equation.
pub trait Forcing: Sync {
    fn is_active(&self) -> bool {
        true
    }
    fn volume(&self, _x: f64, _t: f64) -> f64 {
        0.0
    }
    fn momentum(&self, _x: f64, _t: f64) -> f64 {
        0.0
    }
    fn energy(&self, _x: f64, _t: f64) -> f64 {
        0.0
    }
    fn species(&self, _x: f64, _t: f64) -> f64 {
        0.0
    }
}

/// The unforced system.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoForcing;

impl Forcing for NoForcing {
    fn is_active(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub newton_iterations: usize,
    pub max_newton_residual: f64,
    pub floor_hit: bool,
    pub nonconverged: bool,
    /// Rejected attempts before this step was accepted.
    pub retries: usize,
    /// `dt * sum (d/v^2) z_x^2 dx` with the new mass fraction.
    pub z_diff_increment: f64,
    /// `dt * sum phi z_old^(m-1) z_new^2 dx` with the frozen rate.
    pub z_react_increment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesUpdate {
    pub z: Vec<f64>,
    pub diff_increment: f64,
    pub react_increment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub iterations: usize,
    pub residual: f64,
}

/// Average of `x - 1/2` over the control volume of edge `j`.
pub(crate) fn gravity_lever(grid: &Grid, j: usize) -> f64 {
    let n = grid.n_cells;
    if j == 0 {
        0.25 * grid.dx - 0.5
    } else if j == n {
        0.5 - 0.25 * grid.dx
    } else {
        grid.edge(j) - 0.5
    }
}

fn pressures(v: &[f64], theta: &[f64], params: &PhysParams) -> Result<Vec<f64>> {
    v.iter()
        .zip(theta)
        .map(|(&v, &t)| pressure(v, t, params))
        .collect()
}

/// Stable step size from the acoustic and reaction time scales.
pub fn cfl_dt(state: &State, params: &PhysParams, config: &RunConfig) -> Result<f64> {
    let dx = state.grid().dx;
    let gamma_factor = params.r_gas / params.cv + 1.0;
    let mut acoustic = f64::INFINITY;
    let mut reaction = f64::INFINITY;
    for i in 0..state.n_cells() {
        let (v, theta) = (state.v[i], state.theta[i]);
        let c2 =
            theta * (params.r_gas + 4.0 / 3.0 * params.a_rad * theta.powi(3) * v) * gamma_factor;
        if c2 > 0.0 {
            acoustic = acoustic.min(dx * v / c2.sqrt());
        }
        let zm = state.z[i].powf(params.m_order);
        let rate = params.lambda_heat * zm * reaction_rate_dtheta(v, theta, params)?;
        reaction = reaction.min(1.0 / (rate + REACTION_EPS));
    }
    let dt = config.cfl_number * acoustic.min(reaction).min(config.dt_max);
    if dt.is_nan() || dt < DT_UNDERFLOW {
        return Err(Error::DtUnderflow { dt, t: state.t });
    }
    let remaining = config.t_end - state.t;
    Ok(if remaining > 0.0 {
        dt.min(remaining)
    } else {
        dt
    })
}

/// Backward-Euler viscous momentum update with explicit pressure and gravity.
///
/// Boundary edges own half a cell and see the prescribed total stress `-p_e` outside.
pub fn momentum_step(
    state: &State,
    dt: f64,
    params: &PhysParams,
    forcing: &dyn Forcing,
) -> Result<Vec<f64>> {
    let grid = state.grid();
    let (n, dx) = (grid.n_cells, grid.dx);
    let p = pressures(&state.v, &state.theta, params)?;
    let w: Vec<f64> = state.v.iter().map(|v| params.mu / (v * dx)).collect();
    let sigma: Vec<f64> = (0..n)
        .map(|i| -p[i] + w[i] * (state.u[i + 1] - state.u[i]))
        .collect();
    let outside = -params.p_ext;
    let t_new = state.t + dt;

    let mut a = Tridiagonal::zeros(n + 1);
    let mut rhs = vec![0.0; n + 1];
    for j in 0..=n {
        let m = grid.edge_mass(j);
        let right = if j < n { sigma[j] } else { outside };
        let left = if j > 0 { sigma[j - 1] } else { outside };
        let body = -params.g_grav * gravity_lever(&grid, j) + forcing.momentum(grid.edge(j), t_new);
        rhs[j] = dt * (right - left) + dt * m * body;

        a.diag[j] = m;
        if j < n {
            a.diag[j] += dt * w[j];
            a.upper[j] = -dt * w[j];
        }
        if j > 0 {
            a.diag[j] += dt * w[j - 1];
            a.lower[j] = -dt * w[j - 1];
        }
    }
    let du = a.solve(&rhs)?;
    Ok(state.u.iter().zip(du).map(|(u, d)| u + d).collect())
}

/// `v_t = u_x` per cell using the already updated edge velocities.
pub fn volume_step(
    state: &State,
    dt: f64,
    v_floor: f64,
    forcing: &dyn Forcing,
) -> Result<Vec<f64>> {
    let grid = state.grid();
    let t_new = state.t + dt;
    let mut v = Vec::with_capacity(grid.n_cells);
    for i in 0..grid.n_cells {
        let vi = state.v[i]
            + dt * (state.u[i + 1] - state.u[i]) / grid.dx
            + dt * forcing.volume(grid.center(i), t_new);
        if !vi.is_finite() {
            return Err(Error::Rejected(Rejection::NonFinite {
                field: "v",
                cell: i,
            }));
        }
        if vi <= v_floor {
            return Err(Error::Rejected(Rejection::VolumeFloor {
                cell: i,
                value: vi,
            }));
        }
        v.push(vi);
    }
    Ok(v)
}

fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Implicit species diffusion with semi-implicit (linearized) consumption.
pub fn species_step(
    state: &State,
    dt: f64,
    params: &PhysParams,
    forcing: &dyn Forcing,
) -> Result<SpeciesUpdate> {
    species_step_variant(state, dt, params, forcing, SchemeVariant::Standard)
}

pub(crate) fn species_step_variant(
    state: &State,
    dt: f64,
    params: &PhysParams,
    forcing: &dyn Forcing,
    variant: SchemeVariant,
) -> Result<SpeciesUpdate> {
    let grid = state.grid();
    let (n, dx) = (grid.n_cells, grid.dx);
    let t_new = state.t + dt;
    let z = &state.z;

    let rate: Vec<f64> = (0..n)
        .map(|i| {
            let phi = reaction_rate(state.v[i], state.theta[i], params)?;
            Ok(if params.m_order == 1.0 {
                phi
            } else {
                phi * z[i].powf(params.m_order - 1.0)
            })
        })
        .collect::<Result<_>>()?;
    // coeff[k] couples cells k and k+1
    let coeff: Vec<f64> = (0..n.saturating_sub(1))
        .map(|k| {
            let left = params.d_diff / (state.v[k] * state.v[k]);
            let right = params.d_diff / (state.v[k + 1] * state.v[k + 1]);
            harmonic_mean(left, right) / (dx * dx)
        })
        .collect();
    // Absorbing ghost for the negative-control variant: half-cell distance to z = 0.
    let leak: Vec<f64> = match variant {
        SchemeVariant::Standard => vec![0.0; 2],
        SchemeVariant::LeakySpeciesBoundary => vec![
            2.0 * params.d_diff / (state.v[0] * state.v[0] * dx * dx),
            2.0 * params.d_diff / (state.v[n - 1] * state.v[n - 1] * dx * dx),
        ],
    };

    let mut a = Tridiagonal::zeros(n);
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let mut div = 0.0;
        a.diag[i] = 1.0 + dt * rate[i];
        if i + 1 < n {
            div += coeff[i] * (z[i + 1] - z[i]);
            a.diag[i] += dt * coeff[i];
            a.upper[i] = -dt * coeff[i];
        }
        if i > 0 {
            div -= coeff[i - 1] * (z[i] - z[i - 1]);
            a.diag[i] += dt * coeff[i - 1];
            a.lower[i] = -dt * coeff[i - 1];
        }
        if i == 0 {
            div -= leak[0] * z[0];
            a.diag[i] += dt * leak[0];
        }
        if i == n - 1 {
            div -= leak[1] * z[n - 1];
            a.diag[i] += dt * leak[1];
        }
        rhs[i] = dt * (div - rate[i] * z[i] + forcing.species(grid.center(i), t_new));
    }
    let dz = a.solve(&rhs)?;

    let mut z_new = Vec::with_capacity(n);
    for i in 0..n {
        let mut zi = z[i] + dz[i];
        if !zi.is_finite() {
            return Err(Error::Rejected(Rejection::NonFinite {
                field: "z",
                cell: i,
            }));
        }
        if zi < 0.0 {
            if zi < -Z_ROUNDOFF {
                return Err(Error::Invariant(format!("z[{i}] = {zi:e} below 0")));
            }
            zi = 0.0;
        } else if zi > 1.0 {
            if zi > 1.0 + Z_ROUNDOFF {
                return Err(Error::Invariant(format!("z[{i}] = {zi} above 1")));
            }
            zi = 1.0;
        }
        z_new.push(zi);
    }

    let diff_increment = dt
        * coeff
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let g = z_new[k + 1] - z_new[k];
                c * g * g * dx
            })
            .sum::<f64>();
    let react_increment = dt
        * rate
            .iter()
            .zip(&z_new)
            .map(|(r, zi)| r * zi * zi * dx)
            .sum::<f64>();

    Ok(SpeciesUpdate {
        z: z_new,
        diff_increment,
        react_increment,
    })
}

/// Newton solve of the implicit energy balance for the new temperature.
///
/// `state` must already hold `u`, `v` and `z` at the new level and the old
/// temperature; `v_old` is the specific volume before the volume update.
pub fn energy_step(
    state: &State,
    v_old: &[f64],
    dt: f64,
    config: &RunConfig,
    forcing: &dyn Forcing,
) -> Result<(Vec<f64>, EnergyReport)> {
    let params = &config.params;
    let grid = state.grid();
    let (n, dx) = (grid.n_cells, grid.dx);
    let t_new = state.t + dt;
    let theta_old = &state.theta;
    let v = &state.v;

    let mut explicit = vec![0.0; n];
    let mut e_old = vec![0.0; n];
    for i in 0..n {
        e_old[i] = internal_energy(v_old[i], theta_old[i], params)?;
        let ux = (state.u[i + 1] - state.u[i]) / dx;
        let p = pressure(v[i], theta_old[i], params)?;
        let work = (-p + params.mu * ux / v[i]) * ux;
        let phi = reaction_rate(v[i], theta_old[i], params)?;
        let heat = params.lambda_heat * phi * state.z[i].powf(params.m_order);
        explicit[i] = work + heat + forcing.energy(grid.center(i), t_new);
    }

    let dx2 = dx * dx;
    let mut theta = theta_old.clone();
    let mut k_over_v = vec![0.0; n];
    let mut face = vec![0.0; n.saturating_sub(1)];
    let mut residual = vec![0.0; n];
    let mut e_new = vec![0.0; n];
    let mut jac = Tridiagonal::zeros(n);

    let mut iterations = 0;
    loop {
        for i in 0..n {
            k_over_v[i] = conductivity(v[i], theta[i], params)?.kappa / v[i];
            e_new[i] = internal_energy(v[i], theta[i], params)?;
        }
        for k in 0..face.len() {
            face[k] = 0.5 * (k_over_v[k] + k_over_v[k + 1]) / dx2;
        }
        let mut max_f = 0.0f64;
        let mut max_e = 1.0f64;
        for i in 0..n {
            let mut h = 0.0;
            if i + 1 < n {
                h += face[i] * (theta[i + 1] - theta[i]);
            }
            if i > 0 {
                h -= face[i - 1] * (theta[i] - theta[i - 1]);
            }
            residual[i] = e_new[i] - e_old[i] - dt * (h + explicit[i]);
            max_f = max_f.max(residual[i].abs());
            max_e = max_e.max(e_new[i].abs());
        }
        if !max_f.is_finite() {
            return Err(Error::Rejected(Rejection::NonFinite {
                field: "theta",
                cell: 0,
            }));
        }
        let scaled = max_f / max_e;
        if scaled <= config.newton_tol {
            for (i, &t) in theta.iter().enumerate() {
                if t <= config.theta_floor {
                    return Err(Error::Rejected(Rejection::TemperatureFloor {
                        cell: i,
                        value: t,
                    }));
                }
            }
            return Ok((
                theta,
                EnergyReport {
                    iterations,
                    residual: scaled,
                },
            ));
        }
        if iterations == config.newton_max_iter {
            return Err(Error::Rejected(Rejection::NewtonNonconvergence {
                iterations,
                residual: scaled,
            }));
        }

        // Jacobian with the conductivity frozen at the current iterate.
        for i in 0..n {
            jac.diag[i] = de_dtheta(v[i], theta[i], params)?;
            jac.lower[i] = 0.0;
            jac.upper[i] = 0.0;
            if i + 1 < n {
                jac.diag[i] += dt * face[i];
                jac.upper[i] = -dt * face[i];
            }
            if i > 0 {
                jac.diag[i] += dt * face[i - 1];
                jac.lower[i] = -dt * face[i - 1];
            }
        }
        let delta = jac.solve(&residual)?;
        // Damp so that no cell loses more than 90% of its temperature in one update.
        let mut alpha = 1.0f64;
        for i in 0..n {
            if delta[i] > 0.9 * theta[i] {
                alpha = alpha.min(0.9 * theta[i] / delta[i]);
            }
        }
        for i in 0..n {
            theta[i] -= alpha * delta[i];
            if !theta[i].is_finite() {
                return Err(Error::Rejected(Rejection::NonFinite {
                    field: "theta",
                    cell: i,
                }));
            }
        }
        iterations += 1;
    }
}

/// Single attempt at a step of exactly `dt`; rejections are returned, not retried.
pub fn try_step(
    state: &State,
    dt: f64,
    config: &RunConfig,
    forcing: &dyn Forcing,
) -> Result<(State, StepReport)> {
    let params = &config.params;
    let mut next = state.clone();

    next.u = momentum_step(state, dt, params, forcing)?;
    next.v = volume_step(&next, dt, config.v_floor, forcing)?;
    advance_boundary(&mut next, dt);
    let species = species_step_variant(&next, dt, params, forcing, config.variant)?;
    next.z = species.z;
    let (theta, energy) = energy_step(&next, &state.v, dt, config, forcing)?;
    next.theta = theta;
    next.t = state.t + dt;

    if !forcing.is_active() {
        let z_max_old = state.z.iter().cloned().fold(0.0, f64::max);
        if let Some(i) = next.z.iter().position(|&z| z > z_max_old + 1e-14) {
            return Err(Error::Invariant(format!(
                "maximum principle: z[{i}] = {} exceeds previous max {z_max_old}",
                next.z[i]
            )));
        }
    }

    Ok((
        next,
        StepReport {
            dt,
            newton_iterations: energy.iterations,
            max_newton_residual: energy.residual,
            floor_hit: false,
            nonconverged: false,
            retries: 0,
            z_diff_increment: species.diff_increment,
            z_react_increment: species.react_increment,
        },
    ))
}

/// Advances by one CFL-limited step, halving `dt` on rejection.
pub fn step(state: &State, config: &RunConfig) -> Result<(State, StepReport)> {
    step_forced(state, config, &NoForcing, None)
}

/// As [`step`], with forcing and an optional fixed trial step that bypasses the CFL controller.
pub fn step_forced(
    state: &State,
    config: &RunConfig,
    forcing: &dyn Forcing,
    fixed_dt: Option<f64>,
) -> Result<(State, StepReport)> {
    let remaining = config.t_end - state.t;
    let mut dt = match fixed_dt {
        Some(dt) if remaining > 0.0 => dt.min(remaining),
        Some(dt) => dt,
        None => cfl_dt(state, &config.params, config)?,
    };
    let mut floor_hit = false;
    let mut nonconverged = false;
    let mut last = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        match try_step(state, dt, config, forcing) {
            Ok((mut next, mut report)) => {
                if attempt == 0 && dt >= remaining {
                    next.t = config.t_end;
                }
                report.retries = attempt;
                report.floor_hit = floor_hit;
                report.nonconverged = nonconverged;
                return Ok((next, report));
            }
            Err(Error::Rejected(r)) => {
                match r {
                    Rejection::VolumeFloor { .. } | Rejection::TemperatureFloor { .. } => {
                        floor_hit = true
                    }
                    Rejection::NewtonNonconvergence { .. } => nonconverged = true,
                    Rejection::NonFinite { .. } => {}
                }
                last = r.to_string();
                dt *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::SimulationFailure {
        reason: format!("{MAX_ATTEMPTS} consecutive rejected steps; last: {last}"),
        last_state: Box::new(state.clone()),
    })
}
