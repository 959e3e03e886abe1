//! Fully explicit integrator on the same staggered stencils.
//!
//! Momentum is advanced with forward Euler from the old stresses, the volume
//! with the new velocities, and species and energy with forward Euler on the
//! old temperature and mass fraction. Temperature is recovered from the
//! updated internal energy by inverting the equation of state cell by cell.

use crate::constitutive::{
    conductivity, de_dtheta, internal_energy, pressure, reaction_rate, temperature_from_energy,
    PhysParams,
};
use crate::error::{Error, Result};
use crate::mesh::State;
use crate::solver::Forcing;

/// Diffusive stability bound `0.4 dx^2 min(v e_theta / kappa, v^2 / d, v / mu)`.
pub fn explicit_dt_bound(state: &State, params: &PhysParams) -> Result<f64> {
    let dx = state.grid().dx;
    let mut bound = f64::INFINITY;
    for i in 0..state.n_cells() {
        let (v, theta) = (state.v[i], state.theta[i]);
        let kappa = conductivity(v, theta, params)?.kappa;
        let heat = v * de_dtheta(v, theta, params)? / kappa;
        let species = v * v / params.d_diff;
        let viscous = v / params.mu;
        bound = bound.min(heat).min(species).min(viscous);
    }
    Ok(0.4 * dx * dx * bound)
}

pub fn explicit_reference_step(
    state: &State,
    dt: f64,
    params: &PhysParams,
    forcing: &dyn Forcing,
) -> Result<State> {
    let grid = state.grid();
    let (n, dx) = (grid.n_cells, grid.dx);
    let t_new = state.t + dt;

    // momentum
    let stress: Vec<f64> = (0..n)
        .map(|i| {
            let p = pressure(state.v[i], state.theta[i], params)?;
            Ok(-p + params.mu * (state.u[i + 1] - state.u[i]) / (dx * state.v[i]))
        })
        .collect::<Result<_>>()?;
    let mut u = state.u.clone();
    for (j, uj) in u.iter_mut().enumerate() {
        let right = if j < n { stress[j] } else { -params.p_ext };
        let left = if j > 0 { stress[j - 1] } else { -params.p_ext };
        let m = grid.edge_mass(j);
        let lever = if j == 0 {
            0.25 * dx - 0.5
        } else if j == n {
            0.5 - 0.25 * dx
        } else {
            grid.edge(j) - 0.5
        };
        *uj += dt * (right - left) / m - dt * params.g_grav * lever
            + dt * forcing.momentum(grid.edge(j), t_new);
    }

    // volume
    let v: Vec<f64> = (0..n)
        .map(|i| {
            state.v[i] + dt * (u[i + 1] - u[i]) / dx + dt * forcing.volume(grid.center(i), t_new)
        })
        .collect();
    if let Some(i) = v.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Invariant(format!(
            "explicit step: v[{i}] = {}",
            v[i]
        )));
    }

    // species and energy from the old temperature and mass fraction
    let z_old = &state.z;
    let theta_old = &state.theta;
    let species_face: Vec<f64> = (0..n.saturating_sub(1))
        .map(|k| {
            let l = params.d_diff / (v[k] * v[k]);
            let r = params.d_diff / (v[k + 1] * v[k + 1]);
            2.0 * l * r / (l + r) / (dx * dx)
        })
        .collect();
    let k_over_v: Vec<f64> = (0..n)
        .map(|i| Ok(conductivity(v[i], theta_old[i], params)?.kappa / v[i]))
        .collect::<Result<_>>()?;
    let heat_face: Vec<f64> = (0..n.saturating_sub(1))
        .map(|k| 0.5 * (k_over_v[k] + k_over_v[k + 1]) / (dx * dx))
        .collect();

    let mut z = vec![0.0; n];
    let mut theta = vec![0.0; n];
    for i in 0..n {
        let mut dz = 0.0;
        let mut dh = 0.0;
        if i + 1 < n {
            dz += species_face[i] * (z_old[i + 1] - z_old[i]);
            dh += heat_face[i] * (theta_old[i + 1] - theta_old[i]);
        }
        if i > 0 {
            dz -= species_face[i - 1] * (z_old[i] - z_old[i - 1]);
            dh -= heat_face[i - 1] * (theta_old[i] - theta_old[i - 1]);
        }
        let phi = reaction_rate(v[i], theta_old[i], params)?;
        let consumption = phi * z_old[i].powf(params.m_order);
        let x = grid.center(i);
        z[i] = z_old[i] + dt * (dz - consumption + forcing.species(x, t_new));
        if !(0.0..=1.0).contains(&z[i]) {
            return Err(Error::Invariant(format!(
                "explicit step: z[{i}] = {}",
                z[i]
            )));
        }

        let ux = (u[i + 1] - u[i]) / dx;
        let p = pressure(v[i], theta_old[i], params)?;
        let work = (-p + params.mu * ux / v[i]) * ux;
        let e = internal_energy(state.v[i], theta_old[i], params)?
            + dt * (dh + work + params.lambda_heat * consumption + forcing.energy(x, t_new));
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::Invariant(format!(
                "explicit step: energy[{i}] = {e}"
            )));
        }
        theta[i] = temperature_from_energy(v[i], e, params)?;
    }

    let a_pos = state.a_pos + dt * u[0];
    Ok(State {
        v,
        theta,
        z,
        u,
        t: t_new,
        a_pos,
    })
}
