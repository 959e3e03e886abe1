//! Lagrangian mass mesh and the staggered discrete state.
//!
//! The mass interval `[0, 1]` is split into `n` equal cells. Specific volume,
//! temperature and mass fraction live at cell centers; velocity lives on the
//! `n + 1` cell edges. Edge `j` owns the control volume between the adjacent
//! cell centers, so the two boundary edges carry half a cell of mass.

use crate::config::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n_cells: usize,
    pub dx: f64,
}

impl Grid {
    pub fn new(n_cells: usize) -> Self {
        assert!(n_cells > 0, "grid needs at least one cell");
        Grid {
            n_cells,
            dx: 1.0 / n_cells as f64,
        }
    }

    pub fn n_edges(&self) -> usize {
        self.n_cells + 1
    }

    /// Mass coordinate of the center of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    /// Mass coordinate of edge `j`.
    pub fn edge(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    /// Mass of the control volume around edge `j`.
    pub fn edge_mass(&self, j: usize) -> f64 {
        if j == 0 || j == self.n_cells {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    pub fn total_mass(&self) -> f64 {
        (0..self.n_cells).map(|_| self.dx).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub z: Vec<f64>,
    /// Edge velocities, `n_cells + 1` entries.
    pub u: Vec<f64>,
    pub t: f64,
    /// Physical position of the left free boundary.
    pub a_pos: f64,
}

impl State {
    /// Uniform state with zero velocity.
    pub fn uniform(n_cells: usize, v: f64, theta: f64, z: f64) -> Self {
        State {
            v: vec![v; n_cells],
            theta: vec![theta; n_cells],
            z: vec![z; n_cells],
            u: vec![0.0; n_cells + 1],
            t: 0.0,
            a_pos: 0.0,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.v.len()
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n_cells())
    }

    /// Checks positivity of `v`, `theta`, the range of `z` and array shapes.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n_cells();
        if self.theta.len() != n || self.z.len() != n || self.u.len() != n + 1 {
            return Err(Error::Invariant("inconsistent array lengths".into()));
        }
        for i in 0..n {
            if !(self.v[i] > 0.0 && self.v[i].is_finite()) {
                return Err(Error::Invariant(format!(
                    "v[{i}] = {} not positive",
                    self.v[i]
                )));
            }
            if !(self.theta[i] > 0.0 && self.theta[i].is_finite()) {
                return Err(Error::Invariant(format!(
                    "theta[{i}] = {} not positive",
                    self.theta[i]
                )));
            }
            if !(0.0..=1.0).contains(&self.z[i]) {
                return Err(Error::Invariant(format!(
                    "z[{i}] = {} outside [0, 1]",
                    self.z[i]
                )));
            }
        }
        if let Some(j) = self.u.iter().position(|u| !u.is_finite()) {
            return Err(Error::Invariant(format!("u[{j}] is not finite")));
        }
        Ok(())
    }
}

/// Physical slab width `sum_i v_i dx`, summed left to right.
pub fn width(v: &[f64], dx: f64) -> f64 {
    v.iter().map(|vi| vi * dx).sum()
}

/// Mass-weighted mean of the edge velocities.
pub fn mean_velocity(u: &[f64], grid: &Grid) -> f64 {
    u.iter()
        .enumerate()
        .map(|(j, uj)| uj * grid.edge_mass(j))
        .sum()
}

/// Samples the configured profiles on the mesh.
///
/// The velocity is shifted by its mass average so that the initial momentum is zero.
pub fn init_state(config: &RunConfig) -> Result<State> {
    let grid = Grid::new(config.n_cells);
    let prof = &config.initial;
    let n = grid.n_cells;

    let v: Vec<f64> = (0..n).map(|i| prof.v.eval(grid.center(i))).collect();
    let theta: Vec<f64> = (0..n).map(|i| prof.theta.eval(grid.center(i))).collect();
    let z: Vec<f64> = (0..n).map(|i| prof.z.eval(grid.center(i))).collect();
    let mut u: Vec<f64> = (0..=n).map(|j| prof.u.eval(grid.edge(j))).collect();

    for i in 0..n {
        if !(v[i].is_finite() && v[i] > 0.0) {
            return Err(Error::Config(format!(
                "initial v must be > 0; cell {i} has {}",
                v[i]
            )));
        }
        if !(theta[i].is_finite() && theta[i] > 0.0) {
            return Err(Error::Config(format!(
                "initial theta must be > 0; cell {i} has {}",
                theta[i]
            )));
        }
        if !(0.0..=1.0).contains(&z[i]) {
            return Err(Error::Config(format!(
                "initial z must lie in [0, 1]; cell {i} has {}",
                z[i]
            )));
        }
    }
    if let Some(j) = u.iter().position(|x| !x.is_finite()) {
        return Err(Error::Config(format!(
            "initial u is not finite at edge {j}"
        )));
    }

    let mean = mean_velocity(&u, &grid);
    for uj in &mut u {
        *uj -= mean;
    }

    Ok(State {
        v,
        theta,
        z,
        u,
        t: 0.0,
        a_pos: 0.0,
    })
}

/// Eulerian positions of the cell edges, `y_0 = a(t)`, `y_n = b(t)`.
pub fn physical_coordinates(state: &State) -> Vec<f64> {
    let dx = state.grid().dx;
    let mut y = Vec::with_capacity(state.n_cells() + 1);
    let mut acc = state.a_pos;
    y.push(acc);
    for vi in &state.v {
        acc += vi * dx;
        y.push(acc);
    }
    y
}

/// Free-boundary pair `(a, b)`; `b` is derived from `a` and the slab width.
pub fn boundaries(state: &State) -> (f64, f64) {
    let w = width(&state.v, state.grid().dx);
    (state.a_pos, state.a_pos + w)
}

/// Forward Euler on `a'(t) = u(0, t)`.
pub fn advance_boundary(state: &mut State, dt: f64) {
    state.a_pos += dt * state.u[0];
}
