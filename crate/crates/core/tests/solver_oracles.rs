//! Solver checks against independent references: closed-form motion, the
//! explicit integrator and self-convergence.

use std::f64::consts::PI;

use lagrad::mesh::physical_coordinates;
use lagrad::solver::{cfl_dt, momentum_step, try_step, NoForcing};
use lagrad::verify::explicit::{explicit_dt_bound, explicit_reference_step};
use lagrad::{Grid, Profile, RunConfig, Simulation, State};

/// Uniform gas in pressure balance: `R + a/3 = 1 + 1 = p_e`.
fn balanced(n: usize, t_end: f64) -> RunConfig {
    let mut c = RunConfig {
        n_cells: n,
        t_end,
        ..RunConfig::default()
    };
    c.params.a_rad = 3.0;
    c.params.p_ext = 2.0;
    c.params.g_grav = 0.0;
    c.params.k_rate = 0.0;
    c
}

fn bump(n: usize, t_end: f64) -> RunConfig {
    let mut c = RunConfig {
        n_cells: n,
        t_end,
        ..RunConfig::default()
    };
    c.params.g_grav = 0.1;
    c.params.p_ext = 0.5;
    c.params.k_rate = 0.0;
    c.initial.theta = Profile::GaussianBump {
        base: 1.0,
        amplitude: 0.5,
        center: 0.5,
        width: 0.1,
    };
    c
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn state_linf(a: &State, b: &State) -> f64 {
    linf(&a.v, &b.v)
        .max(linf(&a.u, &b.u))
        .max(linf(&a.theta, &b.theta))
        .max(linf(&a.z, &b.z))
}

#[test]
fn uniform_translation_moves_boundary_linearly() {
    let cfg = balanced(32, 0.25);
    let c = 0.3;
    let mut s = State::uniform(32, 1.0, 1.0, 0.5);
    s.u.iter_mut().for_each(|u| *u = c);
    s.a_pos = -0.5;
    let mut sim = Simulation::from_state(cfg, s.clone());
    let mut elapsed = 0.0;
    while !sim.finished() {
        elapsed += sim.advance().unwrap().dt;
    }
    assert_eq!(sim.state.t, 0.25);
    assert!(sim.state.u.iter().all(|&u| u == c));
    assert_eq!(sim.state.v, s.v);
    assert_eq!(sim.state.theta, s.theta);
    assert!((sim.state.a_pos - (-0.5 + c * 0.25)).abs() < 1e-14);
    assert!((elapsed - 0.25).abs() < 1e-14);
    let y = physical_coordinates(&sim.state);
    assert!((y[32] - (0.5 + c * 0.25)).abs() < 1e-14);
}

fn explicit_stable(cfg: &RunConfig, s0: &State, dt: f64) -> bool {
    let mut s = s0.clone();
    while s.t < cfg.t_end - 1e-14 {
        let h = dt.min(cfg.t_end - s.t);
        match explicit_reference_step(&s, h, &cfg.params, &NoForcing) {
            Ok(next) => s = next,
            Err(_) => return false,
        }
        if s.u.iter().any(|u| u.is_nan() || u.abs() >= 10.0) {
            return false;
        }
    }
    true
}

/// With weak diffusion the explicit integrator is limited by sound waves only,
/// so bisection on it measures the true acoustic stability limit.
#[test]
fn acoustic_step_within_factor_two_of_explicit_stability_limit() {
    let mut cfg = bump(128, 0.2);
    for k in [
        &mut cfg.params.mu,
        &mut cfg.params.kappa1,
        &mut cfg.params.kappa2,
        &mut cfg.params.d_diff,
    ] {
        *k = 1e-4;
    }
    cfg.cfl_number = 1.0;
    let s0 = Simulation::new(cfg.clone()).unwrap().state;
    let dt = cfl_dt(&s0, &cfg.params, &cfg).unwrap();
    assert!(explicit_dt_bound(&s0, &cfg.params).unwrap() > 10.0 * dt);

    let (mut lo, mut hi) = (dt / 16.0, dt * 16.0);
    assert!(explicit_stable(&cfg, &s0, lo));
    assert!(!explicit_stable(&cfg, &s0, hi));
    for _ in 0..16 {
        let mid = (lo * hi).sqrt();
        if explicit_stable(&cfg, &s0, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ratio = lo / dt;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "stable {lo:e} vs computed {dt:e}"
    );
}

fn smooth_velocity_state(n: usize) -> State {
    let g = Grid::new(n);
    let mut s = State::uniform(n, 1.0, 1.0, 0.0);
    for j in 0..=n {
        s.u[j] = 0.01 * (PI * g.edge(j)).cos();
    }
    s
}

#[test]
fn momentum_agrees_with_explicit_update() {
    let cfg = balanced(128, 0.1);
    let s0 = smooth_velocity_state(128);
    let bound = explicit_dt_bound(&s0, &cfg.params).unwrap();
    let mut locals = Vec::new();
    for dt in [0.8 * bound, 0.4 * bound, 0.2 * bound] {
        let imex = momentum_step(&s0, dt, &cfg.params, &NoForcing).unwrap();
        let expl = explicit_reference_step(&s0, dt, &cfg.params, &NoForcing)
            .unwrap()
            .u;
        let local = linf(&imex, &expl);
        assert!(
            local <= 5.0 * dt * dt,
            "dt {dt:e}: one-step difference {local:e}"
        );
        locals.push(local);

        let (mut a, mut b) = (s0.clone(), s0.clone());
        let mut global: f64 = 0.0;
        while a.t < cfg.t_end - 1e-14 {
            let h = dt.min(cfg.t_end - a.t);
            a = try_step(&a, h, &cfg, &NoForcing).unwrap().0;
            b = explicit_reference_step(&b, h, &cfg.params, &NoForcing).unwrap();
            global = global.max(linf(&a.u, &b.u));
        }
        assert!(
            global <= 5.0 * dt * cfg.t_end,
            "dt {dt:e}: accumulated difference {global:e}"
        );
    }
    // second order per step
    for w in locals.windows(2) {
        let r = w[0] / w[1];
        assert!((3.5..=4.5).contains(&r), "local ratio {r}");
    }
}

fn run_bump(cfl: f64) -> State {
    let mut cfg = bump(64, 0.1);
    cfg.cfl_number = cfl;
    let mut sim = Simulation::new(cfg).unwrap();
    while !sim.finished() {
        sim.advance().unwrap();
    }
    sim.state
}

/// Richardson-extrapolated reference from the two finest runs removes the
/// leading error term, so the error of the two coarse runs halves with `dt`.
#[test]
fn splitting_error_is_first_order_in_dt() {
    let c = 0.4;
    let coarse = run_bump(c);
    let medium = run_bump(c / 2.0);
    let f8 = run_bump(c / 8.0);
    let f16 = run_bump(c / 16.0);
    let extrapolate =
        |a: &[f64], b: &[f64]| -> Vec<f64> { b.iter().zip(a).map(|(y, x)| 2.0 * y - x).collect() };
    let reference = State {
        v: extrapolate(&f8.v, &f16.v),
        u: extrapolate(&f8.u, &f16.u),
        theta: extrapolate(&f8.theta, &f16.theta),
        z: extrapolate(&f8.z, &f16.z),
        t: f16.t,
        a_pos: f16.a_pos,
    };
    let e1 = state_linf(&coarse, &reference);
    let e2 = state_linf(&medium, &reference);
    let ratio = e1 / e2;
    assert!(
        (1.7..=2.3).contains(&ratio),
        "errors {e1:e} {e2:e} ratio {ratio}"
    );
}
