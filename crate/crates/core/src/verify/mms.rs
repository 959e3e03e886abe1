//! Manufactured solutions for the full system.
//!
//! Every manufactured field has the form `base + amp * g(x) * h(t)` with
//! `h(t) = 1 + c sin(omega t + phase)`. For `v`, `theta` and `z` the shape `g`
//! vanishes together with its slope at both ends, so the boundary values of
//! `v` and `theta` never change and the heat and species fluxes are zero there.
//! Velocity uses `g = cos(pi x)`, whose slope also vanishes at the ends. With
//! `p_e = p(v_base, theta_base)` the free-boundary stress condition therefore
//! holds exactly. The sources are the closed-form residuals of the PDE
//! evaluated on these fields (derivation in `docs/mms.md`).

use std::f64::consts::PI;
use std::str::FromStr;

use crate::config::RunConfig;
use crate::constitutive::{
    conductivity, de_dtheta, de_dv, pressure, pressure_partials, reaction_rate, CondModel,
    PhysParams,
};
use crate::driver::Simulation;
use crate::error::{Error, Result};
use crate::mesh::{Grid, State};
use crate::solver::Forcing;

/// Value and derivatives of a field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub f: f64,
    pub fx: f64,
    pub fxx: f64,
    pub ft: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `sin^2(pi x)`
    SinSquared,
    /// `tanh(s sin^2(pi x))`
    TanhSinSquared { steepness: f64 },
    /// `cos(pi x)`
    CosPi,
}

impl Shape {
    /// `(g, g', g'')`
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            Shape::SinSquared => {
                let s = (PI * x).sin();
                (
                    s * s,
                    PI * (2.0 * PI * x).sin(),
                    2.0 * PI * PI * (2.0 * PI * x).cos(),
                )
            }
            Shape::TanhSinSquared { steepness } => {
                let s = (PI * x).sin();
                let w = steepness * s * s;
                let wx = steepness * PI * (2.0 * PI * x).sin();
                let wxx = 2.0 * steepness * PI * PI * (2.0 * PI * x).cos();
                let th = w.tanh();
                let sech2 = 1.0 - th * th;
                (th, sech2 * wx, sech2 * (wxx - 2.0 * th * wx * wx))
            }
            Shape::CosPi => {
                let (s, c) = (PI * x).sin_cos();
                (c, -PI * s, -PI * PI * c)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub base: f64,
    pub amp: f64,
    pub shape: Shape,
    pub c: f64,
    pub omega: f64,
    pub phase: f64,
}

impl FieldSpec {
    pub fn jet(&self, x: f64, t: f64) -> Jet {
        let (g, gx, gxx) = self.shape.eval(x);
        let arg = self.omega * t + self.phase;
        let h = 1.0 + self.c * arg.sin();
        let ht = self.c * self.omega * arg.cos();
        Jet {
            f: self.base + self.amp * g * h,
            fx: self.amp * gx * h,
            fxx: self.amp * gxx * h,
            ft: self.amp * g * ht,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmsPreset {
    /// Trigonometric fields, no gravity, no kinetics.
    Trig,
    /// Tanh-shaped fields with gravity, second-order kinetics and `v`-dependent conductivity.
    TanhReactive,
}

impl FromStr for MmsPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "trig" => Ok(MmsPreset::Trig),
            "b" | "tanh" | "tanh-reactive" => Ok(MmsPreset::TanhReactive),
            other => Err(Error::Config(format!(
                "unknown MMS case '{other}' (expected a|trig or b|tanh)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    V,
    U,
    Theta,
    Z,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::V, Field::U, Field::Theta, Field::Z];

    pub fn name(&self) -> &'static str {
        match self {
            Field::V => "v",
            Field::U => "u",
            Field::Theta => "theta",
            Field::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsCase {
    pub preset: MmsPreset,
    pub params: PhysParams,
    pub v: FieldSpec,
    pub u: FieldSpec,
    pub theta: FieldSpec,
    pub z: FieldSpec,
}

impl MmsCase {
    pub fn new(preset: MmsPreset) -> Self {
        let two_pi = 2.0 * PI;
        let mut params = PhysParams {
            mu: 0.5,
            d_diff: 0.2,
            lambda_heat: 1.0,
            cv: 1.0,
            r_gas: 1.0,
            a_rad: 1.0,
            g_grav: 0.0,
            p_ext: 0.0,
            k_rate: 0.0,
            a_act: 4.0,
            m_order: 1.0,
            beta: 0.0,
            q_cond: 2.0,
            kappa1: 0.5,
            kappa2: 1.0,
            cond_model: CondModel::A,
        };
        let shape = match preset {
            MmsPreset::Trig => Shape::SinSquared,
            MmsPreset::TanhReactive => {
                params.g_grav = 0.1;
                params.k_rate = 5.0;
                params.beta = 1.0;
                params.m_order = 2.0;
                params.cond_model = CondModel::B;
                Shape::TanhSinSquared { steepness: 2.0 }
            }
        };
        let field = |base, amp, c, phase| FieldSpec {
            base,
            amp,
            shape,
            c,
            omega: two_pi,
            phase,
        };
        let v = field(1.0, 0.2, 0.5, 0.0);
        let theta = field(1.0, 0.3, 0.5, 0.5 * PI);
        let z = field(0.55, 0.3, -0.5, 0.0);
        let u = FieldSpec {
            base: 0.0,
            amp: 0.1,
            shape: Shape::CosPi,
            c: 0.5,
            omega: two_pi,
            phase: PI / 3.0,
        };
        params.p_ext = pressure(v.base, theta.base, &params).expect("positive base state");
        MmsCase {
            preset,
            params,
            v,
            u,
            theta,
            z,
        }
    }

    pub fn spec(&self, field: Field) -> &FieldSpec {
        match field {
            Field::V => &self.v,
            Field::U => &self.u,
            Field::Theta => &self.theta,
            Field::Z => &self.z,
        }
    }

    pub fn exact(&self, field: Field, x: f64, t: f64) -> f64 {
        self.spec(field).jet(x, t).f
    }

    /// Manufactured fields sampled on the staggered mesh.
    pub fn exact_state(&self, n_cells: usize, t: f64) -> State {
        let g = Grid::new(n_cells);
        State {
            v: (0..n_cells)
                .map(|i| self.exact(Field::V, g.center(i), t))
                .collect(),
            theta: (0..n_cells)
                .map(|i| self.exact(Field::Theta, g.center(i), t))
                .collect(),
            z: (0..n_cells)
                .map(|i| self.exact(Field::Z, g.center(i), t))
                .collect(),
            u: (0..=n_cells)
                .map(|j| self.exact(Field::U, g.edge(j), t))
                .collect(),
            t,
            a_pos: 0.0,
        }
    }

    fn jets(&self, x: f64, t: f64) -> (Jet, Jet, Jet, Jet) {
        (
            self.v.jet(x, t),
            self.u.jet(x, t),
            self.theta.jet(x, t),
            self.z.jet(x, t),
        )
    }

    fn source_volume(&self, x: f64, t: f64) -> f64 {
        let (v, u, _, _) = self.jets(x, t);
        v.ft - u.fx
    }

    fn source_momentum(&self, x: f64, t: f64) -> Result<f64> {
        let p = &self.params;
        let (v, u, th, _) = self.jets(x, t);
        let (p_v, p_th) = pressure_partials(v.f, th.f, p)?;
        let stress_x =
            -(p_v * v.fx + p_th * th.fx) + p.mu * (u.fxx / v.f - u.fx * v.fx / (v.f * v.f));
        Ok(u.ft - stress_x + p.g_grav * (x - 0.5))
    }

    fn source_energy(&self, x: f64, t: f64) -> Result<f64> {
        let p = &self.params;
        let (v, u, th, z) = self.jets(x, t);
        let e_t = de_dtheta(v.f, th.f, p)? * th.ft + de_dv(v.f, th.f, p)? * v.ft;
        let k = conductivity(v.f, th.f, p)?;
        let heat = ((k.d_v * v.fx + k.d_theta * th.fx) / v.f - k.kappa * v.fx / (v.f * v.f))
            * th.fx
            + k.kappa * th.fxx / v.f;
        let stress = -pressure(v.f, th.f, p)? + p.mu * u.fx / v.f;
        let phi = reaction_rate(v.f, th.f, p)?;
        Ok(e_t - heat - stress * u.fx - p.lambda_heat * phi * z.f.powf(p.m_order))
    }

    fn source_species(&self, x: f64, t: f64) -> Result<f64> {
        let p = &self.params;
        let (v, _, th, z) = self.jets(x, t);
        let diffusion = p.d_diff * (z.fxx / (v.f * v.f) - 2.0 * v.fx * z.fx / v.f.powi(3));
        let phi = reaction_rate(v.f, th.f, p)?;
        Ok(z.ft - diffusion + phi * z.f.powf(p.m_order))
    }
}

impl Forcing for MmsCase {
    fn volume(&self, x: f64, t: f64) -> f64 {
        self.source_volume(x, t)
    }
    fn momentum(&self, x: f64, t: f64) -> f64 {
        self.source_momentum(x, t)
            .expect("manufactured state is admissible")
    }
    fn energy(&self, x: f64, t: f64) -> f64 {
        self.source_energy(x, t)
            .expect("manufactured state is admissible")
    }
    fn species(&self, x: f64, t: f64) -> f64 {
        self.source_species(x, t)
            .expect("manufactured state is admissible")
    }
}

/// Discrete error norms per field, indexed in [`Field::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsErrors {
    pub l2: [f64; 4],
    pub linf: [f64; 4],
}

impl MmsErrors {
    pub fn l2(&self, f: Field) -> f64 {
        self.l2[f as usize]
    }
    pub fn linf(&self, f: Field) -> f64 {
        self.linf[f as usize]
    }
}

/// Mass-weighted L2 and max norms of `state - exact` at `state.t`.
pub fn error_norms(case: &MmsCase, state: &State) -> MmsErrors {
    let g = state.grid();
    let t = state.t;
    let mut l2 = [0.0; 4];
    let mut linf = [0.0f64; 4];
    let mut acc = |k: usize, err: f64, w: f64| {
        l2[k] += w * err * err;
        linf[k] = linf[k].max(err.abs());
    };
    for i in 0..g.n_cells {
        let x = g.center(i);
        acc(0, state.v[i] - case.exact(Field::V, x, t), g.dx);
        acc(2, state.theta[i] - case.exact(Field::Theta, x, t), g.dx);
        acc(3, state.z[i] - case.exact(Field::Z, x, t), g.dx);
    }
    for j in 0..=g.n_cells {
        acc(
            1,
            state.u[j] - case.exact(Field::U, g.edge(j), t),
            g.edge_mass(j),
        );
    }
    MmsErrors {
        l2: l2.map(f64::sqrt),
        linf,
    }
}

/// Runs the forced IMEX solver from the manufactured initial data with a fixed
/// step `config.dt_max` and returns the error norms at `t_end`.
///
/// Physical parameters come from the case; numerical controls from `config`.
pub fn run_mms(
    case: &MmsCase,
    n_cells: usize,
    t_end: f64,
    config: &RunConfig,
) -> Result<MmsErrors> {
    let cfg = RunConfig {
        n_cells,
        t_end,
        params: case.params,
        ..config.clone()
    };
    cfg.validate()?;
    let mut sim = Simulation::from_state(cfg, case.exact_state(n_cells, 0.0));
    let dt = config.dt_max;
    while !sim.finished() {
        sim.advance_with(case, Some(dt))?;
    }
    Ok(error_norms(case, &sim.state))
}

/// Numerical controls used by the convergence studies.
pub fn study_config(dt: f64) -> RunConfig {
    RunConfig {
        dt_max: dt,
        newton_tol: 1e-13,
        ..RunConfig::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyLevel {
    pub n_cells: usize,
    pub dt: f64,
    pub errors: MmsErrors,
}

/// Spatial refinement with `dt = dt_coeff * dx^2`; levels run concurrently.
pub fn spatial_study(
    case: &MmsCase,
    cells: &[usize],
    t_end: f64,
    dt_coeff: f64,
) -> Result<Vec<StudyLevel>> {
    use rayon::prelude::*;
    cells
        .par_iter()
        .map(|&n| {
            let dx = 1.0 / n as f64;
            let dt = dt_coeff * dx * dx;
            let errors = run_mms(case, n, t_end, &study_config(dt))?;
            Ok(StudyLevel {
                n_cells: n,
                dt,
                errors,
            })
        })
        .collect()
}

/// Temporal refinement on a fixed mesh; levels run concurrently.
pub fn temporal_study(
    case: &MmsCase,
    n_cells: usize,
    t_end: f64,
    dts: &[f64],
) -> Result<Vec<StudyLevel>> {
    use rayon::prelude::*;
    dts.par_iter()
        .map(|&dt| {
            let errors = run_mms(case, n_cells, t_end, &study_config(dt))?;
            Ok(StudyLevel {
                n_cells,
                dt,
                errors,
            })
        })
        .collect()
}

/// Residual of the semi-discrete equations with the manufactured fields
/// inserted, as `(interior max, boundary max)` per field.
///
/// Interior entries converge at second order; the half-cell boundary edges of
/// the momentum equation are first-order consistent.
pub fn semi_discrete_residual(case: &MmsCase, n_cells: usize, t: f64) -> Result<[(f64, f64); 4]> {
    let p = &case.params;
    let s = case.exact_state(n_cells, t);
    let g = s.grid();
    let (n, dx) = (n_cells, g.dx);
    let mut out = [(0.0f64, 0.0f64); 4];
    let mut put = |k: usize, boundary: bool, r: f64| {
        let slot = &mut out[k];
        if boundary {
            slot.1 = slot.1.max(r.abs());
        } else {
            slot.0 = slot.0.max(r.abs());
        }
    };

    let stress: Vec<f64> = (0..n)
        .map(|i| {
            Ok(-pressure(s.v[i], s.theta[i], p)? + p.mu * (s.u[i + 1] - s.u[i]) / (dx * s.v[i]))
        })
        .collect::<Result<_>>()?;
    for j in 0..=n {
        let right = if j < n { stress[j] } else { -p.p_ext };
        let left = if j > 0 { stress[j - 1] } else { -p.p_ext };
        let lever = crate::solver::gravity_lever(&g, j);
        let x = g.edge(j);
        let rhs = (right - left) / g.edge_mass(j) - p.g_grav * lever + case.momentum(x, t);
        put(1, j == 0 || j == n, rhs - case.u.jet(x, t).ft);
    }

    for i in 0..n {
        let x = g.center(i);
        let rhs = (s.u[i + 1] - s.u[i]) / dx + case.volume(x, t);
        put(0, false, rhs - case.v.jet(x, t).ft);

        let face_z = |k: usize| {
            let l = p.d_diff / (s.v[k] * s.v[k]);
            let r = p.d_diff / (s.v[k + 1] * s.v[k + 1]);
            2.0 * l * r / (l + r) * (s.z[k + 1] - s.z[k]) / dx
        };
        let face_h = |k: usize| -> Result<f64> {
            let kl = conductivity(s.v[k], s.theta[k], p)?.kappa / s.v[k];
            let kr = conductivity(s.v[k + 1], s.theta[k + 1], p)?.kappa / s.v[k + 1];
            Ok(0.5 * (kl + kr) * (s.theta[k + 1] - s.theta[k]) / dx)
        };
        let (zr, zl) = (
            if i + 1 < n { face_z(i) } else { 0.0 },
            if i > 0 { face_z(i - 1) } else { 0.0 },
        );
        let (hr, hl) = (
            if i + 1 < n { face_h(i)? } else { 0.0 },
            if i > 0 { face_h(i - 1)? } else { 0.0 },
        );
        let phi = reaction_rate(s.v[i], s.theta[i], p)?;
        let zm = s.z[i].powf(p.m_order);
        let boundary = i == 0 || i + 1 == n;

        let rz = (zr - zl) / dx - phi * zm + case.species(x, t);
        put(3, boundary, rz - case.z.jet(x, t).ft);

        let ux = (s.u[i + 1] - s.u[i]) / dx;
        let work = (-pressure(s.v[i], s.theta[i], p)? + p.mu * ux / s.v[i]) * ux;
        let re = (hr - hl) / dx + work + p.lambda_heat * phi * zm + case.energy(x, t);
        let (vj, thj) = (case.v.jet(x, t), case.theta.jet(x, t));
        let e_t = de_dtheta(vj.f, thj.f, p)? * thj.ft + de_dv(vj.f, thj.f, p)? * vj.ft;
        put(2, boundary, re - e_t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn both() -> [MmsCase; 2] {
        [
            MmsCase::new(MmsPreset::Trig),
            MmsCase::new(MmsPreset::TanhReactive),
        ]
    }

    #[test]
    fn presets_parse() {
        assert_eq!("a".parse::<MmsPreset>().unwrap(), MmsPreset::Trig);
        assert_eq!(
            "tanh".parse::<MmsPreset>().unwrap(),
            MmsPreset::TanhReactive
        );
        assert!("c".parse::<MmsPreset>().is_err());
    }

    #[test]
    fn shapes_match_finite_differences() {
        let h = 1e-5;
        for shape in [
            Shape::SinSquared,
            Shape::TanhSinSquared { steepness: 2.0 },
            Shape::CosPi,
        ] {
            for k in 1..20 {
                let x = k as f64 / 20.0;
                let (g, gx, gxx) = shape.eval(x);
                let (gp, _, _) = shape.eval(x + h);
                let (gm, _, _) = shape.eval(x - h);
                assert!((gx - (gp - gm) / (2.0 * h)).abs() < 1e-8);
                assert!((gxx - (gp - 2.0 * g + gm) / (h * h)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn fields_admissible_and_boundary_conditions_hold() {
        for case in both() {
            let p = &case.params;
            for k in 0..=40 {
                let t = 0.5 * k as f64 / 40.0;
                for i in 0..=100 {
                    let x = i as f64 / 100.0;
                    assert!(case.exact(Field::V, x, t) > 0.0);
                    assert!(case.exact(Field::Theta, x, t) > 0.0);
                    let z = case.exact(Field::Z, x, t);
                    assert!((0.0..=1.0).contains(&z));
                }
                for x in [0.0, 1.0] {
                    let (v, u, th, z) = case.jets(x, t);
                    let stress = -pressure(v.f, th.f, p).unwrap() + p.mu * u.fx / v.f;
                    assert!((stress + p.p_ext).abs() < 1e-14, "stress at x={x}");
                    assert!(th.fx.abs() < 1e-14 && z.fx.abs() < 1e-14);
                }
            }
        }
    }

    /// Sources recomputed from finite differences of the manufactured fields and
    /// of the physical fluxes, without any of the closed-form chain rules.
    #[test]
    fn sources_match_finite_difference_oracle() {
        let h = 1e-4;
        for case in both() {
            let p = case.params;
            let f = |fld: Field, x: f64, t: f64| case.exact(fld, x, t);
            let dx = |fld: Field, x: f64, t: f64| (f(fld, x + h, t) - f(fld, x - h, t)) / (2.0 * h);
            let dt = |g: &dyn Fn(f64) -> f64, t: f64| (g(t + h) - g(t - h)) / (2.0 * h);
            let stress = |x: f64, t: f64| {
                -pressure(f(Field::V, x, t), f(Field::Theta, x, t), &p).unwrap()
                    + p.mu * dx(Field::U, x, t) / f(Field::V, x, t)
            };
            let heat_flux = |x: f64, t: f64| {
                let (v, th) = (f(Field::V, x, t), f(Field::Theta, x, t));
                conductivity(v, th, &p).unwrap().kappa / v * dx(Field::Theta, x, t)
            };
            let species_flux = |x: f64, t: f64| {
                let v = f(Field::V, x, t);
                p.d_diff / (v * v) * dx(Field::Z, x, t)
            };
            let energy = |x: f64, t: f64| {
                crate::constitutive::internal_energy(f(Field::V, x, t), f(Field::Theta, x, t), &p)
                    .unwrap()
            };
            for &(x, t) in &[(0.13, 0.02), (0.5, 0.07), (0.77, 0.11), (0.31, 0.3)] {
                let phi = reaction_rate(f(Field::V, x, t), f(Field::Theta, x, t), &p).unwrap();
                let zm = f(Field::Z, x, t).powf(p.m_order);

                let sv = dt(&|s| f(Field::V, x, s), t) - dx(Field::U, x, t);
                let su = dt(&|s| f(Field::U, x, s), t)
                    - (stress(x + h, t) - stress(x - h, t)) / (2.0 * h)
                    + p.g_grav * (x - 0.5);
                let se = dt(&|s| energy(x, s), t)
                    - (heat_flux(x + h, t) - heat_flux(x - h, t)) / (2.0 * h)
                    - stress(x, t) * dx(Field::U, x, t)
                    - p.lambda_heat * phi * zm;
                let sz = dt(&|s| f(Field::Z, x, s), t)
                    - (species_flux(x + h, t) - species_flux(x - h, t)) / (2.0 * h)
                    + phi * zm;

                let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * (1.0 + b.abs());
                assert!(close(case.volume(x, t), sv), "S_v {:?}", case.preset);
                assert!(
                    close(case.momentum(x, t), su),
                    "S_u {:?} {} {}",
                    case.preset,
                    case.momentum(x, t),
                    su
                );
                assert!(
                    close(case.energy(x, t), se),
                    "S_e {:?} {} {}",
                    case.preset,
                    case.energy(x, t),
                    se
                );
                assert!(close(case.species(x, t), sz), "S_z {:?}", case.preset);
            }
        }
    }

    #[test]
    fn semi_discrete_residual_is_second_order_in_interior() {
        for case in both() {
            let coarse = semi_discrete_residual(&case, 64, 0.05).unwrap();
            let fine = semi_discrete_residual(&case, 128, 0.05).unwrap();
            for (k, fld) in Field::ALL.iter().enumerate() {
                let order = (coarse[k].0 / fine[k].0).log2();
                assert!(
                    order > 1.8,
                    "{:?} {}: interior order {order}",
                    case.preset,
                    fld.name()
                );
            }
            // half-cell boundary edges of the momentum equation: first order
            let order_b = (coarse[1].1 / fine[1].1).log2();
            assert!(order_b > 0.8, "{:?}: boundary order {order_b}", case.preset);
        }
    }

    #[test]
    fn error_norms_vanish_on_exact_state() {
        let case = MmsCase::new(MmsPreset::TanhReactive);
        let s = case.exact_state(32, 0.1);
        let e = error_norms(&case, &s);
        assert!(e.l2.iter().chain(&e.linf).all(|&x| x == 0.0));
    }
}
