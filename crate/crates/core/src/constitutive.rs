//! Equations of state, Arrhenius kinetics and heat conductivity.
//!
//! Everything is written in specific-volume form (`v = 1/rho`) and in
//! dimensionless code units. All functions are pure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Temperature at which conductivity derivatives are evaluated when the
/// exponent `q` lies in (0, 1) and `theta` is (numerically) zero.
pub const THETA_DERIV_FLOOR: f64 = 1e-10;

/// Functional form of the heat conductivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CondModel {
    /// `kappa = kappa1 + kappa2 * theta^q`, independent of `v`.
    #[default]
    A,
    /// `kappa = kappa1 + kappa2 * v * theta^q`.
    B,
}

/// Physical and constitutive constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysParams {
    pub mu: f64,
    pub d_diff: f64,
    pub lambda_heat: f64,
    pub cv: f64,
    pub r_gas: f64,
    pub a_rad: f64,
    pub g_grav: f64,
    pub p_ext: f64,
    pub k_rate: f64,
    pub a_act: f64,
    pub m_order: f64,
    pub beta: f64,
    pub q_cond: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub cond_model: CondModel,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            mu: 1.0,
            d_diff: 0.1,
            lambda_heat: 1.0,
            cv: 1.0,
            r_gas: 1.0,
            a_rad: 1.0,
            g_grav: 0.0,
            p_ext: 0.0,
            k_rate: 1.0,
            a_act: 4.0,
            m_order: 1.0,
            beta: 0.0,
            q_cond: 2.0,
            kappa1: 1.0,
            kappa2: 1.0,
            cond_model: CondModel::A,
        }
    }
}

/// Heat conductivity together with its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conductivity {
    pub kappa: f64,
    pub d_v: f64,
    pub d_theta: f64,
}

impl PhysParams {
    /// Checks the sign constraints on every coefficient.
    ///
    /// The kinetics prefactor may be zero, which switches the reaction off.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu", self.mu),
            ("d_diff", self.d_diff),
            ("cv", self.cv),
            ("r_gas", self.r_gas),
            ("a_rad", self.a_rad),
            ("a_act", self.a_act),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {value}")));
            }
        }
        let non_negative = [
            ("lambda_heat", self.lambda_heat),
            ("g_grav", self.g_grav),
            ("k_rate", self.k_rate),
            ("beta", self.beta),
            ("q_cond", self.q_cond),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::Config(format!("{name} must be >= 0, got {value}")));
            }
        }
        if !(self.m_order.is_finite() && self.m_order >= 1.0) {
            return Err(Error::Config(format!(
                "m_order must be >= 1, got {}",
                self.m_order
            )));
        }
        if !self.p_ext.is_finite() {
            return Err(Error::Config("p_ext must be finite".into()));
        }
        if self.kappa1 > self.kappa2 {
            return Err(Error::Config(format!(
                "kappa1 ({}) must not exceed kappa2 ({})",
                self.kappa1, self.kappa2
            )));
        }
        Ok(())
    }

    /// Whether `(q, beta)` lies in the range `0 <= beta < q + 9` covered by the
    /// global existence result. Runs outside it are allowed but flagged.
    pub fn in_theorem_range(&self) -> bool {
        self.q_cond >= 0.0 && self.beta >= 0.0 && self.beta < self.q_cond + 9.0
    }
}

#[inline]
fn check_domain(v: f64, theta: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Domain(format!(
            "specific volume must be > 0, got {v}"
        )));
    }
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be >= 0, got {theta}"
        )));
    }
    Ok(())
}

/// `p = R theta / v + (a/3) theta^4`.
pub fn pressure(v: f64, theta: f64, params: &PhysParams) -> Result<f64> {
    check_domain(v, theta)?;
    Ok(params.r_gas * theta / v + params.a_rad / 3.0 * theta.powi(4))
}

/// `e = C_v theta + a v theta^4`.
pub fn internal_energy(v: f64, theta: f64, params: &PhysParams) -> Result<f64> {
    check_domain(v, theta)?;
    Ok(params.cv * theta + params.a_rad * v * theta.powi(4))
}

/// `de/dtheta = C_v + 4 a v theta^3`; never smaller than `C_v`.
pub fn de_dtheta(v: f64, theta: f64, params: &PhysParams) -> Result<f64> {
    check_domain(v, theta)?;
    Ok(params.cv + 4.0 * params.a_rad * v * theta.powi(3))
}

/// `de/dv = a theta^4`.
pub fn de_dv(v: f64, theta: f64, params: &PhysParams) -> Result<f64> {
    check_domain(v, theta)?;
    Ok(params.a_rad * theta.powi(4))
}

/// Pressure partials `(p_v, p_theta)`.
pub fn pressure_partials(v: f64, theta: f64, params: &PhysParams) -> Result<(f64, f64)> {
    check_domain(v, theta)?;
    let p_v = -params.r_gas * theta / (v * v);
    let p_theta = params.r_gas / v + 4.0 / 3.0 * params.a_rad * theta.powi(3);
    Ok((p_v, p_theta))
}

/// Arrhenius rate `phi = K rho^(m-1) theta^beta exp(-A/theta)` with `rho = 1/v`.
/// At `theta = 0` the rate is exactly zero.
pub fn reaction_rate(v: f64, theta: f64, params: &PhysParams) -> Result<f64> {
    check_domain(v, theta)?;
    if theta == 0.0 || params.k_rate == 0.0 {
        return Ok(0.0);
    }
    let density_factor = if params.m_order == 1.0 {
        1.0
    } else {
        v.powf(1.0 - params.m_order)
    };
    let temp_factor = if params.beta == 0.0 {
        1.0
    } else {
        theta.powf(params.beta)
    };
    Ok(params.k_rate * density_factor * temp_factor * (-params.a_act / theta).exp())
}

/// `d phi / d theta = phi (beta/theta + A/theta^2)`; zero at `theta = 0`.
pub fn reaction_rate_dtheta(v: f64, theta: f64, params: &PhysParams) -> Result<f64> {
    let phi = reaction_rate(v, theta, params)?;
    if phi == 0.0 {
        return Ok(0.0);
    }
    Ok(phi * (params.beta / theta + params.a_act / (theta * theta)))
}

/// Heat conductivity for the configured model together with `(kappa_v, kappa_theta)`.
pub fn conductivity(v: f64, theta: f64, params: &PhysParams) -> Result<Conductivity> {
    check_domain(v, theta)?;
    let q = params.q_cond;
    let theta_q = if q == 0.0 { 1.0 } else { theta.powf(q) };
    // d(theta^q)/dtheta
    let dtheta_q = if q == 0.0 {
        0.0
    } else if q < 1.0 {
        q * theta.max(THETA_DERIV_FLOOR).powf(q - 1.0)
    } else if q == 1.0 {
        1.0
    } else {
        q * theta.powf(q - 1.0)
    };
    let c = match params.cond_model {
        CondModel::A => Conductivity {
            kappa: params.kappa1 + params.kappa2 * theta_q,
            d_v: 0.0,
            d_theta: params.kappa2 * dtheta_q,
        },
        CondModel::B => Conductivity {
            kappa: params.kappa1 + params.kappa2 * v * theta_q,
            d_v: params.kappa2 * theta_q,
            d_theta: params.kappa2 * v * dtheta_q,
        },
    };
    Ok(c)
}

/// Inverts `e(v, theta) = energy` for `theta >= 0` by safeguarded Newton.
///
/// `e` is strictly increasing and convex in `theta`, so Newton started from the
/// right of the root converges monotonically.
pub fn temperature_from_energy(v: f64, energy: f64, params: &PhysParams) -> Result<f64> {
    check_domain(v, 0.0)?;
    if !(energy.is_finite() && energy >= 0.0) {
        return Err(Error::Domain(format!(
            "internal energy must be >= 0, got {energy}"
        )));
    }
    // Upper bounds from each term alone.
    let mut theta = (energy / params.cv).min((energy / (params.a_rad * v)).powf(0.25));
    for _ in 0..100 {
        let f = params.cv * theta + params.a_rad * v * theta.powi(4) - energy;
        let df = params.cv + 4.0 * params.a_rad * v * theta.powi(3);
        let next = (theta - f / df).max(0.0);
        if (next - theta).abs() <= 1e-15 * theta.max(1e-300) {
            return Ok(next);
        }
        theta = next;
    }
    Ok(theta)
}
