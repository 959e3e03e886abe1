//! Verification tooling: a fully explicit reference integrator, manufactured
//! solutions and observed convergence orders.

pub mod explicit;
pub mod mms;

use crate::error::{Error, Result};

/// Observed order `log(e_coarse / e_fine) / log(ratio)`.
pub fn convergence_order(coarse: f64, fine: f64, ratio: f64) -> Result<f64> {
    if !(coarse > 0.0 && fine > 0.0 && coarse.is_finite() && fine.is_finite()) {
        return Err(Error::Domain(format!(
            "convergence order needs positive finite errors, got {coarse} and {fine}"
        )));
    }
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(Error::Domain(format!(
            "refinement ratio must exceed 1, got {ratio}"
        )));
    }
    Ok((coarse / fine).ln() / ratio.ln())
}

/// Least-squares slope of `log e` against `log h` over several levels.
pub fn fitted_order(h: &[f64], e: &[f64]) -> Result<f64> {
    if h.len() != e.len() || h.len() < 2 {
        return Err(Error::Domain(
            "fitted order needs at least two paired levels".into(),
        ));
    }
    if h.iter().chain(e).any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain(
            "fitted order needs positive finite values".into(),
        ));
    }
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|x| x.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain(
            "fitted order needs distinct step sizes".into(),
        ));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_from_known_ratios() {
        assert!((convergence_order(4e-4, 1e-4, 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((convergence_order(2e-3, 1e-3, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((convergence_order(8e-5, 1e-5, 2.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn orders_reject_bad_input() {
        assert!(matches!(
            convergence_order(0.0, 1e-3, 2.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            convergence_order(1e-3, -1.0, 2.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            convergence_order(1e-3, 1e-4, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn fitted_slope_of_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((fitted_order(&h, &e).unwrap() - 2.0).abs() < 1e-12);
        assert!(fitted_order(&h[..1], &e[..1]).is_err());
    }
}
