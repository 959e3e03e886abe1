//! Thomas algorithm for the tridiagonal systems produced by the implicit sub-steps.

use crate::error::{Error, Result};

/// Banded storage of a tridiagonal matrix: `lower[0]` and `upper[n-1]` are unused.
#[derive(Debug, Clone, Default)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Computes `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `A x = rhs`. No pivoting; callers only build diagonally dominant systems.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];

        let mut den = self.diag[0];
        if den == 0.0 || !den.is_finite() {
            return Err(Error::LinearSolve { row: 0 });
        }
        c_prime[0] = self.upper[0] / den;
        d_prime[0] = rhs[0] / den;
        for i in 1..n {
            den = self.diag[i] - self.lower[i] * c_prime[i - 1];
            if den == 0.0 || !den.is_finite() {
                return Err(Error::LinearSolve { row: i });
            }
            if i + 1 < n {
                c_prime[i] = self.upper[i] / den;
            }
            d_prime[i] = (rhs[i] - self.lower[i] * d_prime[i - 1]) / den;
        }

        let mut x = d_prime;
        for i in (0..n - 1).rev() {
            x[i] -= c_prime[i] * x[i + 1];
        }
        Ok(x)
    }
}
