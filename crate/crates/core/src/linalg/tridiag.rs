//! Tridiagonal solves (Thomas algorithm) over real or complex scalars.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solve a tridiagonal system with sub-diagonal `a` (a[0] unused),
/// diagonal `b` and super-diagonal `c` (c[n−1] unused).
///
/// No pivoting is performed; a vanishing pivot is reported as a solver error.
pub fn solve_tridiagonal(a: &[Complex64], b: &[Complex64], c: &[Complex64], rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = b.len();
    if a.len() != n || c.len() != n || rhs.len() != n || n == 0 {
        return Err(Error::InvalidArgument("tridiagonal operands have inconsistent lengths".into()));
    }
    let mut cp = vec![Complex64::new(0.0, 0.0); n];
    let mut dp = vec![Complex64::new(0.0, 0.0); n];
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut piv = b[0];
    if piv.norm() <= 1e-300 * scale {
        return Err(Error::Solver("singular tridiagonal system (zero pivot at row 0)".into()));
    }
    cp[0] = c[0] / piv;
    dp[0] = rhs[0] / piv;
    for i in 1..n {
        piv = b[i] - a[i] * cp[i - 1];
        if !(piv.norm() > 1e-14 * scale) {
            return Err(Error::Solver(format!("singular tridiagonal system (zero pivot at row {i})")));
        }
        cp[i] = if i + 1 < n { c[i] / piv } else { Complex64::new(0.0, 0.0) };
        dp[i] = (rhs[i] - a[i] * dp[i - 1]) / piv;
    }
    let mut x = dp;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= cp[i] * next;
    }
    Ok(x)
}
