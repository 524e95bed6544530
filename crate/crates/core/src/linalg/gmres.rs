//! Restarted, right-preconditioned GMRES over complex vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Result of a GMRES solve.
#[derive(Debug, Clone)]
pub struct GmresOutcome {
    /// Approximate solution.
    pub x: Vec<Complex64>,
    /// Total Arnoldi steps.
    pub iterations: usize,
    /// Final true relative residual ‖b − Ax‖/‖b‖.
    pub rel_residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve A x = b with right preconditioner M (A M z = b, x = M z).
///
/// Arnoldi uses modified Gram–Schmidt with one reorthogonalization pass;
/// the least-squares problem is updated with Givens rotations. The
/// iteration stops when the true residual drops below `tol`·‖b‖; failing
/// that after `max_restarts` cycles of length `restart` it returns a solver
/// error carrying the achieved residual.
pub fn gmres<A, M>(apply_a: A, precond: M, b: &[Complex64], restart: usize, max_restarts: usize, tol: f64) -> Result<GmresOutcome>
where
    A: Fn(&[Complex64]) -> Vec<Complex64>,
    M: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let out = gmres_best_effort(apply_a, precond, b, restart, max_restarts, tol)?;
    if out.rel_residual < tol {
        Ok(out)
    } else {
        Err(Error::Solver(format!("GMRES stalled at relative residual {:e} after {} steps", out.rel_residual, out.iterations)))
    }
}

/// Like [`gmres`], but returns the best iterate when `tol` is not reached;
/// restarts also stop once a cycle fails to halve the residual (attainable
/// accuracy reached). Only a non-finite residual is an error.
pub fn gmres_best_effort<A, M>(
    apply_a: A,
    precond: M,
    b: &[Complex64],
    restart: usize,
    max_restarts: usize,
    tol: f64,
) -> Result<GmresOutcome>
where
    A: Fn(&[Complex64]) -> Vec<Complex64>,
    M: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(GmresOutcome { x: vec![zero; n], iterations: 0, rel_residual: 0.0 });
    }
    let mut x = vec![zero; n];
    let mut r = b.to_vec();
    let mut total = 0;
    let mut rel = 1.0f64;
    for _cycle in 0..max_restarts.max(1) {
        let beta = norm(&r);
        if beta / bnorm < tol {
            break;
        }
        let m = restart.max(1);
        let mut v: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|c| c / beta).collect());
        let mut h = vec![vec![zero; m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![zero; m];
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            let mut w = apply_a(&precond(&v[k]));
            for _pass in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let c = dot(vi, &w);
                    h[i][k] += c;
                    w.iter_mut().zip(vi).for_each(|(wj, vj)| *wj -= c * vj);
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = Complex64::new(hn, 0.0);
            // apply previous rotations
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i].conj() * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let den = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if den == 0.0 {
                cs[k] = 1.0;
                sn[k] = zero;
            } else if a.norm() == 0.0 {
                cs[k] = 0.0;
                sn[k] = bb.conj() / bb.norm();
            } else {
                cs[k] = a.norm() / den;
                sn[k] = (a / a.norm()) * bb.conj() / den;
            }
            h[k][k] = cs[k] * a + sn[k] * bb;
            h[k + 1][k] = zero;
            g[k + 1] = -sn[k].conj() * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            let est = g[k + 1].norm() / bnorm;
            if est < tol || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|c| c / hn).collect());
        }
        // back substitution
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut z = vec![zero; n];
        for (j, yj) in y.iter().enumerate() {
            z.iter_mut().zip(&v[j]).for_each(|(zi, vi)| *zi += yj * vi);
        }
        let dx = precond(&z);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        let ax = apply_a(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        rel = norm(&r) / bnorm;
        if !rel.is_finite() {
            return Err(Error::Solver("GMRES produced a non-finite residual".into()));
        }
        if rel < tol || rel > 0.5 * beta / bnorm {
            break;
        }
    }
    Ok(GmresOutcome { x, iterations: total, rel_residual: rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_nonsymmetric_complex_system() {
        let n = 30;
        let a = |x: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|i| {
                    let mut s = Complex64::new(3.0 + i as f64 * 0.1, 0.5) * x[i];
                    if i > 0 {
                        s += Complex64::new(-1.0, 0.2) * x[i - 1];
                    }
                    if i + 2 < n {
                        s += Complex64::new(0.3, -0.7) * x[i + 2];
                    }
                    s
                })
                .collect()
        };
        let xs: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64).cos(), 1.0 / (1.0 + i as f64))).collect();
        let b = a(&xs);
        let out = gmres(a, |v: &[Complex64]| v.to_vec(), &b, 10, 20, 1e-12).unwrap();
        assert!(out.rel_residual < 1e-12);
        for (g, e) in out.x.iter().zip(&xs) {
            assert!((g - e).norm() < 1e-10);
        }
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let d: Vec<Complex64> = (0..10).map(|i| Complex64::new(1.0 + i as f64, -(i as f64))).collect();
        let a = |x: &[Complex64]| -> Vec<Complex64> { x.iter().zip(&d).map(|(a, b)| a * b).collect() };
        let m = |x: &[Complex64]| -> Vec<Complex64> { x.iter().zip(&d).map(|(a, b)| a / b).collect() };
        let b = vec![Complex64::new(1.0, 1.0); 10];
        let out = gmres(a, m, &b, 5, 1, 1e-13).unwrap();
        assert_eq!(out.iterations, 1);
    }
}
