//! The linearized spatial-dynamics operator about the line solitary wave,
//! discretized on the periodicized strip, with a shift-invert search for
//! its purely imaginary eigenvalue near iεk₀ and structural checks
//! (reverser anticommutation, symplectic skewness, flat-water symbol).
//!
//! The state is u = (η, ω, Γ, ξ). Fields are Fourier pseudo-spectral in x
//! (period 2L_x) and Chebyshev collocated in y ∈ [0, 1] with Clenshaw–Curtis
//! quadrature. The ξ-rows at y = 0 and y = 1 carry the boundary condition
//! Γ_y − B_l(η, Γ) = 0 instead of the evolution equation, so the spectral
//! problem is the pencil L u = λ B u with B the identity except for zeros on
//! those rows. Everything is complex arithmetic; shifted solves use
//! restarted GMRES with a per-Fourier-mode flat-water preconditioner plus a
//! coarse correction on the near-critical modes.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{profile_coefficients, CoefficientSet};
use crate::dispersion::{g_eps, FluidParams};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, StripField};
use crate::linalg::{gmres_best_effort, Chebyshev, Fourier};
use crate::soliton::{star_fields, Branch, Envelope};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Discretization of the strip used by the operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinopGrid {
    /// Fourier points in x.
    pub nx: usize,
    /// Chebyshev degree in y (degree + 1 nodes).
    pub cheb_degree: usize,
    /// Half-period L_x = lx_factor·√A₁/ε.
    pub lx_factor: f64,
    /// Modes with g₀(|μ|) + ε² + β₀(εk₀)² below this receive the coarse correction.
    pub deflation_threshold: f64,
}

impl LinopGrid {
    /// Default grid at ε: L_x = 30√A₁/ε, spacing at most π/(2.5μ₀) rounded
    /// up to a power-of-two point count, Chebyshev degree 24.
    pub fn default_for(params: &FluidParams, coeffs: &CoefficientSet) -> Result<Self> {
        if !(params.eps > 0.0) {
            return Err(Error::InvalidArgument("the operator grid needs eps > 0".into()));
        }
        let lx_factor = 30.0;
        let lx = lx_factor * coeffs.a1.sqrt() / params.eps;
        let hmax = std::f64::consts::PI / (2.5 * params.mu0);
        let nx = ((2.0 * lx / hmax).ceil() as usize).next_power_of_two().max(64);
        Ok(Self { nx, cheb_degree: 24, lx_factor, deflation_threshold: 0.1 })
    }
}

/// A state u = (η, ω, Γ, ξ) on the discretized strip.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    /// Surface elevation η(x).
    pub eta: Vec<Complex64>,
    /// Conjugate variable ω(x).
    pub omega: Vec<Complex64>,
    /// Potential Γ(x, y).
    pub gamma: StripField<Complex64>,
    /// Conjugate field ξ(x, y).
    pub xi: StripField<Complex64>,
}

impl StateVector {
    /// Zero state.
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self { eta: vec![ZERO; nx], omega: vec![ZERO; nx], gamma: StripField::zeros(nx, ny), xi: StripField::zeros(nx, ny) }
    }

    /// Concatenate (η, ω, Γ, ξ) into one vector (Γ, ξ row-major in x).
    pub fn to_flat(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(2 * self.eta.len() * (1 + self.gamma.ny));
        v.extend_from_slice(&self.eta);
        v.extend_from_slice(&self.omega);
        v.extend_from_slice(&self.gamma.values);
        v.extend_from_slice(&self.xi.values);
        v
    }

    /// Inverse of [`StateVector::to_flat`].
    pub fn from_flat(v: &[Complex64], nx: usize, ny: usize) -> Result<Self> {
        if v.len() != 2 * nx * (1 + ny) {
            return Err(Error::InvalidArgument(format!("state vector of length {} does not fit nx = {nx}, ny = {ny}", v.len())));
        }
        let m = nx * ny;
        let field = |s: &[Complex64]| StripField { nx, ny, values: s.to_vec() };
        Ok(Self {
            eta: v[..nx].to_vec(),
            omega: v[nx..2 * nx].to_vec(),
            gamma: field(&v[2 * nx..2 * nx + m]),
            xi: field(&v[2 * nx + m..]),
        })
    }
}

/// Reflection and reverser maps on flat state vectors.
fn reflect_index(i: usize, nx: usize) -> usize {
    (nx - i) % nx
}

/// R u = (η(−x), ω(−x), −Γ(−x, y), −ξ(−x, y)).
pub fn reflect(u: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; u.len()];
    for i in 0..nx {
        let r = reflect_index(i, nx);
        out[i] = u[r];
        out[nx + i] = u[nx + r];
        for j in 0..ny {
            let (a, b) = (2 * nx + i * ny + j, 2 * nx + r * ny + j);
            out[a] = -u[b];
            let off = nx * ny;
            out[a + off] = -u[b + off];
        }
    }
    out
}

/// S u = (η, −ω, Γ, −ξ).
pub fn reverse(u: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = u.to_vec();
    out[nx..2 * nx].iter_mut().for_each(|v| *v = -*v);
    out[2 * nx + nx * ny..].iter_mut().for_each(|v| *v = -*v);
    out
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// The discretized operator L together with the star profiles it uses.
#[derive(Debug, Clone)]
pub struct LinearOperatorHandle {
    /// Parameters (ε included).
    pub params: FluidParams,
    /// Grid description.
    pub grid: LinopGrid,
    /// Half-period L_x.
    pub lx: f64,
    /// x samples.
    pub x: Vec<f64>,
    /// Boundary-condition treatment.
    pub bc_mode: String,
    nx: usize,
    ny: usize,
    fourier: Fourier,
    cheb: Chebyshev,
    alpha: f64,
    beta0: f64,
    es: Vec<f64>,
    esx: Vec<f64>,
    sq1: Vec<f64>,
    /// Φ*ₓ, Φ*_y stored per y node: px[j][i].
    px: Vec<Vec<f64>>,
    py: Vec<Vec<f64>>,
}

/// Assemble L at `params.eps` on `grid` (star profiles of orders one and two).
pub fn assemble_l(params: &FluidParams, coeffs: &CoefficientSet, grid: LinopGrid) -> Result<LinearOperatorHandle> {
    if grid.nx < 16 || grid.cheb_degree < 4 {
        return Err(Error::InvalidArgument(format!("operator grid too small (nx = {}, degree = {})", grid.nx, grid.cheb_degree)));
    }
    if !(grid.lx_factor > 0.0) {
        return Err(Error::InvalidArgument("lx_factor must be positive".into()));
    }
    // At ε = 0 the strip length is taken from ε = 1 scaling (the profiles vanish anyway).
    let lx = grid.lx_factor * coeffs.a1.sqrt() / if params.eps > 0.0 { params.eps } else { 1.0 };
    let xg = Grid1D::periodic(lx, grid.nx)?;
    let cheb = Chebyshev::new(grid.cheb_degree);
    let ny = cheb.len();
    let pc = profile_coefficients(params, coeffs)?;
    let star = star_fields(params, coeffs, &pc, &xg.x, &cheb.y, Branch::Positive)?;
    let nx = grid.nx;
    let px = (0..ny).map(|j| (0..nx).map(|i| star.phi_x.at(i, j)).collect()).collect();
    let py = (0..ny).map(|j| (0..nx).map(|i| star.phi_y.at(i, j)).collect()).collect();
    let sq1 = star.eta_x.iter().map(|e| (1.0 + e * e).sqrt()).collect();
    Ok(LinearOperatorHandle {
        params: *params,
        grid,
        lx,
        x: xg.x,
        bc_mode: "collocation rows y=0,1 of the xi-equation replaced by Gamma_y - B_l(eta, Gamma) = 0".into(),
        nx,
        ny,
        fourier: Fourier::new(nx, lx)?,
        cheb,
        alpha: params.alpha0 + params.eps * params.eps,
        beta0: params.beta0,
        es: star.eta,
        esx: star.eta_x,
        sq1,
        px,
        py,
    })
}

impl LinearOperatorHandle {
    /// Fourier points.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Chebyshev nodes in y.
    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Chebyshev nodes.
    pub fn y(&self) -> &[f64] {
        &self.cheb.y
    }

    /// Length of a flat state vector.
    pub fn dim(&self) -> usize {
        2 * self.nx * (1 + self.ny)
    }

    /// Mask of the pencil's right-hand operator B.
    pub fn b_mask(&self) -> Vec<f64> {
        let mut m = vec![1.0; self.dim()];
        let base = 2 * self.nx + self.nx * self.ny;
        for i in 0..self.nx {
            m[base + i * self.ny] = 0.0;
            m[base + i * self.ny + self.ny - 1] = 0.0;
        }
        m
    }

    fn rows(&self, v: &[Complex64]) -> Vec<Vec<Complex64>> {
        (0..self.ny).map(|j| (0..self.nx).map(|i| v[i * self.ny + j]).collect()).collect()
    }

    fn dy_rows(&self, rows: &[Vec<Complex64>], d: &[f64]) -> Vec<Vec<Complex64>> {
        let ny = self.ny;
        (0..ny)
            .map(|j| {
                let mut out = vec![ZERO; self.nx];
                for (k, rk) in rows.iter().enumerate() {
                    let c = d[j * ny + k];
                    if c != 0.0 {
                        out.iter_mut().zip(rk).for_each(|(o, v)| *o += c * v);
                    }
                }
                out
            })
            .collect()
    }

    fn dx_rows(&self, rows: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        rows.par_iter().map(|r| self.fourier.dx(r)).collect()
    }

    /// ∫₀¹ f dy per x.
    fn y_integral(&self, rows: &[Vec<Complex64>]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.nx];
        for (w, r) in self.cheb.w.iter().zip(rows) {
            out.iter_mut().zip(r).for_each(|(o, v)| *o += w * v);
        }
        out
    }

    /// h₁(ω, ξ) = √(1+η*ₓ²)/β₀ (ω + (1+η*)⁻¹∫y Φ*_y ξ dy) − ω/β₀.
    pub fn h1(&self, omega: &[Complex64], xi: &StripField<Complex64>) -> Vec<Complex64> {
        let xr = self.rows(&xi.values);
        let w = self.w_term(omega, &xr);
        (0..self.nx).map(|i| (self.sq1[i] * w[i] - omega[i]) / self.beta0).collect()
    }

    fn w_term(&self, omega: &[Complex64], xi_rows: &[Vec<Complex64>]) -> Vec<Complex64> {
        let weighted: Vec<Vec<Complex64>> = (0..self.ny)
            .map(|j| {
                let y = self.cheb.y[j];
                (0..self.nx).map(|i| y * self.py[j][i] * xi_rows[j][i]).collect()
            })
            .collect();
        let i1 = self.y_integral(&weighted);
        (0..self.nx).map(|i| omega[i] + i1[i] / (1.0 + self.es[i])).collect()
    }

    fn boundary_operator(&self, j: usize, eta: &[Complex64], etax: &[Complex64], g: &[Complex64], gx: &[Complex64], gy: &[Complex64]) -> Vec<Complex64> {
        let y = self.cheb.y[j];
        let y2 = y * y;
        (0..self.nx)
            .map(|i| {
                let (e, ex) = (self.es[i], self.esx[i]);
                let one = 1.0 + e;
                let (px, py) = (self.px[j][i], self.py[j][i]);
                let _ = g;
                y * (-etax[i] + ex * gx[i] + px * etax[i]) + e * gy[i] / one + py * eta[i] / (one * one)
                    + y2 * ex * ex * py * eta[i] / (one * one)
                    - y2 * ex * ex * gy[i] / one
                    - 2.0 * y2 * ex * py * etax[i] / one
            })
            .collect()
    }

    /// Apply L (with the boundary rows when `boundary_rows` is set, else the
    /// bare evolution equations on every node).
    fn apply_impl(&self, u: &[Complex64], boundary_rows: bool) -> Vec<Complex64> {
        let (nx, ny) = (self.nx, self.ny);
        let m = nx * ny;
        let eta = &u[..nx];
        let omega = &u[nx..2 * nx];
        let g = self.rows(&u[2 * nx..2 * nx + m]);
        let xi = self.rows(&u[2 * nx + m..]);
        let f = &self.fourier;
        let etax = f.dx(eta);
        let gx = self.dx_rows(&g);
        let gy = self.dy_rows(&g, &self.cheb.d1);
        let gyy = self.dy_rows(&g, &self.cheb.d2);
        let gxx: Vec<Vec<Complex64>> = g.par_iter().map(|r| f.multiply(r, |mu| Complex64::new(-mu * mu, 0.0))).collect();
        let w = self.w_term(omega, &xi);
        let l1: Vec<Complex64> = (0..nx).map(|i| self.sq1[i] / self.beta0 * w[i]).collect();
        let mut inner = Vec::with_capacity(ny);
        let mut brk = Vec::with_capacity(ny);
        let mut f1 = Vec::with_capacity(ny);
        let mut f3 = Vec::with_capacity(ny);
        let mut l3 = Vec::with_capacity(ny);
        for j in 0..ny {
            let y = self.cheb.y[j];
            let y2 = y * y;
            let mut ri = vec![ZERO; nx];
            let mut rb = vec![ZERO; nx];
            let mut r1 = vec![ZERO; nx];
            let mut r3 = vec![ZERO; nx];
            let mut rl3 = vec![ZERO; nx];
            for i in 0..nx {
                let (e, ex) = (self.es[i], self.esx[i]);
                let one = 1.0 + e;
                let (px, py) = (self.px[j][i], self.py[j][i]);
                let (gxi, gyi) = (gx[j][i], gy[j][i]);
                let (et, etx) = (eta[i], etax[i]);
                ri[i] = px * gxi - py * gyi / (one * one) + py * py * et / (one * one * one)
                    - y2 * ex * ex * py * gyi / (one * one)
                    - y2 * ex * py * py * etx / (one * one)
                    + y2 * ex * ex * py * py * et / (one * one * one);
                rb[i] = y * py * gxi + y * px * gyi - 2.0 * y2 * ex * py * gyi / one - y2 * py * py * etx / one
                    + y2 * py * py * ex * et / (one * one);
                r1[i] = -e * gxi - px * et + y * py * etx + y * ex * gyi;
                rl3[i] = xi[j][i] - e * xi[j][i] / one + self.sq1[i] / (self.beta0 * one) * w[i] * y * py;
            }
            let bl = self.boundary_operator(j, eta, &etax, &g[j], &gx[j], &gy[j]);
            for i in 0..nx {
                r3[i] = y * etax[i] + bl[i];
            }
            inner.push(ri);
            brk.push(rb);
            f1.push(r1);
            f3.push(r3);
            l3.push(rl3);
        }
        let curv: Vec<Complex64> = (0..nx).map(|i| etax[i] / (1.0 + self.esx[i] * self.esx[i]).powf(1.5)).collect();
        let dcurv = f.dx(&curv);
        let inner_int = self.y_integral(&inner);
        let dbrk = f.dx(&self.y_integral(&brk));
        let l2: Vec<Complex64> =
            (0..nx).map(|i| self.alpha * eta[i] - gx[ny - 1][i] - self.beta0 * dcurv[i] + inner_int[i] + dbrk[i]).collect();
        let df1 = self.dx_rows(&f1);
        let df3 = self.dy_rows(&f3, &self.cheb.d1);
        let mut l4: Vec<Vec<Complex64>> =
            (0..ny).map(|j| (0..nx).map(|i| -gxx[j][i] - gyy[j][i] + df1[j][i] + df3[j][i]).collect()).collect();
        if boundary_rows {
            for j in [0, ny - 1] {
                let bl = self.boundary_operator(j, eta, &etax, &g[j], &gx[j], &gy[j]);
                l4[j] = (0..nx).map(|i| gy[j][i] - bl[i]).collect();
            }
        }
        let mut out = Vec::with_capacity(self.dim());
        out.extend_from_slice(&l1);
        out.extend_from_slice(&l2);
        for rows in [&l3, &l4] {
            for i in 0..nx {
                for r in rows.iter() {
                    out.push(r[i]);
                }
            }
        }
        out
    }

    /// L u with boundary rows (the discretized operator of the pencil).
    pub fn apply_flat(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.apply_impl(u, true)
    }

    /// L applied to a [`StateVector`].
    pub fn apply(&self, u: &StateVector) -> Result<StateVector> {
        StateVector::from_flat(&self.apply_flat(&u.to_flat()), self.nx, self.ny)
    }

    /// The vector field on every node (no boundary-row replacement); equals
    /// L u on states that satisfy the boundary condition.
    pub fn apply_field(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.apply_impl(u, false)
    }

    /// Γ_y − B_l(η, Γ) at y = 0 and y = 1.
    pub fn boundary_residual(&self, u: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let (nx, ny) = (self.nx, self.ny);
        let eta = &u[..nx];
        let etax = self.fourier.dx(eta);
        let g = self.rows(&u[2 * nx..2 * nx + nx * ny]);
        let gx = self.dx_rows(&g);
        let gy = self.dy_rows(&g, &self.cheb.d1);
        let side = |j: usize| {
            let bl = self.boundary_operator(j, eta, &etax, &g[j], &gx[j], &gy[j]);
            (0..nx).map(|i| gy[j][i] - bl[i]).collect::<Vec<_>>()
        };
        (side(0), side(ny - 1))
    }

    /// Discrete Ω(u₁, u₂) = ∫(ω₂η₁ − η₂ω₁)dx + ∫∫(ξ₂Γ₁ − Γ₂ξ₁)dy dx.
    pub fn symplectic_form(&self, u1: &[Complex64], u2: &[Complex64]) -> Complex64 {
        let (nx, ny) = (self.nx, self.ny);
        let h = 2.0 * self.lx / nx as f64;
        let m = nx * ny;
        let mut s = ZERO;
        for i in 0..nx {
            s += u2[nx + i] * u1[i] - u2[i] * u1[nx + i];
        }
        for i in 0..nx {
            for j in 0..ny {
                let (gk, xk) = (2 * nx + i * ny + j, 2 * nx + m + i * ny + j);
                s += self.cheb.w[j] * (u2[xk] * u1[gk] - u2[gk] * u1[xk]);
            }
        }
        s * h
    }

    /// Weighted L² norm matching [`Self::symplectic_form`].
    pub fn state_norm(&self, u: &[Complex64]) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let h = 2.0 * self.lx / nx as f64;
        let mut s = 0.0;
        for i in 0..2 * nx {
            s += u[i].norm_sqr();
        }
        for i in 0..2 * nx {
            for j in 0..ny {
                s += self.cheb.w[j] * u[2 * nx + i * ny + j].norm_sqr();
            }
        }
        (h * s).sqrt()
    }
}

/// Smooth random probe: a sum of Gaussian-windowed Fourier modes.
fn smooth_profile(rng: &mut ChaCha8Rng, x: &[f64], lx: f64, kmax: f64) -> Vec<Complex64> {
    let mut out = vec![ZERO; x.len()];
    for _ in 0..3 {
        let k = rng.random_range(-kmax..kmax);
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let x0 = rng.random_range(-0.2..0.2) * lx;
        let width = rng.random_range(0.05..0.15) * lx;
        for (o, &xv) in out.iter_mut().zip(x) {
            let t = (xv - x0) / width;
            *o += c * (-t * t).exp() * Complex64::from_polar(1.0, k * xv);
        }
    }
    out
}

fn random_state(rng: &mut ChaCha8Rng, op: &LinearOperatorHandle) -> Vec<Complex64> {
    let n = op.dim();
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

/// max over `trials` random states of ‖SLu + LSu‖/‖Lu‖.
pub fn reverser_check(op: &LinearOperatorHandle, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nx, ny) = (op.nx, op.ny);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = random_state(&mut rng, op);
        let lu = op.apply_flat(&u);
        let slu = reverse(&lu, nx, ny);
        let lsu = op.apply_flat(&reverse(&u, nx, ny));
        let d: Vec<Complex64> = slu.iter().zip(&lsu).map(|(a, b)| a + b).collect();
        worst = worst.max(norm(&d) / norm(&lu));
    }
    worst
}

/// max over `trials` random pairs of ‖L(au+bv) − aLu − bLv‖/(‖u‖ + ‖v‖).
pub fn linearity_defect(op: &LinearOperatorHandle, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = random_state(&mut rng, op);
        let v = random_state(&mut rng, op);
        let a = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let b = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let comb: Vec<Complex64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lc = op.apply_flat(&comb);
        let (lu, lv) = (op.apply_flat(&u), op.apply_flat(&v));
        let d: Vec<Complex64> = lc.iter().zip(lu.iter().zip(&lv)).map(|(c, (p, q))| c - a * p - b * q).collect();
        worst = worst.max(norm(&d) / (norm(&u) + norm(&v)));
    }
    worst
}

/// A smooth random state satisfying the boundary condition: Γ is a
/// polynomial in y with Γ_y(0) = 0 plus c(x)y²/2, with c fixed by the
/// condition at y = 1 (solved by a contraction in c).
pub fn boundary_compatible_probe(op: &LinearOperatorHandle, rng: &mut ChaCha8Rng) -> Result<Vec<Complex64>> {
    let (nx, ny) = (op.nx, op.ny);
    let kmax = 2.0 * op.params.mu0;
    let x = &op.x;
    let eta = smooth_profile(rng, x, op.lx, kmax);
    let omega = smooth_profile(rng, x, op.lx, kmax);
    let a = smooth_profile(rng, x, op.lx, kmax);
    let b = smooth_profile(rng, x, op.lx, kmax);
    let d = smooth_profile(rng, x, op.lx, kmax);
    let xs: Vec<Vec<Complex64>> = (0..3).map(|_| smooth_profile(rng, x, op.lx, kmax)).collect();
    let y = op.y();
    let poly = |a: Complex64, b: Complex64, d: Complex64, yv: f64| a + b * yv * yv * (3.0 - 2.0 * yv) + d * (yv * (1.0 - yv)).powi(2);
    // Γ̃ at y = 1 and its x-derivative.
    let gt1: Vec<Complex64> = (0..nx).map(|i| poly(a[i], b[i], d[i], 1.0)).collect();
    let gt1x = op.fourier.dx(&gt1);
    let etax = op.fourier.dx(&eta);
    let j1 = ny - 1;
    let rhs_fixed: Vec<Complex64> = (0..nx)
        .map(|i| {
            let (e, ex) = (op.es[i], op.esx[i]);
            let one = 1.0 + e;
            let (px, py) = (op.px[j1][i], op.py[j1][i]);
            -etax[i] + ex * gt1x[i] + px * etax[i] + py * eta[i] * (1.0 + ex * ex) / (one * one) - 2.0 * ex * py * etax[i] / one
        })
        .collect();
    let mut c = vec![ZERO; nx];
    for it in 0..200 {
        let cx = op.fourier.dx(&c);
        let next: Vec<Complex64> = (0..nx)
            .map(|i| {
                let (e, ex) = (op.es[i], op.esx[i]);
                (rhs_fixed[i] + ex * 0.5 * cx[i]) * (1.0 + e) / (1.0 + ex * ex)
            })
            .collect();
        let change = norm(&next.iter().zip(&c).map(|(p, q)| p - q).collect::<Vec<_>>());
        c = next;
        if change <= 1e-15 * norm(&c).max(1e-300) {
            break;
        }
        if it == 199 {
            return Err(Error::Solver("boundary-compatible probe construction did not converge".into()));
        }
    }
    let mut u = Vec::with_capacity(op.dim());
    u.extend_from_slice(&eta);
    u.extend_from_slice(&omega);
    for i in 0..nx {
        for &yv in y {
            u.push(poly(a[i], b[i], d[i], yv) + c[i] * 0.5 * yv * yv);
        }
    }
    for i in 0..nx {
        for &yv in y {
            u.push(xs[0][i] + xs[1][i] * yv + xs[2][i] * yv * yv);
        }
    }
    Ok(u)
}

/// max over `trials` boundary-compatible probe pairs of
/// |Ω(Lu₁, u₂) + Ω(u₁, Lu₂)| / (‖Lu₁‖‖u₂‖ + ‖u₁‖‖Lu₂‖).
pub fn symplectic_check(op: &LinearOperatorHandle, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u1 = boundary_compatible_probe(op, &mut rng)?;
        let u2 = boundary_compatible_probe(op, &mut rng)?;
        let (l1, l2) = (op.apply_field(&u1), op.apply_field(&u2));
        let s = op.symplectic_form(&l1, &u2) + op.symplectic_form(&u1, &l2);
        let scale = op.state_norm(&l1) * op.state_norm(&u2) + op.state_norm(&u1) * op.state_norm(&l2);
        worst = worst.max(s.norm() / scale);
    }
    Ok(worst)
}

/// Per-mode flat-water block (η, ω, Γ₀..Γ_N, ξ₀..ξ_N) of L − σB.
fn flat_block(op: &LinearOperatorHandle, mu: f64, sigma: Complex64) -> DMatrix<Complex64> {
    let ny = op.ny;
    let n = op.cheb.degree;
    let nb = 2 + 2 * ny;
    let c = |v: f64| Complex64::new(v, 0.0);
    let mut m = DMatrix::from_element(nb, nb, ZERO);
    m[(0, 1)] = c(1.0 / op.beta0);
    m[(0, 0)] = -sigma;
    m[(1, 0)] = c(op.alpha + op.beta0 * mu * mu);
    m[(1, 2 + n)] = -I * mu;
    m[(1, 1)] = -sigma;
    for j in 0..ny {
        m[(2 + j, 2 + ny + j)] = c(1.0);
        m[(2 + j, 2 + j)] = -sigma;
    }
    for j in 1..n {
        for k in 0..ny {
            m[(2 + ny + j, 2 + k)] = c(-op.cheb.d2[j * ny + k]);
        }
        m[(2 + ny + j, 2 + j)] += c(mu * mu);
        m[(2 + ny + j, 2 + ny + j)] -= sigma;
    }
    for k in 0..ny {
        m[(2 + ny, 2 + k)] = c(op.cheb.d1[k]);
        m[(2 + ny + n, 2 + k)] = c(op.cheb.d1[n * ny + k]);
    }
    m[(2 + ny + n, 0)] = I * mu;
    m
}

/// Flat-water block preconditioner with a coarse correction on the
/// near-critical Fourier modes.
struct Preconditioner<'a> {
    op: &'a LinearOperatorHandle,
    sigma: Complex64,
    mask: Vec<f64>,
    blocks: Vec<DMatrix<Complex64>>,
    coarse: Vec<(usize, DVector<Complex64>, DVector<Complex64>)>,
    coarse_lu: Option<nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl<'a> Preconditioner<'a> {
    fn new(op: &'a LinearOperatorHandle, sigma: Complex64, target: f64) -> Result<Self> {
        let nb = 2 + 2 * op.ny;
        let data: Vec<Result<(DMatrix<Complex64>, Option<(DVector<Complex64>, DVector<Complex64>)>)>> = op
            .fourier
            .mu
            .par_iter()
            .map(|&mu| {
                let m = flat_block(op, mu, sigma);
                let inv = m
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::Solver(format!("singular flat-water block at mu = {mu}")))?;
                let crit = mu != 0.0
                    && g_eps(mu.abs(), 0.0, &op.params.with_eps(0.0)).unwrap_or(f64::INFINITY)
                        + op.params.eps * op.params.eps
                        + op.beta0 * target * target
                        < op.grid.deflation_threshold;
                if !crit {
                    return Ok((inv, None));
                }
                let svd = SVD::new(m, true, true);
                let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
                let k = (0..nb).min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b])).unwrap();
                let s = svd.singular_values[k];
                let z: DVector<Complex64> = vt.row(k).transpose().map(|v| v.conj());
                let w: DVector<Complex64> = u.column(k).into_owned();
                let inv = inv - (&z * w.adjoint()) / Complex64::new(s, 0.0);
                Ok((inv, Some((z, w))))
            })
            .collect();
        let mut blocks = Vec::with_capacity(op.nx);
        let mut coarse = Vec::new();
        for (m, d) in data.into_iter().enumerate() {
            let (inv, c) = d?;
            blocks.push(inv);
            if let Some((z, w)) = c {
                coarse.push((m, z, w));
            }
        }
        let mut pc = Self { op, sigma, mask: op.b_mask(), blocks, coarse, coarse_lu: None };
        if !pc.coarse.is_empty() {
            let nc = pc.coarse.len();
            let cols: Vec<Vec<Complex64>> = (0..nc)
                .into_par_iter()
                .map(|c| {
                    let mut e = vec![ZERO; nc];
                    e[c] = Complex64::new(1.0, 0.0);
                    let z = pc.coarse_vector(&e);
                    pc.restrict(&pc.shifted(&z))
                })
                .collect();
            let e = DMatrix::from_fn(nc, nc, |r, c| cols[c][r]);
            pc.coarse_lu = Some(e.lu());
        }
        Ok(pc)
    }

    fn shifted(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.op.apply_flat(v);
        out.iter_mut().zip(v.iter().zip(&self.mask)).for_each(|(o, (x, m))| *o -= self.sigma * m * x);
        out
    }

    /// Per-component x-transforms into (mode, block) layout.
    fn to_blocks(&self, v: &[Complex64]) -> Vec<Vec<Complex64>> {
        let (nx, ny) = (self.op.nx, self.op.ny);
        let nb = 2 + 2 * ny;
        let m = nx * ny;
        let comps: Vec<Vec<Complex64>> = (0..nb)
            .into_par_iter()
            .map(|b| {
                let col: Vec<Complex64> = match b {
                    0 => v[..nx].to_vec(),
                    1 => v[nx..2 * nx].to_vec(),
                    _ if b < 2 + ny => (0..nx).map(|i| v[2 * nx + i * ny + (b - 2)]).collect(),
                    _ => (0..nx).map(|i| v[2 * nx + m + i * ny + (b - 2 - ny)]).collect(),
                };
                self.op.fourier.forward(&col)
            })
            .collect();
        (0..nx).map(|k| comps.iter().map(|c| c[k]).collect()).collect()
    }

    fn from_blocks(&self, blocks: &[Vec<Complex64>]) -> Vec<Complex64> {
        let (nx, ny) = (self.op.nx, self.op.ny);
        let nb = 2 + 2 * ny;
        let m = nx * ny;
        let comps: Vec<Vec<Complex64>> = (0..nb)
            .into_par_iter()
            .map(|b| {
                let col: Vec<Complex64> = blocks.iter().map(|bl| bl[b]).collect();
                self.op.fourier.inverse(&col)
            })
            .collect();
        let mut out = vec![ZERO; self.op.dim()];
        for (b, c) in comps.iter().enumerate() {
            for i in 0..nx {
                let idx = match b {
                    0 => i,
                    1 => nx + i,
                    _ if b < 2 + ny => 2 * nx + i * ny + (b - 2),
                    _ => 2 * nx + m + i * ny + (b - 2 - ny),
                };
                out[idx] = c[i];
            }
        }
        out
    }

    fn block_apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let hat = self.to_blocks(v);
        let out: Vec<Vec<Complex64>> = hat
            .par_iter()
            .zip(&self.blocks)
            .map(|(h, p)| (p * DVector::from_column_slice(h)).as_slice().to_vec())
            .collect();
        self.from_blocks(&out)
    }

    fn coarse_vector(&self, c: &[Complex64]) -> Vec<Complex64> {
        let nb = 2 + 2 * self.op.ny;
        let mut blocks = vec![vec![ZERO; nb]; self.op.nx];
        for ((m, z, _), ck) in self.coarse.iter().zip(c) {
            blocks[*m] = z.iter().map(|v| v * ck).collect();
        }
        self.from_blocks(&blocks)
    }

    fn restrict(&self, r: &[Complex64]) -> Vec<Complex64> {
        let hat = self.to_blocks(r);
        let s = 1.0 / self.op.nx as f64;
        self.coarse.iter().map(|(m, _, w)| w.iter().zip(&hat[*m]).map(|(a, b)| a.conj() * b).sum::<Complex64>() * s).collect()
    }

    fn apply(&self, r: &[Complex64]) -> Vec<Complex64> {
        let x1 = self.block_apply(r);
        let Some(lu) = &self.coarse_lu else { return x1 };
        let ax = self.shifted(&x1);
        let r2: Vec<Complex64> = r.iter().zip(&ax).map(|(a, b)| a - b).collect();
        let rc = DVector::from_vec(self.restrict(&r2));
        let Some(c) = lu.solve(&rc) else { return x1 };
        let corr = self.coarse_vector(c.as_slice());
        x1.iter().zip(&corr).map(|(a, b)| a + b).collect()
    }
}

/// Deterministic work counters of an eigenvalue search (wall-clock times
/// are reported separately).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchWork {
    /// Arnoldi restart cycles.
    pub outer_iterations: usize,
    /// Total GMRES steps.
    pub gmres_iterations: usize,
    /// Fourier modes in the coarse correction.
    pub coarse_modes: usize,
    /// Total Arnoldi steps (one shifted solve each).
    pub arnoldi_steps: usize,
}

/// Result of [`imaginary_eigenvalue_search`].
#[derive(Debug, Clone)]
pub struct EigenSearchResult {
    /// Converged eigenvalue nearest the shift.
    pub lambda: Complex64,
    /// Target εk₀ (shift i·target).
    pub target: f64,
    /// ‖Lv − λBv‖/‖v‖.
    pub residual: f64,
    /// The two Ritz values nearest the shift from a short Arnoldi run.
    pub ritz: Vec<Complex64>,
    /// ‖Rv − v‖/‖v‖ (phase-aligned).
    pub mode_asymmetry: f64,
    /// Eigenvector.
    pub mode: StateVector,
    /// Work counters.
    pub work: SearchWork,
    /// Seconds spent building the preconditioner.
    pub setup_seconds: f64,
    /// Seconds spent iterating.
    pub search_seconds: f64,
}

impl EigenSearchResult {
    /// |Im λ − target|/target.
    pub fn relative_deviation(&self) -> f64 {
        (self.lambda.im - self.target).abs() / self.target
    }
}

/// Restart-cycle cap of the search.
pub const MAX_SEARCH_CYCLES: usize = 60;
/// Arnoldi steps per restart cycle.
pub const ARNOLDI_STEPS: usize = 8;
/// GMRES tolerance of the shifted solves.
pub const SHIFTED_SOLVE_TOL: f64 = 1e-12;
/// Near an eigenvalue the shifted system is ill-conditioned; inexact
/// shift-invert steps down to this residual are accepted (the eigenpair
/// residual is checked independently).
pub const ACCEPTABLE_SOLVE_RESIDUAL: f64 = 1e-6;

/// Start vector shaped like the reduced mode: η = εζ*(εx)cos μ₀x,
/// Γ = εζ*(εx) sin μ₀x cosh(μ₀y)/sinh μ₀.
fn start_vector(op: &LinearOperatorHandle, coeffs: &CoefficientSet) -> Result<Vec<Complex64>> {
    let env = Envelope::new(coeffs, Branch::Positive)?;
    let (eps, m) = (op.params.eps, op.params.mu0);
    let mut u = StateVector::zeros(op.nx, op.ny);
    for (i, &x) in op.x.iter().enumerate() {
        let a = eps * env.value(eps * x);
        u.eta[i] = Complex64::new(a * (m * x).cos(), 0.0);
        for (j, &y) in op.cheb.y.iter().enumerate() {
            *u.gamma.at_mut(i, j) = Complex64::new(a * (m * x).sin() * (m * y).cosh() / m.sinh(), 0.0);
        }
    }
    let v = u.to_flat();
    let n = norm(&v);
    Ok(v.into_iter().map(|c| c / n).collect())
}

fn project_fix_r(u: &mut [Complex64], nx: usize, ny: usize) {
    let r = reflect(u, nx, ny);
    u.iter_mut().zip(&r).for_each(|(a, b)| *a = 0.5 * (*a + b));
}

/// Restarted shift-invert Arnoldi about σ = i·`target` for L u = λ B u.
///
/// Each cycle builds an Arnoldi basis of T = (L − σB)⁻¹B (shifted solves by
/// preconditioned GMRES) from the current vector, takes the Ritz pair of
/// largest |θ| (λ = σ + 1/θ nearest σ) and restarts from its Ritz vector.
/// The search stops when successive λ agree to 1e−12 relative and the true
/// residual ‖Lu − λBu‖/‖u‖ is below 1e−8. With `restrict_fix_r` every
/// basis vector is projected onto Fix R. The Ritz values of the final
/// cycle nearest σ are reported so that clustering stays visible.
pub fn imaginary_eigenvalue_search(
    op: &LinearOperatorHandle,
    coeffs: &CoefficientSet,
    target: f64,
    restrict_fix_r: bool,
) -> Result<EigenSearchResult> {
    if !(op.params.eps > 0.0 && op.params.eps <= 0.1) {
        return Err(Error::InvalidArgument(format!("eigenvalue search needs eps in (0, 0.1], got {}", op.params.eps)));
    }
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidArgument(format!("target must be positive, got {target}")));
    }
    let (nx, ny) = (op.nx, op.ny);
    let sigma = Complex64::new(0.0, target);
    let t0 = Instant::now();
    let pc = Preconditioner::new(op, sigma, target)?;
    let setup_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let mask = pc.mask.clone();
    let solve = |rhs: &[Complex64]| {
        let out = gmres_best_effort(|v| pc.shifted(v), |v| pc.apply(v), rhs, 150, 20, SHIFTED_SOLVE_TOL)?;
        if out.rel_residual > ACCEPTABLE_SOLVE_RESIDUAL {
            return Err(Error::SearchFailure(format!("shifted solve stalled at relative residual {:e}", out.rel_residual)));
        }
        Ok(out)
    };
    let mut u = start_vector(op, coeffs)?;
    if restrict_fix_r {
        project_fix_r(&mut u, nx, ny);
    }
    let mut work = SearchWork { outer_iterations: 0, gmres_iterations: 0, coarse_modes: pc.coarse.len(), arnoldi_steps: 0 };
    let mut lambda: Option<Complex64> = None;
    let mut residual = f64::INFINITY;
    let mut ritz = Vec::new();
    let mut converged = false;
    for cycle in 1..=MAX_SEARCH_CYCLES {
        let n0 = norm(&u);
        let mut basis = vec![u.iter().map(|c| c / n0).collect::<Vec<_>>()];
        let mut h = DMatrix::from_element(ARNOLDI_STEPS + 1, ARNOLDI_STEPS, ZERO);
        let mut used = 0;
        for k in 0..ARNOLDI_STEPS {
            let b: Vec<Complex64> = basis[k].iter().zip(&mask).map(|(v, m)| v * m).collect();
            let out = solve(&b)?;
            work.gmres_iterations += out.iterations;
            let mut w = out.x;
            if restrict_fix_r {
                project_fix_r(&mut w, nx, ny);
            }
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(q, &w);
                    h[(i, k)] += c;
                    w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let wn = norm(&w);
            h[(k + 1, k)] = Complex64::new(wn, 0.0);
            used = k + 1;
            if wn <= 1e-14 * h[(k, k)].norm().max(1e-300) {
                break;
            }
            basis.push(w.into_iter().map(|c| c / wn).collect());
        }
        work.arnoldi_steps += used;
        work.outer_iterations = cycle;
        let hs = h.view((0, 0), (used, used)).into_owned();
        let thetas: Vec<Complex64> = Schur::new(hs.clone())
            .eigenvalues()
            .ok_or_else(|| Error::SearchFailure("Hessenberg eigenvalues unavailable".into()))?
            .iter()
            .copied()
            .filter(|t| t.norm() > 0.0)
            .collect();
        let theta = *thetas
            .iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .ok_or_else(|| Error::SearchFailure("empty Krylov space".into()))?;
        ritz = thetas.iter().map(|t| sigma + 1.0 / t).collect();
        ritz.sort_by(|a, b| (a - sigma).norm().total_cmp(&(b - sigma).norm()));
        ritz.truncate(2);
        // Ritz vector: null vector of (H − θI).
        let shifted = &hs - DMatrix::from_diagonal_element(used, used, theta);
        let svd = SVD::new(shifted, false, true);
        let vt = svd.v_t.as_ref().ok_or_else(|| Error::SearchFailure("Ritz vector unavailable".into()))?;
        let kmin = (0..used).min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b])).unwrap_or(0);
        let y: Vec<Complex64> = vt.row(kmin).iter().map(|c| c.conj()).collect();
        let mut next = vec![ZERO; op.dim()];
        for (q, yk) in basis.iter().zip(&y) {
            next.iter_mut().zip(q).for_each(|(a, b)| *a += yk * b);
        }
        let nn = norm(&next);
        u = next.into_iter().map(|c| c / nn).collect();
        let lam = sigma + 1.0 / theta;
        let lu = op.apply_flat(&u);
        let r: Vec<Complex64> = lu.iter().zip(u.iter().zip(&mask)).map(|(a, (v, m))| a - lam * m * v).collect();
        residual = norm(&r);
        let settled = lambda.is_some_and(|l| (lam - l).norm() <= 1e-12 * lam.norm());
        lambda = Some(lam);
        if settled && residual < 1e-8 {
            converged = true;
            break;
        }
    }
    let lambda = lambda.unwrap_or(sigma);
    if !converged {
        return Err(Error::SearchFailure(format!(
            "no convergence in {MAX_SEARCH_CYCLES} restart cycles (last lambda = {lambda}, residual = {residual:e})"
        )));
    }
    // Phase-align before measuring reflection symmetry.
    let ru = reflect(&u, nx, ny);
    let phase = dot(&ru, &u);
    let phase = if phase.norm() > 0.0 { phase / phase.norm() } else { Complex64::new(1.0, 0.0) };
    let diff: Vec<Complex64> = ru.iter().zip(&u).map(|(a, b)| a * phase - b).collect();
    let mode_asymmetry = norm(&diff) / norm(&u);
    Ok(EigenSearchResult {
        lambda,
        target,
        residual,
        ritz,
        mode_asymmetry,
        mode: StateVector::from_flat(&u, nx, ny)?,
        work,
        setup_seconds,
        search_seconds: t1.elapsed().as_secs_f64(),
    })
}

/// The transverse-instability statement derived from k_ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstabilityReport {
    /// ε.
    pub eps: f64,
    /// k_ε used.
    pub k_eps: f64,
    /// Transverse frequency εk_ε of the bifurcating waves (leading order).
    pub transverse_frequency: f64,
    /// Transverse period 2π/(εk_ε) beyond which periodic perturbations destabilize the line wave.
    pub unstable_period_threshold: f64,
    /// Human-readable summary.
    pub statement: String,
}

/// Format the instability statement for ε and k_ε.
pub fn instability_report(params: &FluidParams, k_eps: f64) -> Result<InstabilityReport> {
    if !(k_eps > 0.0 && k_eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("k_eps must be positive, got {k_eps}")));
    }
    if !(params.eps > 0.0) {
        return Err(Error::InvalidArgument("instability report needs eps > 0".into()));
    }
    let freq = params.eps * k_eps;
    let period = 2.0 * std::f64::consts::PI / freq;
    Ok(InstabilityReport {
        eps: params.eps,
        k_eps,
        transverse_frequency: freq,
        unstable_period_threshold: period,
        statement: format!(
            "The line solitary wave at tau0 = {} and eps = {} is transversely linearly unstable to periodic perturbations with transverse period larger than about {:.6}; the bifurcating modulated waves have transverse frequency eps*k_eps + O(|s|^2) = {:.6} + O(|s|^2).",
            params.tau0, params.eps, period, freq
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::compute_coefficients;
    use crate::dispersion::params_from_tau;
    use crate::reduced_spectra::find_k0;

    fn setup(eps: f64) -> (FluidParams, CoefficientSet) {
        let p = params_from_tau(0.2, eps).unwrap();
        (p, compute_coefficients(&p).unwrap())
    }

    fn small_op(eps: f64) -> (LinearOperatorHandle, CoefficientSet) {
        let (p, c) = setup(eps);
        let grid = LinopGrid { nx: 128, cheb_degree: 12, lx_factor: 30.0, deflation_threshold: 0.1 };
        (assemble_l(&p, &c, grid).unwrap(), c)
    }

    #[test]
    fn flat_water_mode_reproduces_dispersion_symbol() {
        let (op, _) = small_op(0.0);
        let (nx, ny) = (op.nx(), op.ny());
        for (m, lam) in [(5usize, 0.3), (9, 0.8), (2, 1.5)] {
            let mu = op.fourier.mu[m];
            let q = mu.hypot(lam);
            let mut u = StateVector::zeros(nx, ny);
            for (i, &x) in op.x.clone().iter().enumerate() {
                let e = Complex64::from_polar(1.0, mu * x);
                u.eta[i] = e;
                u.omega[i] = I * lam * op.beta0 * e;
                for (j, &y) in op.y().iter().enumerate() {
                    let g = -I * mu * (q * y).cosh() / (q * q.sinh()) * e;
                    *u.gamma.at_mut(i, j) = g;
                    *u.xi.at_mut(i, j) = I * lam * g;
                }
            }
            let flat = u.to_flat();
            let lu = op.apply_flat(&flat);
            let mask = op.b_mask();
            let r: Vec<Complex64> = lu.iter().zip(flat.iter().zip(&mask)).map(|(a, (v, m))| a - I * lam * m * v).collect();
            let g0 = g_eps(mu, lam, &op.params).unwrap();
            for i in 0..nx {
                assert!((r[nx + i] - g0 * u.eta[i]).norm() < 1e-9, "omega row: {} vs {}", r[nx + i], g0 * u.eta[i]);
                assert!(r[i].norm() < 1e-12);
            }
            let rest = norm(&r[2 * nx..]) / norm(&flat[2 * nx..]);
            assert!(rest < 1e-8, "rest {rest}");
        }
    }

    #[test]
    fn h1_vanishes_on_flat_water() {
        let (op, _) = small_op(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = StateVector::from_flat(&random_state(&mut rng, &op), op.nx(), op.ny()).unwrap();
        assert!(op.h1(&u.omega, &u.xi).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn operator_is_linear() {
        let (op, _) = small_op(0.05);
        assert!(linearity_defect(&op, 5, 1) < 1e-12);
    }

    #[test]
    fn reverser_anticommutes() {
        for eps in [0.0, 0.05] {
            let (op, _) = small_op(eps);
            let r = reverser_check(&op, 10, 2);
            assert!(r < 1e-12, "eps {eps}: {r}");
        }
    }

    #[test]
    fn probes_satisfy_boundary_condition() {
        let (op, _) = small_op(0.08);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = boundary_compatible_probe(&op, &mut rng).unwrap();
        let (b0, b1) = op.boundary_residual(&u);
        let scale = norm(&u[..op.nx()]);
        assert!(norm(&b0) < 1e-10 * scale && norm(&b1) < 1e-10 * scale, "{} {}", norm(&b0), norm(&b1));
    }

    #[test]
    fn vector_field_is_skew_for_the_symplectic_form() {
        let (op, _) = small_op(0.05);
        let s = symplectic_check(&op, 5, 9).unwrap();
        assert!(s < 1e-6, "skewness {s}");
    }

    #[test]
    fn reflection_commutes_with_operator_on_smooth_states() {
        let (op, _) = small_op(0.1);
        let (nx, ny) = (op.nx(), op.ny());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..3 {
            let u = boundary_compatible_probe(&op, &mut rng).unwrap();
            let a = reflect(&op.apply_flat(&u), nx, ny);
            let b = op.apply_flat(&reflect(&u, nx, ny));
            // Block by block, so that small-coefficient rows are not masked by large ones.
            let m = nx * ny;
            for r in [0..nx, nx..2 * nx, 2 * nx..2 * nx + m, 2 * nx + m..op.dim()] {
                let d: Vec<Complex64> = a[r.clone()].iter().zip(&b[r.clone()]).map(|(x, y)| x - y).collect();
                assert!(norm(&d) <= 1e-13 * norm(&a[r.clone()]).max(norm(&u)), "block {r:?}: {}", norm(&d));
            }
        }
    }

    #[test]
    fn state_vector_round_trips() {
        let (op, _) = small_op(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_state(&mut rng, &op);
        let s = StateVector::from_flat(&u, op.nx(), op.ny()).unwrap();
        assert_eq!(s.to_flat(), u);
        assert!(StateVector::from_flat(&u[1..], op.nx(), op.ny()).is_err());
    }

    #[test]
    fn instability_period_is_two_pi_over_frequency() {
        let (p, _) = setup(0.05);
        let r = instability_report(&p, 1.5).unwrap();
        assert!((r.unstable_period_threshold - 2.0 * std::f64::consts::PI / 0.075).abs() < 1e-12);
        let json = serde_json::to_string(&r).unwrap();
        let back: InstabilityReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let far = instability_report(&p.with_eps(1e-6), 1.5).unwrap();
        assert!(far.unstable_period_threshold > 1e6);
    }

    #[test]
    fn finds_imaginary_eigenvalue_near_reduced_prediction() {
        let (p, c) = setup(0.1);
        let grid = crate::grid::Grid1D::decay_truncated(30.0 * c.a1.sqrt(), 1024).unwrap();
        let k0 = find_k0(&c, &grid).unwrap().k0;
        let lg = LinopGrid::default_for(&p, &c).unwrap();
        let op = assemble_l(&p, &c, LinopGrid { cheb_degree: 16, ..lg }).unwrap();
        let res = imaginary_eigenvalue_search(&op, &c, p.eps * k0, true).unwrap();
        assert!(res.residual < 1e-8);
        assert!(res.relative_deviation() < 0.2, "lambda {} vs {}", res.lambda, p.eps * k0);
        assert!(res.lambda.re.abs() < 0.05 * p.eps * k0);
        assert!(res.mode_asymmetry < 1e-10);
        assert!(!res.ritz.is_empty());
    }
}
