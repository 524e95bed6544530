//! Green's function of −∂²_y + q² on [0, 1] with Neumann conditions, the
//! modal boundary-value solves built on it, the integral operators that
//! recover Γ from η on the strip, and the leading-order check of the
//! first-order potential Γ̌⁽¹⁾.
//!
//! Modal problems read
//!
//! ```text
//! −Γ'' + q²Γ = f − P',   Γ'(0) = b + P(0),   Γ'(1) = t + P(1),
//! ```
//!
//! whose solution is Γ(y) = ∫G(y,ỹ) f dỹ + ∫G_ỹ(y,ỹ) P dỹ + G(y,1)t − G(y,0)b.
//! Quadrature in ỹ splits each row at the diagonal ỹ = y, where G has a
//! kink and G_ỹ a unit jump, and applies composite Simpson on both sides.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{profile_coefficients, CoefficientSet};
use crate::dispersion::FluidParams;
use crate::error::{Error, Result};
use crate::grid::{uniform_unit, BoundaryKind, Grid1D, StripField};
use crate::linalg::{solve_tridiagonal, Fourier};
use crate::soliton::{star_fields, Branch, Envelope, StarFields};

/// Below this q the Green's function is evaluated as 1/q² plus a series.
pub const SMALL_Q: f64 = 1e-3;
/// Smallest admissible number of y samples in a modal solve.
pub const MIN_NY: usize = 5;
/// Iteration cap of [`solve_gamma`].
pub const MAX_GAMMA_ITERATIONS: usize = 50;
/// Relative increment at which [`solve_gamma`] stops.
pub const GAMMA_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_q(q: f64) -> Result<()> {
    if q == 0.0 {
        return Err(Error::SingularMode("q = 0 (the mean mode is excluded from Green solves)".into()));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("q must be finite and positive, got {q}")));
    }
    Ok(())
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Series for G − 1/q² in powers of q², with a = min(y, ỹ), u = 1 − max(y, ỹ).
fn remainder_series(q: f64, a: f64, u: f64) -> f64 {
    let (a2, u2) = (a * a, u * u);
    let c0 = 0.5 * (a2 + u2) - 1.0 / 6.0;
    let c1 = (a2 * a2 + u2 * u2) / 24.0 + 0.25 * a2 * u2 - (a2 + u2) / 12.0 + 7.0 / 360.0;
    c0 + q * q * c1
}

/// cosh(qa)cosh(q(1−b))/(q sinh q) written with decaying exponentials only.
fn green_stable(q: f64, a: f64, b: f64) -> f64 {
    let den = -(-2.0 * q).exp_m1();
    (q * (a - b)).exp() * (1.0 + (-2.0 * q * a).exp()) * (1.0 + (-2.0 * q * (1.0 - b)).exp()) / (2.0 * q * den)
}

/// Green's function G(q; y, ỹ) of −∂²_y + q² with Neumann conditions at
/// y = 0, 1: cosh(q y<) cosh(q(1 − y>))/(q sinh q).
///
/// For q < [`SMALL_Q`] it returns 1/q² plus a two-term series for the
/// bounded remainder. q = 0 is the excluded mean mode and yields
/// [`Error::SingularMode`].
pub fn green_eval(q: f64, y: f64, yt: f64) -> Result<f64> {
    check_q(q)?;
    check_unit("y", y)?;
    check_unit("yt", yt)?;
    let (a, b) = if y <= yt { (y, yt) } else { (yt, y) };
    if q < SMALL_Q {
        return Ok(1.0 / (q * q) + remainder_series(q, a, 1.0 - b));
    }
    Ok(green_stable(q, a, b))
}

/// The bounded remainder G − 1/q², finite down to and including q = 0.
pub fn green_remainder(q: f64, y: f64, yt: f64) -> Result<f64> {
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("q must be finite and non-negative, got {q}")));
    }
    check_unit("y", y)?;
    check_unit("yt", yt)?;
    let (a, b) = if y <= yt { (y, yt) } else { (yt, y) };
    if q < SMALL_Q {
        return Ok(remainder_series(q, a, 1.0 - b));
    }
    Ok(green_stable(q, a, b) - 1.0 / (q * q))
}

/// Composite weights (including the spacing) for ∫₀¹ on `n` uniform nodes:
/// Simpson, with a closing 3/8 panel when the interval count is odd.
pub fn uniform_weights(n: usize) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("quadrature needs at least 3 nodes, got {n}")));
    }
    let h = 1.0 / (n - 1) as f64;
    let mut w = vec![0.0; n];
    for (k, wk) in segment_rule(n - 1, h) {
        w[k] += wk;
    }
    Ok(w)
}

/// Weights on local indices 0..=m for m ≥ 2 intervals of width h.
fn segment_rule(m: usize, h: f64) -> Vec<(usize, f64)> {
    debug_assert!(m >= 2);
    let mut w = vec![0.0; m + 1];
    let simpson_end = if m % 2 == 0 { m } else { m - 3 };
    let mut i = 0;
    while i < simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if m % 2 == 1 {
        let s = simpson_end;
        let c = 3.0 * h / 8.0;
        w[s] += c;
        w[s + 1] += 3.0 * c;
        w[s + 2] += 3.0 * c;
        w[s + 3] += c;
    }
    w.into_iter().enumerate().collect()
}

/// Precomputed exponentials for the kernels on a uniform y grid.
struct KernelTable {
    q: f64,
    /// e^{−q h d}, d = 0..ny.
    decay: Vec<f64>,
    /// e^{qh} for the one-node extrapolation of a branch.
    grow: f64,
    /// e^{−2q y_k} and 1 − e^{−2q y_k}.
    e: Vec<f64>,
    em: Vec<f64>,
    /// e^{−2q(1−y_k)} and 1 − e^{−2q(1−y_k)}.
    f: Vec<f64>,
    fm: Vec<f64>,
    /// 1 − e^{−2q}.
    den: f64,
}

impl KernelTable {
    fn new(q: f64, ny: usize) -> Self {
        let h = 1.0 / (ny - 1) as f64;
        let y = uniform_unit(ny);
        let decay = (0..ny).map(|d| (-q * h * d as f64).exp()).collect();
        let e = y.iter().map(|&v| (-2.0 * q * v).exp()).collect();
        let em = y.iter().map(|&v| -(-2.0 * q * v).exp_m1()).collect();
        let f = y.iter().map(|&v| (-2.0 * q * (1.0 - v)).exp()).collect();
        let fm = y.iter().map(|&v| -(-2.0 * q * (1.0 - v)).exp_m1()).collect();
        Self { q, decay, grow: (q * h).exp(), e, em, f, fm, den: -(-2.0 * q).exp_m1() }
    }

    /// e^{q(y_a − y_b)}.
    fn expdiff(&self, a: usize, b: usize) -> f64 {
        if a <= b {
            self.decay[b - a]
        } else {
            debug_assert_eq!(a, b + 1);
            self.grow
        }
    }

    /// Branch cosh(q y_a)cosh(q(1−y_b))/(q sinh q).
    fn g(&self, a: usize, b: usize) -> f64 {
        self.expdiff(a, b) * (1.0 + self.e[a]) * (1.0 + self.f[b]) / (2.0 * self.q * self.den)
    }

    /// ∂/∂y_a of the branch: sinh(q y_a)cosh(q(1−y_b))/sinh q.
    fn g_da(&self, a: usize, b: usize) -> f64 {
        self.expdiff(a, b) * self.em[a] * (1.0 + self.f[b]) / (2.0 * self.den)
    }

    /// ∂/∂y_b of the branch: −cosh(q y_a)sinh(q(1−y_b))/sinh q.
    fn g_db(&self, a: usize, b: usize) -> f64 {
        -self.expdiff(a, b) * (1.0 + self.e[a]) * self.fm[b] / (2.0 * self.den)
    }
}

/// Row j of the split quadrature: (node, weight for G·f, weight for G_ỹ·P).
fn green_row(t: &KernelTable, ny: usize, j: usize, out: &mut Vec<(usize, f64, f64)>) {
    let h = 1.0 / (ny - 1) as f64;
    out.clear();
    // ỹ ∈ [0, y_j]: G = branch(a = ỹ, b = y), G_ỹ = ∂_a branch.
    match j {
        0 => {}
        1 => {
            for (k, w) in [(0usize, 5.0), (1, 8.0), (2, -1.0)] {
                let w = w * h / 12.0;
                out.push((k, w * t.g(k, 1), w * t.g_da(k, 1)));
            }
        }
        _ => {
            for (k, w) in segment_rule(j, h) {
                out.push((k, w * t.g(k, j), w * t.g_da(k, j)));
            }
        }
    }
    // ỹ ∈ [y_j, 1]: G = branch(a = y, b = ỹ), G_ỹ = ∂_b branch.
    let m = ny - 1 - j;
    match m {
        0 => {}
        1 => {
            for (k, w) in [(j - 1, -1.0), (j, 8.0), (j + 1, 5.0)] {
                let w = w * h / 12.0;
                out.push((k, w * t.g(j, k), w * t.g_db(j, k)));
            }
        }
        _ => {
            for (k, w) in segment_rule(m, h) {
                let k = j + k;
                out.push((k, w * t.g(j, k), w * t.g_db(j, k)));
            }
        }
    }
}

/// Green solve on a uniform grid: ∫G f + ∫G_ỹ P + G(y,1)t − G(y,0)b.
fn green_solve(q: f64, rhs: &[Complex64], flux: Option<&[Complex64]>, top: Complex64, bottom: Complex64) -> Vec<Complex64> {
    let ny = rhs.len();
    let t = KernelTable::new(q, ny);
    let mut row = Vec::with_capacity(ny + 2);
    let mut out = vec![ZERO; ny];
    for (j, o) in out.iter_mut().enumerate() {
        green_row(&t, ny, j, &mut row);
        let mut s = ZERO;
        match flux {
            Some(p) => {
                for &(k, wg, wt) in &row {
                    s += rhs[k] * wg + p[k] * wt;
                }
            }
            None => {
                for &(k, wg, _) in &row {
                    s += rhs[k] * wg;
                }
            }
        }
        s += top * t.g(j, ny - 1) - bottom * t.g(0, j);
        *o = s;
    }
    out
}

/// A single Fourier mode of the strip problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalBvpProblem {
    /// Fourier wavenumber μ.
    pub mu: f64,
    /// Transverse parameter λ.
    pub lambda: f64,
    /// q = √(μ² + λ²).
    pub q: f64,
    /// Source f on uniform y_j = j/(ny−1).
    pub rhs: Vec<Complex64>,
    /// Divergence-form source P entering as −P' (empty when absent).
    pub flux: Vec<Complex64>,
    /// Neumann datum at y = 0 (added to P(0)).
    pub neumann_bottom: Complex64,
    /// Neumann datum at y = 1 (added to P(1)).
    pub neumann_top: Complex64,
}

impl ModalBvpProblem {
    /// Problem with source `rhs`, top datum `neumann_top` and no flux.
    pub fn new(mu: f64, lambda: f64, rhs: Vec<Complex64>, neumann_top: Complex64) -> Self {
        Self { mu, lambda, q: mu.hypot(lambda), rhs, flux: Vec::new(), neumann_bottom: ZERO, neumann_top }
    }

    /// Attach a divergence-form source.
    pub fn with_flux(mut self, flux: Vec<Complex64>) -> Self {
        self.flux = flux;
        self
    }

    /// Number of y samples.
    pub fn ny(&self) -> usize {
        self.rhs.len()
    }

    fn validate(&self) -> Result<()> {
        check_q(self.q)?;
        if (self.q - self.mu.hypot(self.lambda)).abs() > 1e-12 * self.q.max(1.0) {
            return Err(Error::InvalidArgument("q differs from sqrt(mu^2 + lambda^2)".into()));
        }
        if self.rhs.len() < MIN_NY {
            return Err(Error::InvalidArgument(format!("modal problem needs at least {MIN_NY} samples, got {}", self.rhs.len())));
        }
        if !self.flux.is_empty() && self.flux.len() != self.rhs.len() {
            return Err(Error::InvalidArgument("flux and rhs sample counts differ".into()));
        }
        let finite = |v: &Complex64| v.re.is_finite() && v.im.is_finite();
        if !self.rhs.iter().all(finite) || !self.flux.iter().all(finite) || !finite(&self.neumann_top) || !finite(&self.neumann_bottom) {
            return Err(Error::InvalidArgument("modal problem data must be finite".into()));
        }
        Ok(())
    }
}

/// Solve a modal problem by Green quadrature on its uniform y grid.
pub fn solve_modal_bvp(problem: &ModalBvpProblem) -> Result<Vec<Complex64>> {
    problem.validate()?;
    let flux = (!problem.flux.is_empty()).then_some(problem.flux.as_slice());
    Ok(green_solve(problem.q, &problem.rhs, flux, problem.neumann_top, problem.neumann_bottom))
}

/// Independent second-order finite-difference solve of the same modal
/// problem (ghost-point Neumann conditions, tridiagonal elimination).
pub fn fd_oracle_solve(problem: &ModalBvpProblem) -> Result<Vec<Complex64>> {
    problem.validate()?;
    let n = problem.ny();
    let h = 1.0 / (n - 1) as f64;
    let q2 = problem.q * problem.q;
    let mut f = problem.rhs.clone();
    let (mut b0, mut b1) = (problem.neumann_bottom, problem.neumann_top);
    if !problem.flux.is_empty() {
        let p = &problem.flux;
        f[0] -= (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h);
        for j in 1..n - 1 {
            f[j] -= (p[j + 1] - p[j - 1]) / (2.0 * h);
        }
        f[n - 1] -= (3.0 * p[n - 1] - 4.0 * p[n - 2] + p[n - 3]) / (2.0 * h);
        b0 += p[0];
        b1 += p[n - 1];
    }
    let ih2 = 1.0 / (h * h);
    let diag = vec![Complex64::new(2.0 * ih2 + q2, 0.0); n];
    let mut sub = vec![Complex64::new(-ih2, 0.0); n];
    let mut sup = vec![Complex64::new(-ih2, 0.0); n];
    sup[0] = Complex64::new(-2.0 * ih2, 0.0);
    sub[n - 1] = Complex64::new(-2.0 * ih2, 0.0);
    f[0] -= b0 * (2.0 / h);
    f[n - 1] += b1 * (2.0 / h);
    solve_tridiagonal(&sub, &diag, &sup, &f)
        .map_err(|e| Error::Solver(format!("finite-difference oracle: {e}")))
}

/// Relative discrete L² distance ‖a − b‖/‖b‖ with composite weights.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    let w = uniform_weights(a.len())?;
    let num: f64 = a.iter().zip(b).zip(&w).map(|((x, y), w)| w * (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().zip(&w).map(|(y, w)| w * y.norm_sqr()).sum();
    Ok((num / den).sqrt())
}

/// Draw a modal problem with smooth random data: q ∈ [0.2, 4], a source
/// built from low-order polynomials, cos(πy) and an exponential, a smooth
/// divergence-form source and a random top datum.
pub fn random_modal_problem(rng: &mut ChaCha8Rng, ny: usize) -> ModalBvpProblem {
    let q = rng.random_range(0.2..4.0);
    let theta = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
    let (mu, lambda) = (q * theta.cos(), q * theta.sin());
    let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let (c0, c1, c2, c3, c4, c5, t) = (c(), c(), c(), c(), c(), c(), c());
    let s = c().re * 2.0;
    let y = uniform_unit(ny);
    let pi = std::f64::consts::PI;
    let rhs = y.iter().map(|&v| c0 + c1 * v + c2 * (pi * v).cos() + c3 * (s * v).exp()).collect();
    let flux = y.iter().map(|&v| c4 * v * v + c5 * (0.5 * pi * v).sin()).collect();
    ModalBvpProblem::new(mu, lambda, rhs, t).with_flux(flux)
}

/// Maximum relative L² discrepancy between [`solve_modal_bvp`] and
/// [`fd_oracle_solve`] over `count` random problems drawn from `seed`.
pub fn oracle_discrepancy(count: usize, ny: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let problems: Vec<ModalBvpProblem> = (0..count).map(|_| random_modal_problem(&mut rng, ny)).collect();
    let errs: Result<Vec<f64>> = problems
        .par_iter()
        .map(|p| {
            let g = solve_modal_bvp(p)?;
            let fd = fd_oracle_solve(p)?;
            relative_l2(&g, &fd)
        })
        .collect();
    Ok(errs?.into_iter().fold(0.0, f64::max))
}

/// Second-order y-derivative of every x column of a strip field.
fn dy_field(field: &StripField<Complex64>) -> StripField<Complex64> {
    let ny = field.ny;
    let h = 1.0 / (ny - 1) as f64;
    let mut out = StripField::zeros(field.nx, ny);
    for ix in 0..field.nx {
        let c = field.column(ix);
        let o = &mut out.values[ix * ny..(ix + 1) * ny];
        o[0] = (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * h);
        for j in 1..ny - 1 {
            o[j] = (c[j + 1] - c[j - 1]) / (2.0 * h);
        }
        o[ny - 1] = (3.0 * c[ny - 1] - 4.0 * c[ny - 2] + c[ny - 3]) / (2.0 * h);
    }
    out
}

/// Spectral x-derivative of every y row of a strip field.
fn dx_field(fourier: &Fourier, field: &StripField<Complex64>) -> StripField<Complex64> {
    map_rows(fourier, field, |f, row| f.dx(row))
}

fn map_rows<F>(fourier: &Fourier, field: &StripField<Complex64>, op: F) -> StripField<Complex64>
where
    F: Fn(&Fourier, &[Complex64]) -> Vec<Complex64> + Sync,
{
    let (nx, ny) = (field.nx, field.ny);
    let rows: Vec<Vec<Complex64>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let row: Vec<Complex64> = (0..nx).map(|i| field.at(i, j)).collect();
            op(fourier, &row)
        })
        .collect();
    let mut out = StripField::zeros(nx, ny);
    for (j, row) in rows.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            *out.at_mut(i, j) = *v;
        }
    }
    out
}

/// Spectral form of the integral operators: given P₁, P₂, P₃ on the strip,
/// the boundary function p and an optional source P†, return
/// 𝒢₁(P₁, P₂, P₃, p) + 𝒢₂(P†). Modes with q = 0 are set to zero.
pub fn apply_green_operators(
    fourier: &Fourier,
    lambda: f64,
    p1: &StripField<Complex64>,
    p2: &StripField<Complex64>,
    p3: &StripField<Complex64>,
    p: &[Complex64],
    source: Option<&StripField<Complex64>>,
) -> Result<StripField<Complex64>> {
    let (nx, ny) = (p1.nx, p1.ny);
    if nx != fourier.len() || p.len() != nx || [p2, p3].iter().any(|f| f.nx != nx || f.ny != ny) {
        return Err(Error::InvalidArgument("strip fields and Fourier grid disagree".into()));
    }
    if source.is_some_and(|s| s.nx != nx || s.ny != ny) {
        return Err(Error::InvalidArgument("source field has the wrong shape".into()));
    }
    if ny < MIN_NY {
        return Err(Error::InvalidArgument(format!("strip needs ny >= {MIN_NY}, got {ny}")));
    }
    let transform = |f: &StripField<Complex64>| map_rows(fourier, f, |fr, row| fr.forward(row));
    let (h1, h2, h3) = (transform(p1), transform(p2), transform(p3));
    let hs = source.map(transform);
    let ph = fourier.forward(p);
    let i = Complex64::new(0.0, 1.0);
    let modes: Vec<Vec<Complex64>> = (0..nx)
        .into_par_iter()
        .map(|m| {
            let mu = fourier.mu[m];
            let q = mu.hypot(lambda);
            if q == 0.0 {
                return vec![ZERO; ny];
            }
            let rhs: Vec<Complex64> = (0..ny)
                .map(|j| {
                    let mut v = -i * mu * h1.at(m, j) - i * lambda * h2.at(m, j);
                    if let Some(s) = &hs {
                        v += s.at(m, j);
                    }
                    v
                })
                .collect();
            let flux = h3.column(m);
            green_solve(q, &rhs, Some(flux), -i * mu * ph[m], ZERO)
        })
        .collect();
    let mut hat = StripField::zeros(nx, ny);
    for (m, col) in modes.iter().enumerate() {
        hat.values[m * ny..(m + 1) * ny].copy_from_slice(col);
    }
    Ok(map_rows(fourier, &hat, |fr, row| fr.inverse(row)))
}

/// Discrete analogue of ‖∇Γ‖ + λ‖Γ‖₁ + λ²‖Γ‖ (trapezoid in x, composite
/// Simpson in y).
pub fn gamma_norm(fourier: &Fourier, h: f64, lambda: f64, gamma: &StripField<Complex64>) -> Result<f64> {
    let w = uniform_weights(gamma.ny)?;
    let gx = dx_field(fourier, gamma);
    let gy = dy_field(gamma);
    let l2 = |f: &StripField<Complex64>| -> f64 {
        let mut s = 0.0;
        for ix in 0..f.nx {
            s += f.column(ix).iter().zip(&w).map(|(v, w)| w * v.norm_sqr()).sum::<f64>();
        }
        (h * s).sqrt()
    };
    let (n0, nx_, ny_) = (l2(gamma), l2(&gx), l2(&gy));
    let grad = nx_.hypot(ny_);
    Ok(grad + lambda * n0.hypot(grad) + lambda * lambda * n0)
}

/// Output of [`solve_gamma`].
#[derive(Debug, Clone)]
pub struct GammaSolution {
    /// Γ on the strip.
    pub gamma: StripField<Complex64>,
    /// Number of fixed-point updates performed.
    pub iterations: usize,
    /// Norm of each successive increment.
    pub increments: Vec<f64>,
    /// Ratios of successive increments (empirical contraction constants).
    pub ratios: Vec<f64>,
    /// Whether the relative increment reached [`GAMMA_TOLERANCE`].
    pub converged: bool,
}

/// Right-hand sides F₁, F₂, F₃ for given η and Γ.
fn forcing_terms(
    fourier: &Fourier,
    lambda: f64,
    eta: &[Complex64],
    gamma: &StripField<Complex64>,
    star: &StarFields,
) -> (StripField<Complex64>, StripField<Complex64>, StripField<Complex64>) {
    let (nx, ny) = (gamma.nx, gamma.ny);
    let y = uniform_unit(ny);
    let eta_x = fourier.dx(eta);
    let gx = dx_field(fourier, gamma);
    let gy = dy_field(gamma);
    let mut f1 = StripField::zeros(nx, ny);
    let mut f2 = StripField::zeros(nx, ny);
    let mut f3 = StripField::zeros(nx, ny);
    let il = Complex64::new(0.0, lambda);
    for i in 0..nx {
        let (es, esx) = (star.eta[i], star.eta_x[i]);
        let one = 1.0 + es;
        for (j, &yv) in y.iter().enumerate() {
            let (px, py) = (star.phi_x.at(i, j), star.phi_y.at(i, j));
            let (g, g_x, g_y) = (gamma.at(i, j), gx.at(i, j), gy.at(i, j));
            let (e, e_x) = (eta[i], eta_x[i]);
            *f1.at_mut(i, j) = -es * g_x - px * e + yv * py * e_x + yv * esx * g_y;
            *f2.at_mut(i, j) = -il * es * g + il * yv * py * e;
            // F₃ = yη_x + B_l(η, Γ); the ±yη_x terms cancel.
            let y2 = yv * yv;
            *f3.at_mut(i, j) = yv * (esx * g_x + px * e_x) + es * g_y / one + py * e / (one * one)
                + y2 * esx * esx * py * e / (one * one)
                - y2 * esx * esx * g_y / one
                - 2.0 * y2 * esx * py * e_x / one;
        }
    }
    (f1, f2, f3)
}

/// Inputs to [`solve_gamma`].
#[derive(Debug, Clone)]
pub struct GammaProblem<'a> {
    /// Periodic x grid.
    pub xgrid: &'a Grid1D,
    /// Number of uniform y samples.
    pub ny: usize,
    /// Transverse parameter λ.
    pub lambda: f64,
    /// ε (reported in divergence diagnostics).
    pub eps: f64,
    /// Surface datum η on the x grid.
    pub eta: &'a [Complex64],
    /// Star profiles sampled on (xgrid, uniform y).
    pub star: &'a StarFields,
    /// Optional source F† for the 𝒢₂ term.
    pub source: Option<&'a StripField<Complex64>>,
}

/// Solve Γ = 𝒢₁(F₁(η,Γ), F₂(η,Γ), F₃(η,Γ), η) + 𝒢₂(F†) by fixed-point
/// iteration from Γ = 0.
///
/// Stops when the increment falls below [`GAMMA_TOLERANCE`] relative to Γ
/// or after [`MAX_GAMMA_ITERATIONS`] updates; three consecutive increment
/// ratios ≥ 1 are reported as [`Error::Divergence`].
pub fn solve_gamma(problem: &GammaProblem<'_>) -> Result<GammaSolution> {
    let grid = problem.xgrid;
    if grid.bc != BoundaryKind::Periodic {
        return Err(Error::InvalidArgument("solve_gamma needs a periodic x grid".into()));
    }
    let (nx, ny) = (grid.n, problem.ny);
    let star = problem.star;
    if problem.eta.len() != nx
        || star.eta.len() != nx
        || star.eta_x.len() != nx
        || star.phi_x.nx != nx
        || star.phi_x.ny != ny
        || star.phi_y.nx != nx
        || star.phi_y.ny != ny
    {
        return Err(Error::InvalidArgument("eta, star profiles and grids disagree in size".into()));
    }
    if !(problem.lambda >= 0.0 && problem.lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be finite and >= 0, got {}", problem.lambda)));
    }
    let fourier = Fourier::new(nx, grid.l)?;
    let h = grid.h();
    let mut gamma = StripField::zeros(nx, ny);
    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    let mut rising = 0;
    for it in 1..=MAX_GAMMA_ITERATIONS {
        let (f1, f2, f3) = forcing_terms(&fourier, problem.lambda, problem.eta, &gamma, star);
        let next = apply_green_operators(&fourier, problem.lambda, &f1, &f2, &f3, problem.eta, problem.source)?;
        let mut diff = next.clone();
        diff.values.iter_mut().zip(&gamma.values).for_each(|(d, g)| *d -= g);
        let inc = gamma_norm(&fourier, h, problem.lambda, &diff)?;
        let size = gamma_norm(&fourier, h, problem.lambda, &next)?;
        if let Some(&prev) = increments.last() {
            let r: f64 = if prev > 0.0 { inc / prev } else { 0.0 };
            ratios.push(r);
            rising = if r >= 1.0 { rising + 1 } else { 0 };
        }
        increments.push(inc);
        gamma = next;
        if !inc.is_finite() {
            return Err(Error::Divergence(format!("non-finite iterate at eps = {}", problem.eps)));
        }
        if inc <= GAMMA_TOLERANCE * size {
            return Ok(GammaSolution { gamma, iterations: it, increments, ratios, converged: true });
        }
        if rising >= 3 {
            return Err(Error::Divergence(format!(
                "increment ratio >= 1 for 3 consecutive iterations at eps = {} (last ratio {:.3e})",
                problem.eps,
                ratios.last().copied().unwrap_or(f64::NAN)
            )));
        }
    }
    Ok(GammaSolution { gamma, iterations: MAX_GAMMA_ITERATIONS, increments, ratios, converged: false })
}

/// Default spectral cutoff δ = μ₀/4 of the band-limiting masks.
pub fn default_delta(params: &FluidParams) -> f64 {
    0.25 * params.mu0
}

/// Periodic x grid for wave-packet computations at ε: half-length
/// `l_factor`·√A₁/ε and a power-of-two point count with spacing at most
/// min(0.5, π/(4μ₀)).
pub fn packet_grid(params: &FluidParams, coeffs: &CoefficientSet, l_factor: f64) -> Result<Grid1D> {
    if !(params.eps > 0.0) {
        return Err(Error::InvalidArgument("wave-packet grids need eps > 0".into()));
    }
    let l = l_factor * coeffs.a1.sqrt() / params.eps;
    let hmax = 0.5f64.min(std::f64::consts::PI / (4.0 * params.mu0));
    let n = ((2.0 * l / hmax).ceil() as usize).next_power_of_two().max(64);
    Grid1D::periodic(l, n)
}

/// The band-limited wave packet η₁ = χ(D)[εζ*(εx) cos μ₀x], with χ the
/// sharp mask on ||μ| − μ₀| ≤ δ.
pub fn wave_packet(params: &FluidParams, coeffs: &CoefficientSet, grid: &Grid1D, delta: f64) -> Result<Vec<Complex64>> {
    let env = Envelope::new(coeffs, Branch::Positive)?;
    let (eps, m) = (params.eps, params.mu0);
    let raw: Vec<Complex64> = grid.x.iter().map(|&x| Complex64::new(eps * env.value(eps * x) * (m * x).cos(), 0.0)).collect();
    let fourier = Fourier::new(grid.n, grid.l)?;
    Ok(fourier.multiply(&raw, |mu| if (mu.abs() - m).abs() <= delta { Complex64::new(1.0, 0.0) } else { ZERO }))
}

/// Solve the Γ fixed point for the wave packet η₁ on a packet grid of
/// half-length `l_factor`·√A₁/ε with `ny` uniform y nodes.
pub fn packet_gamma_solve(params: &FluidParams, coeffs: &CoefficientSet, lambda: f64, ny: usize, l_factor: f64) -> Result<GammaSolution> {
    let grid = packet_grid(params, coeffs, l_factor)?;
    let eta = wave_packet(params, coeffs, &grid, default_delta(params))?;
    let pc = profile_coefficients(params, coeffs)?;
    let star = star_fields(params, coeffs, &pc, &grid.x, &uniform_unit(ny), Branch::Positive)?;
    let prob = GammaProblem { xgrid: &grid, ny, lambda, eps: params.eps, eta: &eta, star: &star, source: None };
    solve_gamma(&prob)
}

/// One ε sample of the leading-order comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingOrderSample {
    /// ε.
    pub eps: f64,
    /// L² norm of Γ̌⁽¹⁾ minus the leading-order formula.
    pub deviation: f64,
    /// L² norm of the leading-order formula.
    pub reference: f64,
    /// Grid points in x.
    pub nx: usize,
}

/// Least-squares ε-exponent of the leading-order deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadingOrderRate {
    /// Per-ε samples.
    pub samples: Vec<LeadingOrderSample>,
    /// Fitted exponent p in deviation ∝ ε^p.
    pub exponent: f64,
    /// Ratios deviation(ε)/deviation(ε/2) for consecutive samples.
    pub halving_factors: Vec<f64>,
}

/// Compare Γ̌⁽¹⁾ = 𝒢₁(0, 0, 0, η₁) at λ = εk₀ with
/// cosh(μ₀y)/sinh μ₀ · εζ*(εx) sin μ₀x on the strip.
pub fn leading_order_sample(params: &FluidParams, coeffs: &CoefficientSet, k0: f64, ny: usize) -> Result<LeadingOrderSample> {
    let grid = packet_grid(params, coeffs, 40.0)?;
    let eta1 = wave_packet(params, coeffs, &grid, default_delta(params))?;
    let fourier = Fourier::new(grid.n, grid.l)?;
    let zero = StripField::zeros(grid.n, ny);
    let lambda = params.eps * k0;
    let gamma = apply_green_operators(&fourier, lambda, &zero, &zero, &zero, &eta1, None)?;
    let env = Envelope::new(coeffs, Branch::Positive)?;
    let (eps, m) = (params.eps, params.mu0);
    let y = uniform_unit(ny);
    let w = uniform_weights(ny)?;
    let prof: Vec<f64> = y.iter().map(|&v| (m * v).cosh() / m.sinh()).collect();
    let (mut dev, mut refn) = (0.0, 0.0);
    for (i, &x) in grid.x.iter().enumerate() {
        let a = eps * env.value(eps * x) * (m * x).sin();
        for j in 0..ny {
            let f = prof[j] * a;
            dev += w[j] * (gamma.at(i, j) - f).norm_sqr();
            refn += w[j] * f * f;
        }
    }
    let h = grid.h();
    Ok(LeadingOrderSample { eps, deviation: (h * dev).sqrt(), reference: (h * refn).sqrt(), nx: grid.n })
}

/// Fit the ε-exponent of [`leading_order_sample`] over `eps_values`.
pub fn leading_order_rate(params: &FluidParams, coeffs: &CoefficientSet, k0: f64, eps_values: &[f64], ny: usize) -> Result<LeadingOrderRate> {
    if eps_values.len() < 2 {
        return Err(Error::InvalidArgument("rate fit needs at least two eps values".into()));
    }
    let samples: Vec<LeadingOrderSample> =
        eps_values.iter().map(|&e| leading_order_sample(&params.with_eps(e), coeffs, k0, ny)).collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.eps.ln(), s.deviation.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let halving_factors = samples.windows(2).map(|w| w[0].deviation / w[1].deviation).collect();
    Ok(LeadingOrderRate { samples, exponent: sxy / sxx, halving_factors })
}
