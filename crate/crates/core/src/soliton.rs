//! Solitary solutions of the envelope equations and the second-order line
//! solitary-wave profiles built from them.
//!
//! The envelope is ζ*(X) = ±√(2/A₅) sech(X/√A₁); it solves the cubic NLS
//! equation ζ − A₁ζ_XX − A₅ζ³ = 0 and, together with the mean flow
//! ψ_X = −A₄ζ*²/(1 − α₀⁻¹), the z-independent Davey–Stewartson system.

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientSet, ProfileCoefficients};
use crate::dispersion::FluidParams;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, StripField};

/// Sign branch of the solitary wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// ζ* > 0 (default).
    Positive,
    /// ζ* < 0.
    Negative,
}

impl Branch {
    /// ±1.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

/// Closed-form envelope ζ*(X) and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    /// Peak value ±√(2/A₅).
    pub amplitude: f64,
    /// Width √A₁.
    pub width: f64,
}

impl Envelope {
    /// Envelope for the given coefficients and branch.
    pub fn new(coeffs: &CoefficientSet, branch: Branch) -> Result<Self> {
        if !(coeffs.a1 > 0.0) {
            return Err(Error::NoSoliton(format!("A1 = {} is not positive", coeffs.a1)));
        }
        if !(coeffs.a5 > 0.0) {
            return Err(Error::NoSoliton(format!("A5 = {} is not positive", coeffs.a5)));
        }
        Ok(Self { amplitude: branch.sign() * (2.0 / coeffs.a5).sqrt(), width: coeffs.a1.sqrt() })
    }

    /// ζ*(X).
    pub fn value(&self, x: f64) -> f64 {
        self.amplitude / (x / self.width).cosh()
    }

    /// ζ*'(X).
    pub fn d1(&self, x: f64) -> f64 {
        let t = x / self.width;
        -self.amplitude / self.width * t.tanh() / t.cosh()
    }

    /// ζ*''(X) = (ζ* − 2ζ*³/a²)/A₁ written through sech.
    pub fn d2(&self, x: f64) -> f64 {
        let s = 1.0 / (x / self.width).cosh();
        self.amplitude / (self.width * self.width) * (s - 2.0 * s * s * s)
    }

    /// Odd antiderivative of ζ*², (a²√A₁) tanh(X/√A₁).
    pub fn square_antiderivative(&self, x: f64) -> f64 {
        self.amplitude * self.amplitude * self.width * (x / self.width).tanh()
    }
}

/// Samples of the envelope solution on a grid in the slow variable X.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonProfile {
    /// Sample locations X.
    pub x: Vec<f64>,
    /// ζ*(X).
    pub zeta_star: Vec<f64>,
    /// ξ*(X) = Xζ*(X).
    pub xi_star: Vec<f64>,
    /// Mean-flow derivative ψ_X = −A₄ζ*²/(1 − α₀⁻¹).
    pub psi_x_star: Vec<f64>,
    /// Branch used.
    pub branch: Branch,
}

/// Sample ζ*, ξ* and ψ_X on `grid` (interpreted in the slow variable X).
pub fn build_soliton(coeffs: &CoefficientSet, grid: &Grid1D, branch: Branch) -> Result<SolitonProfile> {
    let env = Envelope::new(coeffs, branch)?;
    let zeta_star: Vec<f64> = grid.x.iter().map(|&x| env.value(x)).collect();
    let xi_star = grid.x.iter().zip(&zeta_star).map(|(x, z)| x * z).collect();
    let k = -coeffs.a4 / coeffs.one_minus_inv_alpha0;
    let psi_x_star = zeta_star.iter().map(|z| k * z * z).collect();
    Ok(SolitonProfile { x: grid.x.clone(), zeta_star, xi_star, psi_x_star, branch })
}

/// How derivatives are evaluated in residual checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Closed-form derivatives of sech.
    Analytic,
    /// Second-order centered differences on the sample grid (interior nodes).
    FiniteDifference,
}

fn second_difference(f: &[f64], h: f64) -> Vec<f64> {
    (1..f.len() - 1).map(|i| (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h)).collect()
}

fn first_difference(f: &[f64], h: f64) -> Vec<f64> {
    (1..f.len() - 1).map(|i| (f[i + 1] - f[i - 1]) / (2.0 * h)).collect()
}

fn sup(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

/// Sup-norm of ζ − A₁ζ_XX − A₅ζ³ for the sampled profile.
pub fn nls_residual(profile: &SolitonProfile, coeffs: &CoefficientSet, grid: &Grid1D, mode: DerivativeMode) -> Result<f64> {
    let z = &profile.zeta_star;
    match mode {
        DerivativeMode::Analytic => {
            let env = Envelope::new(coeffs, profile.branch)?;
            Ok(sup(grid
                .x
                .iter()
                .zip(z)
                .map(|(&x, &zv)| zv - coeffs.a1 * env.d2(x) - coeffs.a5 * zv * zv * zv)))
        }
        DerivativeMode::FiniteDifference => {
            let d2 = second_difference(z, grid.h());
            Ok(sup(d2.iter().enumerate().map(|(k, &d)| {
                let zv = z[k + 1];
                zv - coeffs.a1 * d - coeffs.a5 * zv * zv * zv
            })))
        }
    }
}

/// Sup-norms (r₁, r₂) of both z-independent Davey–Stewartson equations
/// evaluated at (ζ*, ψ_X).
pub fn ds_residual(
    profile: &SolitonProfile,
    coeffs: &CoefficientSet,
    grid: &Grid1D,
    mode: DerivativeMode,
) -> Result<(f64, f64)> {
    let z = &profile.zeta_star;
    let px = &profile.psi_x_star;
    let om = coeffs.one_minus_inv_alpha0;
    match mode {
        DerivativeMode::Analytic => {
            let env = Envelope::new(coeffs, profile.branch)?;
            let k = -coeffs.a4 / om;
            let mut r1 = 0.0f64;
            let mut r2 = 0.0f64;
            for (i, &x) in grid.x.iter().enumerate() {
                let zv = z[i];
                let e1 = zv - coeffs.a1 * env.d2(x) - coeffs.a3 * zv * zv * zv + 4.0 * coeffs.a4 * zv * px[i];
                // ψ_XX = k (ζ*²)_X = 2kζ*ζ*'
                let dz2 = 2.0 * zv * env.d1(x);
                let e2 = -om * k * dz2 - coeffs.a4 * dz2;
                r1 = r1.max(e1.abs());
                r2 = r2.max(e2.abs());
            }
            Ok((r1, r2))
        }
        DerivativeMode::FiniteDifference => {
            let h = grid.h();
            let d2 = second_difference(z, h);
            let pxx = first_difference(px, h);
            let z2: Vec<f64> = z.iter().map(|v| v * v).collect();
            let dz2 = first_difference(&z2, h);
            let r1 = sup((0..d2.len()).map(|k| {
                let zv = z[k + 1];
                zv - coeffs.a1 * d2[k] - coeffs.a3 * zv * zv * zv + 4.0 * coeffs.a4 * zv * px[k + 1]
            }));
            let r2 = sup((0..d2.len()).map(|k| -om * pxx[k] - coeffs.a4 * dz2[k]));
            Ok((r1, r2))
        }
    }
}

/// Second-order line solitary-wave profile on a physical (x, y) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineWaveProfile {
    /// First-order surface elevation εζ*(εx) cos μ₀x.
    pub eta1: Vec<f64>,
    /// Second-order surface elevation −C₁ε²ζ*² cos 2μ₀x − C₂ε²ζ*².
    pub eta2: Vec<f64>,
    /// First-order potential.
    pub phi1: StripField<f64>,
    /// Second-order potential.
    pub phi2: StripField<f64>,
    /// ε used.
    pub eps: f64,
}

fn cumulative_odd_antiderivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for i in 1..x.len() {
        out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    }
    // Anchor at x = 0 by linear interpolation of the cumulative integral.
    let k = x.partition_point(|&v| v < 0.0).clamp(1, x.len() - 1);
    let t = (0.0 - x[k - 1]) / (x[k] - x[k - 1]);
    let anchor = out[k - 1] + t * (out[k] - out[k - 1]);
    out.iter_mut().for_each(|v| *v -= anchor);
    out
}

/// Sample η*₁, η*₂, Φ*₁, Φ*₂ (C₀ = C₃ = 0).
///
/// The antiderivative ∂ₓ⁻¹(ζ*²) entering Φ*₂ is the cumulative trapezoid
/// integral anchored at x = 0; [`Envelope::square_antiderivative`] is its
/// closed form.
pub fn build_line_wave(
    params: &FluidParams,
    coeffs: &CoefficientSet,
    pcoeffs: &ProfileCoefficients,
    xgrid: &Grid1D,
    ygrid: &[f64],
    branch: Branch,
) -> Result<LineWaveProfile> {
    let eps = params.eps;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("line-wave profile needs eps > 0, got {eps}")));
    }
    let env = Envelope::new(coeffs, branch)?;
    let m = params.mu0;
    let (nx, ny) = (xgrid.n, ygrid.len());
    let zeta: Vec<f64> = xgrid.x.iter().map(|&x| env.value(eps * x)).collect();
    let z2: Vec<f64> = zeta.iter().map(|z| z * z).collect();
    // ∂ₓ⁻¹ acts in the slow variable X = εx.
    let xs: Vec<f64> = xgrid.x.iter().map(|x| eps * x).collect();
    let inv = cumulative_odd_antiderivative(&xs, &z2);
    let mut eta1 = vec![0.0; nx];
    let mut eta2 = vec![0.0; nx];
    let mut phi1 = StripField::zeros(nx, ny);
    let mut phi2 = StripField::zeros(nx, ny);
    let sh = m.sinh();
    let sh2m = (2.0 * m).sinh();
    for (i, &x) in xgrid.x.iter().enumerate() {
        let (s1, c1) = (m * x).sin_cos();
        let (s2, c2) = (2.0 * m * x).sin_cos();
        eta1[i] = eps * zeta[i] * c1;
        eta2[i] = -pcoeffs.c1 * eps * eps * z2[i] * c2 - pcoeffs.c2 * eps * eps * z2[i];
        for (j, &y) in ygrid.iter().enumerate() {
            *phi1.at_mut(i, j) = eps * zeta[i] * s1 * (m * y).cosh() / sh;
            *phi2.at_mut(i, j) = eps * eps * z2[i] * s2 * m * y * (m * y).sinh() / (2.0 * sh)
                - pcoeffs.c4 * eps * inv[i]
                - pcoeffs.c5 * eps * eps * z2[i] * s2 * (2.0 * m * y).cosh() / sh2m;
        }
    }
    Ok(LineWaveProfile { eta1, eta2, phi1, phi2, eps })
}

/// The star profile and the derivatives entering the linearized operator,
/// all evaluated in closed form: η*, η*ₓ, Φ*ₓ and Φ*_y (Φ* itself is not
/// needed, only its gradient).
#[derive(Debug, Clone, PartialEq)]
pub struct StarFields {
    /// η*(x) = η*₁ + η*₂.
    pub eta: Vec<f64>,
    /// η*ₓ.
    pub eta_x: Vec<f64>,
    /// Φ*ₓ on the (x, y) grid.
    pub phi_x: StripField<f64>,
    /// Φ*_y on the (x, y) grid.
    pub phi_y: StripField<f64>,
}

/// Evaluate [`StarFields`] at arbitrary sample points x and y.
pub fn star_fields(
    params: &FluidParams,
    coeffs: &CoefficientSet,
    pcoeffs: &ProfileCoefficients,
    x: &[f64],
    y: &[f64],
    branch: Branch,
) -> Result<StarFields> {
    let (nx, ny) = (x.len(), y.len());
    let eps = params.eps;
    let mut out = StarFields {
        eta: vec![0.0; nx],
        eta_x: vec![0.0; nx],
        phi_x: StripField::zeros(nx, ny),
        phi_y: StripField::zeros(nx, ny),
    };
    if eps == 0.0 {
        return Ok(out);
    }
    let env = Envelope::new(coeffs, branch)?;
    let m = params.mu0;
    let (c1, c2, c4, c5) = (pcoeffs.c1, pcoeffs.c2, pcoeffs.c4, pcoeffs.c5);
    let sh = m.sinh();
    let sh2m = (2.0 * m).sinh();
    // y-profiles
    let ch: Vec<f64> = y.iter().map(|&v| (m * v).cosh() / sh).collect();
    let chy: Vec<f64> = y.iter().map(|&v| m * (m * v).sinh() / sh).collect();
    let f2: Vec<f64> = y.iter().map(|&v| m * v * (m * v).sinh() / (2.0 * sh)).collect();
    let f2y: Vec<f64> = y.iter().map(|&v| m * ((m * v).sinh() + m * v * (m * v).cosh()) / (2.0 * sh)).collect();
    let f5: Vec<f64> = y.iter().map(|&v| (2.0 * m * v).cosh() / sh2m).collect();
    let f5y: Vec<f64> = y.iter().map(|&v| 2.0 * m * (2.0 * m * v).sinh() / sh2m).collect();
    let e2 = eps * eps;
    for (i, &xv) in x.iter().enumerate() {
        let xs = eps * xv;
        let z = env.value(xs);
        let zp = env.d1(xs);
        let z2 = z * z;
        let z2p = 2.0 * z * zp;
        let (s1, co1) = (m * xv).sin_cos();
        let (s2, co2) = (2.0 * m * xv).sin_cos();
        out.eta[i] = eps * z * co1 - c1 * e2 * z2 * co2 - c2 * e2 * z2;
        out.eta_x[i] = eps * (eps * zp * co1 - m * z * s1)
            - c1 * e2 * (eps * z2p * co2 - 2.0 * m * z2 * s2)
            - c2 * e2 * eps * z2p;
        let p1x = eps * (eps * zp * s1 + m * z * co1);
        let p1y = eps * z * s1;
        let p2x = e2 * (eps * z2p * s2 + 2.0 * m * z2 * co2);
        let p2y = e2 * z2 * s2;
        let mean = c4 * e2 * z2;
        for j in 0..ny {
            *out.phi_x.at_mut(i, j) = p1x * ch[j] + p2x * (f2[j] - c5 * f5[j]) - mean;
            *out.phi_y.at_mut(i, j) = p1y * chy[j] + p2y * (f2y[j] - c5 * f5y[j]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{compute_coefficients, profile_coefficients};
    use crate::dispersion::params_from_tau;
    use crate::grid::uniform_unit;
    use proptest::prelude::*;

    fn setup(eps: f64) -> (FluidParams, CoefficientSet, ProfileCoefficients) {
        let p = params_from_tau(0.2, eps).unwrap();
        let c = compute_coefficients(&p).unwrap();
        let pc = profile_coefficients(&p, &c).unwrap();
        (p, c, pc)
    }

    #[test]
    fn peak_and_half_width() {
        let (_, c, _) = setup(0.0);
        let env = Envelope::new(&c, Branch::Positive).unwrap();
        assert_eq!(env.value(0.0), (2.0 / c.a5).sqrt());
        let x = c.a1.sqrt() * 2.0f64.acosh();
        assert!((env.value(x) - 0.5 * (2.0 / c.a5).sqrt()).abs() < 1e-15);
        let g = Grid1D::decay_truncated(20.0 * c.a1.sqrt(), 1025).unwrap();
        let s = build_soliton(&c, &g, Branch::Positive).unwrap();
        let mid = s.psi_x_star[512];
        assert!((mid + c.a4 * 2.0 / (c.one_minus_inv_alpha0 * c.a5)).abs() < 1e-14);
        for i in 0..g.n {
            assert_eq!(s.zeta_star[i], s.zeta_star[g.mirror(i)]);
            assert_eq!(s.xi_star[i], -s.xi_star[g.mirror(i)]);
        }
    }

    #[test]
    fn analytic_residuals_vanish_and_fd_is_second_order() {
        let (_, c, _) = setup(0.0);
        let l = 20.0 * c.a1.sqrt();
        let g = Grid1D::decay_truncated(l, 2049).unwrap();
        let s = build_soliton(&c, &g, Branch::Positive).unwrap();
        assert!(nls_residual(&s, &c, &g, DerivativeMode::Analytic).unwrap() < 1e-12);
        let (r1, r2) = ds_residual(&s, &c, &g, DerivativeMode::Analytic).unwrap();
        assert!(r1 < 1e-10 && r2 < 1e-10);
        let g2 = Grid1D::decay_truncated(l, 4097).unwrap();
        let s2 = build_soliton(&c, &g2, Branch::Positive).unwrap();
        let ratio = nls_residual(&s, &c, &g, DerivativeMode::FiniteDifference).unwrap()
            / nls_residual(&s2, &c, &g2, DerivativeMode::FiniteDifference).unwrap();
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn ds_detects_perturbation_and_decouples_without_a4() {
        let (_, c, _) = setup(0.0);
        let g = Grid1D::decay_truncated(20.0 * c.a1.sqrt(), 1025).unwrap();
        let mut s = build_soliton(&c, &g, Branch::Positive).unwrap();
        s.zeta_star.iter_mut().for_each(|v| *v *= 1.01);
        assert!(ds_residual(&s, &c, &g, DerivativeMode::Analytic).unwrap().0 > 1e-4);
        // With A₄ = 0 the mean flow vanishes and equation one is NLS with A₅ → A₃.
        let c0 = CoefficientSet { a4: 0.0, a5: c.a3, ..c };
        let s0 = build_soliton(&c0, &g, Branch::Positive).unwrap();
        assert!(s0.psi_x_star.iter().all(|v| *v == 0.0));
        let (r1, _) = ds_residual(&s0, &c0, &g, DerivativeMode::Analytic).unwrap();
        let rn = nls_residual(&s0, &c0, &g, DerivativeMode::Analytic).unwrap();
        assert!((r1 - rn).abs() < 1e-13);
    }

    #[test]
    fn zero_profile_has_zero_residual() {
        let (_, c, _) = setup(0.0);
        let g = Grid1D::decay_truncated(10.0, 65).unwrap();
        let mut s = build_soliton(&c, &g, Branch::Positive).unwrap();
        s.zeta_star.iter_mut().for_each(|v| *v = 0.0);
        assert_eq!(nls_residual(&s, &c, &g, DerivativeMode::FiniteDifference).unwrap(), 0.0);
    }

    #[test]
    fn no_soliton_for_negative_a5() {
        let (_, c, _) = setup(0.0);
        let bad = CoefficientSet { a5: -1.0, ..c };
        assert!(matches!(Envelope::new(&bad, Branch::Positive), Err(Error::NoSoliton(_))));
    }

    #[test]
    fn line_wave_parity_and_antiderivative() {
        let (p, c, pc) = setup(0.05);
        let l = 40.0 * c.a1.sqrt() / p.eps;
        let g = Grid1D::decay_truncated(l, 4001).unwrap();
        let y = uniform_unit(9);
        let w = build_line_wave(&p, &c, &pc, &g, &y, Branch::Positive).unwrap();
        assert_eq!(w.eta1[2000], p.eps * (2.0 / c.a5).sqrt());
        for i in 0..g.n {
            let k = g.mirror(i);
            assert_eq!(w.eta1[i], w.eta1[k]);
            for j in 0..y.len() {
                assert_eq!(w.phi1.at(i, j), -w.phi1.at(k, j));
                assert!((w.phi2.at(i, j) + w.phi2.at(k, j)).abs() < 1e-12);
            }
        }
        // Trapezoid antiderivative against the closed form: second order.
        let env = Envelope::new(&c, Branch::Positive).unwrap();
        let err = |n: usize| {
            let g = Grid1D::decay_truncated(l, n).unwrap();
            let xs: Vec<f64> = g.x.iter().map(|x| p.eps * x).collect();
            let f: Vec<f64> = xs.iter().map(|&x| env.value(x).powi(2)).collect();
            let a = cumulative_odd_antiderivative(&xs, &f);
            sup(xs.iter().zip(&a).map(|(&x, v)| v - env.square_antiderivative(x)))
        };
        let ratio = err(1001) / err(2001);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn first_order_profile_solves_flat_linear_problem_to_order_eps_squared() {
        // Kinematic condition, Laplace equation and linear Bernoulli relation
        // evaluated on the first-order fields: residuals scale like ε².
        let residuals = |eps: f64| {
            let (p, c, _) = setup(eps);
            let env = Envelope::new(&c, Branch::Positive).unwrap();
            let m = p.mu0;
            let sh = m.sinh();
            let mut r = [0.0f64; 3];
            for k in 0..4001 {
                let x = -40.0 + 80.0 * k as f64 / 4000.0;
                let x = x / eps;
                let (z, zp, zpp) = (env.value(eps * x), env.d1(eps * x), env.d2(eps * x));
                let (s1, c1) = (m * x).sin_cos();
                let eta_x = eps * (eps * zp * c1 - m * z * s1);
                let eta_xx = eps * (eps * eps * zpp * c1 - 2.0 * eps * m * zp * s1 - m * m * z * c1);
                let phi_y1 = eps * z * s1 * m; // Φ*₁_y at y = 1
                r[0] = r[0].max((phi_y1 + eta_x).abs());
                // −ΔΦ*₁ at y = 1/2
                let chy = (0.5 * m).cosh() / sh;
                let pxx = eps * (eps * eps * zpp * s1 + 2.0 * eps * m * zp * c1 - m * m * z * s1) * chy;
                let pyy = eps * z * s1 * m * m * chy;
                r[1] = r[1].max((pxx + pyy).abs());
                let phi_x1 = eps * (eps * zp * s1 + m * z * c1) * m.cosh() / sh;
                r[2] = r[2].max((p.alpha0 * eps * z * c1 - phi_x1 - p.beta0 * eta_xx).abs());
            }
            r
        };
        let (a, b) = (residuals(0.04), residuals(0.02));
        for k in 0..3 {
            let ratio = a[k] / b[k];
            assert!(ratio > 3.6 && ratio < 4.4, "component {k}: ratio {ratio}");
        }
    }

    #[test]
    fn star_fields_match_profile_derivatives() {
        let (p, c, pc) = setup(0.05);
        let l = 30.0 * c.a1.sqrt() / p.eps;
        let g = Grid1D::decay_truncated(l, 20001).unwrap();
        let y = uniform_unit(5);
        let w = build_line_wave(&p, &c, &pc, &g, &y, Branch::Positive).unwrap();
        let s = star_fields(&p, &c, &pc, &g.x, &y, Branch::Positive).unwrap();
        let h = g.h();
        for i in (1..g.n - 1).step_by(97) {
            let eta: Vec<f64> = (i - 1..=i + 1).map(|k| w.eta1[k] + w.eta2[k]).collect();
            assert!((eta[1] - s.eta[i]).abs() < 1e-15);
            assert!(((eta[2] - eta[0]) / (2.0 * h) - s.eta_x[i]).abs() < 1e-5);
            for j in 0..y.len() {
                let px = (w.phi1.at(i + 1, j) + w.phi2.at(i + 1, j) - w.phi1.at(i - 1, j) - w.phi2.at(i - 1, j))
                    / (2.0 * h);
                assert!((px - s.phi_x.at(i, j)).abs() < 1e-5, "{px} vs {}", s.phi_x.at(i, j));
            }
        }
    }

    proptest! {
        #[test]
        fn both_branches_have_equal_residual(n in 64usize..400) {
            let (_, c, _) = setup(0.0);
            let g = Grid1D::decay_truncated(20.0 * c.a1.sqrt(), n).unwrap();
            let sp = build_soliton(&c, &g, Branch::Positive).unwrap();
            let sn = build_soliton(&c, &g, Branch::Negative).unwrap();
            let rp = nls_residual(&sp, &c, &g, DerivativeMode::FiniteDifference).unwrap();
            let rn = nls_residual(&sn, &c, &g, DerivativeMode::FiniteDifference).unwrap();
            prop_assert_eq!(rp, rn);
        }
    }
}
