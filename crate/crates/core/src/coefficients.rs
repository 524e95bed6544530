//! Closed-form constants of the weakly nonlinear model: the envelope
//! coefficients A₁–A₅ and the second-order profile coefficients C₁, C₂, C₄,
//! C₅, B₁, B₂, B₃.

use serde::{Deserialize, Serialize};

use crate::dispersion::{cosech2, coth, g_eps, FluidParams};
use crate::error::{Error, Result};

/// Envelope-model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    /// σ = tanh μ₀.
    pub sigma: f64,
    /// Longitudinal dispersion coefficient (half the curvature of g₀ in μ).
    pub a1: f64,
    /// Transverse dispersion coefficient coth μ₀/μ₀.
    pub a2: f64,
    /// Cubic self-interaction coefficient.
    pub a3: f64,
    /// Mean-flow coupling coefficient.
    pub a4: f64,
    /// Effective cubic coefficient A₃ + 4A₄²/(1 − α₀⁻¹).
    pub a5: f64,
    /// 1 − α₀⁻¹ (the mean-flow stiffness).
    pub one_minus_inv_alpha0: f64,
    /// α₀σ² − β₀μ₀²(3 − σ²), the denominator inside A₃.
    pub a3_denominator: f64,
}

impl CoefficientSet {
    /// A₂⁻¹.
    pub fn inv_a2(&self) -> f64 {
        1.0 / self.a2
    }

    /// Whether A₁ > 0 and A₅ > 0, i.e. a sech-type solitary wave exists.
    pub fn admits_soliton(&self) -> bool {
        self.a1 > 0.0 && self.a5 > 0.0
    }

    /// Sign of A₃ (recorded, never assumed).
    pub fn a3_sign(&self) -> f64 {
        self.a3.signum()
    }
}

/// Second-order profile constants; C₀ and C₃ are left absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileCoefficients {
    /// Coefficient of the second-harmonic surface term.
    pub c1: f64,
    /// Coefficient of the mean surface term.
    pub c2: f64,
    /// Coefficient of the mean-flow potential term.
    pub c4: f64,
    /// Coefficient of the second-harmonic potential term.
    pub c5: f64,
    /// Second-harmonic coefficient of the reduced surface elevation (= 2C₁).
    pub b1: f64,
    /// Mean coefficient of the reduced surface elevation.
    pub b2: f64,
    /// A₄/α₀.
    pub b3: f64,
    /// g₀(2μ₀, 0) > 0.
    pub g0_at_2mu0: f64,
    /// Optional first-harmonic correction coefficient (absent by default).
    pub c0: Option<f64>,
    /// Optional first-harmonic derivative coefficient (absent by default).
    pub c3: Option<f64>,
}

/// Evaluate A₁–A₅ and σ at the bifurcation point.
pub fn compute_coefficients(params: &FluidParams) -> Result<CoefficientSet> {
    let m = params.mu0;
    let (a0, b0) = (params.alpha0, params.beta0);
    let s = m.tanh();
    let s2 = s * s;
    let cs2 = cosech2(m);
    let a1 = b0 + (1.0 - m * coth(m)) * cs2;
    let a2 = coth(m) / m;
    let den = a0 * s2 - b0 * m * m * (3.0 - s2);
    if den.abs() < 1e-14 {
        return Err(Error::SingularCoefficient(format!(
            "A3 denominator alpha0*sigma^2 - beta0*mu0^2*(3-sigma^2) = {den:e} at mu0 = {m}"
        )));
    }
    let num = (1.0 - s2) * (9.0 - s2) * a0 + b0 * m * m * (3.0 - s2) * (7.0 - s2);
    let oms = 1.0 - s2;
    let a3 = -m.powi(3) / (8.0 * s.powi(3))
        * (num / den + 8.0 * s2 - (2.0 * m / (a0 * s)) * oms * oms - 3.0 * b0 * m * s.powi(3));
    let sh = m.sinh();
    let a4 = m * (a0 * (2.0 * m).sinh() + m) / (4.0 * a0 * sh * sh);
    let om = 1.0 - 1.0 / a0;
    if om <= 0.0 {
        return Err(Error::Domain(format!("alpha0 = {a0} <= 1: mean-flow stiffness not positive")));
    }
    let a5 = a3 + 4.0 * a4 * a4 / om;
    Ok(CoefficientSet { sigma: s, a1, a2, a3, a4, a5, one_minus_inv_alpha0: om, a3_denominator: den })
}

/// Evaluate the second-order profile constants.
pub fn profile_coefficients(params: &FluidParams, coeffs: &CoefficientSet) -> Result<ProfileCoefficients> {
    let m = params.mu0;
    let a0 = params.alpha0;
    let g2 = g_eps(2.0 * m, 0.0, &params.with_eps(0.0))?;
    if g2 <= 1e-12 {
        return Err(Error::Resonance(format!("g0(2 mu0, 0) = {g2:e} is not positive")));
    }
    let sh2 = m.sinh().powi(2);
    let s2m = (2.0 * m).sinh();
    let c1 = m * m * ((2.0 * m).cosh() + 2.0) / (4.0 * sh2 * g2);
    let c2 = m * (s2m + m) / (4.0 * sh2 * (a0 - 1.0));
    let c4 = m * (a0 * s2m + m) / (4.0 * sh2 * (a0 - 1.0));
    let c5 = c1 + m * s2m / (4.0 * sh2);
    let b1 = m * m * ((2.0 * m).cosh() + 2.0) / (2.0 * g2 * sh2);
    let b2 = m * m / (2.0 * a0 * sh2);
    let b3 = coeffs.a4 / a0;
    Ok(ProfileCoefficients { c1, c2, c4, c5, b1, b2, b3, g0_at_2mu0: g2, c0: None, c3: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{check_min, params_from_tau};
    use proptest::prelude::*;

    /// Independent oracle: the same constants written from scratch with
    /// `std` hyperbolic functions only (no shared helpers).
    fn oracle(tau: f64) -> (f64, [f64; 5], [f64; 4]) {
        let p = params_from_tau(tau, 0.0).unwrap();
        let m = p.mu0;
        let a0 = 0.5 * m * m / m.sinh().powi(2) + 0.5 * m / m.tanh();
        let b0 = -0.5 / m.sinh().powi(2) + 1.0 / (2.0 * m * m.tanh());
        let s = m.tanh();
        let a1 = b0 + (1.0 - m / m.tanh()) / m.sinh().powi(2);
        let a2 = 1.0 / (m * m.tanh());
        let bracket = ((1.0 - s * s) * (9.0 - s * s) * a0 + b0 * m * m * (3.0 - s * s) * (7.0 - s * s))
            / (a0 * s * s - b0 * m * m * (3.0 - s * s))
            + 8.0 * s * s
            - 2.0 * m / (a0 * s) * (1.0 - s * s).powi(2)
            - 3.0 * b0 * m * s.powi(3);
        let a3 = -m.powi(3) / (8.0 * s.powi(3)) * bracket;
        let a4 = m * (a0 * (2.0 * m).sinh() + m) / (4.0 * a0 * m.sinh().powi(2));
        let a5 = a3 + 4.0 * a4 * a4 / (1.0 - 1.0 / a0);
        let g2 = a0 + b0 * 4.0 * m * m - 2.0 * m / (2.0 * m).tanh();
        let c1 = m * m * ((2.0 * m).cosh() + 2.0) / (4.0 * m.sinh().powi(2) * g2);
        let c2 = m * ((2.0 * m).sinh() + m) / (4.0 * m.sinh().powi(2) * (a0 - 1.0));
        let c4 = m * (a0 * (2.0 * m).sinh() + m) / (4.0 * m.sinh().powi(2) * (a0 - 1.0));
        let c5 = c1 + m * (2.0 * m).sinh() / (4.0 * m.sinh().powi(2));
        (m, [a1, a2, a3, a4, a5], [c1, c2, c4, c5])
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn matches_independent_oracle_across_sweep() {
        for tau in [0.05, 0.1, 0.15, 0.2, 0.25, 0.3] {
            let p = params_from_tau(tau, 0.0).unwrap();
            let c = compute_coefficients(&p).unwrap();
            let pc = profile_coefficients(&p, &c).unwrap();
            let (_, a, cc) = oracle(tau);
            for (x, y) in [c.a1, c.a2, c.a3, c.a4, c.a5].iter().zip(a) {
                assert!(rel(*x, y) < 1e-11, "tau {tau}: {x} vs {y}");
            }
            for (x, y) in [pc.c1, pc.c2, pc.c4, pc.c5].iter().zip(cc) {
                assert!(rel(*x, y) < 1e-11, "tau {tau}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn golden_values_tau_02() {
        // Frozen from a double-precision evaluation cross-checked against the
        // independent oracle above.
        let p = params_from_tau(0.2, 0.0).unwrap();
        let c = compute_coefficients(&p).unwrap();
        assert!(rel(c.a1, 0.134_586_846_707_564_82) < 1e-10);
        assert!(rel(c.a2, 0.561_997_541_797_323_2) < 1e-10);
        assert!(rel(c.a3, 10.704_744_512_410_096) < 1e-9);
        assert!(rel(c.a4, 1.054_818_527_708_953) < 1e-10);
        assert!(rel(c.a5, 44.064_046_920_833_68) < 1e-9);
        let pc = profile_coefficients(&p, &c).unwrap();
        assert!(rel(pc.g0_at_2mu0, 0.632_911_228_925_368_9) < 1e-10);
    }

    #[test]
    fn identities_and_positivity_across_sweep() {
        for tau in [0.05, 0.1, 0.15, 0.2, 0.25, 0.3] {
            let p = params_from_tau(tau, 0.0).unwrap();
            let c = compute_coefficients(&p).unwrap();
            let pc = profile_coefficients(&p, &c).unwrap();
            assert!(c.admits_soliton() && c.one_minus_inv_alpha0 > 0.0);
            assert!(rel(c.a2, 1.0 / (p.mu0 * p.mu0.tanh())) < 1e-14);
            assert_eq!(c.a5, c.a3 + 4.0 * c.a4 * c.a4 / c.one_minus_inv_alpha0);
            assert!(pc.c1 > 0.0 && pc.c2 > 0.0 && pc.c4 > 0.0 && pc.c5 > 0.0);
            assert!(rel(pc.b1, 2.0 * pc.c1) < 1e-12);
            let m = p.mu0;
            assert!(rel(pc.c5, pc.c1 + m * (2.0 * m).sinh() / (4.0 * m.sinh().powi(2))) < 1e-12);
            assert_eq!(pc.b3, c.a4 / p.alpha0);
            assert!(pc.b2 > 0.0 && pc.g0_at_2mu0 > 0.0);
            assert!(pc.c0.is_none() && pc.c3.is_none());
            // The A₃ denominator coincides with −g₀(2μ₀, 0), hence never vanishes.
            assert!(rel(-c.a3_denominator, pc.g0_at_2mu0) < 1e-10);
        }
    }

    #[test]
    fn taylor_consistency_with_dispersion() {
        for tau in [0.05, 0.1, 0.15, 0.2, 0.25, 0.3] {
            let p = params_from_tau(tau, 0.0).unwrap();
            let c = compute_coefficients(&p).unwrap();
            let d = check_min(&p).unwrap();
            assert!(rel(0.5 * d.second_derivative, c.a1) < 1e-5);
            assert!(rel(0.5 * d.second_derivative_lambda, c.a2) < 1e-5);
        }
    }

    proptest! {
        #[test]
        fn b2_positive_and_a2_closed_form(tau in 0.02f64..0.33) {
            let p = params_from_tau(tau, 0.0).unwrap();
            let c = compute_coefficients(&p).unwrap();
            let pc = profile_coefficients(&p, &c).unwrap();
            prop_assert!(pc.b2 > 0.0);
            prop_assert!(rel(c.a2, p.mu0.cosh() / (p.mu0 * p.mu0.sinh())) < 1e-13);
            prop_assert!(rel(pc.b1, 2.0 * pc.c1) < 1e-12);
        }
    }
}
