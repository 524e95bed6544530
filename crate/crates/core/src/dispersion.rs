//! Linear dispersion relation of gravity–capillary waves on finite depth and
//! the bifurcation point (μ₀, α₀, β₀) selected by a Bond number τ₀ < 1/3.
//!
//! The parameter curve is
//! α₀ = ½μ₀² cosech²μ₀ + ½μ₀ coth μ₀ and β₀ = −½cosech²μ₀ + coth μ₀/(2μ₀),
//! and the symbol of the linearized problem is
//! g_ε(μ,λ) = α₀ + ε² + β₀q² − (μ²/q²)·q coth q with q = √(μ²+λ²).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this argument the bifurcation curve is evaluated from its Taylor series.
const CURVE_SERIES_CUTOFF: f64 = 0.1;
/// Below this argument `q coth q` is evaluated from its Taylor series.
const QCOTHQ_SERIES_CUTOFF: f64 = 1e-4;

/// coth x for x > 0, accurate for small and large arguments.
pub fn coth(x: f64) -> f64 {
    // coth x = 1 + 2/(e^{2x} − 1)
    1.0 + 2.0 / (2.0 * x).exp_m1()
}

/// cosech² x for x ≠ 0, accurate for small and large arguments.
pub fn cosech2(x: f64) -> f64 {
    let x = x.abs();
    // sinh x = e^x (1 − e^{−2x})/2; keep the e^{−2x} form to avoid overflow.
    let e = (-2.0 * x).exp();
    let d = -(-2.0 * x).exp_m1();
    4.0 * e / (d * d)
}

/// `q coth q`, an even function of q equal to 1 at q = 0.
pub fn q_coth_q(q: f64) -> f64 {
    let q = q.abs();
    if q < QCOTHQ_SERIES_CUTOFF {
        let q2 = q * q;
        1.0 + q2 / 3.0 - q2 * q2 / 45.0
    } else {
        q * coth(q)
    }
}

/// Evaluate (α₀, β₀) on the bifurcation curve at wavenumber `mu0`.
pub fn alpha0_beta0(mu0: f64) -> Result<(f64, f64)> {
    if !mu0.is_finite() || mu0 <= 0.0 {
        return Err(Error::InvalidArgument(format!("mu0 must be finite and positive, got {mu0}")));
    }
    if mu0 < CURVE_SERIES_CUTOFF {
        let m2 = mu0 * mu0;
        // Horner forms of the even series about 0 (terms through μ¹²).
        let a = 1.0
            + m2 * m2
                * (1.0 / 45.0
                    + m2 * (-4.0 / 945.0
                        + m2 * (1.0 / 1575.0 + m2 * (-8.0 / 93555.0 + m2 * (1382.0 / 127702575.0)))));
        let b = 1.0 / 3.0
            + m2 * (-2.0 / 45.0
                + m2 * (2.0 / 315.0
                    + m2 * (-4.0 / 4725.0
                        + m2 * (2.0 / 18711.0 + m2 * (-2764.0 / 212837625.0 + m2 * (4.0 / 2606175.0))))));
        return Ok((a, b));
    }
    let cs2 = cosech2(mu0);
    let ct = coth(mu0);
    let alpha0 = 0.5 * mu0 * mu0 * cs2 + 0.5 * mu0 * ct;
    let beta0 = -0.5 * cs2 + ct / (2.0 * mu0);
    Ok((alpha0, beta0))
}

/// The ratio β₀/α₀ along the bifurcation curve (the Bond number at μ₀).
pub fn tau_of_mu(mu0: f64) -> Result<f64> {
    let (a, b) = alpha0_beta0(mu0)?;
    Ok(b / a)
}

/// Physical and bifurcation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    /// Bond number τ₀ ∈ (0, 1/3).
    pub tau0: f64,
    /// Carrier wavenumber μ₀ at the minimum of the dispersion curve.
    pub mu0: f64,
    /// Inverse squared Froude number at the bifurcation point.
    pub alpha0: f64,
    /// Surface-tension coefficient at the bifurcation point.
    pub beta0: f64,
    /// Bifurcation parameter ε ≥ 0.
    pub eps: f64,
}

impl FluidParams {
    /// σ = tanh μ₀.
    pub fn sigma(&self) -> f64 {
        self.mu0.tanh()
    }

    /// Return a copy with a different ε.
    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..*self }
    }

    /// Check the stored invariants: τ₀ range, β₀ = τ₀α₀, the curve formulas
    /// and the identity tanh μ₀ = μ₀/(α₀ + β₀μ₀²).
    pub fn validate(&self) -> Result<()> {
        if !(self.tau0 > 0.0 && self.tau0 < 1.0 / 3.0) {
            return Err(Error::Domain(format!("tau0 = {} outside (0, 1/3)", self.tau0)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps must be finite and >= 0, got {}", self.eps)));
        }
        let (a, b) = alpha0_beta0(self.mu0)?;
        if (self.beta0 - self.tau0 * self.alpha0).abs() > 1e-12 * self.beta0.abs() {
            return Err(Error::InvalidArgument("beta0 != tau0 * alpha0".into()));
        }
        if (a - self.alpha0).abs() > 1e-12 * a || (b - self.beta0).abs() > 1e-12 * b {
            return Err(Error::InvalidArgument("(alpha0, beta0) off the bifurcation curve".into()));
        }
        let lhs = self.sigma();
        let rhs = self.mu0 / (self.alpha0 + self.beta0 * self.mu0 * self.mu0);
        if (lhs - rhs).abs() > 1e-10 {
            return Err(Error::InvalidArgument("tanh(mu0) identity violated".into()));
        }
        Ok(())
    }
}

/// Map a Bond number τ₀ to the bifurcation point by a bracketing scan of
/// β₀(μ)/α₀(μ) − τ₀ over μ ∈ [1e−3, 50] followed by bisection.
pub fn params_from_tau(tau0: f64, eps: f64) -> Result<FluidParams> {
    if !(tau0 > 0.0 && tau0 < 1.0 / 3.0) {
        return Err(Error::Domain(format!("tau0 = {tau0} outside (0, 1/3)")));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be finite and >= 0, got {eps}")));
    }
    const SCAN: usize = 4000;
    let (lo, hi) = (1e-3f64, 50.0f64);
    let f = |mu: f64| -> Result<f64> { Ok(tau_of_mu(mu)? - tau0) };
    let ratio = (hi / lo).ln();
    let mut bracket = None;
    let mut changes = 0usize;
    let mut prev_mu = lo;
    let mut prev_f = f(lo)?;
    for i in 1..=SCAN {
        let mu = if i == SCAN { hi } else { lo * (ratio * i as f64 / SCAN as f64).exp() };
        let fm = f(mu)?;
        if (prev_f < 0.0) != (fm < 0.0) {
            changes += 1;
            bracket = Some((prev_mu, mu, prev_f));
        }
        prev_mu = mu;
        prev_f = fm;
    }
    let (mut a, mut b, fa0) = match (changes, bracket) {
        (1, Some(br)) => br,
        _ => {
            return Err(Error::RootIsolation(format!(
                "expected one sign change of beta0/alpha0 - {tau0} on [1e-3, 50], found {changes}"
            )))
        }
    };
    let neg_left = fa0 < 0.0;
    while b - a > 1e-13 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m)? < 0.0) == neg_left {
            a = m;
        } else {
            b = m;
        }
    }
    let mu0 = 0.5 * (a + b);
    let (alpha0, _) = alpha0_beta0(mu0)?;
    // β₀ is stored as τ₀α₀ so that the defining relation holds to rounding.
    Ok(FluidParams { tau0, mu0, alpha0, beta0: tau0 * alpha0, eps })
}

/// One sample of the dispersion symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    /// Longitudinal wavenumber μ.
    pub mu: f64,
    /// Transverse spectral parameter λ ≥ 0.
    pub lambda: f64,
    /// q = √(μ² + λ²).
    pub q: f64,
    /// g_ε(μ, λ).
    pub g: f64,
}

/// Evaluate g_ε(μ, λ); even in both arguments, undefined at the origin.
pub fn g_eps(mu: f64, lambda: f64, params: &FluidParams) -> Result<f64> {
    let (mu, lambda) = (mu.abs(), lambda.abs());
    if !mu.is_finite() || !lambda.is_finite() {
        return Err(Error::InvalidArgument("non-finite (mu, lambda)".into()));
    }
    if mu == 0.0 && lambda == 0.0 {
        return Err(Error::Domain("g is direction dependent at (mu, lambda) = (0, 0)".into()));
    }
    let q2 = mu * mu + lambda * lambda;
    let q = q2.sqrt();
    Ok(params.alpha0 + params.eps * params.eps + params.beta0 * q2 - (mu * mu / q2) * q_coth_q(q))
}

/// Cancellation-free increment g₀(μ₀+h, 0) − g₀(μ₀, 0).
///
/// Uses coth a − coth b = sinh(b − a)/(sinh a sinh b) so that the result keeps
/// full relative accuracy even when it is of size h².
pub fn g0_increment_mu(params: &FluidParams, h: f64) -> f64 {
    let m = params.mu0;
    let mh = m + h;
    let dcoth = -h.sinh() / (mh.sinh() * m.sinh());
    // (m+h)coth(m+h) − m coth m = h coth(m+h) + m (coth(m+h) − coth m)
    let dqcq = h * coth(mh) + m * dcoth;
    params.beta0 * (2.0 * m * h + h * h) - dqcq
}

/// Cancellation-free increment g₀(μ₀, λ) − g₀(μ₀, 0).
pub fn g0_increment_lambda(params: &FluidParams, lambda: f64) -> f64 {
    let m = params.mu0;
    let l2 = lambda * lambda;
    let q = (m * m + l2).sqrt();
    let dq = l2 / (q + m);
    let dcoth = -dq.sinh() / (q.sinh() * m.sinh());
    // coth q / q − coth m / m = [m (coth q − coth m) − (q − m) coth m]/(q m)
    let df = (m * dcoth - dq * coth(m)) / (q * m);
    params.beta0 * l2 - m * m * df
}

/// Finite-difference diagnostics of the minimum of μ ↦ g₀(μ, 0) at μ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinDiagnostics {
    /// g₀(μ₀, 0), which vanishes by construction.
    pub g_at_min: f64,
    /// Central-difference ∂_μ g₀(μ₀, 0).
    pub first_derivative: f64,
    /// Central-difference ∂²_μ g₀(μ₀, 0).
    pub second_derivative: f64,
    /// Central-difference ∂²_λ g₀(μ₀, 0).
    pub second_derivative_lambda: f64,
    /// Step used, 1e−5·max(1, μ₀).
    pub step: f64,
}

/// Check that μ₀ minimizes g₀(·, 0): value and slope vanish, curvature is 2A₁.
pub fn check_min(params: &FluidParams) -> Result<MinDiagnostics> {
    let p0 = params.with_eps(0.0);
    let h = 1e-5 * p0.mu0.max(1.0);
    let g_at_min = g_eps(p0.mu0, 0.0, &p0)?;
    let dp = g0_increment_mu(&p0, h);
    let dm = g0_increment_mu(&p0, -h);
    let dl = g0_increment_lambda(&p0, h);
    Ok(MinDiagnostics {
        g_at_min,
        first_derivative: (dp - dm) / (2.0 * h),
        second_derivative: (dp + dm) / (h * h),
        second_derivative_lambda: 2.0 * dl / (h * h),
        step: h,
    })
}

/// Sample g_ε(μ, 0) uniformly on `mu_range` with `n ≥ 2` points.
pub fn dispersion_curve(params: &FluidParams, mu_range: (f64, f64), n: usize) -> Result<Vec<DispersionSample>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2 samples, got {n}")));
    }
    let (a, b) = mu_range;
    (0..n)
        .map(|i| {
            let mu = if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 };
            Ok(DispersionSample { mu, lambda: 0.0, q: mu.abs(), g: g_eps(mu, 0.0, params)? })
        })
        .collect()
}
