//! Exportable surfaces: the line solitary wave η*_ε(x) and the
//! leading-order periodically modulated solitary wave
//! η_s(x, z) = η*_ε(x) + s·ε·ζ₁(εx)cos(μ₀x)cos(εk_ε z).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{profile_coefficients, CoefficientSet};
use crate::dispersion::FluidParams;
use crate::error::{Error, Result};
use crate::reduced_spectra::DimensionBreakingMode;
use crate::soliton::{star_fields, Branch, Envelope};

/// Relative reflection asymmetry above which a mode is rejected as not even.
pub const EVEN_MODE_TOLERANCE: f64 = 1e-6;

/// Metadata of a [`WaveSurface`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSurfaceMeta {
    /// Bond number τ₀.
    pub tau0: f64,
    /// ε.
    pub eps: f64,
    /// Amplitude of the transverse modulation. This is a free visualization
    /// scale for the leading-order term, not the parameter of a computed
    /// nonlinear branch.
    pub leading_order_amplitude: f64,
    /// Transverse wavenumber k_ε (frequency εk_ε in z).
    pub k_eps: f64,
    /// Carrier wavenumber μ₀.
    pub mu0: f64,
    /// Transverse period 2π/(εk_ε).
    pub transverse_period: f64,
    /// Scale applied to the supplied ζ₁ so that max|ζ₁| equals the envelope peak.
    pub mode_scale: f64,
}

/// Samples η(x_i, z_k), stored row-major as `eta[i * z.len() + k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSurface {
    /// x axis.
    pub x: Vec<f64>,
    /// z axis: one transverse period, z_k = k·T/nz.
    pub z: Vec<f64>,
    /// Surface elevation.
    pub eta: Vec<f64>,
    /// Metadata.
    pub meta: WaveSurfaceMeta,
}

impl WaveSurface {
    /// η(x_i, z_k).
    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.eta[i * self.z.len() + k]
    }
}

/// η*_ε at the given points (orders ε and ε², positive branch).
pub fn line_wave_surface(params: &FluidParams, coeffs: &CoefficientSet, x: &[f64]) -> Result<Vec<f64>> {
    let pc = profile_coefficients(params, coeffs)?;
    Ok(star_fields(params, coeffs, &pc, x, &[0.0], Branch::Positive)?.eta)
}

fn mirror_asymmetry(x: &[f64], f: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 3 || f.len() != n {
        return Err(Error::InvalidArgument("mode and grid lengths differ or are too short".into()));
    }
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if (0..n).any(|i| (x[i] + x[n - 1 - i]).abs() > 1e-12 * scale) {
        return Err(Error::InvalidArgument("mode grid is not symmetric about x = 0".into()));
    }
    let num: f64 = (0..n).map(|i| (f[i] - f[n - 1 - i]).powi(2)).sum::<f64>().sqrt();
    let den: f64 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::InvalidArgument("mode is identically zero".into()));
    }
    Ok(num / den)
}

/// Assemble η_s on x = X/ε (X the slow grid of `mode`) and nz points of
/// one transverse period.
///
/// ζ₁ is rescaled so that max|ζ₁| equals the envelope peak ζ*(0); `s` is
/// then the modulation amplitude relative to the line wave. A mode whose
/// ζ₁ is not even is rejected with a symmetry error.
pub fn synthesize(
    params: &FluidParams,
    coeffs: &CoefficientSet,
    mode: &DimensionBreakingMode,
    k_eps: f64,
    s: f64,
    nz: usize,
) -> Result<WaveSurface> {
    if !(params.eps > 0.0) {
        return Err(Error::InvalidArgument(format!("synthesis needs eps > 0, got {}", params.eps)));
    }
    if !(k_eps > 0.0 && k_eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("k_eps must be positive, got {k_eps}")));
    }
    if !s.is_finite() {
        return Err(Error::InvalidArgument("amplitude must be finite".into()));
    }
    if nz < 2 {
        return Err(Error::InvalidArgument(format!("nz must be at least 2, got {nz}")));
    }
    let asym = mirror_asymmetry(&mode.x, &mode.zeta1)?;
    if asym > EVEN_MODE_TOLERANCE {
        return Err(Error::Symmetry(format!("zeta1 is not even (relative asymmetry {asym:e})")));
    }
    let eps = params.eps;
    let peak = Envelope::new(coeffs, Branch::Positive)?.value(0.0);
    let zmax = mode.zeta1.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mode_scale = peak / zmax;
    let x: Vec<f64> = mode.x.iter().map(|v| v / eps).collect();
    // Evaluate at |x| and average ζ₁ with its mirror image so that evenness
    // in x holds exactly (the grid satisfies x_{n−1−i} = −x_i).
    let ax: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let star = line_wave_surface(params, coeffs, &ax)?;
    let n = x.len();
    let zeta: Vec<f64> = (0..n).map(|i| 0.5 * (mode.zeta1[i] + mode.zeta1[n - 1 - i])).collect();
    let freq = eps * k_eps;
    let period = 2.0 * std::f64::consts::PI / freq;
    let z: Vec<f64> = (0..nz).map(|k| k as f64 * period / nz as f64).collect();
    // cos(2πk/nz) evaluated symmetrically so that z ↦ −z evenness is exact.
    let cz: Vec<f64> = (0..nz)
        .map(|k| {
            let kk = k.min(nz - k);
            (2.0 * std::f64::consts::PI * kk as f64 / nz as f64).cos()
        })
        .collect();
    let m = params.mu0;
    let eta: Vec<f64> = ax
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &xv)| {
            let amp = s * eps * mode_scale * zeta[i] * (m * xv).cos();
            let base = star[i];
            cz.iter().map(move |c| base + amp * c)
        })
        .collect();
    Ok(WaveSurface {
        x,
        z,
        eta,
        meta: WaveSurfaceMeta {
            tau0: params.tau0,
            eps,
            leading_order_amplitude: s,
            k_eps,
            mu0: m,
            transverse_period: period,
            mode_scale,
        },
    })
}
