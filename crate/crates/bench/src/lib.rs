//! Shared fixtures for the benchmarks in `benches/`.

use dimbreak_core::{compute_coefficients, params_from_tau, CoefficientSet, FluidParams, Grid1D};

/// Bond number of the benchmark fixture.
pub const TAU0: f64 = 0.2;
/// ε of the benchmark fixture.
pub const EPS: f64 = 0.05;

/// Parameters and coefficients at (τ₀, ε) = (0.2, 0.05).
pub fn fixture() -> (FluidParams, CoefficientSet) {
    let p = params_from_tau(TAU0, EPS).expect("fixture parameters");
    let c = compute_coefficients(&p).expect("fixture coefficients");
    (p, c)
}

/// Slow grid of half-length 40√A₁ with `n` points.
pub fn slow_grid(c: &CoefficientSet, n: usize) -> Grid1D {
    Grid1D::decay_truncated(40.0 * c.a1.sqrt(), n).expect("slow grid")
}
