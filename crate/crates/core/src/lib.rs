//! Numerics for the dimension-breaking bifurcation of gravity–capillary
//! line solitary waves on water of finite depth.
//!
//! The crate evaluates the dispersion relation and its minimizer, the
//! weakly nonlinear model coefficients, the envelope solitons and
//! second-order line-wave profiles, the spectra of the reduced
//! Davey–Stewartson operators (and hence the dimension-breaking wavenumber
//! k₀), Green's-function solves on the strip, the full linearized
//! spatial-dynamics operator with its imaginary eigenvalue search, and the
//! leading-order modulated wave surfaces.

pub mod cli_io;
pub mod coefficients;
pub mod dispersion;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod reduced_spectra;
pub mod soliton;
pub mod strip_bvp;
pub mod waterwave_linop;
pub mod wave_synthesis;

pub use cli_io::{load_config, run, Command, ConfigOverrides, OutputFormat, ResultManifest, RunConfig};
pub use coefficients::{compute_coefficients, profile_coefficients, CoefficientSet, ProfileCoefficients};
pub use dispersion::{alpha0_beta0, check_min, dispersion_curve, g_eps, params_from_tau, DispersionSample, FluidParams, MinDiagnostics};
pub use error::{Error, Result};
pub use grid::{BoundaryKind, Grid1D, StripField};
pub use reduced_spectra::{
    assemble_btilde, assemble_schrodinger, coercivity_check, delta_ess, find_k0, k0_refinement, kappa_root_solve, quadratic_form_witness,
    schrodinger_spectrum, schrodinger_spectrum_restricted, spectrum_of, witness_closed_form, witness_form, CoercivityReport,
    DimensionBreakingMode, DimensionBreakingResult, K0Refinement, Parity, ParityReport, SpectrumResult, Symmetry, DEFAULT_COERCIVITY_SEED,
};
pub use soliton::{build_line_wave, build_soliton, ds_residual, nls_residual, star_fields, Branch, DerivativeMode, Envelope, LineWaveProfile, SolitonProfile, StarFields};
pub use strip_bvp::{
    apply_green_operators, fd_oracle_solve, green_eval, green_remainder, leading_order_rate, oracle_discrepancy, solve_gamma, solve_modal_bvp,
    packet_gamma_solve, wave_packet, GammaProblem, GammaSolution, LeadingOrderRate, LeadingOrderSample, ModalBvpProblem,
};
pub use waterwave_linop::{
    assemble_l, imaginary_eigenvalue_search, instability_report, linearity_defect, reverser_check, symplectic_check, EigenSearchResult,
    InstabilityReport, LinearOperatorHandle, LinopGrid, StateVector,
};
pub use wave_synthesis::{line_wave_surface, synthesize, WaveSurface, WaveSurfaceMeta};
