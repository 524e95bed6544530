//! Small self-contained linear-algebra kernels: symmetric banded
//! eigenvalues by Sturm counts, banded LU, tridiagonal solves, restarted
//! GMRES, Chebyshev collocation on [0, 1] and periodic FFTs.

pub mod banded;
pub mod cheb;
pub mod fourier;
pub mod gmres;
pub mod tridiag;

pub use banded::{BandLu, SymBand};
pub use cheb::Chebyshev;
pub use fourier::Fourier;
pub use gmres::{gmres, gmres_best_effort, GmresOutcome};
pub use tridiag::solve_tridiagonal;
