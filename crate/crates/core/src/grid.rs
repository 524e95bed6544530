//! Uniform one-dimensional grids and sampled fields on the strip
//! ℝ × [0, 1] (truncated to x ∈ [−L, L]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the truncated interval is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// Endpoints ±L included; fields are taken to vanish there.
    DecayTruncated,
    /// x ∈ [−L, L) with period 2L.
    Periodic,
}

/// Uniform grid on [−L, L].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    /// Half length L.
    pub l: f64,
    /// Number of points.
    pub n: usize,
    /// Sample locations.
    pub x: Vec<f64>,
    /// Boundary treatment.
    pub bc: BoundaryKind,
}

impl Grid1D {
    /// Grid with both endpoints: x_i = −L + i·2L/(n−1).
    pub fn decay_truncated(l: f64, n: usize) -> Result<Self> {
        Self::check(l, n)?;
        let h = 2.0 * l / (n - 1) as f64;
        // Fill symmetrically so that x_i = −x_{n−1−i} holds bit-for-bit.
        let mut x = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let v = -l + i as f64 * h;
            x[i] = v;
            x[n - 1 - i] = -v;
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        Ok(Self { l, n, x, bc: BoundaryKind::DecayTruncated })
    }

    /// Periodic grid: x_i = −L + i·2L/n, i = 0..n.
    pub fn periodic(l: f64, n: usize) -> Result<Self> {
        Self::check(l, n)?;
        let h = 2.0 * l / n as f64;
        let x = (0..n).map(|i| -l + i as f64 * h).collect();
        Ok(Self { l, n, x, bc: BoundaryKind::Periodic })
    }

    fn check(l: f64, n: usize) -> Result<()> {
        if n < 16 {
            return Err(Error::InvalidArgument(format!("grid needs n >= 16 points, got {n}")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidArgument(format!("grid half-length must be positive, got {l}")));
        }
        Ok(())
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        match self.bc {
            BoundaryKind::DecayTruncated => 2.0 * self.l / (self.n - 1) as f64,
            BoundaryKind::Periodic => 2.0 * self.l / self.n as f64,
        }
    }

    /// Index of the mirror point −x_i.
    pub fn mirror(&self, i: usize) -> usize {
        match self.bc {
            BoundaryKind::DecayTruncated => self.n - 1 - i,
            BoundaryKind::Periodic => (self.n - i) % self.n,
        }
    }

    /// Trapezoid-rule weight of node i.
    pub fn weight(&self, i: usize) -> f64 {
        match self.bc {
            BoundaryKind::DecayTruncated if i == 0 || i == self.n - 1 => 0.5 * self.h(),
            _ => self.h(),
        }
    }
}

/// Uniform grid y_j = j/(n−1) on [0, 1].
pub fn uniform_unit(n: usize) -> Vec<f64> {
    (0..n).map(|j| j as f64 / (n - 1) as f64).collect()
}

/// Samples of a function on the strip, stored row-major as `values[ix * ny + iy]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripField<T> {
    /// Number of x samples.
    pub nx: usize,
    /// Number of y samples.
    pub ny: usize,
    /// Sample values.
    pub values: Vec<T>,
}

impl<T: Copy + Default> StripField<T> {
    /// Zero-initialized field.
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self { nx, ny, values: vec![T::default(); nx * ny] }
    }

    /// Value at (ix, iy).
    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> T {
        self.values[ix * self.ny + iy]
    }

    /// Mutable reference to (ix, iy).
    #[inline]
    pub fn at_mut(&mut self, ix: usize, iy: usize) -> &mut T {
        &mut self.values[ix * self.ny + iy]
    }

    /// The column y ↦ f(x_ix, y).
    pub fn column(&self, ix: usize) -> &[T] {
        &self.values[ix * self.ny..(ix + 1) * self.ny]
    }
}
