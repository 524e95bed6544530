//! Symmetric banded matrices: inertia by LDLᵀ (Sturm counts), eigenvalues
//! by bisection and eigenvectors by inverse iteration with a banded LU.

use crate::error::{Error, Result};

/// Real symmetric matrix with half-bandwidth `b`, storing the lower band.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    b: usize,
    /// `low[i * (b + 1) + k]` = A[i, i − k].
    low: Vec<f64>,
}

impl SymBand {
    /// Zero matrix of order `n` with half-bandwidth `b`.
    pub fn zeros(n: usize, b: usize) -> Self {
        Self { n, b, low: vec![0.0; n * (b + 1)] }
    }

    /// Order.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Half-bandwidth.
    pub fn bandwidth(&self) -> usize {
        self.b
    }

    /// A[i, j] (zero outside the band).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.b {
            0.0
        } else {
            self.low[i * (self.b + 1) + (i - j)]
        }
    }

    /// Add `v` to A[i, j] and A[j, i] (once on the diagonal).
    ///
    /// # Panics
    /// If |i − j| exceeds the bandwidth.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.b, "entry ({i}, {j}) outside band {}", self.b);
        self.low[i * (self.b + 1) + (i - j)] += v;
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.low[i * (self.b + 1)..(i + 1) * (self.b + 1)];
            y[i] += row[0] * x[i];
            for k in 1..=self.b.min(i) {
                y[i] += row[k] * x[i - k];
                y[i - k] += row[k] * x[i];
            }
        }
        y
    }

    /// Max-abs row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        let mut s = vec![0.0f64; self.n];
        for i in 0..self.n {
            for k in 0..=self.b.min(i) {
                let v = self.low[i * (self.b + 1) + k].abs();
                s[i] += v;
                if k > 0 {
                    s[i - k] += v;
                }
            }
        }
        s.into_iter().fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut r = vec![0.0f64; self.n];
        for i in 0..self.n {
            for k in 1..=self.b.min(i) {
                let v = self.low[i * (self.b + 1) + k].abs();
                r[i] += v;
                r[i - k] += v;
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let d = self.low[i * (self.b + 1)];
            lo = lo.min(d - r[i]);
            hi = hi.max(d + r[i]);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma`, from the signs of the
    /// pivots of A − σI = LDLᵀ (Sylvester's law of inertia).
    ///
    /// Pivots smaller than a tiny multiple of ‖A‖ are replaced by that
    /// multiple, which perturbs A − σI by at most a rounding-level amount.
    pub fn count_below(&self, sigma: f64) -> usize {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        let tiny = f64::EPSILON * self.norm_inf().max(1.0) * 1e-3;
        // l[i * w + k] = L[i, i − k], d[i] = D[i]
        let mut l = vec![0.0; n * w];
        let mut d = vec![0.0; n];
        let mut neg = 0;
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..i {
                let mut s = self.low[i * w + (i - j)];
                let k0 = j.saturating_sub(b).max(j0);
                for k in k0..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)] * d[k];
                }
                l[i * w + (i - j)] = s / d[j];
            }
            let mut s = self.low[i * w] - sigma;
            for k in j0..i {
                let lik = l[i * w + (i - k)];
                s -= lik * lik * d[k];
            }
            if s.abs() < tiny {
                s = -tiny;
            }
            d[i] = s;
            if s < 0.0 {
                neg += 1;
            }
        }
        neg
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection on Sturm counts.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.n {
            return Err(Error::InvalidArgument(format!("eigenvalue index {k} >= order {}", self.n)));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (hi - lo).abs().max(1.0);
        lo -= pad;
        hi += pad;
        let tol = 4.0 * f64::EPSILON * self.norm_inf().max(1.0);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= tol || mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The `count` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        (0..count.min(self.n)).map(|k| self.eigenvalue(k)).collect()
    }

    /// Unit eigenvector for the (isolated) eigenvalue `lambda`, by inverse
    /// iteration from a fixed deterministic start vector.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.n;
        let scale = self.norm_inf().max(1.0);
        let shift = lambda + 64.0 * f64::EPSILON * scale;
        let lu = BandLu::factor(self, shift)?;
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (0.7 * i as f64).sin()).collect();
        normalize(&mut v);
        for _ in 0..4 {
            let mut w = lu.solve(&v);
            normalize(&mut w);
            let diff: f64 = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let diff_neg: f64 = v.iter().zip(&w).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
            v = w;
            if diff.min(diff_neg) < 1e-14 {
                break;
            }
        }
        Ok(v)
    }
}

fn normalize(v: &mut [f64]) {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// LU factorization with partial pivoting of a banded (kl = ku = b) matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    /// Row i stores columns i − kl ..= i + 2kl (room for pivoting fill).
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Factor A − σI for a symmetric banded A.
    ///
    /// Exactly zero pivots are replaced by a rounding-level value so that
    /// the factorization can be used for inverse iteration at an eigenvalue.
    pub fn factor(m: &SymBand, sigma: f64) -> Result<Self> {
        let n = m.n;
        let kl = m.b;
        let width = 3 * kl + 1;
        let mut lu = Self { n, kl, width, a: vec![0.0; n * width], piv: vec![0; n] };
        for i in 0..n {
            let j0 = i.saturating_sub(kl);
            let j1 = (i + kl).min(n - 1);
            for j in j0..=j1 {
                let v = m.get(i, j) - if i == j { sigma } else { 0.0 };
                let id = lu.idx(i, j);
                lu.a[id] = v;
            }
        }
        let tiny = f64::EPSILON * m.norm_inf().max(1.0);
        for k in 0..n {
            let rmax = (k + kl).min(n - 1);
            let cmax = (k + 2 * kl).min(n - 1);
            let mut p = k;
            let mut best = lu.a[lu.idx(k, k)].abs();
            for i in k + 1..=rmax {
                let v = lu.a[lu.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            lu.piv[k] = p;
            if p != k {
                for j in k..=cmax {
                    let (ia, ib) = (lu.idx(k, j), lu.idx(p, j));
                    lu.a.swap(ia, ib);
                }
            }
            let dk = lu.idx(k, k);
            if lu.a[dk] == 0.0 {
                lu.a[dk] = tiny;
            }
            if !lu.a[dk].is_finite() {
                return Err(Error::Solver("non-finite pivot in banded LU".into()));
            }
            let pivot = lu.a[dk];
            for i in k + 1..=rmax {
                let ik = lu.idx(i, k);
                let l = lu.a[ik] / pivot;
                lu.a[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=cmax {
                        let (ij, kj) = (lu.idx(i, j), lu.idx(k, j));
                        lu.a[ij] -= l * lu.a[kj];
                    }
                }
            }
        }
        Ok(lu)
    }

    /// Solve (A − σI) x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let kl = self.kl;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                x[i] -= self.a[self.idx(i, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + 2 * kl).min(n - 1) {
                s -= self.a[self.idx(k, j)] * x[j];
            }
            x[k] = s / self.a[self.idx(k, k)];
        }
        x
    }
}
