//! Chebyshev–Gauss–Lobatto collocation on [0, 1].

/// Nodes y_j = (1 − cos(πj/N))/2 (so y₀ = 0, y_N = 1), the first-derivative
/// matrix and Clenshaw–Curtis quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    /// Polynomial degree N (N + 1 nodes).
    pub degree: usize,
    /// Nodes on [0, 1], increasing.
    pub y: Vec<f64>,
    /// Row-major (N+1)×(N+1) differentiation matrix d/dy.
    pub d1: Vec<f64>,
    /// Row-major second-derivative matrix (d1 squared).
    pub d2: Vec<f64>,
    /// Clenshaw–Curtis weights for ∫₀¹.
    pub w: Vec<f64>,
}

impl Chebyshev {
    /// Build the collocation data for degree `degree` ≥ 2.
    ///
    /// # Panics
    /// If `degree < 2`.
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 2, "Chebyshev degree must be at least 2");
        let n = degree;
        let m = n + 1;
        let pi = std::f64::consts::PI;
        let t: Vec<f64> = (0..m).map(|j| (pi * j as f64 / n as f64).cos()).collect();
        let c: Vec<f64> = (0..m)
            .map(|j| {
                let e = if j == 0 || j == n { 2.0 } else { 1.0 };
                if j % 2 == 0 {
                    e
                } else {
                    -e
                }
            })
            .collect();
        let mut dt = vec![0.0; m * m];
        for i in 0..m {
            let mut row_sum = 0.0;
            for j in 0..m {
                if i != j {
                    let v = c[i] / c[j] / (t[i] - t[j]);
                    dt[i * m + j] = v;
                    row_sum += v;
                }
            }
            // Negative-sum trick keeps D·1 = 0 exactly.
            dt[i * m + i] = -row_sum;
        }
        // y = (1 − t)/2 ⇒ d/dy = −2 d/dt.
        let d1: Vec<f64> = dt.iter().map(|v| -2.0 * v).collect();
        let mut d2 = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                let a = d1[i * m + k];
                if a != 0.0 {
                    for j in 0..m {
                        d2[i * m + j] += a * d1[k * m + j];
                    }
                }
            }
        }
        let y = t.iter().map(|v| 0.5 * (1.0 - v)).collect();
        let w = clenshaw_curtis(n).into_iter().map(|v| 0.5 * v).collect();
        Self { degree, y, d1, d2, w }
    }

    /// Number of nodes N + 1.
    pub fn len(&self) -> usize {
        self.degree + 1
    }

    /// Always false (a collocation grid has at least three nodes).
    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Clenshaw–Curtis weights on [−1, 1] for the nodes cos(πj/N).
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    let theta: Vec<f64> = (0..=n).map(|j| pi * j as f64 / nf).collect();
    let mut v = vec![1.0; n.saturating_sub(1)];
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * k as f64 * theta[i + 1]).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta[i + 1]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * k as f64 * theta[i + 1]).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        }
    }
    for (i, vi) in v.iter().enumerate() {
        w[i + 1] = 2.0 * vi / nf;
    }
    w
}
