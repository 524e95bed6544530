//! Spectra of the reduced envelope operators.
//!
//! * Schrödinger operators A₂⁻¹(1 − A₁∂ₓ² − c·sech²(x/√A₁)), c ∈ {2, 6}
//!   (the operators C₀,₂ and C₀,₁).
//! * The three-component operator B̃ acting on w = (ζ₁, ζ₂, ψ):
//!
//!   ```text
//!   ζ₁ ↦ A₂⁻¹(ζ₁ − A₁ζ₁ₓₓ − (2A₃+A₅)ζ*²ζ₁) + 4A₂⁻¹A₄ζ*ψₓ
//!   ζ₂ ↦ A₂⁻¹(ζ₂ − A₁ζ₂ₓₓ − A₅ζ*²ζ₂)
//!   ψ  ↦ −(1−α₀⁻¹)ψₓₓ − 2A₄(ζ*ζ₁)ₓ
//!   ```
//!
//!   which is self-adjoint in ⟨⟨w, w̃⟩⟩ = ⟨ζ₁,ζ̃₁⟩ + ⟨ζ₂,ζ̃₂⟩ + 2A₂⁻¹⟨ψ,ψ̃⟩.
//!   Its unique negative eigenvalue −k₀² defines the dimension-breaking
//!   wavenumber k₀.
//! * The auxiliary operator on v = (ζ₁, ζ₂, φ = ψₓ) used in the coercivity
//!   estimate.
//!
//! Discretization: second-order centered differences on a decay-truncated
//! grid with homogeneous Dirichlet data at ±L. Unknowns are interleaved per
//! node so every operator is banded; the weighted operator W·M is symmetric
//! by construction and the eigenproblem is solved on W^{1/2} M W^{−1/2} by
//! Sturm-count bisection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Grid1D};
use crate::linalg::SymBand;
use crate::soliton::{Branch, Envelope};

/// Default seed of the coercivity probe generator.
pub const DEFAULT_COERCIVITY_SEED: u64 = 0x5EED;

/// Parity of a component under x ↦ −x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// f(−x) = f(x).
    Even,
    /// f(−x) = −f(x).
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Which subspace an assembly acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    /// All grid functions.
    Full,
    /// The reflection-invariant subspace: each component has its prescribed
    /// parity (ζ₁ even, ζ₂ odd, ψ odd for B̃), stored on the half grid x > 0.
    FixR,
}

/// General (non-symmetric) banded matrix with equal lower/upper bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    b: usize,
    a: Vec<f64>,
}

impl BandMatrix {
    /// Zero matrix.
    pub fn zeros(n: usize, b: usize) -> Self {
        Self { n, b, a: vec![0.0; n * (2 * b + 1)] }
    }

    /// Order.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Half-bandwidth.
    pub fn bandwidth(&self) -> usize {
        self.b
    }

    /// M[i, j] (zero outside the band).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.b {
            0.0
        } else {
            self.a[i * (2 * self.b + 1) + (j + self.b - i)]
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i.abs_diff(j) <= self.b, "entry ({i}, {j}) outside band {}", self.b);
        self.a[i * (2 * self.b + 1) + (j + self.b - i)] += v;
    }

    /// y = M x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.b);
                let hi = (i + self.b).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Unknown layout: interleaved components on a set of grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    /// Grid indices carrying unknowns, ascending.
    pub nodes: Vec<usize>,
    /// Parity of each component (used only for [`Symmetry::FixR`]).
    pub parities: Vec<Parity>,
    /// Subspace.
    pub symmetry: Symmetry,
    /// Number of grid points.
    pub grid_n: usize,
}

impl Layout {
    fn new(grid: &Grid1D, parities: Vec<Parity>, symmetry: Symmetry) -> Result<Self> {
        if grid.bc != BoundaryKind::DecayTruncated {
            return Err(Error::InvalidArgument("reduced operators need a decay-truncated grid".into()));
        }
        let n = grid.n;
        let nodes = match symmetry {
            Symmetry::Full => (1..n - 1).collect(),
            Symmetry::FixR => {
                if n % 2 != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "Fix R restriction needs an even point count (no node at x = 0), got n = {n}"
                    )));
                }
                (n / 2..n - 1).collect()
            }
        };
        Ok(Self { nodes, parities, symmetry, grid_n: n })
    }

    /// Number of components per node.
    pub fn ncomp(&self) -> usize {
        self.parities.len()
    }

    /// Total unknown count.
    pub fn len(&self) -> usize {
        self.nodes.len() * self.ncomp()
    }

    /// Whether the layout has no unknowns.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn first(&self) -> usize {
        self.nodes[0]
    }

    /// Map (grid index, component) to (unknown index, sign); `None` for
    /// Dirichlet boundary nodes.
    fn unknown(&self, j: usize, comp: usize) -> Option<(usize, f64)> {
        let n = self.grid_n;
        if j == 0 || j == n - 1 {
            return None;
        }
        let (j, s) = match self.symmetry {
            Symmetry::Full => (j, 1.0),
            Symmetry::FixR if j < self.first() => (n - 1 - j, self.parities[comp].sign()),
            Symmetry::FixR => (j, 1.0),
        };
        Some(((j - self.first()) * self.ncomp() + comp, s))
    }

    /// Expand an unknown vector into full-grid samples, one vector per component.
    pub fn expand(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let n = self.grid_n;
        let nc = self.ncomp();
        let mut out = vec![vec![0.0; n]; nc];
        for (c, comp) in out.iter_mut().enumerate() {
            for (j, v) in comp.iter_mut().enumerate() {
                if let Some((k, s)) = self.unknown(j, c) {
                    *v = s * u[k];
                }
            }
        }
        out
    }

    /// Restrict full-grid component samples to the unknown vector.
    pub fn restrict(&self, comps: &[Vec<f64>]) -> Vec<f64> {
        let nc = self.ncomp();
        let mut u = vec![0.0; self.len()];
        for (k, &j) in self.nodes.iter().enumerate() {
            for c in 0..nc {
                u[k * nc + c] = comps[c][j];
            }
        }
        u
    }
}

/// A discretized reduced operator M with its metric W.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorAssembly {
    /// The operator M.
    pub matrix: BandMatrix,
    /// Diagonal metric: grid weight times the component factor.
    pub weight: Vec<f64>,
    /// Grid.
    pub grid: Grid1D,
    /// Unknown layout.
    pub layout: Layout,
}

impl OperatorAssembly {
    /// Subspace acted on.
    pub fn symmetry(&self) -> Symmetry {
        self.layout.symmetry
    }

    /// max |(W M)ᵢⱼ − (W M)ⱼᵢ| / max |M|.
    pub fn weighted_asymmetry(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.n() {
            for j in i + 1..=(i + m.bandwidth()).min(m.n() - 1) {
                let d = self.weight[i] * m.get(i, j) - self.weight[j] * m.get(j, i);
                worst = worst.max(d.abs());
            }
        }
        worst / m.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Check the weighted-symmetry invariant (tolerance 1e−10).
    pub fn check_symmetry(&self) -> Result<()> {
        // Relative to ‖M‖ scaled by the largest weight, which carries the units of W·M.
        let wmax = self.weight.iter().fold(0.0f64, |a, b| a.max(*b));
        let asym = self.weighted_asymmetry() / wmax.max(f64::MIN_POSITIVE);
        if asym < 1e-10 {
            Ok(())
        } else {
            Err(Error::Discretization(format!("weighted symmetry violated: relative asymmetry {asym:e}")))
        }
    }

    /// S = W^{1/2} M W^{−1/2}, symmetric banded (averaging the two triangles).
    pub fn symmetrized(&self) -> SymBand {
        let m = &self.matrix;
        let b = m.bandwidth();
        let mut s = SymBand::zeros(m.n(), b);
        let sw: Vec<f64> = self.weight.iter().map(|w| w.sqrt()).collect();
        for i in 0..m.n() {
            s.add(i, i, m.get(i, i));
            for j in i.saturating_sub(b)..i {
                let a = sw[i] * m.get(i, j) / sw[j];
                let c = sw[j] * m.get(j, i) / sw[i];
                s.add(i, j, 0.5 * (a + c));
            }
        }
        s
    }

    /// The weighted form ⟨⟨M u, v⟩⟩ = Σ Wᵢ (Mu)ᵢ vᵢ.
    pub fn form(&self, u: &[f64], v: &[f64]) -> f64 {
        let mu = self.matrix.matvec(u);
        mu.iter().zip(v).zip(&self.weight).map(|((a, b), w)| a * b * w).sum()
    }

    /// ⟨⟨u, v⟩⟩.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.weight).map(|((a, b), w)| a * b * w).sum()
    }

    /// Eigenvalues below `below` are counted with one Sturm sequence.
    pub fn count_below(&self, below: f64) -> usize {
        self.symmetrized().count_below(below)
    }
}

struct Builder<'a> {
    layout: Layout,
    m: BandMatrix,
    grid: &'a Grid1D,
}

impl<'a> Builder<'a> {
    fn new(grid: &'a Grid1D, parities: Vec<Parity>, symmetry: Symmetry) -> Result<Self> {
        let layout = Layout::new(grid, parities, symmetry)?;
        let nc = layout.ncomp();
        // Neighbouring nodes couple components at index distance ≤ 2nc − 1.
        let b = 2 * nc - 1;
        let m = BandMatrix::zeros(layout.len(), b);
        Ok(Self { layout, m, grid })
    }

    /// Add `v` times (component `cc` at grid node `j`) to the row of
    /// (component `rc` at grid node `i`).
    fn add(&mut self, row: usize, j: usize, cc: usize, v: f64) {
        if let Some((col, s)) = self.layout.unknown(j, cc) {
            self.m.add(row, col, s * v);
        }
    }

    fn finish(self, factors: &[f64]) -> OperatorAssembly {
        let h = self.grid.h();
        let nc = self.layout.ncomp();
        let weight = (0..self.layout.len()).map(|k| h * factors[k % nc]).collect();
        OperatorAssembly { matrix: self.m, weight, grid: self.grid.clone(), layout: self.layout }
    }
}

fn zeta_star(coeffs: &CoefficientSet, grid: &Grid1D) -> Result<Vec<f64>> {
    let env = Envelope::new(coeffs, Branch::Positive)?;
    Ok(grid.x.iter().map(|&x| env.value(x)).collect())
}

/// Assemble A₂⁻¹(1 − A₁∂ₓ² − c·sech²(x/√A₁)) on the given subspace.
/// With [`Symmetry::FixR`] the single component has parity `parity`.
pub fn assemble_schrodinger(c: f64, coeffs: &CoefficientSet, grid: &Grid1D, symmetry: Symmetry, parity: Parity) -> Result<OperatorAssembly> {
    if !(coeffs.a1 > 0.0) {
        return Err(Error::NoSoliton(format!("A1 = {} is not positive", coeffs.a1)));
    }
    let mut bld = Builder::new(grid, vec![parity], symmetry)?;
    let h = grid.h();
    let ia2 = coeffs.inv_a2();
    let lap = coeffs.a1 / (h * h);
    let w = coeffs.a1.sqrt();
    let nodes = bld.layout.nodes.clone();
    for (k, &i) in nodes.iter().enumerate() {
        let sech = 1.0 / (grid.x[i] / w).cosh();
        bld.add(k, i, 0, ia2 * (1.0 + 2.0 * lap - c * sech * sech));
        bld.add(k, i - 1, 0, -ia2 * lap);
        bld.add(k, i + 1, 0, -ia2 * lap);
    }
    Ok(bld.finish(&[1.0]))
}

/// Assemble B̃ on w = (ζ₁, ζ₂, ψ). The operator does not depend on k, so
/// there is no k argument.
pub fn assemble_btilde(coeffs: &CoefficientSet, grid: &Grid1D, symmetry: Symmetry) -> Result<OperatorAssembly> {
    let z = zeta_star(coeffs, grid)?;
    let parities = vec![Parity::Even, Parity::Odd, Parity::Odd];
    let mut bld = Builder::new(grid, parities, symmetry)?;
    let h = grid.h();
    let ia2 = coeffs.inv_a2();
    let om = coeffs.one_minus_inv_alpha0;
    let lap = 1.0 / (h * h);
    let c1 = 2.0 * coeffs.a3 + coeffs.a5;
    let cpl_row1 = 4.0 * ia2 * coeffs.a4 / (2.0 * h);
    let cpl_row3 = 2.0 * coeffs.a4 / (2.0 * h);
    let nodes = bld.layout.nodes.clone();
    for (k, &i) in nodes.iter().enumerate() {
        let (r1, r2, r3) = (3 * k, 3 * k + 1, 3 * k + 2);
        let z2 = z[i] * z[i];
        // ζ₁ row
        bld.add(r1, i, 0, ia2 * (1.0 + 2.0 * coeffs.a1 * lap - c1 * z2));
        bld.add(r1, i - 1, 0, -ia2 * coeffs.a1 * lap);
        bld.add(r1, i + 1, 0, -ia2 * coeffs.a1 * lap);
        bld.add(r1, i + 1, 2, cpl_row1 * z[i]);
        bld.add(r1, i - 1, 2, -cpl_row1 * z[i]);
        // ζ₂ row
        bld.add(r2, i, 1, ia2 * (1.0 + 2.0 * coeffs.a1 * lap - coeffs.a5 * z2));
        bld.add(r2, i - 1, 1, -ia2 * coeffs.a1 * lap);
        bld.add(r2, i + 1, 1, -ia2 * coeffs.a1 * lap);
        // ψ row
        bld.add(r3, i, 2, 2.0 * om * lap);
        bld.add(r3, i - 1, 2, -om * lap);
        bld.add(r3, i + 1, 2, -om * lap);
        bld.add(r3, i + 1, 0, -cpl_row3 * z[i + 1]);
        bld.add(r3, i - 1, 0, cpl_row3 * z[i - 1]);
    }
    let asm = bld.finish(&[1.0, 1.0, 2.0 * ia2]);
    asm.check_symmetry()?;
    Ok(asm)
}

/// Guard band below the continuum: min(A₂⁻¹, 1 − α₀⁻¹)/10.
pub fn delta_ess(coeffs: &CoefficientSet) -> f64 {
    coeffs.inv_a2().min(coeffs.one_minus_inv_alpha0) / 10.0
}

/// Eigenvalues of one refinement level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementLevel {
    /// Grid point count.
    pub n: usize,
    /// Grid spacing.
    pub h: f64,
    /// Lowest eigenvalues at this level.
    pub eigenvalues: Vec<f64>,
}

/// Lowest part of the spectrum of a reduced operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors in the unknown layout, normalized so ⟨⟨u, u⟩⟩ = 1.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    /// Number of eigenvalues below `threshold`.
    pub neg_count: usize,
    /// Counting threshold: −δ_ess for B̃, +A₂⁻¹/10 for the Schrödinger
    /// operators (whose continuum starts at A₂⁻¹).
    pub threshold: f64,
    /// Guard band δ_ess.
    pub delta_ess: f64,
    /// Per-level eigenvalues (coarsest first); the last level is the
    /// requested grid.
    pub refinement: Vec<RefinementLevel>,
}

/// Lowest `count` eigenpairs of an assembly; eigenvalues below `threshold`
/// are counted.
pub fn spectrum_of(asm: &OperatorAssembly, count: usize, threshold: f64) -> Result<SpectrumResult> {
    let s = asm.symmetrized();
    let eigenvalues = s.lowest_eigenvalues(count)?;
    let sw: Vec<f64> = asm.weight.iter().map(|w| w.sqrt()).collect();
    let eigenvectors = eigenvalues
        .iter()
        .map(|&l| {
            let v = s.eigenvector(l)?;
            // u = W^{−1/2} v has ⟨⟨u, u⟩⟩ = |v|² = 1.
            Ok(v.iter().zip(&sw).map(|(a, w)| a / w).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let neg_count = s.count_below(threshold);
    Ok(SpectrumResult {
        refinement: vec![RefinementLevel { n: asm.grid.n, h: asm.grid.h(), eigenvalues: eigenvalues.clone() }],
        eigenvalues,
        eigenvectors,
        neg_count,
        threshold,
        delta_ess: threshold.abs(),
    })
}

fn coarser_grids(grid: &Grid1D, levels: usize) -> Result<Vec<Grid1D>> {
    let mut out = Vec::new();
    let mut n = grid.n;
    for _ in 0..levels {
        n /= 2;
        if n < 16 {
            break;
        }
        out.push(Grid1D::decay_truncated(grid.l, n)?);
    }
    out.reverse();
    Ok(out)
}

/// Check that each tracked eigenvalue converges monotonically: successive
/// differences keep their sign and shrink.
fn check_monotone(levels: &[RefinementLevel]) -> Result<()> {
    if levels.len() < 3 {
        return Ok(());
    }
    let k = levels.iter().map(|l| l.eigenvalues.len()).min().unwrap_or(0).min(1);
    for e in 0..k {
        for w in levels.windows(3) {
            let d1 = w[1].eigenvalues[e] - w[0].eigenvalues[e];
            let d2 = w[2].eigenvalues[e] - w[1].eigenvalues[e];
            if d1 * d2 < 0.0 || d2.abs() > d1.abs() {
                return Err(Error::Discretization(format!(
                    "eigenvalue {e} does not converge monotonically under refinement: differences {d1:e}, {d2:e}"
                )));
            }
        }
    }
    Ok(())
}

/// Lowest `count` eigenvalues of A₂⁻¹(1 − A₁∂ₓ² − c·sech²(A₁^{−1/2}x)).
///
/// Requires L ≥ 25√A₁ and n ≥ 1024. Two coarser levels (n/2, n/4) are
/// solved as well; a non-monotone refinement of the lowest eigenvalue is a
/// discretization error.
pub fn schrodinger_spectrum(c: f64, coeffs: &CoefficientSet, grid: &Grid1D, count: usize) -> Result<SpectrumResult> {
    schrodinger_spectrum_on(c, coeffs, grid, count, Symmetry::Full, Parity::Even)
}

/// As [`schrodinger_spectrum`], restricted to functions of the given parity.
pub fn schrodinger_spectrum_restricted(c: f64, coeffs: &CoefficientSet, grid: &Grid1D, count: usize, parity: Parity) -> Result<SpectrumResult> {
    schrodinger_spectrum_on(c, coeffs, grid, count, Symmetry::FixR, parity)
}

fn schrodinger_spectrum_on(c: f64, coeffs: &CoefficientSet, grid: &Grid1D, count: usize, sym: Symmetry, parity: Parity) -> Result<SpectrumResult> {
    if grid.l < 25.0 * coeffs.a1.sqrt() * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!("need L >= 25 sqrt(A1) = {}, got {}", 25.0 * coeffs.a1.sqrt(), grid.l)));
    }
    if grid.n < 1024 {
        return Err(Error::InvalidArgument(format!("need n >= 1024, got {}", grid.n)));
    }
    let asm = assemble_schrodinger(c, coeffs, grid, sym, parity)?;
    let mut res = spectrum_of(&asm, count, coeffs.inv_a2() / 10.0)?;
    let mut levels = Vec::new();
    for g in coarser_grids(grid, 2)? {
        let a = assemble_schrodinger(c, coeffs, &g, sym, parity)?;
        levels.push(RefinementLevel { n: g.n, h: g.h(), eigenvalues: a.symmetrized().lowest_eigenvalues(count)? });
    }
    levels.extend(res.refinement.drain(..));
    check_monotone(&levels)?;
    res.refinement = levels;
    Ok(res)
}

/// Reflection-parity diagnostics of the k₀ mode (computed on the
/// unrestricted assembly, where parity is not imposed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    /// ‖ζ₁ − Rζ₁‖/‖ζ₁‖ (ζ₁ should be even).
    pub zeta1_asymmetry: f64,
    /// ‖ψ + Rψ‖/‖ψ‖ (ψ should be odd).
    pub psi_asymmetry: f64,
    /// ‖ζ₂‖/‖ζ₁‖ (ζ₂ should vanish).
    pub zeta2_fraction: f64,
}

impl ParityReport {
    /// Largest of the three diagnostics.
    pub fn max(&self) -> f64 {
        self.zeta1_asymmetry.max(self.psi_asymmetry).max(self.zeta2_fraction)
    }
}

/// The dimension-breaking mode on the slow grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionBreakingMode {
    /// Slow variable X.
    pub x: Vec<f64>,
    /// ζ₁ (even, positive at the origin).
    pub zeta1: Vec<f64>,
    /// ψ (odd).
    pub psi: Vec<f64>,
    /// Parity diagnostics.
    pub parity: ParityReport,
}

/// Result of the dimension-breaking eigenvalue computation at ε = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionBreakingResult {
    /// k₀ = √(−κ_min).
    pub k0: f64,
    /// Root of κ + k² = 0 (equal to k₀ at ε = 0).
    pub k_eps: f64,
    /// Lowest eigenvalue of the Fix R̃ assembly.
    pub kappa_fixr: f64,
    /// Lowest eigenvalue of the unrestricted assembly.
    pub kappa_full: f64,
    /// Eigenvalues below −δ_ess (Fix R̃ assembly).
    pub neg_count: usize,
    /// Eigenvalues below −δ_ess (unrestricted assembly).
    pub neg_count_full: usize,
    /// Guard band.
    pub delta_ess: f64,
    /// Next eigenvalues of the Fix R̃ assembly (continuum approximations).
    pub eigenvalue_table: Vec<f64>,
    /// Mode.
    pub mode: DimensionBreakingMode,
    /// Bracket lower end k₀/4.
    pub kmin: f64,
    /// Bracket upper end 4k₀.
    pub kmax: f64,
    /// Grid point count.
    pub n: usize,
    /// Grid half-length.
    pub l: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Compute k₀ from the unique negative eigenvalue of B̃.
///
/// Both the Fix R̃ and the unrestricted assemblies are solved; more or fewer
/// than one eigenvalue below −δ_ess in either is a spectral-structure error.
pub fn find_k0(coeffs: &CoefficientSet, grid: &Grid1D) -> Result<DimensionBreakingResult> {
    let delta = delta_ess(coeffs);
    let fix = assemble_btilde(coeffs, grid, Symmetry::FixR)?;
    let sf = fix.symmetrized();
    let neg_count = sf.count_below(-delta);
    if neg_count != 1 {
        return Err(Error::SpectralStructure(format!(
            "expected exactly one eigenvalue below -delta_ess = {:e} on the Fix R subspace, found {neg_count} (n = {})",
            -delta, grid.n
        )));
    }
    let table = sf.lowest_eigenvalues(4)?;
    let kappa_fixr = table[0];
    let full = assemble_btilde(coeffs, grid, Symmetry::Full)?;
    let sfull = full.symmetrized();
    let neg_count_full = sfull.count_below(-delta);
    if neg_count_full != 1 {
        return Err(Error::SpectralStructure(format!(
            "expected exactly one eigenvalue below -delta_ess on the full space, found {neg_count_full} (n = {})",
            grid.n
        )));
    }
    let kappa_full = sfull.eigenvalue(0)?;
    let k0 = (-kappa_fixr).sqrt();
    // Mode from the unrestricted problem, so that its parity is a genuine check.
    let sw: Vec<f64> = full.weight.iter().map(|w| w.sqrt()).collect();
    let v = sfull.eigenvector(kappa_full)?;
    let u: Vec<f64> = v.iter().zip(&sw).map(|(a, w)| a / w).collect();
    let mut comps = full.layout.expand(&u);
    let c0 = grid.n / 2;
    let sign = if comps[0][c0] + comps[0][c0 - 1] < 0.0 { -1.0 } else { 1.0 };
    comps.iter_mut().for_each(|c| c.iter_mut().for_each(|x| *x *= sign));
    let n = grid.n;
    let refl = |f: &[f64], s: f64| -> f64 {
        let d: Vec<f64> = (0..n).map(|i| f[i] - s * f[n - 1 - i]).collect();
        norm2(&d) / norm2(f).max(f64::MIN_POSITIVE)
    };
    let parity = ParityReport {
        zeta1_asymmetry: refl(&comps[0], 1.0),
        psi_asymmetry: refl(&comps[2], -1.0),
        zeta2_fraction: norm2(&comps[1]) / norm2(&comps[0]).max(f64::MIN_POSITIVE),
    };
    let kmin = k0 / 4.0;
    let kmax = 4.0 * k0;
    let k_eps = kappa_root_solve(|_| kappa_fixr, kmin, kmax)?;
    Ok(DimensionBreakingResult {
        k0,
        k_eps,
        kappa_fixr,
        kappa_full,
        neg_count,
        neg_count_full,
        delta_ess: delta,
        eigenvalue_table: table,
        mode: DimensionBreakingMode { x: grid.x.clone(), zeta1: comps[0].clone(), psi: comps[2].clone(), parity },
        kmin,
        kmax,
        n: grid.n,
        l: grid.l,
    })
}

/// κ_min across a sequence of grids with a Richardson order estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K0Refinement {
    /// (n, h, κ_min) per level.
    pub levels: Vec<RefinementLevel>,
    /// Observed order from the last three levels.
    pub order: Option<f64>,
    /// Richardson-extrapolated κ_min (when an order is available).
    pub extrapolated_kappa: Option<f64>,
}

/// Solve the Fix R̃ problem on each point count in `ns` (same half-length)
/// and estimate the convergence order of κ_min.
pub fn k0_refinement(coeffs: &CoefficientSet, l: f64, ns: &[usize]) -> Result<K0Refinement> {
    let mut levels = Vec::new();
    for &n in ns {
        let g = Grid1D::decay_truncated(l, n)?;
        let a = assemble_btilde(coeffs, &g, Symmetry::FixR)?;
        levels.push(RefinementLevel { n, h: g.h(), eigenvalues: vec![a.symmetrized().eigenvalue(0)?] });
    }
    check_monotone(&levels)?;
    let (order, extrapolated_kappa) = if levels.len() >= 3 {
        let k = levels.len();
        let (a, b, c) = (&levels[k - 3], &levels[k - 2], &levels[k - 1]);
        let d1 = b.eigenvalues[0] - a.eigenvalues[0];
        let d2 = c.eigenvalues[0] - b.eigenvalues[0];
        let r = (b.h / c.h + a.h / b.h) / 2.0;
        let p = (d1 / d2).abs().ln() / r.ln();
        let rp = (b.h / c.h).powf(p);
        (Some(p), Some(c.eigenvalues[0] + d2 / (rp - 1.0)))
    } else {
        (None, None)
    };
    Ok(K0Refinement { levels, order, extrapolated_kappa })
}

/// Evaluate ⟨B̃₁(sech(A₁^{−1/2}x), 0), (sech(A₁^{−1/2}x), 0)⟩ by the
/// discrete quadratic form of the unrestricted assembly.
pub fn quadratic_form_witness(coeffs: &CoefficientSet, grid: &Grid1D) -> Result<f64> {
    let w = coeffs.a1.sqrt();
    let s: Vec<f64> = grid.x.iter().map(|&x| 1.0 / (x / w).cosh()).collect();
    let zero = vec![0.0; grid.n];
    witness_form(coeffs, grid, &s, &zero)
}

/// ⟨⟨B̃(ζ₁, 0, ψ), (ζ₁, 0, ψ)⟩⟩ for full-grid samples ζ₁, ψ.
pub fn witness_form(coeffs: &CoefficientSet, grid: &Grid1D, zeta1: &[f64], psi: &[f64]) -> Result<f64> {
    let asm = assemble_btilde(coeffs, grid, Symmetry::Full)?;
    let zero = vec![0.0; grid.n];
    let u = asm.layout.restrict(&[zeta1.to_vec(), zero, psi.to_vec()]);
    Ok(asm.form(&u, &u))
}

/// The closed form −16√A₁A₃/(3A₂A₅) of the witness.
pub fn witness_closed_form(coeffs: &CoefficientSet) -> f64 {
    -16.0 * coeffs.a1.sqrt() * coeffs.a3 / (3.0 * coeffs.a2 * coeffs.a5)
}

/// Outcome of the coercivity probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    /// Smallest Rayleigh quotient ⟨⟨A v, v⟩⟩/‖v‖²_V found.
    pub min_quotient: f64,
    /// Trial index attaining it.
    pub argmin_trial: usize,
    /// Number of probes.
    pub trials: usize,
    /// Seed of the probe generator.
    pub seed: u64,
    /// ⟨⟨A v₀, v₀⟩⟩ for the k₀ mode itself (≈ −k₀²).
    pub mode_form: f64,
    /// k₀ used for the orthogonality constraint.
    pub k0: f64,
}

/// Smooth random probe parameters (serialized on failure).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    /// (amplitude, centre, width) triples for ζ₁ (even).
    pub zeta1: Vec<[f64; 3]>,
    /// Coefficient of sech(x/√A₁) added to ζ₁.
    pub zeta1_sech: f64,
    /// Triples for ζ₂ (odd).
    pub zeta2: Vec<[f64; 3]>,
    /// Triples for ψ (odd).
    pub psi: Vec<[f64; 3]>,
}

fn bumps(x: &[f64], spec: &[[f64; 3]], parity: Parity) -> Vec<f64> {
    x.iter()
        .map(|&xv| {
            spec.iter()
                .map(|&[a, c, s]| a * ((-((xv - c) / s).powi(2) / 2.0).exp() + parity.sign() * (-((xv + c) / s).powi(2) / 2.0).exp()))
                .sum()
        })
        .collect()
}

/// Auxiliary-operator quadratic form and V-norm for v = (ζ₁, ζ₂, φ), all
/// full-grid samples (boundary values ignored).
pub fn auxiliary_form(coeffs: &CoefficientSet, grid: &Grid1D, zeta1: &[f64], zeta2: &[f64], phi: &[f64]) -> Result<(f64, f64)> {
    let z = zeta_star(coeffs, grid)?;
    let h = grid.h();
    let ia2 = coeffs.inv_a2();
    let om = coeffs.one_minus_inv_alpha0;
    let c1 = 2.0 * coeffs.a3 + coeffs.a5;
    let n = grid.n;
    let at = |f: &[f64], i: usize| if i == 0 || i == n - 1 { 0.0 } else { f[i] };
    let mut q = 0.0;
    let mut nrm = 0.0;
    for i in 1..n - 1 {
        let (a, b, p) = (zeta1[i], zeta2[i], phi[i]);
        let lap_a = (at(zeta1, i + 1) - 2.0 * a + at(zeta1, i - 1)) / (h * h);
        let lap_b = (at(zeta2, i + 1) - 2.0 * b + at(zeta2, i - 1)) / (h * h);
        let z2 = z[i] * z[i];
        let row1 = ia2 * (a - coeffs.a1 * lap_a - c1 * z2 * a) + 4.0 * ia2 * coeffs.a4 * z[i] * p;
        let row2 = ia2 * (b - coeffs.a1 * lap_b - coeffs.a5 * z2 * b);
        let row3 = om * p + 2.0 * coeffs.a4 * z[i] * a;
        q += h * (row1 * a + row2 * b + 2.0 * ia2 * row3 * p);
        nrm += h * (a * a + b * b + 2.0 * ia2 * p * p);
    }
    Ok((q, nrm))
}

fn centered_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let at = |i: usize| if i == 0 || i == n - 1 { 0.0 } else { f[i] };
    (0..n).map(|i| if i == 0 || i == n - 1 { 0.0 } else { (at(i + 1) - at(i - 1)) / (2.0 * h) }).collect()
}

/// Minimum Rayleigh quotient of the auxiliary operator over `trials`
/// smooth pseudo-random probes w = (ζ₁ even, ζ₂ odd, ψ odd) made
/// ⟨⟨·,·⟩⟩-orthogonal to the k₀ mode w₀ and mapped to v = (ζ₁, ζ₂, ψₓ).
///
/// A non-positive minimum is reported as a coercivity error carrying the
/// offending probe parameters as JSON.
pub fn coercivity_check(coeffs: &CoefficientSet, grid: &Grid1D, trials: usize, seed: u64) -> Result<CoercivityReport> {
    let db = find_k0(coeffs, grid)?;
    let h = grid.h();
    let ia2 = coeffs.inv_a2();
    let w0z = &db.mode.zeta1;
    let w0p = &db.mode.psi;
    let inner_w = |z: &[f64], p: &[f64], zz: &[f64], pp: &[f64]| -> f64 {
        (1..grid.n - 1).map(|i| h * (z[i] * zz[i] + 2.0 * ia2 * p[i] * pp[i])).sum()
    };
    let w0n = inner_w(w0z, w0p, w0z, w0p);
    let zero = vec![0.0; grid.n];
    let (mode_q, _) = auxiliary_form(coeffs, grid, w0z, &zero, &centered_derivative(w0p, h))?;
    let mode_form = mode_q / w0n;
    let sa = coeffs.a1.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triple = |rng: &mut ChaCha8Rng| -> [f64; 3] {
        [rng.random_range(-1.0..1.0), rng.random_range(0.0..4.0) * sa, rng.random_range(0.3..3.0) * sa]
    };
    let mut best = f64::INFINITY;
    let mut best_k = 0;
    let mut best_spec = None;
    for k in 0..trials {
        let spec = ProbeSpec {
            zeta1: (0..3).map(|_| triple(&mut rng)).collect(),
            zeta1_sech: rng.random_range(-2.0..2.0),
            zeta2: (0..2).map(|_| triple(&mut rng)).collect(),
            psi: (0..3).map(|_| triple(&mut rng)).collect(),
        };
        let mut z1 = bumps(&grid.x, &spec.zeta1, Parity::Even);
        z1.iter_mut().zip(&grid.x).for_each(|(v, &x)| *v += spec.zeta1_sech / (x / sa).cosh());
        let z2 = bumps(&grid.x, &spec.zeta2, Parity::Odd);
        let mut ps = bumps(&grid.x, &spec.psi, Parity::Odd);
        let c = inner_w(&z1, &ps, w0z, w0p) / w0n;
        z1.iter_mut().zip(w0z).for_each(|(a, b)| *a -= c * b);
        ps.iter_mut().zip(w0p).for_each(|(a, b)| *a -= c * b);
        let phi = centered_derivative(&ps, h);
        let (q, nrm) = auxiliary_form(coeffs, grid, &z1, &z2, &phi)?;
        let r = q / nrm;
        if r < best {
            best = r;
            best_k = k;
            best_spec = Some(spec);
        }
    }
    if !(best > 0.0) {
        let json = serde_json::to_string(&best_spec).unwrap_or_default();
        return Err(Error::Coercivity(format!(
            "Rayleigh quotient {best:e} <= 0 at trial {best_k} (seed {seed:#x}); probe {json}"
        )));
    }
    Ok(CoercivityReport { min_quotient: best, argmin_trial: best_k, trials, seed, mode_form, k0: db.k0 })
}

/// Solve κ(k) + k² = 0 on [kmin, kmax] by bisection to |Δk| < 1e−10.
///
/// Requires a sign change across the bracket. Along the bisection path the
/// function must be increasing (as it is for any constant κ); a violation
/// is reported as a bracket error since uniqueness is then not guaranteed.
pub fn kappa_root_solve<F: Fn(f64) -> f64>(kappa_fn: F, kmin: f64, kmax: f64) -> Result<f64> {
    if !(kmin.is_finite() && kmax.is_finite() && 0.0 <= kmin && kmin < kmax) {
        return Err(Error::InvalidArgument(format!("invalid bracket [{kmin}, {kmax}]")));
    }
    let f = |k: f64| kappa_fn(k) + k * k;
    let (mut lo, mut hi) = (kmin, kmax);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::Bracket(format!(
            "kappa(k) + k^2 has no increasing sign change on [{kmin}, {kmax}]: values {flo:e}, {fhi:e}"
        )));
    }
    while hi - lo >= 1e-10 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if !(flo <= fm && fm <= fhi) {
            return Err(Error::Bracket(format!("kappa(k) + k^2 is not increasing near k = {mid}")));
        }
        if fm < 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::compute_coefficients;
    use crate::dispersion::params_from_tau;
    use proptest::prelude::*;

    fn coeffs() -> CoefficientSet {
        compute_coefficients(&params_from_tau(0.2, 0.0).unwrap()).unwrap()
    }

    fn grid(c: &CoefficientSet, n: usize) -> Grid1D {
        Grid1D::decay_truncated(40.0 * c.a1.sqrt(), n).unwrap()
    }

    #[test]
    fn schrodinger_c2_has_sech_ground_state() {
        let c = coeffs();
        let g = grid(&c, 1024);
        let s = schrodinger_spectrum(2.0, &c, &g, 2).unwrap();
        assert_eq!(s.neg_count, 1);
        assert!(s.eigenvalues[0].abs() < 1e-3 * c.inv_a2());
        let asm = assemble_schrodinger(2.0, &c, &g, Symmetry::Full, Parity::Even).unwrap();
        let v = asm.layout.expand(&s.eigenvectors[0]).remove(0);
        let sech: Vec<f64> = g.x.iter().map(|&x| 1.0 / (x / c.a1.sqrt()).cosh()).collect();
        let cos = v.iter().zip(&sech).map(|(a, b)| a * b).sum::<f64>() / (norm2(&v) * norm2(&sech));
        assert!(cos.abs() > 1.0 - 1e-6, "cosine {cos}");
        assert_eq!(s.refinement.len(), 3);
    }

    #[test]
    fn schrodinger_even_restriction_keeps_only_ground_state() {
        let c = coeffs();
        let g = grid(&c, 1024);
        let s = schrodinger_spectrum_restricted(6.0, &c, &g, 2, Parity::Even).unwrap();
        assert_eq!(s.neg_count, 1);
        assert!((s.eigenvalues[0] / c.inv_a2() + 3.0).abs() < 2e-3);
        let odd = schrodinger_spectrum_restricted(6.0, &c, &g, 1, Parity::Odd).unwrap();
        assert!(odd.eigenvalues[0].abs() < 3e-3 * c.inv_a2());
    }

    #[test]
    fn eigenvectors_are_weighted_orthonormal() {
        let c = coeffs();
        let g = grid(&c, 1024);
        let asm = assemble_schrodinger(6.0, &c, &g, Symmetry::Full, Parity::Even).unwrap();
        let s = spectrum_of(&asm, 3, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let ip = asm.inner(&s.eigenvectors[i], &s.eigenvectors[j]);
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((ip - e).abs() < 1e-8, "({i},{j}) {ip}");
            }
        }
    }

    #[test]
    fn btilde_is_weighted_symmetric_and_k_independent() {
        let c = coeffs();
        let g = grid(&c, 512);
        for sym in [Symmetry::Full, Symmetry::FixR] {
            let a = assemble_btilde(&c, &g, sym).unwrap();
            assert!(a.weighted_asymmetry() < 1e-12);
            let b = assemble_btilde(&c, &g, sym).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn decoupled_blocks_reduce_to_schrodinger_and_pure_laplacian() {
        let c = coeffs();
        let g = grid(&c, 512);
        // A₄ = 0 and 2A₃ + A₅ = 3A₅ turn the ζ₁ block into C₀,₁.
        let cd = CoefficientSet { a4: 0.0, a3: c.a5, ..c };
        let a = assemble_btilde(&cd, &g, Symmetry::Full).unwrap();
        let s = assemble_schrodinger(6.0, &cd, &g, Symmetry::Full, Parity::Even).unwrap();
        let h = g.h();
        for k in 0..s.layout.len() {
            for j in k.saturating_sub(1)..=(k + 1).min(s.layout.len() - 1) {
                assert!((a.matrix.get(3 * k, 3 * j) - s.matrix.get(k, j)).abs() < 1e-12 * s.matrix.max_abs());
                assert_eq!(a.matrix.get(3 * k, 3 * j + 2), 0.0);
                let lap = if j == k { 2.0 } else { -1.0 } * c.one_minus_inv_alpha0 / (h * h);
                assert!((a.matrix.get(3 * k + 2, 3 * j + 2) - lap).abs() < 1e-12 * lap.abs());
            }
        }
    }

    #[test]
    fn zeta2_block_has_sech_null_mode() {
        let c = coeffs();
        let g = grid(&c, 2048);
        let a = assemble_btilde(&c, &g, Symmetry::Full).unwrap();
        let s = spectrum_of(&a, 2, -delta_ess(&c)).unwrap();
        // The second eigenvalue is the discrete zero of the ζ₂ block.
        assert!(s.eigenvalues[1].abs() < 1e-4 * c.inv_a2(), "{}", s.eigenvalues[1]);
        let comps = a.layout.expand(&s.eigenvectors[1]);
        let sech: Vec<f64> = g.x.iter().map(|&x| 1.0 / (x / c.a1.sqrt()).cosh()).collect();
        let cos = comps[1].iter().zip(&sech).map(|(a, b)| a * b).sum::<f64>() / (norm2(&comps[1]) * norm2(&sech));
        assert!(cos.abs() > 1.0 - 1e-6, "cosine {cos}");
    }

    #[test]
    fn k0_full_and_fixr_agree_and_mode_has_parity() {
        let c = coeffs();
        let g = grid(&c, 1024);
        let r = find_k0(&c, &g).unwrap();
        assert_eq!(r.neg_count, 1);
        assert!((r.kappa_full - r.kappa_fixr).abs() < 1e-8);
        assert!(r.mode.parity.max() < 1e-8, "{:?}", r.mode.parity);
        assert!((r.k_eps - r.k0).abs() < 1e-10);
        assert!(r.kmin < r.k_eps && r.k_eps < r.kmax);
        // B̃ + k₀² has a zero eigenvalue.
        let asm = assemble_btilde(&c, &g, Symmetry::FixR).unwrap();
        let s = asm.symmetrized();
        let lam = s.eigenvalue(0).unwrap() + r.k0 * r.k0;
        assert!(lam.abs() < 1e-6);
        assert!(r.eigenvalue_table[1] > -r.delta_ess);
    }

    #[test]
    fn continuum_approximations_drift_towards_zero_with_domain_size() {
        let c = coeffs();
        let l = 40.0 * c.a1.sqrt();
        let g1 = Grid1D::decay_truncated(l, 512).unwrap();
        let g2 = Grid1D::decay_truncated(2.0 * l, 1024).unwrap();
        let e1 = assemble_btilde(&c, &g1, Symmetry::FixR).unwrap().symmetrized().lowest_eigenvalues(2).unwrap();
        let e2 = assemble_btilde(&c, &g2, Symmetry::FixR).unwrap().symmetrized().lowest_eigenvalues(2).unwrap();
        assert!((e1[0] - e2[0]).abs() < 1e-4 * e1[0].abs(), "bound state must be L-stable");
        assert!(e2[1] < e1[1] && e2[1] > -delta_ess(&c));
    }

    #[test]
    fn too_coarse_grid_breaks_structure() {
        let c = coeffs();
        let g = Grid1D::decay_truncated(40.0 * c.a1.sqrt(), 16).unwrap();
        assert!(matches!(find_k0(&c, &g), Err(Error::SpectralStructure(_))));
    }

    #[test]
    fn witness_on_psi_only_vector_is_positive_gradient_energy() {
        let c = coeffs();
        let g = grid(&c, 4096);
        let w = c.a1.sqrt();
        let sech: Vec<f64> = g.x.iter().map(|&x| 1.0 / (x / w).cosh()).collect();
        let zero = vec![0.0; g.n];
        let q = witness_form(&c, &g, &zero, &sech).unwrap();
        // 2A₂⁻¹(1 − α₀⁻¹) ∫ (sech′)² = 2A₂⁻¹(1 − α₀⁻¹)·2/(3√A₁)
        let exact = 2.0 * c.inv_a2() * c.one_minus_inv_alpha0 * 2.0 / (3.0 * w);
        assert!((q - exact).abs() < 1e-3 * exact, "{q} vs {exact}");
        assert_eq!(witness_form(&c, &g, &zero, &zero).unwrap(), 0.0);
    }

    #[test]
    fn auxiliary_form_of_mode_and_of_pure_phi() {
        let c = coeffs();
        let g = grid(&c, 1024);
        let r = coercivity_check(&c, &g, 50, DEFAULT_COERCIVITY_SEED).unwrap();
        assert!(r.min_quotient > 0.0);
        assert!((r.mode_form + r.k0 * r.k0).abs() < 1e-3 * r.k0 * r.k0, "{} vs {}", r.mode_form, -r.k0 * r.k0);
        let zero = vec![0.0; g.n];
        let phi: Vec<f64> = g.x.iter().map(|&x| (-x * x / 4.0).exp()).collect();
        let (q, n) = auxiliary_form(&c, &g, &zero, &zero, &phi).unwrap();
        assert!((q / n - c.one_minus_inv_alpha0).abs() < 1e-14);
    }

    #[test]
    fn kappa_root_examples() {
        let k0 = 1.4670692;
        let k = kappa_root_solve(|_| -k0 * k0, k0 / 4.0, 4.0 * k0).unwrap();
        assert!((k - k0).abs() < 1e-10);
        let k = kappa_root_solve(|k| -k0 * k0 + 0.1 * (k - k0), k0 / 4.0, 4.0 * k0).unwrap();
        // k² + 0.1k − (k₀² + 0.1k₀) = 0
        let exact = (-0.1 + (0.01 + 4.0 * (k0 * k0 + 0.1 * k0)).sqrt()) / 2.0;
        assert!((k - exact).abs() < 1e-9);
        assert!(matches!(kappa_root_solve(|_| -k0 * k0, 2.0 * k0, 4.0 * k0), Err(Error::Bracket(_))));
    }

    proptest! {
        #[test]
        fn metric_scaling_leaves_eigenpairs_invariant(scale in 0.1f64..10.0) {
            let c = coeffs();
            let g = grid(&c, 256);
            let a = assemble_btilde(&c, &g, Symmetry::FixR).unwrap();
            let mut b = a.clone();
            b.weight.iter_mut().for_each(|w| *w *= scale);
            let (sa, sb) = (a.symmetrized(), b.symmetrized());
            for k in 0..3 {
                let (ea, eb) = (sa.eigenvalue(k).unwrap(), sb.eigenvalue(k).unwrap());
                prop_assert!((ea - eb).abs() < 1e-9 * ea.abs().max(1.0));
            }
            let va = sa.eigenvector(sa.eigenvalue(0).unwrap()).unwrap();
            let vb = sb.eigenvector(sb.eigenvalue(0).unwrap()).unwrap();
            let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
            prop_assert!((dot.abs() - 1.0).abs() < 1e-8);
        }

        #[test]
        fn root_is_unique_for_constant_kappa(k0 in 0.1f64..5.0) {
            let k = kappa_root_solve(|_| -k0 * k0, k0 / 4.0, 4.0 * k0).unwrap();
            prop_assert!((k - k0).abs() < 1e-10);
        }
    }
}
