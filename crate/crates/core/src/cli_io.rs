//! Run configuration, deterministic CSV/JSON writers, result manifests and
//! the dispatch of the command-line subcommands.
//!
//! Output contract: CSV uses `,` separators, `.` decimals, LF line endings
//! and 17 significant digits; JSON numbers are written in the shortest
//! round-trip form. Data files depend only on the configuration and the
//! software version. Wall-clock time is recorded only in the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coefficients::{compute_coefficients, profile_coefficients, CoefficientSet};
use crate::dispersion::{check_min, dispersion_curve, params_from_tau, FluidParams, MinDiagnostics};
use crate::error::{Error, Result};
use crate::grid::{uniform_unit, Grid1D};
use crate::reduced_spectra::{
    assemble_btilde, find_k0, k0_refinement, schrodinger_spectrum, spectrum_of, DimensionBreakingResult, K0Refinement, ParityReport,
    SpectrumResult, Symmetry, DEFAULT_COERCIVITY_SEED,
};
use crate::soliton::{build_line_wave, build_soliton, Branch};
use crate::strip_bvp::{leading_order_rate, oracle_discrepancy, packet_gamma_solve, LeadingOrderRate};
use crate::waterwave_linop::{
    assemble_l, imaginary_eigenvalue_search, instability_report, reverser_check, symplectic_check, InstabilityReport, LinopGrid, SearchWork,
};
use crate::wave_synthesis::{synthesize, WaveSurfaceMeta};

/// Software version recorded in manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default ε.
pub const DEFAULT_EPS: f64 = 0.05;
/// Default point count of x grids.
pub const DEFAULT_N: usize = 2048;
/// Default y node count of strip grids.
pub const DEFAULT_NY: usize = 33;
/// Default z sample count of synthesized surfaces.
pub const DEFAULT_NZ: usize = 64;
/// Default half-length factor: L = 40√A₁/ε.
pub const DEFAULT_L_FACTOR: f64 = 40.0;
/// Seed of the randomized strip problems in `bvp-check`.
pub const BVP_SEED: u64 = 0xB5;
/// Seed of the structure probes in `linop-check`.
pub const STRUCTURE_SEED: u64 = 0x5171;
/// Probes per structure check in `linop-check`.
pub const STRUCTURE_PROBES: usize = 50;

/// Bounds: ε ∈ (0, MAX_EPS].
pub const MAX_EPS: f64 = 0.5;
/// Bounds: 16 ≤ n ≤ MAX_N.
pub const MAX_N: usize = 1 << 22;
/// Bounds: 5 ≤ ny ≤ MAX_NY.
pub const MAX_NY: usize = 1 << 16;
/// Bounds: 2 ≤ nz ≤ MAX_NZ.
pub const MAX_NZ: usize = 1 << 16;

/// Encoding of tabular outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// Comma-separated values.
    #[default]
    Csv,
    /// JSON object `{"columns": [...], "rows": [[...], ...]}`.
    Json,
}

impl OutputFormat {
    /// File extension.
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Grid sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Half-length L in the physical variable x (reduced problems use εL).
    #[serde(rename = "L")]
    pub l: f64,
    /// Points in x.
    pub n: usize,
    /// Nodes in y.
    pub ny: usize,
    /// Samples in z.
    pub nz: usize,
}

/// Random seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    /// Seed of the coercivity probes.
    pub coercivity_seed: u64,
}

/// A validated run configuration with all defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Bond number τ₀ ∈ (0, 1/3).
    pub tau0: f64,
    /// ε ∈ (0, 0.5].
    pub eps: f64,
    /// Grid sizes.
    pub grids: GridConfig,
    /// Seeds.
    pub seeds: SeedConfig,
    /// Output directory.
    pub output_dir: PathBuf,
    /// Encoding of tabular outputs.
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrids {
    #[serde(rename = "L")]
    l: Option<f64>,
    n: Option<usize>,
    ny: Option<usize>,
    nz: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeeds {
    coercivity_seed: Option<u64>,
}

/// A partially specified configuration (file contents and/or command-line
/// overrides) before defaults are applied.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    /// τ₀.
    pub tau0: Option<f64>,
    /// ε.
    pub eps: Option<f64>,
    #[serde(default)]
    grids: RawGrids,
    #[serde(default)]
    seeds: RawSeeds,
    /// Output directory.
    pub output_dir: Option<PathBuf>,
    /// Tabular format.
    pub format: Option<OutputFormat>,
}

impl ConfigOverrides {
    /// Set the half-length L.
    pub fn set_l(&mut self, l: f64) {
        self.grids.l = Some(l);
    }
    /// Set n.
    pub fn set_n(&mut self, n: usize) {
        self.grids.n = Some(n);
    }
    /// Set ny.
    pub fn set_ny(&mut self, ny: usize) {
        self.grids.ny = Some(ny);
    }
    /// Set nz.
    pub fn set_nz(&mut self, nz: usize) {
        self.grids.nz = Some(nz);
    }
    /// Set the coercivity seed.
    pub fn set_coercivity_seed(&mut self, seed: u64) {
        self.seeds.coercivity_seed = Some(seed);
    }

    /// Fields set in `other` take precedence.
    pub fn merged_with(&self, other: &ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            tau0: other.tau0.or(self.tau0),
            eps: other.eps.or(self.eps),
            grids: RawGrids {
                l: other.grids.l.or(self.grids.l),
                n: other.grids.n.or(self.grids.n),
                ny: other.grids.ny.or(self.grids.ny),
                nz: other.grids.nz.or(self.grids.nz),
            },
            seeds: RawSeeds { coercivity_seed: other.seeds.coercivity_seed.or(self.seeds.coercivity_seed) },
            output_dir: other.output_dir.clone().or_else(|| self.output_dir.clone()),
            format: other.format.or(self.format),
        }
    }

    /// Validate and fill defaults (ε 0.05, L 40√A₁/ε, n 2048, ny 33, nz 64,
    /// the default coercivity seed, output directory `out`, CSV).
    pub fn resolve(&self) -> Result<RunConfig> {
        let tau0 = self.tau0.ok_or_else(|| Error::config("tau0", "missing (required)"))?;
        if !(tau0.is_finite() && tau0 > 0.0 && tau0 < 1.0 / 3.0) {
            return Err(Error::config("tau0", format!("must lie in (0, 1/3), got {tau0}")));
        }
        let eps = self.eps.unwrap_or(DEFAULT_EPS);
        if !(eps.is_finite() && eps > 0.0 && eps <= MAX_EPS) {
            return Err(Error::config("eps", format!("must lie in (0, {MAX_EPS}], got {eps}")));
        }
        let l = match self.grids.l {
            Some(l) => l,
            None => {
                let c = compute_coefficients(&params_from_tau(tau0, eps)?)?;
                DEFAULT_L_FACTOR * c.a1.sqrt() / eps
            }
        };
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::config("grids.L", format!("must be finite and positive, got {l}")));
        }
        let n = self.grids.n.unwrap_or(DEFAULT_N);
        if !(16..=MAX_N).contains(&n) {
            return Err(Error::config("grids.n", format!("must lie in [16, {MAX_N}], got {n}")));
        }
        let ny = self.grids.ny.unwrap_or(DEFAULT_NY);
        if !(5..=MAX_NY).contains(&ny) {
            return Err(Error::config("grids.ny", format!("must lie in [5, {MAX_NY}], got {ny}")));
        }
        let nz = self.grids.nz.unwrap_or(DEFAULT_NZ);
        if !(2..=MAX_NZ).contains(&nz) {
            return Err(Error::config("grids.nz", format!("must lie in [2, {MAX_NZ}], got {nz}")));
        }
        let output_dir = self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
        if output_dir.as_os_str().is_empty() {
            return Err(Error::config("output_dir", "must not be empty"));
        }
        Ok(RunConfig {
            tau0,
            eps,
            grids: GridConfig { l, n, ny, nz },
            seeds: SeedConfig { coercivity_seed: self.seeds.coercivity_seed.unwrap_or(DEFAULT_COERCIVITY_SEED) },
            output_dir,
            format: self.format.unwrap_or_default(),
        })
    }
}

/// Parse configuration text (JSON) without applying defaults.
pub fn parse_overrides(text: &str) -> Result<ConfigOverrides> {
    serde_json::from_str(text).map_err(|e| Error::config("<config>", format!("parse error: {e}")))
}

/// Read a configuration file without applying defaults.
pub fn load_overrides(path: &Path) -> Result<ConfigOverrides> {
    let text = fs::read_to_string(path).map_err(|e| Error::config("<config>", format!("cannot read {}: {e}", path.display())))?;
    parse_overrides(&text)
}

/// Read, validate and complete a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    load_overrides(path)?.resolve()
}

impl RunConfig {
    /// Configuration for τ₀ with every other field defaulted.
    pub fn for_tau(tau0: f64) -> Result<Self> {
        ConfigOverrides { tau0: Some(tau0), ..Default::default() }.resolve()
    }

    /// Re-validate a (possibly hand-edited) configuration.
    pub fn validate(&self) -> Result<()> {
        let o = ConfigOverrides {
            tau0: Some(self.tau0),
            eps: Some(self.eps),
            grids: RawGrids { l: Some(self.grids.l), n: Some(self.grids.n), ny: Some(self.grids.ny), nz: Some(self.grids.nz) },
            seeds: RawSeeds { coercivity_seed: Some(self.seeds.coercivity_seed) },
            output_dir: Some(self.output_dir.clone()),
            format: Some(self.format),
        };
        o.resolve().map(|_| ())
    }

    /// Save as pretty JSON; [`load_config`] returns an identical value.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, json_text(self)?)?;
        Ok(())
    }

    /// Fluid parameters at (τ₀, ε).
    pub fn params(&self) -> Result<FluidParams> {
        params_from_tau(self.tau0, self.eps)
    }

    /// Half-length of slow-variable grids, εL.
    pub fn slow_l(&self) -> f64 {
        self.eps * self.grids.l
    }
}

/// Format a double with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// A table of named numeric columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    /// Column names.
    pub columns: Vec<String>,
    /// Rows (each of `columns.len()` values).
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Empty table with the given header.
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// Append a row.
    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV text (header, LF line endings, 17 significant digits).
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&v| fmt17(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Pretty JSON text with a trailing newline.
pub fn json_text<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Lower-case hexadecimal SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One emitted file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the output directory.
    pub path: String,
    /// SHA-256 of the contents.
    pub sha256: String,
    /// Size in bytes.
    pub bytes: u64,
}

/// Record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    /// Subcommand name.
    pub command: String,
    /// The resolved configuration.
    pub config: RunConfig,
    /// Software version.
    pub version: String,
    /// Wall time of the run in seconds.
    pub wall_time_seconds: f64,
    /// Emitted data files (the manifest itself excluded).
    pub files: Vec<FileRecord>,
}

/// Writes files into the output directory and records their hashes.
#[derive(Debug)]
pub struct OutputWriter {
    dir: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputWriter {
    /// Create the directory if needed.
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    /// Write raw bytes.
    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.files.push(FileRecord { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(path)
    }

    /// Write a serializable value as JSON.
    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        self.write_bytes(name, json_text(value)?.as_bytes())
    }

    /// Write a table in `format` under `stem` plus the format's extension
    /// (or exactly `name` when given).
    pub fn write_table(&mut self, stem: &str, name: Option<&str>, table: &Table, format: OutputFormat) -> Result<PathBuf> {
        let file = name.map(str::to_string).unwrap_or_else(|| format!("{stem}.{}", format.extension()));
        match format {
            OutputFormat::Csv => self.write_bytes(&file, table.to_csv().as_bytes()),
            OutputFormat::Json => self.write_json(&file, table),
        }
    }

    /// Files written so far.
    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }
}

/// A subcommand with its command-specific options.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    /// Bifurcation-point parameters and minimum diagnostics.
    Params,
    /// g(μ, 0) sampled at `grids.n` points of μ ∈ [μ₀/100, 3μ₀].
    Dispersion,
    /// Model and profile coefficients.
    Coeffs,
    /// Envelope soliton and second-order line-wave profiles.
    Soliton,
    /// Lowest `count` eigenvalues of the reduced operators.
    Spectrum {
        /// Eigenvalues per operator.
        count: usize,
    },
    /// k₀, its refinement study and parity diagnostics.
    Dimbreak {
        /// Also run the n/2, n, 2n refinement study.
        refine: bool,
    },
    /// Strip-solver oracle and leading-order rate.
    BvpCheck,
    /// Full-operator eigenvalue search and structure checks.
    LinopCheck {
        /// Restrict the search to Fix R.
        fix_r: bool,
    },
    /// Leading-order modulated surface.
    Synth {
        /// Modulation amplitude.
        s: f64,
    },
}

impl Command {
    /// Subcommand name.
    pub fn name(&self) -> &'static str {
        match self {
            Command::Params => "params",
            Command::Dispersion => "dispersion",
            Command::Coeffs => "coeffs",
            Command::Soliton => "soliton",
            Command::Spectrum { .. } => "spectrum",
            Command::Dimbreak { .. } => "dimbreak",
            Command::BvpCheck => "bvp-check",
            Command::LinopCheck { .. } => "linop-check",
            Command::Synth { .. } => "synth",
        }
    }
}

#[derive(Serialize)]
struct ParamsOutput {
    tau0: f64,
    eps: f64,
    mu0: f64,
    alpha0: f64,
    beta0: f64,
    alpha: f64,
    sigma: f64,
    minimum: MinDiagnostics,
}

#[derive(Serialize)]
struct CoeffsOutput {
    #[serde(rename = "A1")]
    a1: f64,
    #[serde(rename = "A2")]
    a2: f64,
    #[serde(rename = "A3")]
    a3: f64,
    #[serde(rename = "A4")]
    a4: f64,
    #[serde(rename = "A5")]
    a5: f64,
    sigma: f64,
    #[serde(rename = "C1")]
    c1: f64,
    #[serde(rename = "C2")]
    c2: f64,
    #[serde(rename = "C4")]
    c4: f64,
    #[serde(rename = "C5")]
    c5: f64,
    #[serde(rename = "B1")]
    b1: f64,
    #[serde(rename = "B2")]
    b2: f64,
    #[serde(rename = "B3")]
    b3: f64,
    g0_2mu0: f64,
}

#[derive(Serialize)]
struct SpectrumOutput<'a> {
    inv_a2: f64,
    c01: &'a SpectrumResult,
    c01_expected: [f64; 2],
    c02: &'a SpectrumResult,
    c02_expected: [f64; 1],
    btilde_fix_r: &'a SpectrumResult,
}

#[derive(Serialize)]
struct DimbreakOutput<'a> {
    k0: f64,
    k_eps: f64,
    kappa_fix_r: f64,
    kappa_full: f64,
    neg_count: usize,
    neg_count_full: usize,
    delta_ess: f64,
    eigenvalue_table: &'a [f64],
    refinement: Option<&'a K0Refinement>,
    parity_report: ParityReport,
    instability: Option<InstabilityReport>,
    grid: GridEcho,
}

#[derive(Serialize)]
struct GridEcho {
    n: usize,
    half_length: f64,
}

#[derive(Serialize)]
struct GammaEcho {
    eps: f64,
    lambda: f64,
    iterations: usize,
    converged: bool,
    contraction_ratios: Vec<f64>,
}

#[derive(Serialize)]
struct BvpOutput {
    oracle_discrepancy: f64,
    oracle_problems: usize,
    oracle_ny: usize,
    leading_order_rate: LeadingOrderRate,
    iterations: GammaEcho,
}

#[derive(Serialize)]
struct LinopOutput {
    lambda_re: f64,
    lambda_im: f64,
    target: f64,
    relative_deviation: f64,
    residual: f64,
    ritz: Vec<[f64; 2]>,
    mode_asymmetry: f64,
    fix_r: bool,
    grid: LinopGridEcho,
    timings: SearchWork,
    reverser_anticommutation: f64,
    symplectic_skewness: f64,
    structure_probes: usize,
    instability: InstabilityReport,
}

#[derive(Serialize)]
struct LinopGridEcho {
    nx: usize,
    cheb_degree: usize,
    half_length: f64,
    deflation_threshold: f64,
}

#[derive(Serialize)]
struct SynthSidecar<'a> {
    meta: &'a WaveSurfaceMeta,
    nx: usize,
    nz: usize,
    data_file: String,
}

fn setup(cfg: &RunConfig) -> Result<(FluidParams, CoefficientSet)> {
    let p = cfg.params()?;
    let c = compute_coefficients(&p)?;
    Ok((p, c))
}

fn dimension_breaking(cfg: &RunConfig, coeffs: &CoefficientSet) -> Result<DimensionBreakingResult> {
    find_k0(coeffs, &Grid1D::decay_truncated(cfg.slow_l(), cfg.grids.n)?)
}

/// Execute `command` under `cfg`, writing data files and
/// `<command>.manifest.json` into `cfg.output_dir`. `primary_name`, when
/// given, replaces the default file name of the command's main output.
pub fn run(command: &Command, cfg: &RunConfig, primary_name: Option<&str>) -> Result<ResultManifest> {
    cfg.validate()?;
    let start = Instant::now();
    let mut out = OutputWriter::new(&cfg.output_dir)?;
    let (p, c) = setup(cfg)?;
    let name = |default: &str| primary_name.map(str::to_string).unwrap_or_else(|| default.to_string());
    match command {
        Command::Params => {
            let o = ParamsOutput {
                tau0: p.tau0,
                eps: p.eps,
                mu0: p.mu0,
                alpha0: p.alpha0,
                beta0: p.beta0,
                alpha: p.alpha0 + p.eps * p.eps,
                sigma: p.sigma(),
                minimum: check_min(&p)?,
            };
            out.write_json(&name("params.json"), &o)?;
        }
        Command::Dispersion => {
            let samples = dispersion_curve(&p.with_eps(0.0), (p.mu0 / 100.0, 3.0 * p.mu0), cfg.grids.n)?;
            let mut t = Table::new(&["mu", "lambda", "q", "g"]);
            samples.iter().for_each(|s| t.push(vec![s.mu, s.lambda, s.q, s.g]));
            out.write_table("dispersion", primary_name, &t, cfg.format)?;
        }
        Command::Coeffs => {
            let pc = profile_coefficients(&p, &c)?;
            let o = CoeffsOutput {
                a1: c.a1,
                a2: c.a2,
                a3: c.a3,
                a4: c.a4,
                a5: c.a5,
                sigma: c.sigma,
                c1: pc.c1,
                c2: pc.c2,
                c4: pc.c4,
                c5: pc.c5,
                b1: pc.b1,
                b2: pc.b2,
                b3: pc.b3,
                g0_2mu0: pc.g0_at_2mu0,
            };
            out.write_json(&name("coeffs.json"), &o)?;
        }
        Command::Soliton => {
            let slow = Grid1D::decay_truncated(cfg.slow_l(), cfg.grids.n)?;
            let sol = build_soliton(&c, &slow, Branch::Positive)?;
            let mut t = Table::new(&["X", "zeta_star", "xi_star", "psi_x_star"]);
            for i in 0..slow.n {
                t.push(vec![sol.x[i], sol.zeta_star[i], sol.xi_star[i], sol.psi_x_star[i]]);
            }
            out.write_table("zeta_star", None, &t, cfg.format)?;
            let phys = Grid1D::decay_truncated(cfg.grids.l, cfg.grids.n)?;
            let y = uniform_unit(cfg.grids.ny);
            let pc = profile_coefficients(&p, &c)?;
            let lw = build_line_wave(&p, &c, &pc, &phys, &y, Branch::Positive)?;
            let mut te = Table::new(&["x", "eta1", "eta2", "eta"]);
            for i in 0..phys.n {
                te.push(vec![phys.x[i], lw.eta1[i], lw.eta2[i], lw.eta1[i] + lw.eta2[i]]);
            }
            out.write_table("eta_star", None, &te, cfg.format)?;
            let mut tp = Table::new(&["x", "y", "phi1", "phi2", "phi"]);
            for i in 0..phys.n {
                for (j, &yv) in y.iter().enumerate() {
                    let (a, b) = (lw.phi1.at(i, j), lw.phi2.at(i, j));
                    tp.push(vec![phys.x[i], yv, a, b, a + b]);
                }
            }
            out.write_table("phi_star", None, &tp, cfg.format)?;
        }
        Command::Spectrum { count } => {
            if *count == 0 {
                return Err(Error::InvalidArgument("count must be positive".into()));
            }
            let slow = Grid1D::decay_truncated(cfg.slow_l(), cfg.grids.n)?;
            let c01 = schrodinger_spectrum(6.0, &c, &slow, *count)?;
            let c02 = schrodinger_spectrum(2.0, &c, &slow, *count)?;
            let bt = assemble_btilde(&c, &slow, Symmetry::FixR)?;
            let btr = spectrum_of(&bt, *count, -crate::reduced_spectra::delta_ess(&c))?;
            let ia2 = c.inv_a2();
            let o = SpectrumOutput { inv_a2: ia2, c01: &c01, c01_expected: [-3.0 * ia2, 0.0], c02: &c02, c02_expected: [0.0], btilde_fix_r: &btr };
            out.write_json(&name("spectrum.json"), &o)?;
        }
        Command::Dimbreak { refine } => {
            let d = dimension_breaking(cfg, &c)?;
            let refinement = if *refine {
                let n = cfg.grids.n;
                Some(k0_refinement(&c, cfg.slow_l(), &[n / 2, n, 2 * n])?)
            } else {
                None
            };
            let o = DimbreakOutput {
                k0: d.k0,
                k_eps: d.k_eps,
                kappa_fix_r: d.kappa_fixr,
                kappa_full: d.kappa_full,
                neg_count: d.neg_count,
                neg_count_full: d.neg_count_full,
                delta_ess: d.delta_ess,
                eigenvalue_table: &d.eigenvalue_table,
                refinement: refinement.as_ref(),
                parity_report: d.mode.parity,
                instability: Some(instability_report(&p, d.k_eps)?),
                grid: GridEcho { n: d.n, half_length: d.l },
            };
            out.write_json(&name("dimbreak.json"), &o)?;
            let mut t = Table::new(&["X", "zeta1", "psi"]);
            for i in 0..d.mode.x.len() {
                t.push(vec![d.mode.x[i], d.mode.zeta1[i], d.mode.psi[i]]);
            }
            out.write_table("dimbreak_mode", None, &t, cfg.format)?;
        }
        Command::BvpCheck => {
            let d = dimension_breaking(cfg, &c)?;
            let problems = 20;
            let disc = oracle_discrepancy(problems, cfg.grids.ny, BVP_SEED)?;
            let rate = leading_order_rate(&p, &c, d.k0, &[0.08, 0.04, 0.02], cfg.grids.ny)?;
            let lambda = p.eps * d.k0;
            let g = packet_gamma_solve(&p, &c, lambda, cfg.grids.ny, 20.0)?;
            let o = BvpOutput {
                oracle_discrepancy: disc,
                oracle_problems: problems,
                oracle_ny: cfg.grids.ny,
                leading_order_rate: rate,
                iterations: GammaEcho { eps: p.eps, lambda, iterations: g.iterations, converged: g.converged, contraction_ratios: g.ratios },
            };
            out.write_json(&name("bvp_check.json"), &o)?;
        }
        Command::LinopCheck { fix_r } => {
            if p.eps > 0.1 {
                return Err(Error::config("eps", format!("linop-check needs eps <= 0.1, got {}", p.eps)));
            }
            let d = dimension_breaking(cfg, &c)?;
            let grid = LinopGrid::default_for(&p, &c)?;
            let op = assemble_l(&p, &c, grid)?;
            let target = p.eps * d.k0;
            let res = imaginary_eigenvalue_search(&op, &c, target, *fix_r)?;
            let rev = reverser_check(&op, STRUCTURE_PROBES, STRUCTURE_SEED);
            let skew = symplectic_check(&op, STRUCTURE_PROBES, STRUCTURE_SEED)?;
            let o = LinopOutput {
                lambda_re: res.lambda.re,
                lambda_im: res.lambda.im,
                target,
                relative_deviation: res.relative_deviation(),
                residual: res.residual,
                ritz: res.ritz.iter().map(|z| [z.re, z.im]).collect(),
                mode_asymmetry: res.mode_asymmetry,
                fix_r: *fix_r,
                grid: LinopGridEcho { nx: grid.nx, cheb_degree: grid.cheb_degree, half_length: op.lx, deflation_threshold: grid.deflation_threshold },
                timings: res.work,
                reverser_anticommutation: rev,
                symplectic_skewness: skew,
                structure_probes: STRUCTURE_PROBES,
                instability: instability_report(&p, d.k_eps)?,
            };
            out.write_json(&name("linop_check.json"), &o)?;
        }
        Command::Synth { s } => {
            let d = dimension_breaking(cfg, &c)?;
            let w = synthesize(&p, &c, &d.mode, d.k_eps, *s, cfg.grids.nz)?;
            let mut t = Table::new(&["x", "z", "eta"]);
            for (i, &x) in w.x.iter().enumerate() {
                for (k, &z) in w.z.iter().enumerate() {
                    t.push(vec![x, z, w.at(i, k)]);
                }
            }
            let path = out.write_table("synth", primary_name, &t, cfg.format)?;
            let data_file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            let stem = Path::new(&data_file).file_stem().map(|f| f.to_string_lossy().into_owned()).unwrap_or_else(|| "synth".into());
            let side = SynthSidecar { meta: &w.meta, nx: w.x.len(), nz: w.z.len(), data_file };
            let side_name = if cfg.format == OutputFormat::Json { format!("{stem}.meta.json") } else { format!("{stem}.json") };
            out.write_json(&side_name, &side)?;
        }
    }
    let manifest = ResultManifest {
        command: command.name().to_string(),
        config: cfg.clone(),
        version: VERSION.to_string(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        files: out.files().to_vec(),
    };
    fs::write(cfg.output_dir.join(format!("{}.manifest.json", command.name())), json_text(&manifest)?)?;
    Ok(manifest)
}
