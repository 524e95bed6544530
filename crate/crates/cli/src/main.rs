//! `dimbreak` — command-line driver for the dimension-breaking numerics.
//!
//! Exit codes: 0 success, 2 invalid arguments or configuration, 3 numerical
//! non-convergence or spectral-structure violation, 4 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dimbreak_core::cli_io::{load_overrides, run, Command, ConfigOverrides, OutputFormat};
use dimbreak_core::Error;

/// Environment variable selecting the worker-thread count (0 = automatic).
const THREADS_ENV: &str = "DIMBREAK_THREADS";

#[derive(Parser, Debug)]
#[command(name = "dimbreak", version, about = "Dimension-breaking of gravity-capillary line solitary waves")]
struct Cli {
    /// JSON configuration file; command-line options override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory, output file (`*.csv` / `*.json`) or format (`csv` / `json`).
    #[arg(long, global = true, value_name = "DIR|FILE|FORMAT")]
    out: Option<String>,

    /// Suppress the summary printed on success.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    /// Bond number τ₀ ∈ (0, 1/3).
    #[arg(long, global = true)]
    tau0: Option<f64>,
    /// Small parameter ε ∈ (0, 0.5].
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Physical half-length L of x grids (default 40√A₁/ε).
    #[arg(long = "L", global = true, value_name = "L")]
    l: Option<f64>,
    /// Points in x.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Nodes in y.
    #[arg(long, global = true)]
    ny: Option<usize>,
    /// Samples in z.
    #[arg(long, global = true)]
    nz: Option<usize>,
    /// Seed of the coercivity probes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Encoding of tabular outputs.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Bifurcation point (μ₀, α₀, β₀) and minimum diagnostics.
    Params,
    /// Sampled dispersion curve g(μ, 0).
    Dispersion,
    /// Model and profile coefficients.
    Coeffs,
    /// Envelope soliton and second-order line-wave profiles.
    Soliton,
    /// Lowest eigenvalues of the reduced operators.
    Spectrum {
        /// Eigenvalues per operator.
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
    /// Transverse wavenumber k₀ with refinement and parity diagnostics.
    Dimbreak {
        /// Skip the n/2, n, 2n refinement study.
        #[arg(long)]
        no_refine: bool,
    },
    /// Strip-solver oracle comparison and leading-order rate.
    BvpCheck,
    /// Full-operator eigenvalue search and structure checks.
    LinopCheck {
        /// Restrict the search to reflection-even states.
        #[arg(long)]
        fix_r: bool,
    },
    /// Leading-order modulated surface η(x, z).
    Synth {
        /// Modulation amplitude s.
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        s: f64,
    },
}

/// How a `--out` value is interpreted.
#[derive(Debug, PartialEq)]
enum OutTarget {
    Dir(PathBuf),
    File { dir: PathBuf, name: String, format: OutputFormat },
    Format(OutputFormat),
}

fn parse_out(value: &str) -> OutTarget {
    match value {
        "csv" => return OutTarget::Format(OutputFormat::Csv),
        "json" => return OutTarget::Format(OutputFormat::Json),
        _ => {}
    }
    let path = Path::new(value);
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let format = match ext.as_deref() {
        Some("csv") => Some(OutputFormat::Csv),
        Some("json") => Some(OutputFormat::Json),
        _ => None,
    };
    match (format, path.file_name()) {
        (Some(format), Some(name)) => {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
            OutTarget::File { dir, name: name.to_string_lossy().into_owned(), format }
        }
        _ => OutTarget::Dir(path.to_path_buf()),
    }
}

fn command_of(sub: &Sub) -> Command {
    match sub {
        Sub::Params => Command::Params,
        Sub::Dispersion => Command::Dispersion,
        Sub::Coeffs => Command::Coeffs,
        Sub::Soliton => Command::Soliton,
        Sub::Spectrum { count } => Command::Spectrum { count: *count },
        Sub::Dimbreak { no_refine } => Command::Dimbreak { refine: !no_refine },
        Sub::BvpCheck => Command::BvpCheck,
        Sub::LinopCheck { fix_r } => Command::LinopCheck { fix_r: *fix_r },
        Sub::Synth { s } => Command::Synth { s: *s },
    }
}

fn init_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize =
        value.trim().parse().map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV} must be a non-negative integer, got `{value}`")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {threads} worker threads: {e}")))?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), Error> {
    init_threads()?;
    let base = match &cli.config {
        Some(path) => load_overrides(path)?,
        None => ConfigOverrides::default(),
    };
    let o = &cli.overrides;
    let mut over = ConfigOverrides::default();
    over.tau0 = o.tau0;
    over.eps = o.eps;
    if let Some(l) = o.l {
        over.set_l(l);
    }
    if let Some(n) = o.n {
        over.set_n(n);
    }
    if let Some(ny) = o.ny {
        over.set_ny(ny);
    }
    if let Some(nz) = o.nz {
        over.set_nz(nz);
    }
    if let Some(seed) = o.seed {
        over.set_coercivity_seed(seed);
    }
    over.format = match o.format.as_deref() {
        Some("json") => Some(OutputFormat::Json),
        Some(_) => Some(OutputFormat::Csv),
        None => None,
    };
    let mut primary = None;
    match cli.out.as_deref().map(parse_out) {
        Some(OutTarget::Dir(dir)) => over.output_dir = Some(dir),
        Some(OutTarget::Format(f)) => over.format = Some(f),
        Some(OutTarget::File { dir, name, format }) => {
            over.output_dir = Some(dir);
            over.format = Some(format);
            primary = Some(name);
        }
        None => {}
    }
    let cfg = base.merged_with(&over).resolve()?;
    let command = command_of(&cli.command);
    let manifest = run(&command, &cfg, primary.as_deref())?;
    if !cli.quiet {
        for f in &manifest.files {
            println!("{}  {}", f.sha256, cfg.output_dir.join(&f.path).display());
        }
        eprintln!("{} finished in {:.3} s", manifest.command, manifest.wall_time_seconds);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
