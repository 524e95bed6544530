//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Each criterion also carries a wall-clock budget; exceeding it is a
//! failure. Expected values come from closed forms evaluated here (the
//! Pöschl–Teller bound states, coth μ₀/μ₀, the witness formula), not from
//! the library routines under test. The process exits non-zero when any
//! criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use dimbreak_core::cli_io::{run, Command, RunConfig};
use dimbreak_core::dispersion::{g0_increment_lambda, g0_increment_mu};
use dimbreak_core::{
    assemble_l, build_soliton, coercivity_check, compute_coefficients, ds_residual, find_k0, imaginary_eigenvalue_search, k0_refinement,
    leading_order_rate, nls_residual, oracle_discrepancy, params_from_tau, quadratic_form_witness, reverser_check, schrodinger_spectrum,
    symplectic_check, Branch, CoefficientSet, DerivativeMode, FluidParams, Grid1D, LinopGrid, Result, DEFAULT_COERCIVITY_SEED,
};

const TAU_SWEEP: [f64; 6] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30];
const FIXTURE_TAU: f64 = 0.2;
const FIXTURE_EPS: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion(id: usize, name: &str, limit_s: Option<f64>, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let t = Instant::now();
    let res = f();
    let secs = t.elapsed().as_secs_f64();
    let in_time = limit_s.map_or(true, |l| secs < l);
    let limit = limit_s.map_or_else(|| "no limit".to_string(), |l| format!("limit {l} s"));
    let (pass, detail) = match res {
        Ok(o) => (o.pass && in_time, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("{tag} [{id:2}] {name} ({secs:.2} s, {limit}): {detail}");
    pass
}

fn fixture(tau0: f64, eps: f64) -> Result<(FluidParams, CoefficientSet)> {
    let p = params_from_tau(tau0, eps)?;
    let c = compute_coefficients(&p)?;
    Ok((p, c))
}

/// Slow grid of half-length 40√A₁.
fn slow_grid(c: &CoefficientSet, n: usize) -> Result<Grid1D> {
    Grid1D::decay_truncated(40.0 * c.a1.sqrt(), n)
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_dispersion() -> Result<Outcome> {
    let (mut g_max, mut id_max) = (0.0f64, 0.0f64);
    for &tau in &TAU_SWEEP {
        let p = params_from_tau(tau, 0.0)?;
        // g₀(μ, 0) = α₀ + β₀μ² − μ coth μ, evaluated independently.
        let g = p.alpha0 + p.beta0 * p.mu0 * p.mu0 - p.mu0 * coth(p.mu0);
        g_max = g_max.max(g.abs()).max(dimbreak_core::g_eps(p.mu0, 0.0, &p)?.abs());
        id_max = id_max.max((p.beta0 - tau * p.alpha0).abs());
    }
    Ok(outcome(g_max < 1e-10 && id_max < 1e-12, format!("max|g0(mu0,0)| = {g_max:.2e}, max|beta0 - tau0*alpha0| = {id_max:.2e}")))
}

fn c2_taylor() -> Result<Outcome> {
    let h = 1e-5;
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for &tau in &TAU_SWEEP {
        let p = params_from_tau(tau, 0.0)?;
        let c = compute_coefficients(&p)?;
        let gmm = (g0_increment_mu(&p, h) + g0_increment_mu(&p, -h)) / (h * h);
        let gll = 2.0 * g0_increment_lambda(&p, h) / (h * h);
        e1 = e1.max(rel(0.5 * gmm, c.a1));
        e2 = e2.max(rel(0.5 * gll, coth(p.mu0) / p.mu0));
    }
    Ok(outcome(e1 < 1e-5 && e2 < 1e-5, format!("max rel err A1 = {e1:.2e}, A2 = {e2:.2e} (step {h:e})")))
}

fn c3_schrodinger() -> Result<Outcome> {
    let (_, c) = fixture(FIXTURE_TAU, FIXTURE_EPS)?;
    let g = slow_grid(&c, 4096)?;
    let ia2 = 1.0 / c.a2;
    let s1 = schrodinger_spectrum(6.0, &c, &g, 4)?;
    let s2 = schrodinger_spectrum(2.0, &c, &g, 4)?;
    // Bound states of −A₁∂² − c sech²: 1 − A₁κ² with κ ∈ {2, 1} (c = 6), {1} (c = 2).
    // The C₀,₁ pair (−3A₂⁻¹, 0) is compared as a vector relative to its size 3A₂⁻¹.
    let pair_err = (s1.eigenvalues[0] + 3.0 * ia2).abs().max(s1.eigenvalues[1].abs()) / (3.0 * ia2);
    let e_zero2 = s2.eigenvalues[0].abs() / ia2;
    let pass = s1.neg_count == 2 && s2.neg_count == 1 && pair_err < 1e-4 && e_zero2 < 1e-4;
    Ok(outcome(
        pass,
        format!(
            "C01 count {} (pair rel err {pair_err:.2e}; lambda = [{:.8e}, {:.3e}]·A2), C02 count {} (|0|·A2: {e_zero2:.2e})",
            s1.neg_count,
            s1.eigenvalues[0] / ia2,
            s1.eigenvalues[1] / ia2,
            s2.neg_count
        ),
    ))
}

fn c4_witness() -> Result<Outcome> {
    let (_, c) = fixture(FIXTURE_TAU, FIXTURE_EPS)?;
    let g = slow_grid(&c, 4096)?;
    let w = quadratic_form_witness(&c, &g)?;
    let exact = -16.0 * c.a1.sqrt() * c.a3 / (3.0 * c.a2 * c.a5);
    let e = rel(w, exact);
    Ok(outcome(e < 1e-4, format!("form {w:.10e} vs closed form {exact:.10e}, rel err {e:.2e}")))
}

fn c5_dimension_breaking() -> Result<Outcome> {
    let (_, c) = fixture(FIXTURE_TAU, FIXTURE_EPS)?;
    let g = slow_grid(&c, 2048)?;
    let d = find_k0(&c, &g)?;
    let k_full = (-d.kappa_full).sqrt();
    let k_fix = (-d.kappa_fixr).sqrt();
    let dk = (k_full - k_fix).abs();
    let r = k0_refinement(&c, g.l, &[1024, 2048, 4096])?;
    let order = r.order.unwrap_or(f64::NAN);
    let parity = d.mode.parity.max();
    let pass = d.neg_count == 1 && dk < 1e-8 && (order - 2.0).abs() <= 0.2 && parity < 1e-8;
    Ok(outcome(
        pass,
        format!("k0 = {:.10}, count {}, |k0 full - FixR| = {dk:.2e}, order {order:.3}, parity {parity:.2e}", d.k0, d.neg_count),
    ))
}

fn c6_residuals() -> Result<Outcome> {
    let (_, c) = fixture(FIXTURE_TAU, FIXTURE_EPS)?;
    let mut analytic = 0.0f64;
    let mut fd = Vec::new();
    for n in [1024, 2048, 4096] {
        let g = slow_grid(&c, n)?;
        let s = build_soliton(&c, &g, Branch::Positive)?;
        let (r1, r2) = ds_residual(&s, &c, &g, DerivativeMode::Analytic)?;
        analytic = analytic.max(r1).max(r2).max(nls_residual(&s, &c, &g, DerivativeMode::Analytic)?);
        let (f1, _) = ds_residual(&s, &c, &g, DerivativeMode::FiniteDifference)?;
        fd.push((f1, nls_residual(&s, &c, &g, DerivativeMode::FiniteDifference)?));
    }
    let orders: Vec<f64> = fd.windows(2).flat_map(|w| [(w[0].0 / w[1].0).log2(), (w[0].1 / w[1].1).log2()]).collect();
    let ok_orders = orders.iter().all(|o| (o - 2.0).abs() <= 0.1);
    let shown: Vec<String> = orders.iter().map(|o| format!("{o:.3}")).collect();
    Ok(outcome(analytic < 1e-10 && ok_orders, format!("max analytic residual {analytic:.2e}, FD orders [{}]", shown.join(", "))))
}

fn c7_strip_oracle() -> Result<Outcome> {
    let d = oracle_discrepancy(20, 2048, 0xB5)?;
    Ok(outcome(d < 1e-6, format!("max relative L2 discrepancy {d:.2e} over 20 problems")))
}

fn c8_leading_order() -> Result<Outcome> {
    let (p, c) = fixture(FIXTURE_TAU, FIXTURE_EPS)?;
    let k0 = find_k0(&c, &slow_grid(&c, 2048)?)?.k0;
    let r = leading_order_rate(&p, &c, k0, &[0.08, 0.04, 0.02], 33)?;
    let devs: Vec<String> = r.samples.iter().map(|s| format!("{:.3e}", s.deviation / s.reference)).collect();
    Ok(outcome(
        (1.2..=2.0).contains(&r.exponent),
        format!("exponent {:.3}, relative deviations [{}]", r.exponent, devs.join(", ")),
    ))
}

fn search(tau0: f64, eps: f64, k0: f64) -> Result<dimbreak_core::EigenSearchResult> {
    let (p, c) = fixture(tau0, eps)?;
    let op = assemble_l(&p, &c, LinopGrid::default_for(&p, &c)?)?;
    imaginary_eigenvalue_search(&op, &c, eps * k0, false)
}

fn c9_full_operator() -> Result<Outcome> {
    let (_, c) = fixture(FIXTURE_TAU, FIXTURE_EPS)?;
    let k0 = find_k0(&c, &slow_grid(&c, 2048)?)?.k0;
    let a = search(FIXTURE_TAU, FIXTURE_EPS, k0)?;
    let b = search(FIXTURE_TAU, FIXTURE_EPS / 2.0, k0)?;
    let t = a.target;
    let re = a.lambda.re.abs() / t;
    let (da, db) = (a.relative_deviation(), b.relative_deviation());
    let pass = a.residual < 1e-8 && b.residual < 1e-8 && da < 0.2 && re < 0.05 && db < da;
    Ok(outcome(
        pass,
        format!(
            "lambda = {:.3e} + {:.10}i vs eps*k0 = {t:.10}: residual {:.2e}, |Im dev| {da:.3e}, |Re|/(eps k0) {re:.2e}; eps/2: residual {:.2e}, dev {db:.3e}",
            a.lambda.re, a.lambda.im, a.residual, b.residual
        ),
    ))
}

fn c10_structure() -> Result<Outcome> {
    let (p, c) = fixture(FIXTURE_TAU, FIXTURE_EPS)?;
    let op = assemble_l(&p, &c, LinopGrid::default_for(&p, &c)?)?;
    let rev = reverser_check(&op, 50, 0x5171);
    let skew = symplectic_check(&op, 50, 0x5171)?;
    Ok(outcome(rev < 1e-10 && skew < 1e-6, format!("reverser {rev:.2e}, skewness {skew:.2e}")))
}

fn c11_coercivity() -> Result<Outcome> {
    let (_, c) = fixture(FIXTURE_TAU, FIXTURE_EPS)?;
    let r = coercivity_check(&c, &slow_grid(&c, 2048)?, 1000, DEFAULT_COERCIVITY_SEED)?;
    Ok(outcome(r.min_quotient > 0.0, format!("min quotient {:.4e} over {} probes (trial {})", r.min_quotient, r.trials, r.argmin_trial)))
}

fn data_files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir)? {
        let path = e?.path();
        let name = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        if !name.ends_with(".manifest.json") {
            out.insert(name, fs::read(&path)?);
        }
    }
    Ok(out)
}

fn c12_reproducibility() -> Result<Outcome> {
    let commands = [
        Command::Params,
        Command::Dispersion,
        Command::Coeffs,
        Command::Soliton,
        Command::Spectrum { count: 6 },
        Command::Dimbreak { refine: true },
        Command::BvpCheck,
        Command::LinopCheck { fix_r: true },
        Command::Synth { s: 0.1 },
    ];
    let mut differing = Vec::new();
    let mut files = 0;
    for cmd in &commands {
        let runs: Vec<BTreeMap<String, Vec<u8>>> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir()?;
                let mut cfg = RunConfig::for_tau(FIXTURE_TAU)?;
                cfg.output_dir = dir.path().to_path_buf();
                let m = run(cmd, &cfg, None)?;
                let f = data_files(dir.path())?;
                if f.len() != m.files.len() {
                    return Err(dimbreak_core::Error::InvalidArgument(format!("{}: manifest lists {} files", cmd.name(), m.files.len())));
                }
                Ok(f)
            })
            .collect::<Result<_>>()?;
        files += runs[0].len();
        if runs[0] != runs[1] || runs[0].is_empty() {
            differing.push(cmd.name());
        }
    }
    Ok(outcome(
        differing.is_empty(),
        format!("{} subcommands, {files} files per run, differing: {:?}", commands.len(), differing),
    ))
}

fn main() {
    let results = [
        criterion(1, "dispersion identity", Some(1.0), c1_dispersion),
        criterion(2, "Taylor/coefficient consistency", Some(1.0), c2_taylor),
        criterion(3, "Schrodinger oracle", Some(30.0), c3_schrodinger),
        criterion(4, "quadratic-form witness", Some(10.0), c4_witness),
        criterion(5, "dimension-breaking eigenvalue", Some(120.0), c5_dimension_breaking),
        criterion(6, "NLS/DS residuals", Some(5.0), c6_residuals),
        criterion(7, "strip BVP oracle", Some(10.0), c7_strip_oracle),
        criterion(8, "leading-order Gamma rate", Some(120.0), c8_leading_order),
        criterion(9, "full-operator eigenvalue", Some(600.0), c9_full_operator),
        criterion(10, "structure checks", Some(30.0), c10_structure),
        criterion(11, "coercivity", Some(30.0), c11_coercivity),
        criterion(12, "reproducibility", None, c12_reproducibility),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
