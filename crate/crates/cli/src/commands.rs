//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::BigRational;
use pshdef_core::boundary::sample_boundary;
use pshdef_core::dominance::{levi_dominance_gate, ProbeFamily};
use pshdef_core::geometry::{gradient_z_sq, hessian_minor_det, levi_matrix};
use pshdef_core::linalg::{hermitian_min_eigenvalue, symmetric_eigenvalues};
use pshdef_core::method::{cn_simultaneous, run_construction, strong_psc_shortcut, ConstructionError};
use pshdef_core::real_convex::{convex_multiplier, real_hessian_check, real_necessary_conditions, sample_real_boundary, RealConvexError, RealDefiningFunction, RealInequality, RealShell};
use pshdef_core::real_poly::real_expr;
use pshdef_core::verify::{multiplier_identity_check, levi_scan, necessary_conditions_check, psd_check, CompiledHessian, IdentityCheck, LeviScan, NecessaryReport, VerifyError};
use pshdef_core::{BoundKind, BoundaryShell, ConstructionConfig, ConstructionStatus, DefiningFunction, DominanceStatus, DominanceVerdict, GaussianRational, PsdCheckResult, RealPoly, WPoly};
use serde::Serialize;

use crate::lower::{parse_real_polys, parse_wpolys, LowerError};
use crate::report::{Failure, Mode, Report, Status};

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Parser, Debug)]
#[command(name = "pshdef", version, about = "Levi-form diagnostics and plurisubharmonic multipliers for polynomial defining functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normal form, Levi forms, a pseudoconvexity scan and the Levi-dominance gate
    Analyze(Common),
    /// Build a multiplier h = 1 + Kr + T and certify r·h on the boundary
    Construct(ConstructArgs),
    /// Check a user-supplied multiplier h
    Verify(VerifyArgs),
    /// Print the Levi form on the tangent basis v_j = r_w e_j − r_{z_j} e_w
    Levi(LeviArgs),
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a non-negative number, got '{s}'")),
    }
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Defining function, e.g. "Im(w) + abs2(z)"; with --real, e.g. "y + x^2"
    #[arg(long = "r", value_name = "EXPR")]
    pub r: String,
    /// Radius of the boundary shell around the origin
    #[arg(long, default_value_t = 1e-2, value_parser = positive)]
    pub radius: f64,
    /// Boundary points per shell
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance for PSD and inequality checks
    #[arg(long, default_value_t = 1e-9, value_parser = non_negative)]
    pub tol: f64,
    /// Real convex setting: variables x1…, y and r = y + G
    #[arg(long)]
    pub real: bool,
    #[arg(long)]
    pub json: bool,
    /// Write the sampled boundary points and pointwise quantities as CSV
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    #[value(name = "levi")]
    Levi,
    #[value(name = "levi+grad")]
    LeviGrad,
}

#[derive(Args, Debug, Clone)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 4)]
    pub max_stages: usize,
    /// Truncation degree for T (default 2 + max(deg r, deg T))
    #[arg(long)]
    pub degree_cap: Option<u32>,
    /// Largest exponent e in the ladder K = 2^e
    #[arg(long = "max-K-exp", default_value_t = 20, value_parser = clap::value_parser!(u32).range(0..=62))]
    pub max_k_exp: u32,
    /// Bound for the S/E split
    #[arg(long, value_enum, default_value = "levi+grad")]
    pub bound: BoundArg,
    /// Keep terms of T that are multiples of terms of r
    #[arg(long)]
    pub no_absorb: bool,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Multiplier h, e.g. "1 - 4*Im(z) + 64*(...)"
    #[arg(long = "h", value_name = "EXPR")]
    pub h: String,
    /// K used to read h as 1 + Kr + T
    #[arg(long = "K", default_value_t = 0)]
    pub k: u64,
}

#[derive(Args, Debug, Clone)]
pub struct LeviArgs {
    #[arg(long = "r", value_name = "EXPR")]
    pub r: String,
    #[arg(long)]
    pub real: bool,
    #[arg(long)]
    pub json: bool,
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl std::fmt::Display) -> Self {
        Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("--r: {0}")]
    R(LowerError),
    #[error("--h: {0}")]
    H(LowerError),
    #[error("{0}")]
    NormalForm(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: text, stderr: String::new() }
                }
                _ => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text },
            };
        }
    };
    let res = match &cli.command {
        Command::Analyze(c) if c.real => analyze_real(c),
        Command::Analyze(c) => analyze(c),
        Command::Construct(a) if a.common.real => construct_real(a),
        Command::Construct(a) => construct(a),
        Command::Verify(a) if a.common.real => verify_real(a),
        Command::Verify(a) => verify(a),
        Command::Levi(a) if a.real => levi_real(a),
        Command::Levi(a) => levi(a),
    };
    match res {
        Ok(o) => o,
        Err(e) => Outcome { code: e.code(), ..Outcome::usage(e) },
    }
}

fn emit<T: Serialize>(report: Report<T>, json: bool, text: impl FnOnce(&Report<T>) -> String) -> Outcome {
    let stdout = if json { report.to_json() } else { text(&report) };
    Outcome { code: report.exit_code, stdout, stderr: String::new() }
}

fn complex_inputs(r: &str, h: Option<&str>) -> Result<(DefiningFunction, Option<WPoly>), CliError> {
    let srcs: Vec<&str> = std::iter::once(r).chain(h).collect();
    let polys = match parse_wpolys(&srcs) {
        Ok(p) => p,
        Err(e) => {
            // Attribute the error to the flag whose text fails on its own.
            return Err(if parse_wpolys(&[r]).is_err() { CliError::R(e) } else { CliError::H(e) });
        }
    };
    let mut it = polys.into_iter();
    let r = DefiningFunction::new(it.next().expect("r parsed")).map_err(|e| CliError::NormalForm(e.to_string()))?;
    Ok((r, it.next()))
}

fn real_inputs(r: &str, h: Option<&str>) -> Result<(RealDefiningFunction, Option<RealPoly>), CliError> {
    let srcs: Vec<&str> = std::iter::once(r).chain(h).collect();
    let polys = match parse_real_polys(&srcs) {
        Ok(p) => p,
        Err(e) => return Err(if parse_real_polys(&[r]).is_err() { CliError::R(e) } else { CliError::H(e) }),
    };
    let mut it = polys.into_iter();
    let r = RealDefiningFunction::new(it.next().expect("r parsed")).map_err(|e| CliError::NormalForm(format!("not of the form y + G: {e}")))?;
    Ok((r, it.next()))
}

fn origin_value(p: &WPoly) -> GaussianRational {
    let zero = GaussianRational::from_int(0);
    p.eval_exact(&vec![zero.clone(); p.nz()], &zero)
}

fn complex_coord_header(nz: usize) -> Vec<String> {
    let mut h = Vec::new();
    for j in 0..nz {
        let s = if nz == 1 { String::new() } else { (j + 1).to_string() };
        h.push(format!("x{s}"));
        h.push(format!("y{s}"));
    }
    h.push("u".into());
    h.push("v".into());
    h
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io { path: path.to_path_buf(), source: e.into() };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

/// Coordinates, `|r|`, the diagonal Levi values and, when given, the least eigenvalue of `Hess(ρ)`.
fn complex_table(path: &Path, r: &DefiningFunction, shell: &BoundaryShell, rho: Option<&WPoly>) -> Result<(), CliError> {
    let nz = r.nz();
    let rc = r.poly().compile();
    let levi: Vec<_> = (0..nz).map(|j| levi_matrix(r)[j][j].compile()).collect();
    let hess = rho.map(CompiledHessian::new);
    let mut header = complex_coord_header(nz);
    header.push("abs_r".into());
    header.extend((1..=nz).map(|j| format!("levi_{j}")));
    if hess.is_some() {
        header.push("rho_min_eig".into());
    }
    let rows: Vec<Vec<f64>> = shell
        .points
        .iter()
        .map(|p| {
            let mut row = p.real_coords();
            row.push(rc.eval(p).norm());
            row.extend(levi.iter().map(|l| l.eval(p).re));
            if let Some(h) = &hess {
                row.push(hermitian_min_eigenvalue(&h.eval(p)));
            }
            row
        })
        .collect();
    write_csv(path, &header, &rows)
}

fn real_hessian_at(f: &RealPoly, p: &[f64]) -> Vec<Vec<f64>> {
    let n = f.nvars();
    (0..n).map(|a| (0..n).map(|b| f.deriv(a).deriv(b).eval(p)).collect()).collect()
}

fn real_table(path: &Path, r: &RealDefiningFunction, shell: &RealShell, rho: Option<&RealPoly>) -> Result<(), CliError> {
    let n = r.nvars();
    let mut header = RealPoly::convex_names(n);
    header.push("abs_r".into());
    header.extend((1..n).map(|j| format!("tangential_{j}")));
    if rho.is_some() {
        header.push("rho_min_eig".into());
    }
    let forms: Vec<RealPoly> = (0..n - 1).map(|j| r.tangential_form(j)).collect();
    let rows: Vec<Vec<f64>> = shell
        .points
        .iter()
        .map(|p| {
            let mut row = p.clone();
            row.push(r.poly().eval(p).abs());
            row.extend(forms.iter().map(|f| f.eval(p)));
            if let Some(rho) = rho {
                row.push(symmetric_eigenvalues(&real_hessian_at(rho, p)).into_iter().fold(f64::INFINITY, f64::min));
            }
            row
        })
        .collect();
    write_csv(path, &header, &rows)
}

fn verdict_line(v: &DominanceVerdict) -> String {
    match v.status {
        DominanceStatus::Dominated => {
            let how = v.certificate.as_ref().map(|c| c.describe()).unwrap_or_else(|| "probing only".into());
            format!("Dominated, C ≈ {:.3e} ({how})", v.constant.unwrap_or(f64::NAN))
        }
        DominanceStatus::NotDominated => match &v.witness {
            Some(w) => format!("NotDominated, ratio escapes along {}", w.curve),
            None => "NotDominated".into(),
        },
        DominanceStatus::Unknown => "Unknown".into(),
    }
}

fn psd_lines(out: &mut String, psd: &PsdCheckResult, slots: &[String]) {
    for (name, v) in slots.iter().zip(&psd.diagonal_min) {
        let _ = writeln!(out, "  min f_{{{name}}} = {v:.6e}");
    }
    let last = slots.last().expect("slots");
    for (name, v) in slots.iter().zip(&psd.minor_min) {
        let _ = writeln!(out, "  min det ({name}, {last}) minor = {v:.6e}");
    }
    let _ = writeln!(out, "  min eigenvalue = {:.6e}", psd.eigen_min);
    if psd.passed {
        let _ = writeln!(out, "  PSD on {} points (tol {:e})", psd.points, psd.tolerance);
    } else {
        let _ = writeln!(out, "  NOT PSD: {} = {:.6e} at {:?}", psd.worst_quantity, psd.worst_value(), psd.worst_point);
    }
}

fn complex_slots(nz: usize) -> Vec<String> {
    let mut s: Vec<String> = if nz == 1 { vec!["z zbar".into()] } else { (1..=nz).map(|j| format!("z{j} z{j}bar")).collect() };
    s.push("w wbar".into());
    s
}

#[derive(Debug, Serialize)]
struct LeviEntry {
    j: usize,
    k: usize,
    canonical: String,
    real: String,
    at_origin: String,
}

fn levi_entries(r: &DefiningFunction) -> Vec<LeviEntry> {
    let m = levi_matrix(r);
    let mut out = Vec::new();
    for (j, row) in m.iter().enumerate() {
        for (k, l) in row.iter().enumerate().skip(j) {
            let real = if l.is_real() { real_expr(l) } else { l.to_string() };
            out.push(LeviEntry { j: j + 1, k: k + 1, canonical: l.to_string(), real, at_origin: origin_value(l).to_string() });
        }
    }
    out
}

fn levi_label(e: &LeviEntry) -> String {
    if e.j == e.k {
        format!("L(v_{})", e.j)
    } else {
        format!("L(v_{}, v_{})", e.j, e.k)
    }
}

#[derive(Debug, Serialize)]
struct AnalyzeResult {
    nz: usize,
    higher_order_part: String,
    levi: Vec<LeviEntry>,
    gradient_z_sq: String,
    minors: Vec<String>,
    strongly_pseudoconvex_at_origin: bool,
    levi_scan: LeviScan,
    levi_gate: DominanceVerdict,
}

fn analyze(c: &Common) -> Result<Outcome, CliError> {
    let (r, _) = complex_inputs(&c.r, None)?;
    let nz = r.nz();
    let input = r.poly().to_string();
    let scan = levi_scan(&r, c.radius, c.samples as usize, c.seed);
    let gate = levi_dominance_gate(&r, &ProbeFamily::standard(nz, c.seed));
    let (scan, gate) = match (scan, gate) {
        (Ok(s), Ok(g)) => (s, g),
        (Err(e), _) => return Ok(failure("analyze", Mode::Complex, input, Status::Unknown, e.to_string(), None, c.json)),
        (_, Err(e)) => return Ok(failure("analyze", Mode::Complex, input, Status::Unknown, e.to_string(), None, c.json)),
    };
    let status = if scan.negative {
        Status::Fail
    } else {
        match gate.status {
            DominanceStatus::Dominated => Status::Pass,
            DominanceStatus::NotDominated => Status::Fail,
            DominanceStatus::Unknown => Status::Unknown,
        }
    };
    if let Some(path) = &c.csv {
        let shell = sample_boundary(&r, c.radius, c.samples as usize, c.seed).map_err(|e| CliError::NormalForm(e.to_string()))?;
        complex_table(path, &r, &shell, None)?;
    }
    let result = AnalyzeResult {
        nz,
        higher_order_part: r.higher_order_part().to_string(),
        levi: levi_entries(&r),
        gradient_z_sq: gradient_z_sq(&r).to_string(),
        minors: (0..nz).map(|j| hessian_minor_det(r.poly(), j).expect("index in range").to_string()).collect(),
        strongly_pseudoconvex_at_origin: strong_psc_shortcut(&r).is_some(),
        levi_scan: scan,
        levi_gate: gate,
    };
    Ok(emit(Report::new("analyze", Mode::Complex, input, status, result), c.json, |rep| {
        let res = &rep.result;
        let mut out = format!("r = {}\nnormal form: Im w + F with F = {}\n", rep.input, res.higher_order_part);
        for e in &res.levi {
            let _ = writeln!(out, "{} = {}   (at 0: {})", levi_label(e), e.real, e.at_origin);
        }
        let _ = writeln!(out, "strongly pseudoconvex at 0: {}", if res.strongly_pseudoconvex_at_origin { "yes" } else { "no" });
        let s = &res.levi_scan;
        match &s.witness {
            Some(w) => {
                let _ = writeln!(out, "Levi scan (radius {:e}): negative value {:.3e} at {:?}", s.radius, s.min_value, w);
            }
            None => {
                let _ = writeln!(out, "Levi scan (radius {:e}, {} points): min {:.3e}, no negative values", s.radius, s.samples, s.min_value);
            }
        }
        let _ = writeln!(out, "|r_z|^2 vs Levi form: {}", verdict_line(&res.levi_gate));
        let _ = writeln!(out, "status: {:?}", rep.status);
        out
    }))
}

fn failure(command: &'static str, mode: Mode, input: String, status: Status, error: String, witness: Option<Vec<f64>>, json: bool) -> Outcome {
    let report = Report::new(command, mode, input, status, Failure { error, witness });
    emit(report, json, |rep| format!("r = {}\n{}\nstatus: {:?}\n", rep.input, rep.result.error, rep.status))
}

fn construct(a: &ConstructArgs) -> Result<Outcome, CliError> {
    let c = &a.common;
    let (r, _) = complex_inputs(&c.r, None)?;
    let input = r.poly().to_string();
    let cfg = ConstructionConfig {
        max_stages: a.max_stages,
        degree_cap: a.degree_cap,
        radius: c.radius,
        samples: c.samples as usize,
        seed: c.seed,
        max_k_exp: a.max_k_exp,
        tol: c.tol,
        bound: match a.bound {
            BoundArg::Levi => BoundKind::LeviOnly,
            BoundArg::LeviGrad => BoundKind::LeviPlusGradSq,
        },
        absorb: !a.no_absorb,
        ..ConstructionConfig::default()
    };
    let run = if r.nz() == 1 { run_construction(&r, &cfg) } else { cn_simultaneous(&r, &cfg) };
    let rep = match run {
        Ok(rep) => rep,
        Err(ConstructionError::NotPseudoconvex { witness, value }) => {
            let msg = format!("Levi form is negative ({value:.3e}); the domain is not pseudoconvex near 0");
            return Ok(failure("construct", Mode::Complex, input, Status::Obstructed, msg, Some(witness), c.json));
        }
        Err(e) => return Ok(failure("construct", Mode::Complex, input, Status::Unknown, e.to_string(), None, c.json)),
    };
    if let Some(path) = &c.csv {
        let rho = rep.final_candidate.h(&r).map(|h| &h * r.poly());
        let shell = match &rep.verification {
            Some(v) => v.shell.clone(),
            None => sample_boundary(&r, c.radius, c.samples as usize, c.seed).map_err(|e| CliError::NormalForm(e.to_string()))?,
        };
        complex_table(path, &r, &shell, rho.as_ref())?;
    }
    let status = match rep.status {
        ConstructionStatus::Certified => Status::Certified,
        ConstructionStatus::Obstructed => Status::Obstructed,
        ConstructionStatus::Exhausted => Status::Exhausted,
    };
    let nz = r.nz();
    Ok(emit(Report::new("construct", Mode::Complex, input, status, rep), c.json, |report| {
        let rep = &report.result;
        let mut out = rep.trace();
        if let Some(v) = &rep.verification {
            let _ = writeln!(out, "verification at radius {:e} ({} points), K = {}:", v.shell.radius, v.shell.count, v.k);
            psd_lines(&mut out, &v.psd, &complex_slots(nz));
            let _ = writeln!(out, "  identity deviation {:.3e} (max |lhs| {:.3e})", v.identity.max_deviation, v.identity.max_lhs);
            let _ = writeln!(out, "  min |h| = {:.6}", v.min_abs_h);
        }
        for w in &rep.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let _ = writeln!(out, "status: {:?}", report.status);
        out
    }))
}

#[derive(Debug, Serialize)]
struct VerifyResult {
    h: String,
    k: u64,
    t: String,
    t_real: String,
    shell: BoundaryShell,
    psd: PsdCheckResult,
    identity: IdentityCheck,
    necessary: Option<NecessaryReport>,
    error: Option<String>,
}

fn verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let c = &a.common;
    let (r, h) = complex_inputs(&c.r, Some(&a.h))?;
    let h = h.expect("h parsed");
    let input = r.poly().to_string();
    let nz = r.nz();
    let shell = match sample_boundary(&r, c.radius, c.samples as usize, c.seed) {
        Ok(s) => s,
        Err(e) => return Ok(failure("verify", Mode::Complex, input, Status::Unknown, e.to_string(), None, c.json)),
    };
    let k = BigRational::from_integer(a.k.into());
    let kr = r.poly().scale(&GaussianRational::real(k.clone()));
    let t = &(&h - &WPoly::one(nz)) - &kr;
    let rho = &h * r.poly();
    let psd = psd_check(&rho, &shell, c.tol);
    let identity = multiplier_identity_check(&r, &k, &t, &shell);
    let (necessary, error) = match necessary_conditions_check(&r, &h, &shell, &ProbeFamily::standard(nz, c.seed), c.tol) {
        Ok(n) => (Some(n), None),
        Err(e @ VerifyError::VanishingMultiplier { .. }) => (None, Some(e.to_string())),
        Err(e) => return Ok(failure("verify", Mode::Complex, input, Status::Unknown, e.to_string(), None, c.json)),
    };
    if let Some(path) = &c.csv {
        complex_table(path, &r, &shell, Some(&rho))?;
    }
    let nec_ok = necessary.as_ref().map(|n| n.all_hold).unwrap_or(false);
    let status = if psd.passed && identity.passed && nec_ok { Status::Pass } else { Status::Fail };
    let t_real = if t.is_real() { real_expr(&t) } else { t.to_string() };
    let result = VerifyResult { h: h.to_string(), k: a.k, t: t.to_string(), t_real, shell, psd, identity, necessary, error };
    Ok(emit(Report::new("verify", Mode::Complex, input, status, result), c.json, |rep| {
        let res = &rep.result;
        let mut out = format!("r = {}\nh = {}  (K = {}, T = {})\n", rep.input, res.h, res.k, res.t_real);
        let _ = writeln!(out, "Hessian of r·h on {} boundary points, radius {:e}:", res.shell.count, res.shell.radius);
        psd_lines(&mut out, &res.psd, &complex_slots(nz));
        let _ = writeln!(out, "identity deviation {:.3e} ({})", res.identity.max_deviation, if res.identity.passed { "ok" } else { "FAILED" });
        if let Some(n) = &res.necessary {
            for i in n.inequalities.iter().filter(|i| !i.holds) {
                let _ = writeln!(out, "necessary inequality {} (j = {}) fails: slack {:.3e} at {:?}", i.index, i.j + 1, i.min_slack, i.worst_point);
            }
            let _ = writeln!(out, "h_z r_wbar + h r_(z wbar) vs L + |r_z|^2: {}", verdict_line(&n.log_derivative));
        }
        if let Some(e) = &res.error {
            let _ = writeln!(out, "{e}");
        }
        let _ = writeln!(out, "status: {:?}", rep.status);
        out
    }))
}

#[derive(Debug, Serialize)]
struct LeviResult {
    nz: usize,
    levi: Vec<LeviEntry>,
}

fn levi(a: &LeviArgs) -> Result<Outcome, CliError> {
    let (r, _) = complex_inputs(&a.r, None)?;
    let result = LeviResult { nz: r.nz(), levi: levi_entries(&r) };
    Ok(emit(Report::new("levi", Mode::Complex, r.poly().to_string(), Status::Pass, result), a.json, |rep| {
        let mut out = String::new();
        for e in &rep.result.levi {
            let _ = writeln!(out, "{} = {}", levi_label(e), e.canonical);
            if e.real != e.canonical {
                let _ = writeln!(out, "{} = {}", " ".repeat(levi_label(e).len()), e.real);
            }
        }
        out
    }))
}

#[derive(Debug, Serialize)]
struct TangentialEntry {
    j: usize,
    form: String,
    at_origin: String,
}

fn tangential_entries(r: &RealDefiningFunction) -> Vec<TangentialEntry> {
    let names = RealPoly::convex_names(r.nvars());
    (0..r.nvars() - 1)
        .map(|j| {
            let f = r.tangential_form(j);
            let at = f.coeff(&vec![0; r.nvars()]);
            TangentialEntry { j: j + 1, form: f.to_string_with(&names), at_origin: GaussianRational::real(at).to_string() }
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct RealScan {
    radius: f64,
    samples: usize,
    min_value: f64,
    negative: bool,
    witness: Option<Vec<f64>>,
}

fn real_scan(r: &RealDefiningFunction, shell: &RealShell, tol: f64) -> RealScan {
    let forms: Vec<_> = (0..r.nvars() - 1).map(|j| r.tangential_form(j).compile()).collect();
    let mut min_value = f64::INFINITY;
    let mut witness = None;
    for p in &shell.points {
        for f in &forms {
            let v = f.eval(p);
            if v < min_value {
                min_value = v;
                if v < -tol {
                    witness = Some(p.clone());
                }
            }
        }
    }
    RealScan { radius: shell.radius, samples: shell.points.len(), min_value, negative: witness.is_some(), witness }
}

#[derive(Debug, Serialize)]
struct RealAnalyzeResult {
    nvars: usize,
    tangential: Vec<TangentialEntry>,
    convexity_scan: RealScan,
}

fn analyze_real(c: &Common) -> Result<Outcome, CliError> {
    let (r, _) = real_inputs(&c.r, None)?;
    let input = r.to_string();
    let shell = match sample_real_boundary(&r, c.radius, c.samples as usize, c.seed) {
        Ok(s) => s,
        Err(e) => return Ok(failure("analyze", Mode::Real, input, Status::Unknown, e.to_string(), None, c.json)),
    };
    let scan = real_scan(&r, &shell, c.tol);
    if let Some(path) = &c.csv {
        real_table(path, &r, &shell, None)?;
    }
    let status = if scan.negative { Status::Fail } else { Status::Pass };
    let result = RealAnalyzeResult { nvars: r.nvars(), tangential: tangential_entries(&r), convexity_scan: scan };
    Ok(emit(Report::new("analyze", Mode::Real, input, status, result), c.json, |rep| {
        let mut out = format!("r = {}\n", rep.input);
        for t in &rep.result.tangential {
            let _ = writeln!(out, "tangential Hessian along v_{} = {}   (at 0: {})", t.j, t.form, t.at_origin);
        }
        let s = &rep.result.convexity_scan;
        match &s.witness {
            Some(w) => {
                let _ = writeln!(out, "convexity scan (radius {:e}): negative value {:.3e} at {:?}", s.radius, s.min_value, w);
            }
            None => {
                let _ = writeln!(out, "convexity scan (radius {:e}, {} points): min {:.3e}", s.radius, s.samples, s.min_value);
            }
        }
        let _ = writeln!(out, "status: {:?}", rep.status);
        out
    }))
}

#[derive(Debug, Serialize)]
struct RealConfig {
    radius: f64,
    samples: usize,
    seed: u64,
    max_k_exp: u32,
    tol: f64,
}

/// Same field names as the complex candidate so both pipelines share one schema.
#[derive(Debug, Serialize)]
struct RealCandidate {
    t: String,
    t_real: String,
    k: Option<u64>,
    stage: usize,
    residual: String,
    absorbed_terms: Vec<String>,
}

#[derive(Debug, Serialize)]
struct RealVerification {
    k: u64,
    shell: RealShell,
    psd: PsdCheckResult,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct RealConstructResult {
    nvars: usize,
    config: RealConfig,
    status: ConstructionStatus,
    h: String,
    tangential_min: f64,
    #[serde(rename = "final")]
    final_candidate: RealCandidate,
    verification: Option<RealVerification>,
    /// The last PSD check of the `K` ladder when nothing certified.
    psd: PsdCheckResult,
    necessary: Vec<RealInequality>,
    /// The inequality constants are the complex ones, carried over unchanged.
    transplanted_constants: bool,
}

fn real_h(r: &RealDefiningFunction, k: u64) -> RealPoly {
    let n = r.nvars();
    let one = RealPoly::constant(n, BigRational::from_integer(1.into()));
    &(&one + &r.poly().scale(&BigRational::from_integer(k.into()))) + &r.r_y()
}

fn construct_real(a: &ConstructArgs) -> Result<Outcome, CliError> {
    let c = &a.common;
    let (r, _) = real_inputs(&c.r, None)?;
    let input = r.to_string();
    let names = RealPoly::convex_names(r.nvars());
    let shell = match sample_real_boundary(&r, c.radius, c.samples as usize, c.seed) {
        Ok(s) => s,
        Err(e) => return Ok(failure("construct", Mode::Real, input, Status::Unknown, e.to_string(), None, c.json)),
    };
    let rep = match convex_multiplier(&r, &shell, a.max_k_exp, c.tol) {
        Ok(rep) => rep,
        Err(RealConvexError::NotConvex { witness, value }) => {
            let msg = format!("tangential Hessian is negative ({value:.3e}); the domain is not convex near 0");
            return Ok(failure("construct", Mode::Real, input, Status::Obstructed, msg, Some(witness), c.json));
        }
        Err(e) => return Ok(failure("construct", Mode::Real, input, Status::Unknown, e.to_string(), None, c.json)),
    };
    let ry = r.r_y().to_string_with(&names);
    let status = if rep.certified { ConstructionStatus::Certified } else { ConstructionStatus::Exhausted };
    let necessary = rep.k.map(|k| real_necessary_conditions(&r, &real_h(&r, k), &shell, c.tol)).unwrap_or_default();
    if let Some(path) = &c.csv {
        let rho = rep.k.map(|k| r.poly() * &real_h(&r, k));
        real_table(path, &r, &shell, rho.as_ref())?;
    }
    let verification = rep.k.map(|k| RealVerification {
        k,
        shell: shell.clone(),
        psd: real_hessian_check(&(r.poly() * &real_h(&r, k)), &shell, c.tol),
        passed: rep.certified,
    });
    let result = RealConstructResult {
        nvars: r.nvars(),
        config: RealConfig { radius: c.radius, samples: c.samples as usize, seed: c.seed, max_k_exp: a.max_k_exp, tol: c.tol },
        status,
        h: rep.h.clone(),
        tangential_min: rep.tangential_min,
        final_candidate: RealCandidate { t: ry.clone(), t_real: ry, k: rep.k, stage: 0, residual: "0".into(), absorbed_terms: vec![] },
        verification,
        psd: rep.psd.clone(),
        necessary,
        transplanted_constants: true,
    };
    let cli_status = if rep.certified { Status::Certified } else { Status::Exhausted };
    let slots = RealPoly::convex_names(r.nvars());
    Ok(emit(Report::new("construct", Mode::Real, input, cli_status, result), c.json, |report| {
        let res = &report.result;
        let mut out = format!("r = {}\nT = r_y = {}\n", report.input, res.final_candidate.t);
        match res.final_candidate.k {
            Some(k) => {
                let _ = writeln!(out, "K = {k}, h = {}", res.h);
            }
            None => {
                let _ = writeln!(out, "no K ≤ 2^{} makes r·h convex on the shell", res.config.max_k_exp);
            }
        }
        let _ = writeln!(out, "Hessian of r·h on {} points, radius {:e}:", shell.count, shell.radius);
        let slots: Vec<String> = slots.iter().map(|s| format!("{s}{s}")).collect();
        psd_lines(&mut out, &res.psd, &slots);
        for i in res.necessary.iter().filter(|i| !i.holds) {
            let _ = writeln!(out, "necessary inequality {} (j = {}) fails: slack {:.3e}", i.index, i.j + 1, i.min_slack);
        }
        let _ = writeln!(out, "status: {:?}", report.status);
        out
    }))
}

#[derive(Debug, Serialize)]
struct RealVerifyResult {
    h: String,
    shell: RealShell,
    psd: PsdCheckResult,
    necessary: Vec<RealInequality>,
    transplanted_constants: bool,
}

fn verify_real(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let c = &a.common;
    let (r, h) = real_inputs(&c.r, Some(&a.h))?;
    let h = h.expect("h parsed");
    let input = r.to_string();
    let names = RealPoly::convex_names(r.nvars());
    let shell = match sample_real_boundary(&r, c.radius, c.samples as usize, c.seed) {
        Ok(s) => s,
        Err(e) => return Ok(failure("verify", Mode::Real, input, Status::Unknown, e.to_string(), None, c.json)),
    };
    let rho = r.poly() * &h;
    let psd = real_hessian_check(&rho, &shell, c.tol);
    let necessary = real_necessary_conditions(&r, &h, &shell, c.tol);
    if let Some(path) = &c.csv {
        real_table(path, &r, &shell, Some(&rho))?;
    }
    let status = if psd.passed && necessary.iter().all(|i| i.holds) { Status::Pass } else { Status::Fail };
    let result = RealVerifyResult { h: h.to_string_with(&names), shell, psd, necessary, transplanted_constants: true };
    let slots: Vec<String> = names.iter().map(|s| format!("{s}{s}")).collect();
    Ok(emit(Report::new("verify", Mode::Real, input, status, result), c.json, |rep| {
        let res = &rep.result;
        let mut out = format!("r = {}\nh = {}\n", rep.input, res.h);
        psd_lines(&mut out, &res.psd, &slots);
        for i in res.necessary.iter().filter(|i| !i.holds) {
            let _ = writeln!(out, "necessary inequality {} (j = {}) fails: slack {:.3e}", i.index, i.j + 1, i.min_slack);
        }
        let _ = writeln!(out, "status: {:?}", rep.status);
        out
    }))
}

fn levi_real(a: &LeviArgs) -> Result<Outcome, CliError> {
    let (r, _) = real_inputs(&a.r, None)?;
    #[derive(Serialize)]
    struct R {
        nvars: usize,
        tangential: Vec<TangentialEntry>,
    }
    let result = R { nvars: r.nvars(), tangential: tangential_entries(&r) };
    Ok(emit(Report::new("levi", Mode::Real, r.to_string(), Status::Pass, result), a.json, |rep| {
        rep.result.tangential.iter().map(|t| format!("L(v_{}) = {}\n", t.j, t.form)).collect()
    }))
}
