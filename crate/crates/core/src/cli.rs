//! Command-line front end.
//!
//! Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 usage or
//! configuration error, 3 a numerical verdict was inconclusive. Errors are
//! written to stderr as one JSON object.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::beta::{beta_curve, certify_theorem, BetaStatus, CertifyStatus};
use crate::config::{load_specs, parse_list, FunctionSpec, GridSpec, KernelSpec, OutputFormat, PsiSpec, RunConfig};
use crate::error::Error;
use crate::gls::{gls_norm, GeneratingFunction, GlsStatus, TestFunction};
use crate::quadrature::QuadratureConfig;
use crate::tail::{tail_bound_with_norm, tail_check};
use crate::theta::{dm_scan, theta, ExponentVector, Membership};
use crate::verify::{check_inequality, sharpness_probe, CheckStatus};
use crate::Kernel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "glsop", version, about = "Sharp constants, Grand Lebesgue norms and multilinear operator bounds")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_evals: Option<usize>,
    #[arg(long, global = true)]
    pub level_cap: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Accept parsed kernels without the homogeneity check.
    #[arg(long, global = true)]
    pub unchecked: bool,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Θ_m(p⃗) at one exponent vector or over a grid.
    Theta {
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        p: Option<String>,
        /// Per-coordinate grid (start:stop:step or list), used on every axis.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Membership in D_m over a grid, with the open-box check.
    DmScan {
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        grid: Option<String>,
    },
    /// ‖f‖_{Gψ}.
    GlsNorm {
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        psi: Option<String>,
    },
    /// β(p) on a grid.
    Beta {
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        norms: Option<String>,
        #[arg(long)]
        p_grid: Option<String>,
    },
    /// ‖M(f⃗)‖_p ≤ β(p) at every grid point with finite β.
    Certify {
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        p_grid: Option<String>,
    },
    /// Young–Fenchel tail bounds, checked against f when given.
    Tail {
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        t: Option<String>,
    },
    /// ‖M(f⃗)‖_p ≤ Θ_m(p⃗) ∏ ‖f_j‖_{p_j}.
    Verify {
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        p: Option<String>,
    },
    /// Ratios on the near-extremal family against Θ_m(p⃗).
    Sharpness {
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        eps: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Theta { .. } => "theta",
            Command::DmScan { .. } => "dm-scan",
            Command::GlsNorm { .. } => "gls-norm",
            Command::Beta { .. } => "beta",
            Command::Certify { .. } => "certify",
            Command::Tail { .. } => "tail",
            Command::Verify { .. } => "verify",
            Command::Sharpness { .. } => "sharpness",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
    Empty,
}

fn num_text(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => num_text(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(num_text(*v)),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

fn text(s: &str) -> Cell {
    Cell::Text(s.to_string())
}

/// One subcommand's result table.
struct Report {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    summary: Vec<(String, String)>,
    exit: i32,
}

impl Report {
    fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new(), summary: Vec::new(), exit: EXIT_OK }
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    fn worsen(&mut self, code: i32) {
        // a failed check outranks an inconclusive one
        self.exit = match (self.exit, code) {
            (EXIT_FAIL, _) | (_, EXIT_FAIL) => EXIT_FAIL,
            (a, b) => a.max(b),
        };
    }

    fn render(&self, command: &str, format: OutputFormat) -> Result<Vec<u8>, Error> {
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Config(format!("writing CSV: {e}"));
                w.write_record(&self.columns).map_err(io)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
                }
                let mut out = w.into_inner().map_err(|e| Error::Config(format!("writing CSV: {e}")))?;
                for (k, v) in &self.summary {
                    out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
                }
                Ok(out)
            }
            OutputFormat::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect::<Map<_, _>>()))
                    .collect();
                let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
                let doc = json!({"command": command, "columns": self.columns, "rows": rows, "summary": summary, "exit_code": self.exit});
                let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| Error::Config(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SharpnessViolation { .. } => EXIT_FAIL,
        Error::Unsupported(_) => EXIT_INCONCLUSIVE,
        _ => EXIT_USAGE,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::UnknownFamily(_) => "unknown_family",
        Error::Arity(_) => "arity",
        Error::ParamCount { .. } => "param_count",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Parse(_) => "parse",
        Error::HomogeneityGate => "homogeneity_gate",
        Error::AllSamplesNonFinite => "all_samples_non_finite",
        Error::InvalidExponent(_) => "invalid_exponent",
        Error::Config(_) => "config",
        Error::WeightExponent(_) => "weight_exponent",
        Error::Dimension(_) => "dimension",
        Error::GeneratingFunction(_) => "generating_function",
        Error::TestFunction(_) => "test_function",
        Error::TailBelowE(_) => "tail_below_e",
        Error::TailNorm(_) => "tail_norm",
        Error::Unsupported(_) => "unsupported",
        Error::SharpnessViolation { .. } => "sharpness_violation",
    }
}

fn report_error(err: &mut dyn Write, kind: &str, message: &str, code: i32) -> i32 {
    let doc = json!({"error": {"kind": kind, "message": message}, "exit_code": code});
    let _ = writeln!(err, "{doc}");
    code
}

/// Run with explicit streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(out, "{}", e.render());
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { EXIT_USAGE } else { EXIT_OK };
            }
            return report_error(err, "usage", e.render().to_string().trim(), EXIT_USAGE);
        }
    };
    if let Err(e) = configure_threads() {
        return report_error(err, error_kind(&e), &e.to_string(), exit_code(&e));
    }
    match execute(&cli) {
        Ok((report, run)) => {
            let format = run.format.unwrap_or_default();
            let bytes = match report.render(cli.command.name(), format) {
                Ok(b) => b,
                Err(e) => return report_error(err, error_kind(&e), &e.to_string(), EXIT_USAGE),
            };
            let written = match &run.out {
                Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("cannot write `{}`: {e}", path.display())),
                None => out.write_all(&bytes).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => report.exit,
                Err(msg) => report_error(err, "io", &msg, EXIT_USAGE),
            }
        }
        Err(e) => report_error(err, error_kind(&e), &e.to_string(), exit_code(&e)),
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// GLSOP_THREADS caps the worker pool.
fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("GLSOP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("GLSOP_THREADS must be a positive integer, got `{raw}`")))?;
    // only the first call in a process can size the global pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Flags layered over the optional config file.
fn merged(cli: &Cli) -> Result<RunConfig, Error> {
    let mut run = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read `{}`: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    let c = &cli.common;
    run.rel_tol = c.rel_tol.or(run.rel_tol);
    run.abs_tol = c.abs_tol.or(run.abs_tol);
    run.max_evals = c.max_evals.or(run.max_evals);
    run.level_cap = c.level_cap.or(run.level_cap);
    run.seed = c.seed.or(run.seed);
    run.out = c.out.clone().or(run.out);
    run.format = c.format.or(run.format);
    if c.unchecked {
        run.unchecked = Some(true);
    }
    let kernel = |s: &Option<String>, run: &mut RunConfig| -> Result<(), Error> {
        if let Some(s) = s {
            let mut ks: Vec<KernelSpec> = load_specs(s)?;
            if ks.len() != 1 {
                return Err(Error::Config(format!("expected one kernel spec, got {}", ks.len())));
            }
            run.kernel = ks.pop();
        }
        Ok(())
    };
    let psi = |s: &Option<String>, run: &mut RunConfig| -> Result<(), Error> {
        if let Some(s) = s {
            run.psi = Some(load_specs::<PsiSpec>(s)?);
        }
        Ok(())
    };
    let f = |s: &Option<String>, run: &mut RunConfig| -> Result<(), Error> {
        if let Some(s) = s {
            run.f = Some(load_specs::<FunctionSpec>(s)?);
        }
        Ok(())
    };
    let list = |s: &Option<String>| s.as_deref().map(parse_list).transpose();
    match &cli.command {
        Command::Theta { kernel: k, p, grid } => {
            kernel(k, &mut run)?;
            run.p = list(p)?.or(run.p);
            run.grid = grid.clone().map(GridSpec::Range).or(run.grid);
        }
        Command::DmScan { kernel: k, grid } => {
            kernel(k, &mut run)?;
            run.grid = grid.clone().map(GridSpec::Range).or(run.grid);
        }
        Command::GlsNorm { f: fs, psi: ps } => {
            f(fs, &mut run)?;
            psi(ps, &mut run)?;
        }
        Command::Beta { kernel: k, psi: ps, norms, p_grid } => {
            kernel(k, &mut run)?;
            psi(ps, &mut run)?;
            run.norms = list(norms)?.or(run.norms);
            run.p_grid = p_grid.clone().map(GridSpec::Range).or(run.p_grid);
        }
        Command::Certify { kernel: k, f: fs, psi: ps, p_grid } => {
            kernel(k, &mut run)?;
            f(fs, &mut run)?;
            psi(ps, &mut run)?;
            run.p_grid = p_grid.clone().map(GridSpec::Range).or(run.p_grid);
        }
        Command::Tail { psi: ps, f: fs, t } => {
            psi(ps, &mut run)?;
            f(fs, &mut run)?;
            run.t = list(t)?.or(run.t);
        }
        Command::Verify { kernel: k, f: fs, p } => {
            kernel(k, &mut run)?;
            f(fs, &mut run)?;
            run.p = list(p)?.or(run.p);
        }
        Command::Sharpness { kernel: k, p, eps } => {
            kernel(k, &mut run)?;
            run.p = list(p)?.or(run.p);
            run.eps = list(eps)?.or(run.eps);
        }
    }
    Ok(run)
}

fn missing(what: &str) -> Error {
    Error::Config(format!("missing {what}"))
}

fn exponents(run: &RunConfig) -> Result<ExponentVector<f64>, Error> {
    ExponentVector::new(run.p.clone().ok_or_else(|| missing("--p"))?)
}

fn build_kernel(run: &RunConfig, m: Option<usize>, cfg: &QuadratureConfig) -> Result<(Kernel, Option<f64>), Error> {
    let spec = run.kernel.as_ref().ok_or_else(|| missing("--kernel"))?;
    let built = spec.build(m, run.unchecked.unwrap_or(false), cfg.seed)?;
    Ok((built.kernel, built.gate_violation))
}

fn build_psis(run: &RunConfig) -> Result<Vec<GeneratingFunction<f64>>, Error> {
    run.psi.as_ref().ok_or_else(|| missing("--psi"))?.iter().map(PsiSpec::build).collect()
}

fn build_fs(run: &RunConfig) -> Result<Vec<TestFunction<f64>>, Error> {
    run.f.as_ref().ok_or_else(|| missing("--f"))?.iter().map(FunctionSpec::build).collect()
}

fn grid_of(g: &Option<GridSpec>, flag: &str) -> Result<Vec<f64>, Error> {
    let v = g.as_ref().ok_or_else(|| missing(flag))?.values()?;
    if v.is_empty() {
        return Err(Error::Config(format!("{flag} is empty")));
    }
    Ok(v)
}

fn p_columns(prefix: &str, m: usize, suffix: &str) -> Vec<String> {
    (1..=m).map(|j| format!("{prefix}{j}{suffix}")).collect()
}

fn membership_exit(m: Membership) -> i32 {
    if m == Membership::Unknown {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn execute(cli: &Cli) -> Result<(Report, RunConfig), Error> {
    let run = merged(cli)?;
    let cfg = run.quadrature()?;
    let report = match &cli.command {
        Command::Theta { .. } => cmd_theta(&run, &cfg)?,
        Command::DmScan { .. } => cmd_dm_scan(&run, &cfg)?,
        Command::GlsNorm { .. } => cmd_gls_norm(&run, &cfg)?,
        Command::Beta { .. } => cmd_beta(&run, &cfg)?,
        Command::Certify { .. } => cmd_certify(&run, &cfg)?,
        Command::Tail { .. } => cmd_tail(&run, &cfg)?,
        Command::Verify { .. } => cmd_verify(&run, &cfg)?,
        Command::Sharpness { .. } => cmd_sharpness(&run, &cfg)?,
    };
    Ok((report, run))
}

fn note_kernel(r: &mut Report, run: &RunConfig, k: &Kernel, gate: Option<f64>) {
    let name = match &run.kernel {
        Some(KernelSpec::Expr { expr, .. }) => expr.clone(),
        _ => k.family().map_or("custom", |f| f.name()).to_string(),
    };
    r.note("kernel", name);
    r.note("m", k.arity());
    if let Some(v) = gate {
        r.note("homogeneity_defect", num_text(v));
    }
}

fn cmd_theta(run: &RunConfig, cfg: &QuadratureConfig) -> Result<Report, Error> {
    if let Some(g) = &run.grid {
        let values = g.values()?;
        let (k, gate) = build_kernel(run, run.p.as_ref().map(Vec::len), cfg)?;
        let m = k.arity();
        let scan = dm_scan(&k, &vec![values; m], cfg)?;
        let mut r = Report::new([p_columns("p", m, ""), vec!["theta".into(), "abs_err".into(), "membership".into()]].concat());
        note_kernel(&mut r, run, &k, gate);
        for (p, th) in &scan.points {
            let mut row: Vec<Cell> = p.iter().map(|&v| Cell::Num(v)).collect();
            row.extend([Cell::Num(th.theta), Cell::Num(th.abs_error()), text(th.membership.as_str())]);
            r.rows.push(row);
            r.worsen(membership_exit(th.membership));
        }
        return Ok(r);
    }
    let p = exponents(run)?;
    let (k, gate) = build_kernel(run, Some(p.arity()), cfg)?;
    let th = theta(&k, &p, cfg)?;
    let m = p.arity();
    let mut r = Report::new([p_columns("p", m, ""), vec!["theta".into(), "abs_err".into(), "membership".into()]].concat());
    note_kernel(&mut r, run, &k, gate);
    r.note("resultant", num_text(p.resultant()));
    let mut row: Vec<Cell> = p.as_slice().iter().map(|&v| Cell::Num(v)).collect();
    row.extend([Cell::Num(th.theta), Cell::Num(th.abs_error()), text(th.membership.as_str())]);
    r.rows.push(row);
    r.worsen(membership_exit(th.membership));
    Ok(r)
}

fn cmd_dm_scan(run: &RunConfig, cfg: &QuadratureConfig) -> Result<Report, Error> {
    let values = grid_of(&run.grid, "--grid")?;
    let (k, gate) = build_kernel(run, None, cfg)?;
    let m = k.arity();
    let scan = dm_scan(&k, &vec![values; m], cfg)?;
    let mut r = Report::new([p_columns("p", m, ""), vec!["membership".into(), "theta".into()]].concat());
    note_kernel(&mut r, run, &k, gate);
    let inside = scan.points.iter().filter(|(_, t)| t.membership == Membership::InDm).count();
    for (p, th) in &scan.points {
        let mut row: Vec<Cell> = p.iter().map(|&v| Cell::Num(v)).collect();
        row.extend([text(th.membership.as_str()), Cell::Num(th.theta)]);
        r.rows.push(row);
        r.worsen(membership_exit(th.membership));
    }
    r.note("in_dm", inside);
    r.note("points", scan.points.len());
    r.note("open_box", scan.open_box);
    Ok(r)
}

/// Pairs specs positionally, repeating a single one.
fn broadcast<'a, A, B>(a: &'a [A], b: &'a [B]) -> Result<Vec<(&'a A, &'a B)>, Error> {
    let n = a.len().max(b.len());
    if !(a.len() == n || a.len() == 1) || !(b.len() == n || b.len() == 1) || n == 0 {
        return Err(Error::Dimension(format!("cannot pair {} functions with {} generating functions", a.len(), b.len())));
    }
    Ok((0..n).map(|i| (&a[i.min(a.len() - 1)], &b[i.min(b.len() - 1)])).collect())
}

fn cmd_gls_norm(run: &RunConfig, cfg: &QuadratureConfig) -> Result<Report, Error> {
    let fs = build_fs(run)?;
    let psis = build_psis(run)?;
    let mut r = Report::new(vec!["index".into(), "gls_norm".into(), "argmax".into(), "status".into()]);
    for (i, (f, psi)) in broadcast(&fs, &psis)?.into_iter().enumerate() {
        let n = gls_norm(f, psi, cfg)?;
        r.rows.push(vec![Cell::Text((i + 1).to_string()), Cell::Num(n.value), Cell::Num(n.argmax), text(n.status.as_str())]);
        if matches!(n.status, GlsStatus::Inconclusive | GlsStatus::Capped) {
            r.worsen(EXIT_INCONCLUSIVE);
        }
    }
    Ok(r)
}

/// Arity implied by per-coordinate specs; a single spec is repeated instead.
fn implied_arity(n: usize) -> Option<usize> {
    (n != 1).then_some(n)
}

fn repeat_to<T: Clone>(mut v: Vec<T>, m: usize) -> Vec<T> {
    if v.len() == 1 && m > 1 {
        v = vec![v[0].clone(); m];
    }
    v
}

fn cmd_beta(run: &RunConfig, cfg: &QuadratureConfig) -> Result<Report, Error> {
    let psis = build_psis(run)?;
    let (k, gate) = build_kernel(run, implied_arity(psis.len()), cfg)?;
    let m = k.arity();
    let psis = repeat_to(psis, m);
    let norms = run.norms.clone().unwrap_or_else(|| vec![1.0; m]);
    let grid = grid_of(&run.p_grid, "--p-grid")?;
    let curve = beta_curve(&k, &psis, &norms, &grid, cfg)?;
    let mut r = Report::new([vec!["p".into(), "beta".into()], p_columns("p", m, "*"), vec!["status".into()]].concat());
    note_kernel(&mut r, run, &k, gate);
    for s in &curve.samples {
        let mut row = vec![Cell::Num(s.p), Cell::Num(s.value)];
        row.extend((0..m).map(|j| s.argmin.get(j).map_or(Cell::Empty, |&v| Cell::Num(v))));
        row.push(text(s.status.as_str()));
        r.rows.push(row);
        if s.status == BetaStatus::Inconclusive {
            r.worsen(EXIT_INCONCLUSIVE);
        }
    }
    r.note("norms", norms.iter().map(|&v| num_text(v)).collect::<Vec<_>>().join(","));
    match curve.finiteness_interval {
        Some((a, b)) => r.note("finiteness_interval", format!("{},{}", num_text(a), num_text(b))),
        None => r.note("finiteness_interval", "none"),
    }
    r.note("contiguous", curve.contiguous);
    Ok(r)
}

fn cmd_certify(run: &RunConfig, cfg: &QuadratureConfig) -> Result<Report, Error> {
    let fs = build_fs(run)?;
    let psis = build_psis(run)?;
    let (k, gate) = build_kernel(run, implied_arity(fs.len().max(psis.len())), cfg)?;
    let (fs, psis) = (repeat_to(fs, k.arity()), repeat_to(psis, k.arity()));
    let grid = grid_of(&run.p_grid, "--p-grid")?;
    let rep = certify_theorem(&k, &fs, &psis, &grid, cfg)?;
    let mut r = Report::new(vec!["p".into(), "beta".into(), "lhs".into(), "lhs_err".into(), "status".into()]);
    note_kernel(&mut r, run, &k, gate);
    for row in &rep.rows {
        let (lhs, err) = if row.status == CertifyStatus::Unconstrained { (Cell::Empty, Cell::Empty) } else { (Cell::Num(row.lhs), Cell::Num(row.lhs_err)) };
        r.rows.push(vec![Cell::Num(row.p), Cell::Num(row.beta), lhs, err, text(row.status.as_str())]);
    }
    r.note("norms", rep.norms.iter().map(|&v| num_text(v)).collect::<Vec<_>>().join(","));
    r.note("constrained_points", rep.constrained_points());
    r.note("status", rep.status.as_str());
    r.worsen(match rep.status {
        CertifyStatus::Fail => EXIT_FAIL,
        CertifyStatus::Unknown => EXIT_INCONCLUSIVE,
        _ => EXIT_OK,
    });
    Ok(r)
}

fn cmd_tail(run: &RunConfig, cfg: &QuadratureConfig) -> Result<Report, Error> {
    let psis = build_psis(run)?;
    let [psi] = &psis[..] else {
        return Err(Error::Config(format!("tail takes one ψ, got {}", psis.len())));
    };
    let ts = run.t.clone().ok_or_else(|| missing("--t"))?;
    if let Some(&t) = ts.iter().find(|&&t| !(t >= std::f64::consts::E)) {
        return Err(Error::TailBelowE(t));
    }
    match &run.f {
        None => {
            let mut r = Report::new(vec!["t".into(), "bound".into()]);
            let mut capped = false;
            for &t in &ts {
                let b = tail_bound_with_norm(psi, 1.0, t)?;
                capped |= b.h_star.capped;
                r.rows.push(vec![Cell::Num(t), Cell::Num(b.bound)]);
            }
            r.note("capped", capped);
            Ok(r)
        }
        Some(_) => {
            let fs = build_fs(run)?;
            let [f] = &fs[..] else {
                return Err(Error::Config(format!("tail takes one function, got {}", fs.len())));
            };
            let rep = tail_check(f, psi, &ts, cfg)?;
            let mut r = Report::new(vec!["t".into(), "bound".into(), "measured_tail".into(), "pass".into()]);
            for row in &rep.rows {
                r.rows.push(vec![Cell::Num(row.t), Cell::Num(row.bound), Cell::Num(row.measured_tail), Cell::Bool(row.pass)]);
            }
            r.note("gls_norm", num_text(rep.norm));
            r.note("pass", rep.pass);
            if !rep.pass {
                r.worsen(EXIT_FAIL);
            }
            Ok(r)
        }
    }
}

fn cmd_verify(run: &RunConfig, cfg: &QuadratureConfig) -> Result<Report, Error> {
    let p = exponents(run)?;
    let fs = repeat_to(build_fs(run)?, p.arity());
    let (k, gate) = build_kernel(run, Some(p.arity()), cfg)?;
    let rep = check_inequality(&k, &fs, &p, cfg)?;
    let mut r = Report::new(["lhs", "lhs_err", "rhs", "rhs_err", "margin", "status"].map(String::from).to_vec());
    note_kernel(&mut r, run, &k, gate);
    r.note("resultant", num_text(p.resultant()));
    r.rows.push(vec![
        Cell::Num(rep.lhs),
        Cell::Num(rep.lhs_err),
        Cell::Num(rep.rhs),
        Cell::Num(rep.rhs_err),
        Cell::Num(rep.margin),
        text(rep.status.as_str()),
    ]);
    r.worsen(match rep.status {
        CheckStatus::Pass => EXIT_OK,
        CheckStatus::Fail => EXIT_FAIL,
        CheckStatus::Vacuous | CheckStatus::Unknown => EXIT_INCONCLUSIVE,
    });
    Ok(r)
}

pub const DEFAULT_EPS: [f64; 3] = [0.1, 0.03, 0.01];

fn cmd_sharpness(run: &RunConfig, cfg: &QuadratureConfig) -> Result<Report, Error> {
    let p = exponents(run)?;
    let (k, gate) = build_kernel(run, Some(p.arity()), cfg)?;
    let eps = run.eps.clone().unwrap_or_else(|| DEFAULT_EPS.to_vec());
    let probe = sharpness_probe(&k, &p, &eps, cfg)?;
    let mut r = Report::new(vec!["eps".into(), "ratio".into(), "ratio_err".into()]);
    note_kernel(&mut r, run, &k, gate);
    for ((&e, &ratio), &err) in probe.eps.iter().zip(&probe.ratios).zip(&probe.ratio_errs) {
        r.rows.push(vec![Cell::Num(e), Cell::Num(ratio), Cell::Num(err)]);
    }
    r.note("target", num_text(probe.target));
    r.note("extrapolated", num_text(probe.extrapolated));
    r.note("relative_gap", num_text((probe.extrapolated - probe.target).abs() / probe.target));
    r.note("gamma", num_text(probe.gamma));
    r.note("fit_residual", num_text(probe.fit_residual));
    r.note("monotone", probe.monotone);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("glsop").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn theta_row_is_pi() {
        let (code, out, _) = run_capture(&["theta", "--kernel", r#"{"family":"hilbert","m":2}"#, "--p", "2,2"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("p1,p2,theta,abs_err,membership"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        let v: f64 = row[2].parse().unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-7);
        assert_eq!(row[4], "in_Dm");
        // 17 significant digits
        assert_eq!(row[2].split('e').next().unwrap().len(), 18);
    }

    #[test]
    fn arity_one_is_a_usage_error() {
        let (code, _, err) = run_capture(&["theta", "--p", "2"]);
        assert_eq!(code, EXIT_USAGE);
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"]["kind"], "arity");
        assert!(v["error"]["message"].as_str().unwrap().contains("m ≥ 2 required"));
    }

    #[test]
    fn vacuous_verify_exits_inconclusive() {
        let (code, out, _) = run_capture(&[
            "verify",
            "--kernel",
            r#"{"family":"hardy","m":2}"#,
            "--f",
            r#"[{"family":"indicator","hi":1},{"family":"indicator","hi":1}]"#,
            "--p",
            "1,2",
        ]);
        assert_eq!(code, EXIT_INCONCLUSIVE);
        assert!(out.contains("vacuous"));
    }

    #[test]
    fn bad_flags_and_specs() {
        assert_eq!(run_capture(&["theta", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["theta", "--kernel", r#"{"family":"hilbert","x":1}"#, "--p", "2,2"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["tail", "--psi", r#"{"family":"extremal","r":2}"#, "--t", "2,3"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["theta", "--kernel", r#"{"expr":"1/(1+x1+x2)^2"}"#, "--p", "2,2"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn json_output_and_summary() {
        let (code, out, _) = run_capture(&["--format", "json", "tail", "--psi", r#"{"family":"extremal","r":2}"#, "--t", "3,10"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!((v["rows"][1]["bound"].as_f64().unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(v["summary"]["capped"], "false");
        let (_, csv, _) = run_capture(&["tail", "--psi", r#"{"family":"extremal","r":2}"#, "--t", "3,10"]);
        assert!(csv.ends_with("# capped=false\n"));
    }
}
