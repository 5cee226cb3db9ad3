//! `dixon`: run, compare and check the Dixon-equation solvers.
//!
//! Exit codes: 0 success, 1 compare found discrepancies above `--tol` (or a
//! validation suite failed), 2 admissibility violated, 3 a method did not
//! converge, 4 I/O error, 64 usage error.

mod report;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dixon_core::driver::{uniform_grid, RunOptions, Solver, DEFAULT_NYSTROM_N};
use dixon_core::series::DEFAULT_TOL;
use dixon_core::validation::{self, Hooks, Level};
use dixon_core::{Complex64, DixonError, Method, ProblemSpec};

const EXIT_DISCREPANCY: u8 = 1;
const EXIT_ADMISSIBILITY: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "dixon",
    version,
    about = "Solvers for the generalized Dixon integral equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate f on a grid with the selected methods.
    Solve(RunArgs),
    /// Summarize how far the selected methods disagree.
    Compare(CompareArgs),
    /// Print the Laurent coefficients of the gamma function at its poles.
    Coeffs(CoeffsArgs),
    /// Run the self-check suites.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Exponent parameter a > 0.
    #[arg(long = "a")]
    a: f64,
    /// Interval end A > 0.
    #[arg(long = "A")]
    big_a: f64,
    /// Real part of the coupling.
    #[arg(long = "lambda", allow_negative_numbers = true)]
    lambda: f64,
    /// Imaginary part of the coupling.
    #[arg(
        long = "lambda-im",
        default_value_t = 0.0,
        allow_negative_numbers = true
    )]
    lambda_im: f64,
    /// `all` or a comma-separated subset of nystrom, picard, mellin, series.
    #[arg(long, default_value = "all")]
    methods: String,
    /// Uniform grid `N:lo:hi`.
    #[arg(long, conflicts_with = "points")]
    grid: Option<String>,
    /// Explicit points `x1,x2,...`.
    #[arg(long)]
    points: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(
        long = "sigma-interior",
        default_value_t = 0.5,
        allow_negative_numbers = true
    )]
    sigma_interior: f64,
    #[arg(long = "sigma-exterior")]
    sigma_exterior: Option<f64>,
    /// Neumann orders for the series (default: from the tolerance).
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    /// Deepest pole index for the series.
    #[arg(long = "m-max")]
    m_max: Option<usize>,
    #[arg(long = "nystrom-n", default_value_t = DEFAULT_NYSTROM_N)]
    nystrom_n: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    output: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Gauss-Jacobi nodes for the residual check.
    #[arg(long = "residual-quad", default_value_t = 512)]
    residual_quad: usize,
    /// Check points for the residual.
    #[arg(long = "residual-points", default_value_t = 41)]
    residual_points: usize,
}

#[derive(Args, Debug)]
struct CoeffsArgs {
    #[arg(long = "m-max")]
    m_max: usize,
    #[arg(long = "k-max")]
    k_max: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    output: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, default_value = "quick")]
    level: String,
    /// Test hook: scale Laurent coefficient c_{k,m} by 1 + rel, as `k:m:rel`.
    #[arg(long = "corrupt-laurent")]
    corrupt_laurent: Option<String>,
    /// Run only this suite.
    #[arg(long)]
    suite: Option<String>,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    fn io(path: &str, e: io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("cannot write {path}: {e}"),
        }
    }
}

impl From<DixonError> for Failure {
    fn from(e: DixonError) -> Self {
        let code = match &e {
            DixonError::Inadmissible { .. } => EXIT_ADMISSIBILITY,
            DixonError::Domain(_) | DixonError::Range(_) | DixonError::Size(_) => EXIT_USAGE,
            _ => EXIT_NONCONVERGENCE,
        };
        let message = match &e {
            DixonError::Inadmissible { sigma, bound, lambda_abs } => format!(
                "coupling not admissible: |lambda| = {lambda_abs} must be below the bound {bound:.10} (at sigma = {sigma})"
            ),
            _ => e.to_string(),
        };
        Self { code, message }
    }
}

pub type CliResult<T> = Result<T, Failure>;

fn parse_methods(s: &str) -> CliResult<Vec<Method>> {
    if s.trim() == "all" {
        return Ok(Method::ALL.to_vec());
    }
    let ms = s
        .split(',')
        .map(|p| p.parse::<Method>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::usage(e.to_string()))?;
    if ms.is_empty() {
        return Err(Failure::usage("no methods given"));
    }
    Ok(ms)
}

fn parse_f64(s: &str, what: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Failure::usage(format!("cannot read {what} from {s:?}")))
}

fn parse_points(args: &RunArgs) -> CliResult<Vec<f64>> {
    let mut xs = match (&args.grid, &args.points) {
        (Some(g), None) => {
            let parts: Vec<&str> = g.split(':').collect();
            if parts.len() != 3 {
                return Err(Failure::usage(format!("--grid needs N:lo:hi, got {g:?}")));
            }
            let n = parts[0]
                .trim()
                .parse::<usize>()
                .map_err(|_| Failure::usage(format!("bad point count in --grid {g:?}")))?;
            uniform_grid(
                n,
                parse_f64(parts[1], "grid start")?,
                parse_f64(parts[2], "grid end")?,
            )?
        }
        (None, Some(p)) => p
            .split(',')
            .map(|v| parse_f64(v, "point"))
            .collect::<CliResult<Vec<_>>>()?,
        (None, None) => uniform_grid(21, 0.0, args.big_a)?,
        (Some(_), Some(_)) => return Err(Failure::usage("give --grid or --points, not both")),
    };
    if xs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Failure::usage("points must be finite and >= 0"));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    Ok(xs)
}

/// Everything `solve` and `compare` share.
pub struct Prepared {
    pub args: RunArgs,
    pub spec: ProblemSpec,
    pub options: RunOptions,
    pub xs: Vec<f64>,
}

fn prepare(args: &RunArgs) -> CliResult<Prepared> {
    let spec = ProblemSpec::new(
        args.a,
        args.big_a,
        Complex64::new(args.lambda, args.lambda_im),
    )?;
    let options = RunOptions {
        tol: args.tol,
        sigma_interior: args.sigma_interior,
        sigma_exterior: args.sigma_exterior,
        n_max: args.n_max,
        m_max: args.m_max,
        nystrom_n: args.nystrom_n,
        ..RunOptions::default()
    }
    .with_methods(&parse_methods(&args.methods)?);
    let xs = parse_points(args)?;
    Ok(Prepared {
        args: args.clone(),
        spec,
        options,
        xs,
    })
}

fn emit(out: &Option<PathBuf>, body: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, body).map_err(|e| Failure::io(&p.display().to_string(), e)),
        None => {
            let mut so = io::stdout().lock();
            so.write_all(body.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| Failure::io("standard output", e))
        }
    }
}

fn cmd_solve(args: &RunArgs) -> CliResult<u8> {
    let p = prepare(args)?;
    let solver = Solver::new(&p.spec, &p.options)?;
    let run = solver.run(&p.xs)?;
    let body = match args.output {
        Format::Csv => report::solve_csv(&run)?,
        Format::Json => report::solve_json(&p, &solver, &run)?,
    };
    emit(&args.out, &body)?;
    Ok(0)
}

fn cmd_compare(args: &CompareArgs) -> CliResult<u8> {
    let p = prepare(&args.run)?;
    if p.options.methods.len() < 2 {
        return Err(Failure::usage("compare needs at least two methods"));
    }
    let solver = Solver::new(&p.spec, &p.options)?;
    let run = solver.run(&p.xs)?;
    let mut residuals = Vec::new();
    for &m in &p.options.methods {
        residuals.push((
            m,
            solver.residual(m, args.residual_quad, args.residual_points),
        ));
    }
    let fa = solver.fa_report()?;
    let summary = report::Summary::new(&p, &solver, &run, residuals, fa);
    let body = match args.run.output {
        Format::Csv => summary.text(),
        Format::Json => summary.json()?,
    };
    emit(&args.run.out, &body)?;
    Ok(if summary.all_within_tol() {
        0
    } else {
        EXIT_DISCREPANCY
    })
}

fn cmd_coeffs(args: &CoeffsArgs) -> CliResult<u8> {
    if args.m_max > 40 || args.k_max > 40 {
        return Err(Failure::usage(format!(
            "coeffs needs m_max, k_max <= 40, got ({}, {})",
            args.m_max, args.k_max
        )));
    }
    let body = report::coeffs(args.m_max, args.k_max, args.output)?;
    emit(&args.out, &body)?;
    Ok(0)
}

fn cmd_validate(args: &ValidateArgs) -> CliResult<u8> {
    let level: Level = args.level.parse()?;
    let mut hooks = Hooks::default();
    if let Some(spec) = &args.corrupt_laurent {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Failure::usage(format!("--corrupt-laurent needs k:m:rel, got {spec:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let k = parts[0].parse::<usize>().map_err(|_| bad())?;
        let m = parts[1].parse::<usize>().map_err(|_| bad())?;
        let rel = parts[2].parse::<f64>().map_err(|_| bad())?;
        hooks.laurent_perturbation = Some((k, m, rel));
    }
    let reports = match &args.suite {
        Some(s) => vec![validation::run_suite(s, level, &hooks)?],
        None => validation::run_all(level, &hooks),
    };
    let mut out = String::new();
    let mut all = true;
    for r in &reports {
        let ok = r.passed();
        all &= ok;
        out += &format!(
            "{} {} ({:.2} s)\n",
            if ok { "PASS" } else { "FAIL" },
            r.name,
            r.seconds
        );
        if let Some(e) = &r.error {
            out += &format!("    error: {e}\n");
        }
        for c in &r.checks {
            let rel = if c.lower { ">=" } else { "<=" };
            out += &format!(
                "    [{}] {}: {:.3e} {rel} {:.1e}\n",
                if c.passed { "ok" } else { "!!" },
                c.label,
                c.value,
                c.limit
            );
        }
    }
    emit(&None, &out)?;
    Ok(if all { 0 } else { EXIT_DISCREPANCY })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let r = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Coeffs(a) => cmd_coeffs(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("dixon: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
