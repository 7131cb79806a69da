#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gseries_core::figures::format_value;
use gseries_core::reductions::chebyshev_grid;
use gseries_core::{
    bessel_solution, damped_solution, eval_calculus, eval_power_series, figure_table, gfn,
    nonlinear_yyppp_solution, polycoeff_solution, riccati_solution, run_validation, Family,
    FigureSpec, GFunctionKind, ODESystem, OracleError, PolyCoeff, ReducedSolution, ReductionError,
    SeriesError, SummationPolicy,
};

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNDEFINED: u8 = 3;
const EXIT_CONDITIONING: u8 = 4;
const EXIT_IO: u8 = 5;
const EXIT_RESIDUAL: u8 = 6;

#[derive(Parser)]
#[command(
    name = "gseries",
    version,
    about = "Generalized exponential, trigonometric and hyperbolic functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one function (or a term-wise derivative) at a point.
    Eval(EvalArgs),
    /// Write the data table of figure 1..8 as CSV.
    Figure(FigureArgs),
    /// Solve a reduced equation and report its residual on a grid.
    Solve(SolveArgs),
    /// Run the validation checks and write a JSON report.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// ge, gc, gs, ghc or ghs
    #[arg(long)]
    kind: String,
    #[arg(long, allow_hyphen_values = true)]
    n: f64,
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    /// Relative stopping tolerance of the summation.
    #[arg(long)]
    tol: Option<f64>,
    /// Term-wise derivative order; negative values integrate.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    derivative: i32,
}

#[derive(Args)]
struct FigureArgs {
    id: u32,
    /// CSV destination; the truncation metadata goes to `<out>.meta.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Equation {
    Bessel,
    Riccati,
    Damped,
    Nonlinear,
    Polycoeff,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(value_enum)]
    equation: Equation,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    m: f64,
    #[arg(long = "A", default_value_t = 1.0, allow_hyphen_values = true)]
    a: f64,
    #[arg(long = "B", default_value_t = 0.0, allow_hyphen_values = true)]
    b: f64,
    #[arg(long = "C", default_value_t = 0.0, allow_hyphen_values = true)]
    c: f64,
    /// Damping term as `A:p,B:q,...` (sum of A x^p).
    #[arg(long = "R", default_value = "0", allow_hyphen_values = true)]
    r: String,
    /// Coefficient of `y'' + f y = 0` as `A:p,B:q,...`.
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long, default_value_t = 1)]
    branch: u32,
    /// Number of Taylor terms for polycoeff.
    #[arg(long, default_value_t = 80)]
    terms: usize,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    /// Number of Chebyshev grid points.
    #[arg(long, default_value_t = 33)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated check names.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Divides every tolerance; values below 1 loosen the checks.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Self::new(EXIT_IO, format!("IoError: {}: {e}", path.display()))
    }
}

impl From<SeriesError> for Failure {
    fn from(e: SeriesError) -> Self {
        let code = match e {
            SeriesError::EulerDegenerate { .. } | SeriesError::UndefinedOrder { .. } => {
                EXIT_UNDEFINED
            }
            SeriesError::CancellationLoss { .. }
            | SeriesError::NoConvergence { .. }
            | SeriesError::Overflow { .. } => EXIT_CONDITIONING,
            _ => EXIT_USAGE,
        };
        Self::new(code, e.to_string())
    }
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Series(s) | ReductionError::Oracle(OracleError::Series(s)) => s.into(),
            ReductionError::PoleAtEvaluation { .. } => Self::new(EXIT_CONDITIONING, e.to_string()),
            ReductionError::Oracle(OracleError::ConditioningAbort { .. }) => {
                Self::new(EXIT_CONDITIONING, e.to_string())
            }
            _ => Self::new(EXIT_USAGE, e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Figure(a) => cmd_figure(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn policy(tol: Option<f64>) -> Result<SummationPolicy, Failure> {
    let mut p = SummationPolicy::default();
    if let Ok(raw) = std::env::var("GSERIES_MAX_TERMS") {
        let n: usize = raw.trim().parse().map_err(|_| {
            Failure::new(
                EXIT_USAGE,
                format!("GSERIES_MAX_TERMS = `{raw}` is not a count"),
            )
        })?;
        p = p.with_max_terms(n)?;
    }
    if let Some(t) = tol {
        p = p.with_rel_tol(t)?;
    }
    Ok(p)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::io(path, e)),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

fn cmd_eval(a: EvalArgs) -> Result<(), Failure> {
    let family: Family = a
        .kind
        .parse()
        .map_err(|e: String| Failure::new(EXIT_USAGE, e))?;
    let p = policy(a.tol)?;
    let spec = gfn(GFunctionKind::new(family, a.n))?;
    let r = eval_calculus(&spec, a.derivative, a.x, &p)?;
    println!("value={}", r.value);
    println!("terms_used={}", r.terms_used);
    println!("cancellation_factor={:e}", r.cancellation_factor);
    Ok(())
}

fn cmd_figure(a: FigureArgs) -> Result<(), Failure> {
    let usage = |e: gseries_core::figures::FigureError| Failure::new(EXIT_USAGE, e.to_string());
    let mut spec = FigureSpec::get(a.id).map_err(usage)?;
    if a.x_min.is_some() || a.x_max.is_some() {
        let (lo, hi) = spec.x_range;
        spec = spec
            .with_range(a.x_min.unwrap_or(lo), a.x_max.unwrap_or(hi))
            .map_err(usage)?;
    }
    if let Some(n) = a.samples {
        spec = spec.with_samples(n).map_err(usage)?;
    }
    let table = figure_table(&spec, &policy(None)?).map_err(|e| match e {
        gseries_core::figures::FigureError::Series(s) => s.into(),
        other => usage(other),
    })?;
    let meta = serde_json::to_string(&table).expect("figure metadata serializes");
    write_output(a.out.as_deref(), &table.to_csv())?;
    match &a.out {
        Some(path) => {
            let mut meta_path = path.clone().into_os_string();
            meta_path.push(".meta.json");
            let meta_path = PathBuf::from(meta_path);
            fs::write(&meta_path, format!("{meta}\n")).map_err(|e| Failure::io(&meta_path, e))?;
        }
        None => eprintln!("{meta}"),
    }
    Ok(())
}

enum Solved {
    Reduced(ReducedSolution),
    Taylor {
        series: gseries_core::PowerSeries,
        system: ODESystem,
        interval: (f64, f64),
    },
}

const TAYLOR_TOLERANCE: f64 = 1e-8;

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let p = policy(None)?;
    let parse_poly = |s: &str| -> Result<PolyCoeff, Failure> {
        s.parse()
            .map_err(|e: gseries_core::PolyError| Failure::new(EXIT_USAGE, e.to_string()))
    };
    let solved = match a.equation {
        Equation::Bessel => {
            let nu =
                a.nu.ok_or_else(|| Failure::new(EXIT_USAGE, "bessel needs --nu"))?;
            Solved::Reduced(bessel_solution(nu, a.a, a.b)?)
        }
        Equation::Riccati => Solved::Reduced(riccati_solution(a.m, a.a, a.b)?),
        Equation::Damped => Solved::Reduced(damped_solution(&parse_poly(&a.r)?, a.m, a.a, a.b)?),
        Equation::Nonlinear => Solved::Reduced(nonlinear_yyppp_solution(a.m, a.a, a.b, a.c)?),
        Equation::Polycoeff => {
            let f = parse_poly(
                a.f.as_deref()
                    .ok_or_else(|| Failure::new(EXIT_USAGE, "polycoeff needs --f"))?,
            )?;
            Solved::Taylor {
                series: polycoeff_solution(&f, a.branch, a.terms)?,
                system: ODESystem::with_coefficient(f),
                interval: (0.0, 2.0),
            }
        }
    };
    if a.points < 1 {
        return Err(Failure::new(EXIT_USAGE, "--points must be at least 1"));
    }
    let default_interval = match &solved {
        Solved::Reduced(s) => s.interval(),
        Solved::Taylor { interval, .. } => *interval,
    };
    let lo = a.x_min.unwrap_or(default_interval.0);
    let hi = a.x_max.unwrap_or(default_interval.1);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Failure::new(
            EXIT_USAGE,
            format!("invalid interval [{lo}, {hi}]"),
        ));
    }
    let grid = chebyshev_grid(lo, hi, a.points);

    let mut rows = Vec::with_capacity(grid.len());
    let tolerance = match &solved {
        Solved::Reduced(s) => {
            let s = s.clone().with_policy(p).with_interval(lo, hi);
            for &x in &grid {
                rows.push((x, s.eval(x)?, s.residual(x)?));
            }
            s.tolerance()
        }
        Solved::Taylor { series, system, .. } => {
            for &x in &grid {
                let y = eval_power_series(series, x, &p)?.value;
                let r =
                    gseries_core::residual(series, system, &[x]).map_err(ReductionError::from)?;
                rows.push((x, y, r));
            }
            TAYLOR_TOLERANCE
        }
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "residual"])
        .expect("in-memory write");
    for (x, y, r) in &rows {
        w.write_record([format_value(*x), format_value(*y), format_value(*r)])
            .expect("in-memory write");
    }
    let mut text =
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output");
    let (max_residual, worst_x) = rows.iter().fold((0.0f64, lo), |acc, &(x, _, r)| {
        if r.abs() > acc.0 {
            (r.abs(), x)
        } else {
            acc
        }
    });
    text.push_str(&format!(
        "# max_residual={},worst_x={},tolerance={}\n",
        format_value(max_residual),
        format_value(worst_x),
        format_value(tolerance)
    ));
    write_output(a.out.as_deref(), &text)?;
    if !(max_residual <= tolerance) {
        return Err(Failure::new(
            EXIT_RESIDUAL,
            format!("ResidualTooLarge: max residual {max_residual:e} at x = {worst_x} exceeds {tolerance:e}"),
        ));
    }
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> Result<(), Failure> {
    let report = run_validation(&a.only, a.tol_scale)
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_output(a.out.as_deref(), &format!("{json}\n"))?;
    for c in &report.checks {
        eprintln!(
            "{} {}: measured {:e}, tolerance {:e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance
        );
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::new(EXIT_FAILED_CHECK, "validation failed"))
    }
}
