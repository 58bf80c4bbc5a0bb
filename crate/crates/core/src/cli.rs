//! The `gensecant` command line.
//!
//! ```text
//! gensecant solve --problem cubic --k 2
//! gensecant solve --function "z^2+1" --z0 0.5i --z1 0.6i --k 1 --format csv
//! gensecant reproduce --table 1
//! gensecant order-table --k-max 7
//! gensecant sweep --problem cubic --k 1,2,3 --format csv
//! ```
//!
//! Exit codes: 0 on success (for `solve`, only when the run converged),
//! 1 on usage errors, 2 when `solve` does not converge.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::expr::{lookup, parse, Problem};
use crate::order::{asymptotic_error_constant, order_of_method};
use crate::report::reference::{
    compare, reference_table, render_comparison_csv, render_comparison_table,
};
use crate::report::{build_report, d_format, full, render, Format, IterationRecord};
use crate::solver::{iterate, SolverConfig, SolverTrace, Status, Z1Policy};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;

/// Parses `a`, `bi`, `a+bi` or `a-bi` (no spaces; `i` alone means `1i`).
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let bad = || format!("invalid complex number '{s}' (expected a, bi, a+bi or a-bi)");
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(bad());
    }
    let real = |t: &str| -> Result<f64, String> {
        let first = t.chars().next();
        // Rust also accepts "inf"/"nan"; only plain decimal literals are allowed.
        if !matches!(first, Some(c) if c.is_ascii_digit() || c == '.' || c == '+' || c == '-') {
            return Err(bad());
        }
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(bad()),
        }
    };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(real(s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&p| matches!(bytes[p], b'+' | b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(p) => (real(&body[..p])?, &body[p..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => real(t)?,
    };
    Ok(Complex64::new(re, im))
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    parse_complex(s)
}

fn start_arg(s: &str) -> Result<(Complex64, Complex64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("invalid start '{s}' (expected z0,z1)"))?;
    Ok((parse_complex(a)?, parse_complex(b)?))
}

#[derive(Debug, Parser)]
#[command(
    name = "gensecant",
    version,
    about = "Generalized secant method for complex roots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve f(z) = 0 for a built-in problem or an expression.
    Solve(SolveArgs),
    /// Re-run a reference k = 2 example and compare row by row.
    Reproduce(ReproduceArgs),
    /// Print the theoretical order s_k and its bounds.
    OrderTable(OrderTableArgs),
    /// Solve one problem for several k and starting pairs.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Brin,
    Steffensen,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Target {
    /// Built-in problem name (cubic, trig).
    #[arg(long)]
    problem: Option<String>,
    /// Expression in z, e.g. "z^3-8".
    #[arg(long, allow_hyphen_values = true)]
    function: Option<String>,
}

#[derive(Debug, Args)]
struct Tolerances {
    #[arg(long, default_value_t = SolverConfig::DEFAULT_TOL)]
    tol_residual: f64,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_TOL)]
    tol_step: f64,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
    /// Write to FILE instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    z0: Option<Complex64>,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, conflicts_with = "z1_policy")]
    z1: Option<Complex64>,
    #[arg(long, value_enum)]
    z1_policy: Option<PolicyArg>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[command(flatten)]
    tolerances: Tolerances,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    #[arg(long)]
    table: u8,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct OrderTableArgs {
    #[arg(long, default_value_t = 7)]
    k_max: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    target: Target,
    /// Comma-separated memory depths.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// Starting pair "z0,z1"; repeatable. Defaults to the problem's suggested start.
    #[arg(long = "start", value_parser = start_arg, allow_hyphen_values = true)]
    starts: Vec<(Complex64, Complex64)>,
    #[command(flatten)]
    tolerances: Tolerances,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

struct UsageError(String);

impl From<String> for UsageError {
    fn from(s: String) -> Self {
        UsageError(s)
    }
}

/// Entry point shared by the binary and the tests.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Reproduce(a) => cmd_reproduce(a),
        Command::OrderTable(a) => cmd_order_table(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok((bytes, destination, code)) => match emit(&bytes, destination.as_deref(), out) {
            Ok(()) => code,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_USAGE
            }
        },
        Err(UsageError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn emit(
    bytes: &[u8],
    destination: Option<&std::path::Path>,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    match destination {
        Some(path) => std::fs::write(path, bytes),
        None => out.write_all(bytes),
    }
}

type CmdResult = Result<(Vec<u8>, Option<PathBuf>, u8), UsageError>;

fn resolve_target(target: &Target) -> Result<Problem, UsageError> {
    if let Some(name) = &target.problem {
        return lookup(name).ok_or_else(|| UsageError(format!("unknown problem '{name}'")));
    }
    let src = target.function.as_deref().unwrap_or_default();
    let expr = parse(src).map_err(|e| UsageError(format!("cannot parse function: {e}")))?;
    Ok(Problem::from_expression("function", expr))
}

fn config_for(k: usize, z0: Complex64, z1: Z1Policy, tol: &Tolerances) -> SolverConfig {
    let mut cfg = SolverConfig::new(k, z0, z1).with_tolerances(tol.tol_residual, tol.tol_step);
    cfg.max_iter = tol.max_iter;
    cfg
}

fn reference_root(problem: &Problem, trace: &SolverTrace) -> Option<Complex64> {
    problem.nearest_root(trace.last())
}

fn cmd_solve(args: SolveArgs) -> CmdResult {
    let problem = resolve_target(&args.target)?;
    let suggested = problem.suggested_start;
    let z0 = args
        .z0
        .or(suggested.map(|s| s.0))
        .ok_or_else(|| "--z0 is required for --function".to_string())?;
    let z1 = match (args.z1, args.z1_policy) {
        (Some(z1), _) => Z1Policy::Given(z1),
        (None, Some(PolicyArg::Brin)) => Z1Policy::Brin,
        (None, Some(PolicyArg::Steffensen)) => Z1Policy::Steffensen,
        (None, None) => match suggested {
            Some((s0, s1)) if args.z0.is_none() || args.z0 == Some(s0) => Z1Policy::Given(s1),
            _ => return Err("give --z1 or --z1-policy".to_string().into()),
        },
    };
    let cfg = config_for(args.k, z0, z1, &args.tolerances);
    let trace = iterate(&problem, &cfg).map_err(|e| UsageError(e.to_string()))?;
    let root = reference_root(&problem, &trace);
    let records = build_report(&trace, root, args.k);
    let format = Format::from(args.output.format);
    let mut bytes = render(&records, format);
    if format == Format::Table {
        bytes.extend(solve_summary(&problem, &trace, root, args.k).into_bytes());
    }
    let code = if trace.status == Status::Converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    };
    Ok((bytes, args.output.out, code))
}

fn solve_summary(
    problem: &Problem,
    trace: &SolverTrace,
    root: Option<Complex64>,
    k: usize,
) -> String {
    let info = order_of_method(k);
    let last = trace.last();
    let mut s = format!(
        "\nstatus: {}\niterations: {}\nf evaluations: {}\nlast iterate: {}\ntheoretical order s_{k}: {:.6}\n",
        trace.status,
        trace.iterates.len() - 1,
        trace.evaluations,
        complex_text(last, full),
        info.order,
    );
    if let Some(alpha) = root {
        s.push_str(&format!(
            "nearest known root: {}\n",
            complex_text(alpha, full)
        ));
        let derivs = problem
            .derivative(1, alpha)
            .zip(problem.derivative(k + 1, alpha));
        if let Some((d1, dk1)) = derivs {
            if let Ok(l) = asymptotic_error_constant(d1, dk1, k) {
                s.push_str(&format!(
                    "error constant L: {}\n",
                    complex_text(l, d_format)
                ));
            }
        }
    }
    s
}

fn complex_text(z: Complex64, fmt: fn(f64) -> String) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{} {sign} {}i", fmt(z.re), fmt(z.im.abs()))
}

fn cmd_reproduce(args: ReproduceArgs) -> CmdResult {
    let table = reference_table(args.table)
        .ok_or_else(|| format!("unknown table {} (expected 1 or 2)", args.table))?;
    let problem = lookup(table.problem).expect("reference problems are built in");
    let cfg = SolverConfig::new(table.k, table.z0, Z1Policy::Given(table.z1));
    let trace = iterate(&problem, &cfg).map_err(|e| UsageError(e.to_string()))?;
    let records = build_report(&trace, Some(table.root), table.k);
    let rows = compare(&table, &records);
    let bytes = match args.output.format {
        FormatArg::Table => {
            let mut s = format!(
                "problem {} with k = {}, z0 = {}, z1 = {}; root {}\n\n",
                table.problem, table.k, table.z0, table.z1, table.root
            );
            s.push_str(&render_comparison_table(&rows));
            let disagreements = rows.iter().filter(|r| r.any_disagreement()).count();
            s.push_str(&format!(
                "\n{} of {} rows disagree; rows marked excluded are beyond binary64 resolution\n",
                disagreements,
                rows.len()
            ));
            s.into_bytes()
        }
        FormatArg::Csv => render_comparison_csv(&rows),
        FormatArg::Jsonl => render(&records, Format::Jsonl),
    };
    Ok((bytes, args.output.out, EXIT_OK))
}

#[derive(Serialize)]
struct OrderRow {
    k: usize,
    order: f64,
    lower_bound: f64,
    upper_bound: f64,
    efficiency_index: f64,
}

fn cmd_order_table(args: OrderTableArgs) -> CmdResult {
    if args.k_max < 1 {
        return Err("--k-max must be at least 1".to_string().into());
    }
    let rows: Vec<OrderRow> = (1..=args.k_max)
        .map(order_of_method)
        .map(|i| OrderRow {
            k: i.k,
            order: i.order,
            lower_bound: i.lower_bound,
            upper_bound: i.upper_bound,
            efficiency_index: i.efficiency_index(),
        })
        .collect();
    let bytes = match args.output.format {
        FormatArg::Table => {
            let mut s = format!(
                "{:>3}  {:>6}  {:>18}  {:>18}  {:>18}\n",
                "k", "s_k", "s_k (full)", "2-2^(-k-1)e", "2-2^(-k-1)"
            );
            for r in &rows {
                s.push_str(&format!(
                    "{:>3}  {:>6.3}  {:>18.15}  {:>18.15}  {:>18.15}\n",
                    r.k, r.order, r.order, r.lower_bound, r.upper_bound
                ));
            }
            s.into_bytes()
        }
        FormatArg::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "k",
                "order",
                "lower_bound",
                "upper_bound",
                "efficiency_index",
            ])
            .expect("in-memory write");
            for r in &rows {
                w.write_record([
                    r.k.to_string(),
                    full(r.order),
                    full(r.lower_bound),
                    full(r.upper_bound),
                    full(r.efficiency_index),
                ])
                .expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
        FormatArg::Jsonl => jsonl(&rows),
    };
    Ok((bytes, args.output.out, EXIT_OK))
}

fn jsonl<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r).expect("in-memory write");
        out.push(b'\n');
    }
    out
}

/// One sweep run summary.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub start: usize,
    pub z0: [f64; 2],
    pub z1: [f64; 2],
    pub status: Status,
    pub iterations: usize,
    pub last: [f64; 2],
    pub abs_eps: Option<f64>,
    /// Last order estimate not flagged unavailable.
    pub order_est: Option<f64>,
    pub theoretical_order: f64,
}

/// The last order estimate a report could compute, if any.
pub fn best_order_estimate(records: &[IterationRecord]) -> Option<f64> {
    records.iter().rev().find_map(|r| r.order_est)
}

pub fn sweep(
    problem: &Problem,
    ks: &[usize],
    starts: &[(Complex64, Complex64)],
    base: &SolverConfig,
) -> Vec<SweepRow> {
    let mut jobs: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| (0..starts.len()).map(move |s| (k, s)))
        .collect();
    jobs.sort_unstable();
    jobs.dedup();
    jobs.par_iter()
        .map(|&(k, s)| {
            let (z0, z1) = starts[s];
            let mut cfg = base.clone();
            cfg.k = k;
            cfg.z0 = z0;
            cfg.z1 = Z1Policy::Given(z1);
            cfg.max_iter = cfg.max_iter.max(k + 1);
            let trace = iterate(problem, &cfg).ok();
            let (status, iterations, last, records) = match &trace {
                Some(t) => {
                    let root = reference_root(problem, t);
                    (
                        t.status,
                        t.iterates.len() - 1,
                        t.last(),
                        build_report(t, root, k),
                    )
                }
                None => (Status::Stagnated, 0, z0, Vec::new()),
            };
            SweepRow {
                k,
                start: s,
                z0: [z0.re, z0.im],
                z1: [z1.re, z1.im],
                status,
                iterations,
                last: [last.re, last.im],
                abs_eps: records.last().and_then(|r| r.abs_eps),
                order_est: best_order_estimate(&records),
                theoretical_order: order_of_method(k).order,
            }
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let problem = resolve_target(&args.target)?;
    if args.k.is_empty() {
        return Err("--k needs at least one value".to_string().into());
    }
    if args.k.contains(&0) {
        return Err("k must be at least 1".to_string().into());
    }
    let starts = if args.starts.is_empty() {
        vec![problem
            .suggested_start
            .ok_or_else(|| "--start is required for --function".to_string())?]
    } else {
        args.starts
    };
    if let Some((z0, _)) = starts.iter().find(|(a, b)| a == b) {
        return Err(format!("start pair has z0 = z1 = {z0}").into());
    }
    let base = config_for(
        1,
        starts[0].0,
        Z1Policy::Given(starts[0].1),
        &args.tolerances,
    );
    let probe = SolverConfig {
        max_iter: base.max_iter.max(2),
        ..base.clone()
    };
    probe.validate().map_err(|e| UsageError(e.to_string()))?;
    let rows = sweep(&problem, &args.k, &starts, &base);
    let opt = |x: Option<f64>| x.map(full).unwrap_or_default();
    let bytes = match args.format {
        FormatArg::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "k",
                "start",
                "re_z0",
                "im_z0",
                "re_z1",
                "im_z1",
                "status",
                "iterations",
                "re_last",
                "im_last",
                "abs_eps",
                "order_est",
                "theoretical_order",
            ])
            .expect("in-memory write");
            for r in &rows {
                w.write_record([
                    r.k.to_string(),
                    r.start.to_string(),
                    full(r.z0[0]),
                    full(r.z0[1]),
                    full(r.z1[0]),
                    full(r.z1[1]),
                    r.status.to_string(),
                    r.iterations.to_string(),
                    full(r.last[0]),
                    full(r.last[1]),
                    opt(r.abs_eps),
                    opt(r.order_est),
                    full(r.theoretical_order),
                ])
                .expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
        FormatArg::Jsonl => jsonl(&rows),
        FormatArg::Table => {
            let mut s = format!(
                "{:>3}  {:>5}  {:>18}  {:>10}  {:>9}  {:>6}  {:>6}\n",
                "k", "start", "status", "iterations", "|eps_N|", "order", "s_k"
            );
            for r in &rows {
                s.push_str(&format!(
                    "{:>3}  {:>5}  {:>18}  {:>10}  {:>9}  {:>6}  {:>6.3}\n",
                    r.k,
                    r.start,
                    r.status.to_string(),
                    r.iterations,
                    r.abs_eps.map(d_format).unwrap_or_else(|| "-".into()),
                    r.order_est
                        .map(|o| format!("{o:.3}"))
                        .unwrap_or_else(|| "-".into()),
                    r.theoretical_order
                ));
            }
            s.into_bytes()
        }
    };
    Ok((bytes, args.out, EXIT_OK))
}
