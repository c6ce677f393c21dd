//! Command implementations for the `pifix` binary.
//!
//! Every entry point returns a process exit code: 0 on success, 2 when the
//! iteration diverged, 3 for invalid flags or unusable paths, 4 when the
//! computed digits disagree with the Machin oracle.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pifix_core::{
    machin_pi, verify_theorem, BigFixed, ConvergenceReport, IterateError, IterationTrace, Run,
    RunConfig, StepRecord, Termination,
};

mod report;

pub use report::{Magnitude, OrderEntry, ReportDocument, StepEntry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

/// `--verify` defaults to `machin` up to this many digits.
pub const VERIFY_DEFAULT_LIMIT: usize = 100_000;

const DIGIT_FILE_WIDTH: usize = 80;

#[derive(Debug, Parser)]
#[command(
    name = "pifix",
    version,
    about = "Computes π by high-order fixed-point iteration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the iteration and write the digits of π.
    Compute(ComputeArgs),
    /// Check the derivative structure of S at π exactly, for P = 1..=Pmax.
    VerifyTheorem(TheoremArgs),
    /// Time full runs and print CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct ComputeArgs {
    /// Order P; the iteration converges with order 2P+1.
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Number of fractional digits wanted.
    #[arg(long)]
    digits: usize,
    #[arg(long, default_value = "3.14159265358979324")]
    x0: String,
    /// Stop once |x_n − x_{n−1}| < 10^(−E); defaults to --digits.
    #[arg(long = "epsilon-exp")]
    epsilon_exp: Option<usize>,
    /// Working digits of the first step.
    #[arg(long = "start-digits", default_value_t = 18)]
    start_digits: usize,
    #[arg(long, default_value_t = 10)]
    guard: usize,
    #[arg(long = "max-steps", default_value_t = 64)]
    max_steps: usize,
    /// Digit file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report to write.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum)]
    verify: Option<VerifyMode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Machin,
    None,
}

#[derive(Debug, Args)]
struct TheoremArgs {
    #[arg(long = "order-max")]
    order_max: usize,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated orders, e.g. `1,4`.
    #[arg(long = "order-list")]
    order_list: String,
    #[arg(long)]
    digits: usize,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Compute(a) => compute(&a, out),
        Command::VerifyTheorem(a) => theorem(&a, out),
        Command::Bench(a) => bench(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    usage(format!("cannot write {}: {e}", path.display()))
}

fn compute(args: &ComputeArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let config = compute_config(args)?;
    let digits = args.digits;
    let verify = args.verify.unwrap_or(if digits <= VERIFY_DEFAULT_LIMIT {
        VerifyMode::Machin
    } else {
        VerifyMode::None
    });

    let mut run = Run::new(config).map_err(|e| usage(e.to_string()))?;
    let mut printed = 0;
    let outcome = loop {
        let stepped = run.step();
        for record in &run.steps()[printed..] {
            let _ = writeln!(out, "{}", step_line(record));
        }
        printed = run.steps().len();
        match stepped {
            Ok(Some(_)) => break run.run_to_end(),
            Ok(None) => {}
            Err(e) => break Err(e),
        }
    };
    let trace = match outcome {
        Ok(trace) => trace,
        Err(IterateError::Diverged(trace)) => {
            let _ = writeln!(out, "diverged after {} steps", trace.steps.len());
            write_report(args, &trace, None)?;
            return Ok(EXIT_DIVERGED);
        }
        Err(e) => {
            return Err(Failure {
                code: EXIT_DIVERGED,
                message: e.to_string(),
            })
        }
    };

    let pi_ref = (verify == VerifyMode::Machin).then(|| machin_pi(digits));
    if let Some(path) = &args.out {
        fs::write(path, digit_file(&trace.final_value, digits)).map_err(|e| io_failure(path, e))?;
    }
    write_report(args, &trace, pi_ref.as_ref())?;

    if trace.terminated_by == Termination::MaxSteps {
        let _ = writeln!(
            out,
            "stopped after {} steps without reaching epsilon",
            trace.steps.len()
        );
    }
    if let Some(pi) = &pi_ref {
        let ours = digit_file(&trace.final_value, digits);
        if ours != digit_file(pi, digits) {
            let _ = writeln!(out, "verify: digits disagree with the Machin reference");
            return Ok(EXIT_MISMATCH);
        }
        let _ = writeln!(
            out,
            "verify: all {digits} digits agree with the Machin reference"
        );
    }
    Ok(EXIT_OK)
}

fn compute_config(args: &ComputeArgs) -> Result<RunConfig, Failure> {
    if args.digits == 0 {
        return Err(usage("--digits must be at least 1"));
    }
    if args.order == 0 {
        return Err(usage("--order must be at least 1"));
    }
    if args.start_digits == 0 {
        return Err(usage("--start-digits must be at least 1"));
    }
    if args.max_steps == 0 {
        return Err(usage("--max-steps must be at least 1"));
    }
    let epsilon = args.epsilon_exp.unwrap_or(args.digits);
    if epsilon == 0 || epsilon > args.digits {
        return Err(usage(format!(
            "--epsilon-exp must lie in [1, {}], got {epsilon}",
            args.digits
        )));
    }
    let x0 =
        BigFixed::parse_exact(&args.x0).map_err(|e| usage(format!("--x0 {:?}: {e}", args.x0)))?;
    let config = RunConfig {
        order: args.order,
        x0,
        target_digits: args.digits,
        epsilon_exponent: epsilon,
        start_digits: args.start_digits,
        guard_digits: args.guard,
        max_steps: args.max_steps,
    };
    config.validate().map_err(|e| usage(format!("--x0: {e}")))?;
    Ok(config)
}

fn write_report(
    args: &ComputeArgs,
    trace: &IterationTrace,
    pi_ref: Option<&BigFixed>,
) -> Result<(), Failure> {
    let Some(path) = &args.report else {
        return Ok(());
    };
    let summary = ConvergenceReport::from_trace(trace, pi_ref).map_err(|e| usage(e.to_string()))?;
    let doc = ReportDocument::new(trace, &args.x0, &summary);
    fs::write(path, doc.to_json()).map_err(|e| io_failure(path, e))
}

/// `step n  digits=<D>  |dx|=<leading>e<exp>  <ms>ms`.
pub fn step_line(record: &StepRecord) -> String {
    format!(
        "step {}  digits={}  |dx|={}  {}ms",
        record.index,
        record.working_digits.digits(),
        record.delta_display(),
        record.wall_time.as_millis()
    )
}

/// The integer part and a `.` on the first line, then the first `digits`
/// fractional digits, truncated, in lines of 80.
pub fn digit_file(value: &BigFixed, digits: usize) -> String {
    // never pad: digits the value does not carry are not known
    let kept = digits.min(value.frac_digits());
    let plain = value.round_to(kept).to_plain_string();
    let (int_part, frac_part) = plain.split_once('.').unwrap_or((plain.as_str(), ""));
    let mut text = String::with_capacity(kept + kept / DIGIT_FILE_WIDTH + int_part.len() + 4);
    text.push_str(int_part);
    text.push_str(".\n");
    for chunk in frac_part.as_bytes().chunks(DIGIT_FILE_WIDTH) {
        text.push_str(std::str::from_utf8(chunk).expect("ASCII digits"));
        text.push('\n');
    }
    text
}

/// Reads a digit file back into its fractional digit string.
pub fn read_digit_file(text: &str) -> Option<(String, String)> {
    let mut lines = text.lines();
    let int_part = lines.next()?.strip_suffix('.')?.to_string();
    let frac: String = lines.collect();
    frac.bytes()
        .all(|b| b.is_ascii_digit())
        .then_some((int_part, frac))
}

fn theorem(args: &TheoremArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    if args.order_max == 0 {
        return Err(usage("--order-max must be at least 1"));
    }
    let check = verify_theorem(args.order_max).map_err(|e| usage(e.to_string()))?;
    for detail in &check.details {
        // a = S^(k)(π) / k!, printed over k! unreduced
        let _ = writeln!(
            out,
            "P={} a{}={}/{} {}",
            detail.order,
            detail.derivative_order(),
            detail.derivative_at_pi(),
            detail.factorial(),
            if detail.passed { "PASS" } else { "FAIL" }
        );
    }
    Ok(if check.passed { EXIT_OK } else { EXIT_MISMATCH })
}

fn bench(args: &BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let orders = parse_order_list(&args.order_list)?;
    if args.digits == 0 {
        return Err(usage("--digits must be at least 1"));
    }
    if args.repeat == 0 {
        return Err(usage("--repeat must be at least 1"));
    }
    let pi = machin_pi(args.digits);
    let _ = writeln!(
        out,
        "order,digits,steps,total_ms,ms_per_step,matched_digits"
    );
    for &order in &orders {
        for _ in 0..args.repeat {
            let config = RunConfig {
                order,
                ..RunConfig::new(args.digits)
            };
            let started = Instant::now();
            let trace = match pifix_core::iterate(config) {
                Ok(trace) => trace,
                Err(IterateError::Diverged(_)) => {
                    let _ = writeln!(out, "{order},{},diverged,,,", args.digits);
                    return Ok(EXIT_DIVERGED);
                }
                Err(e) => return Err(usage(e.to_string())),
            };
            let total_ms = report::millis(started.elapsed());
            let steps = trace.steps.len();
            let matched =
                pifix_core::count_matching_digits(&trace.final_value, &pi).min(args.digits);
            let _ = writeln!(
                out,
                "{order},{},{steps},{total_ms:.3},{:.3},{matched}",
                args.digits,
                total_ms / steps.max(1) as f64
            );
        }
    }
    Ok(EXIT_OK)
}

fn parse_order_list(text: &str) -> Result<Vec<usize>, Failure> {
    let orders = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<usize>() {
            Ok(p) if p >= 1 => Ok(p),
            _ => Err(usage(format!("--order-list: {s:?} is not an order ≥ 1"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if orders.is_empty() {
        return Err(usage("--order-list must name at least one order"));
    }
    Ok(orders)
}
