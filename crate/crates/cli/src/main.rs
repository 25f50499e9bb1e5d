mod args;
mod eval;
mod input;
mod report;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use refined_young::fuzz::fuzz_run_with_rows;
use refined_young::{fuzz_run, tightness_report, Family, FuzzConfig, FuzzReport, Mutation};

use args::{Cli, Command, EvalCommand, FamilyArg, Format, RunArgs};
use report::{summary, write_document, Document};

const USAGE_ERROR: i32 = 2;

fn config(run: &RunArgs, family: Family, mutation: Mutation) -> Result<FuzzConfig, String> {
    let mut cfg = FuzzConfig::for_family(family);
    cfg.seed = run.seed;
    cfg.mutation = mutation;
    if let Some(t) = run.trials {
        cfg.trials = t;
    }
    if let (Some(d), true) = (&run.dims, family != Family::Scalar) {
        cfg.dims = d.clone();
    }
    if let Some(t) = run.tol {
        cfg.tol_rel = t;
    }
    if let Some(t) = run.dominance_tol {
        cfg.dominance_tol = t;
    }
    if let (Some(g), Family::Operator) = (run.gap, family) {
        cfg.sandwich_gap = g;
    }
    match run.range.as_deref() {
        None => {}
        Some(&[lo, hi]) => cfg.spectrum_range = (lo, hi),
        Some(_) => return Err("--range takes two values lo,hi".into()),
    }
    cfg.validate().map_err(|e| format!("{family}: {e}"))?;
    Ok(cfg)
}

fn families(run: &RunArgs, mutation: Mutation) -> Vec<Family> {
    if mutation != Mutation::None && run.family == FamilyArg::All {
        vec![mutation.family()]
    } else {
        run.family.families()
    }
}

fn run_suites(verb: &str, run: &RunArgs, mutation: Mutation) -> Result<i32, String> {
    let configs = families(run, mutation)
        .into_iter()
        .map(|f| config(run, f, mutation))
        .collect::<Result<Vec<_>, _>>()?;
    let mut reports: Vec<FuzzReport> = Vec::new();
    let mut rows = Vec::new();
    for cfg in &configs {
        if run.format == Format::Csv {
            let (r, mut more) = fuzz_run_with_rows(cfg).map_err(|e| e.to_string())?;
            rows.append(&mut more);
            reports.push(r);
        } else {
            reports.push(fuzz_run(cfg).map_err(|e| e.to_string())?);
        }
    }
    let doc = Document::runs(verb, reports);
    emit(&doc, &rows, run)?;
    let mut log = log_stream(run);
    for r in &doc.reports {
        let _ = writeln!(log, "{}", summary(r));
    }
    Ok(if doc.passed { 0 } else { 1 })
}

fn tightness(run: &RunArgs) -> Result<i32, String> {
    let reports = families(run, Mutation::None)
        .into_iter()
        .map(|f| {
            let cfg = config(run, f, Mutation::None)?;
            tightness_report(&cfg).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let doc = Document::tightness(reports);
    emit(&doc, &[], run)?;
    let mut log = log_stream(run);
    for t in &doc.tightness {
        for row in &t.rows {
            let best = row.max_improvement.as_ref();
            let _ = writeln!(
                log,
                "{}: {} evaluations={} violations={} median_relative_margin={:.3e} max_margin={:.5} at v={:.5} h={:.5}",
                t.config.family,
                row.check,
                row.evaluations,
                row.violations,
                row.quantiles.map_or(f64::NAN, |q| q.p50),
                best.map_or(f64::NAN, |b| b.slack),
                best.map_or(f64::NAN, |b| b.v),
                best.map_or(f64::NAN, |b| b.h),
            );
        }
    }
    Ok(if doc.passed { 0 } else { 1 })
}

/// Summaries go to stdout when the report goes to a file, else to stderr.
fn log_stream(run: &RunArgs) -> Box<dyn Write> {
    if run.out.is_some() {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    }
}

fn emit(doc: &Document, rows: &[refined_young::CsvRow], run: &RunArgs) -> Result<(), String> {
    write_document(doc, rows, run.format, run.out.as_deref()).map_err(|e| match &run.out {
        Some(p) => format!("{}: {e}", p.display()),
        None => e.to_string(),
    })
}

fn check(path: &std::path::Path) -> Result<i32, String> {
    let origin = path.display();
    let text = fs::read_to_string(path).map_err(|e| format!("{origin}: cannot read: {e}"))?;
    let doc: Document =
        serde_json::from_str(&text).map_err(|e| format!("{origin}: not a report: {e}"))?;
    if doc.schema != refined_young::fuzz::REPORT_SCHEMA {
        return Err(format!("{origin}: unsupported schema {}", doc.schema));
    }
    let verdict = |p: bool| if p { "pass" } else { "fail" };
    let mut all_match = true;
    let mut out = io::stdout().lock();
    for r in &doc.reports {
        let again = fuzz_run(&r.config).map_err(|e| e.to_string())?;
        let same = again.passed() == r.passed()
            && again.violations == r.violations
            && again.dominance_violations == r.dominance_violations
            && again.evaluations == r.evaluations;
        all_match &= same;
        let _ = writeln!(
            out,
            "{}: recorded={} rerun={} {}",
            r.config.family,
            verdict(r.passed()),
            verdict(again.passed()),
            if same { "match" } else { "MISMATCH" }
        );
    }
    for t in &doc.tightness {
        let again = tightness_report(&t.config).map_err(|e| e.to_string())?;
        let same = again.dominance_violations == t.dominance_violations
            && again.rows.len() == t.rows.len()
            && again
                .rows
                .iter()
                .zip(&t.rows)
                .all(|(a, b)| a.violations == b.violations);
        all_match &= same;
        let _ = writeln!(
            out,
            "{} tightness: recorded={} rerun={} {}",
            t.config.family,
            verdict(t.dominance_violations == 0),
            verdict(again.dominance_violations == 0),
            if same { "match" } else { "MISMATCH" }
        );
    }
    Ok(if all_match { 0 } else { 1 })
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    let stdout = io::stdout().lock();
    match cli.command {
        Command::Verify(run) => run_suites("verify", &run, Mutation::None),
        Command::Fuzz { run, mutation } => run_suites("fuzz", &run, mutation),
        Command::Tightness(run) => tightness(&run),
        Command::Eval(EvalCommand::Scalar { a, b, v }) => eval::scalar(a, b, v, stdout),
        Command::Eval(EvalCommand::Operator {
            a_file,
            b_file,
            v,
            sandwich,
            tol,
        }) => eval::operator(&a_file, &b_file, v, sandwich.as_deref(), tol, stdout),
        Command::Eval(EvalCommand::Hs {
            a_file,
            b_file,
            x_file,
            v,
            tol,
        }) => eval::hs(&a_file, &b_file, &x_file, v, tol, stdout),
        Command::Check { report } => check(&report),
    }
}

/// Parses `argv` and runs the command, returning the process exit status:
/// 0 when every inequality holds, 1 when one is violated, 2 on usage or
/// domain errors.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            USAGE_ERROR
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(parse_and_dispatch(std::env::args_os()) as u8)
}
