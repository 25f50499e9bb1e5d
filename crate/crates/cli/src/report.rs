use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use refined_young::{CsvRow, Family, FuzzReport, TightnessReport};
use serde::{Deserialize, Serialize};

use crate::args::Format;

/// The JSON document written by `verify`, `fuzz` and `tightness`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema: u32,
    pub verb: String,
    pub passed: bool,
    pub violations: u64,
    pub dominance_violations: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<FuzzReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tightness: Vec<TightnessReport>,
}

impl Document {
    pub fn runs(verb: &str, reports: Vec<FuzzReport>) -> Self {
        Document {
            schema: refined_young::fuzz::REPORT_SCHEMA,
            verb: verb.into(),
            passed: reports.iter().all(FuzzReport::passed),
            violations: reports.iter().map(|r| r.violations).sum(),
            dominance_violations: reports.iter().map(|r| r.dominance_violations).sum(),
            reports,
            tightness: Vec::new(),
        }
    }

    pub fn tightness(reports: Vec<TightnessReport>) -> Self {
        let dominance_violations = reports.iter().map(|r| r.dominance_violations).sum();
        Document {
            schema: refined_young::fuzz::REPORT_SCHEMA,
            verb: "tightness".into(),
            passed: dominance_violations == 0,
            violations: 0,
            dominance_violations,
            reports: Vec::new(),
            tightness: reports,
        }
    }
}

#[derive(Debug, Serialize)]
struct TightnessCsvRow<'a> {
    family: Family,
    check: &'a str,
    evaluations: u64,
    violations: u64,
    min: Option<f64>,
    p10: Option<f64>,
    p50: Option<f64>,
    p90: Option<f64>,
    max: Option<f64>,
    best_v: Option<f64>,
    best_h: Option<f64>,
    best_slack: Option<f64>,
}

fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_document(
    doc: &Document,
    rows: &[CsvRow],
    format: Format,
    out: Option<&Path>,
) -> io::Result<()> {
    let mut w = sink(out)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, doc)?;
            writeln!(w)?;
        }
        Format::Csv if doc.tightness.is_empty() => {
            let mut c = csv::Writer::from_writer(&mut w);
            if rows.is_empty() {
                c.write_record(CSV_COLUMNS).map_err(csv_err)?;
            }
            for row in rows {
                c.serialize(row).map_err(csv_err)?;
            }
            c.flush()?;
        }
        Format::Csv => {
            let mut c = csv::Writer::from_writer(&mut w);
            for t in &doc.tightness {
                for row in &t.rows {
                    let q = row.quantiles;
                    let best = row.max_improvement.as_ref();
                    c.serialize(TightnessCsvRow {
                        family: t.config.family,
                        check: &row.check,
                        evaluations: row.evaluations,
                        violations: row.violations,
                        min: q.map(|q| q.min),
                        p10: q.map(|q| q.p10),
                        p50: q.map(|q| q.p50),
                        p90: q.map(|q| q.p90),
                        max: q.map(|q| q.max),
                        best_v: best.map(|b| b.v),
                        best_h: best.map(|b| b.h),
                        best_slack: best.map(|b| b.slack),
                    })
                    .map_err(csv_err)?;
                }
            }
            c.flush()?;
        }
    }
    w.flush()
}

/// Column order of the per-evaluation CSV.
pub const CSV_COLUMNS: [&str; 11] = [
    "family", "theorem", "branch", "n", "v", "h", "lhs", "rhs", "slack", "seed", "trial",
];

pub fn summary(r: &FuzzReport) -> String {
    let mut s = format!(
        "{}: trials={} evaluations={} violations={} dominance_violations={}",
        r.config.family, r.trials_run, r.evaluations, r.violations, r.dominance_violations
    );
    if r.config.mutation != refined_young::Mutation::None {
        s += &format!(" mutation={}", r.config.mutation);
    }
    if let Some(w) = &r.worst {
        s += &format!(
            " worst={} relative_slack={:.3e} (trial {}, v={}, n={})",
            w.check, w.relative_slack, w.trial, w.v, w.n
        );
    }
    s
}
