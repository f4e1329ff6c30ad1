//! Report and CSV serialization.

use std::fmt::Write;

use serde::Serialize;

use psop_core::classify::{ErgodicReport, Verdict};
use psop_core::laurent::{FunctionToeplitz, LaurentCoeffs};
use psop_core::operators::{fmt_sci, OperatorSpec, OrbitRecord};
use psop_core::verify::SuiteReport;

use crate::config::{JobConfig, SCHEMA_VERSION};

pub const REPORT_FILE: &str = "report.json";

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum TaskResult {
    Classify { verdicts: Vec<Verdict> },
    Orbit { record: OrbitRecord },
    Cesaro { probe: ErgodicReport },
    Laurent { coeffs: LaurentCoeffs },
    Verify { report: SuiteReport },
}

/// A CSV table produced by a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: &str, contents: String) -> Self {
        Artifact {
            name: name.to_string(),
            contents,
        }
    }

    fn header(&self) -> Vec<String> {
        self.contents
            .lines()
            .next()
            .unwrap_or_default()
            .split(',')
            .map(str::to_string)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub format: &'static str,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub library_version: &'static str,
    pub task: &'static str,
    pub config: JobConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    /// Quadrature and split bookkeeping when the operator came from a function.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionToeplitz>,
    pub result: TaskResult,
    pub files: Vec<FileEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    pub fn new(
        config: JobConfig,
        operator: Option<OperatorSpec>,
        function: Option<FunctionToeplitz>,
        result: TaskResult,
        artifacts: &[Artifact],
        seconds: Option<f64>,
    ) -> Self {
        let files = artifacts
            .iter()
            .map(|a| FileEntry {
                name: a.name.clone(),
                format: "csv",
                columns: a.header(),
                rows: a.contents.lines().count().saturating_sub(1),
            })
            .collect();
        Report {
            schema_version: SCHEMA_VERSION,
            library_version: env!("CARGO_PKG_VERSION"),
            task: config.task.name(),
            config,
            operator,
            function,
            result,
            files,
            timing: seconds.map(|seconds| Timing { seconds }),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn verdict_tables(verdicts: &[Verdict]) -> Vec<Artifact> {
    let mut summary = String::from("property,status,certificate\n");
    let mut evidence = String::from("property,label,k,n,p,q,value\n");
    for v in verdicts {
        let prop = serde_json::to_value(v.property).expect("property serializes");
        let prop = prop.as_str().unwrap_or_default().to_string();
        let status = serde_json::to_value(v.status).expect("status serializes");
        let _ = writeln!(
            summary,
            "{prop},{},{}",
            status.as_str().unwrap_or_default(),
            quote(&v.certificate)
        );
        for r in &v.evidence.rows {
            let _ = writeln!(
                evidence,
                "{prop},{},{},{},{},{},{}",
                quote(&r.label),
                opt(r.k),
                opt(r.n),
                opt(r.p),
                opt(r.q),
                fmt_sci(r.value)
            );
        }
    }
    vec![
        Artifact::new("verdicts.csv", summary),
        Artifact::new("evidence.csv", evidence),
    ]
}

fn ergodic_tables(probe: &ErgodicReport) -> Vec<Artifact> {
    let mut bound = String::from("p,q,ratio\n");
    for r in &probe.cesaro_bound {
        let _ = writeln!(bound, "{},{},{}", r.p, opt(r.q), fmt_sci(r.ratio));
    }
    let mut trend = String::from("k,p,value\n");
    for r in &probe.trend {
        let _ = writeln!(trend, "{},{},{}", r.k, r.p, fmt_sci(r.value));
    }
    let mut diffs = String::from("k,p,value\n");
    for r in &probe.differences {
        let _ = writeln!(diffs, "{},{},{}", r.k, r.p, fmt_sci(r.value));
    }
    vec![
        Artifact::new("cesaro_bound.csv", bound),
        Artifact::new("trend.csv", trend),
        Artifact::new("differences.csv", diffs),
    ]
}

fn suite_table(report: &SuiteReport) -> Artifact {
    let mut s = String::from("name,cases,failures,min_slack,worst\n");
    for c in &report.checks {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            c.name,
            c.cases,
            c.failures,
            c.min_slack.map(fmt_sci).unwrap_or_default(),
            quote(c.worst.as_deref().unwrap_or_default())
        );
    }
    Artifact::new("checks.csv", s)
}

pub fn csv_artifacts(result: &TaskResult, function: Option<&FunctionToeplitz>) -> Vec<Artifact> {
    let mut out = match result {
        TaskResult::Classify { verdicts } => verdict_tables(verdicts),
        TaskResult::Orbit { record } => vec![Artifact::new("orbit.csv", record.to_csv())],
        TaskResult::Cesaro { probe } => ergodic_tables(probe),
        TaskResult::Laurent { coeffs } => vec![Artifact::new("laurent.csv", coeffs.to_csv())],
        TaskResult::Verify { report } => vec![suite_table(report)],
    };
    if let Some(f) = function {
        out.push(Artifact::new("function_coeffs.csv", f.coeffs.to_csv()));
    }
    out
}
