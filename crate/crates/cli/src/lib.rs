//! Batch front end for `psop-core`: reads a JSON job file, runs one task and
//! writes a JSON report plus CSV tables.

pub mod config;
pub mod report;

use std::fs;
use std::path::Path;
use std::time::Instant;

use psop_core::classify::{self, GridParams};
use psop_core::laurent::{self, toeplitz_from_function};
use psop_core::operators::{self, OperatorSpec};
use psop_core::verify;
use psop_core::{Coeffs, Element, Exec};

pub use config::{Format, JobConfig, OperatorConfig, Task, SCHEMA_VERSION};
pub use report::{Artifact, FileEntry, Report, TaskResult};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("task failed: {0}")]
    Task(#[from] psop_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Task(_) | CliError::Io(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub exec: Exec,
    /// Record wall-clock time in the report (the report is then no longer
    /// byte-for-byte reproducible).
    pub timing: bool,
}

/// The finished report and the files it describes, not yet written.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    /// False only for a verify task with a failing check.
    pub fn passed(&self) -> bool {
        match &self.report.result {
            TaskResult::Verify { report } => report.passed,
            _ => true,
        }
    }

    pub fn report_json(&self) -> String {
        self.report.to_json()
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }

    /// Writes `report.json` (if requested) and every artifact into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        for a in &self.artifacts {
            fs::write(dir.join(&a.name), &a.contents).map_err(io)?;
        }
        if self.report.config.output.formats.contains(&Format::Json) {
            fs::write(dir.join(report::REPORT_FILE), self.report_json()).map_err(io)?;
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<JobConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    JobConfig::from_json(&text)
}

/// Build the operator described by the config. Certificate failures are
/// reported as config errors since they mean the operator does not act on
/// the chosen space.
fn build_operator(
    cfg: &JobConfig,
) -> Result<Option<(OperatorSpec, Option<laurent::FunctionToeplitz>)>, CliError> {
    let (Some(space), Some(op)) = (&cfg.space, &cfg.operator) else {
        return Ok(None);
    };
    let incompatible = |e: psop_core::Error| {
        CliError::Config(format!(
            "operator is not admissible on {}: {e}",
            space.describe()
        ))
    };
    Ok(Some(match op {
        OperatorConfig::Hat { theta } => (
            OperatorSpec::hat(space.clone(), theta.clone()).map_err(incompatible)?,
            None,
        ),
        OperatorConfig::Check { beta, cert } => (
            OperatorSpec::check(space.clone(), beta.clone(), *cert).map_err(incompatible)?,
            None,
        ),
        OperatorConfig::Toeplitz { theta, beta, cert } => (
            OperatorSpec::toeplitz(space.clone(), theta.clone(), beta.clone(), *cert)
                .map_err(incompatible)?,
            None,
        ),
        OperatorConfig::Function {
            symbol,
            r,
            window,
            m,
        } => {
            let ft =
                toeplitz_from_function(symbol, space, *r, *window, *m).map_err(incompatible)?;
            (ft.op.clone(), Some(ft))
        }
    }))
}

fn start_vector(x: &[psop_core::Scalar]) -> Result<Element, CliError> {
    if x.is_empty() {
        return Err(CliError::Config("start vector x is empty".into()));
    }
    Ok(Element::finite(Coeffs::from_scalars(x)))
}

pub fn run(cfg: &JobConfig, opts: RunOptions) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let started = Instant::now();
    let built = build_operator(cfg)?;
    let op = built.as_ref().map(|(op, _)| op);
    let function = built.as_ref().and_then(|(_, f)| f.clone());
    let exec = opts.exec;

    let result = match &cfg.task {
        Task::Classify { modes } => {
            let op = op.expect("validated");
            let verdicts = classify::classify(op, modes, &cfg.grid, exec)?;
            TaskResult::Classify { verdicts }
        }
        Task::Orbit { x, k, grades } => {
            let op = op.expect("validated");
            let record = operators::orbit(op, &start_vector(x)?, *k, grades)?;
            TaskResult::Orbit { record }
        }
        Task::Cesaro { x, k, p } => {
            let op = op.expect("validated");
            let grid = GridParams {
                k: *k,
                p: *p,
                ..cfg.grid
            };
            let probe = classify::mean_ergodic_probe(op, &start_vector(x)?, &grid, exec)?;
            TaskResult::Cesaro { probe }
        }
        Task::Laurent {
            symbol,
            r,
            window,
            m,
        } => {
            let coeffs = laurent::laurent_coeffs(symbol, *r, window[0], window[1], *m)?;
            TaskResult::Laurent { coeffs }
        }
        Task::Verify { suite } => TaskResult::Verify {
            report: verify::run_suite(*suite, exec)?,
        },
    };

    let elapsed = started.elapsed().as_secs_f64();
    let artifacts = if cfg.output.formats.contains(&Format::Csv) {
        report::csv_artifacts(&result, function.as_ref())
    } else {
        Vec::new()
    };
    let report = Report::new(
        cfg.clone(),
        op.cloned(),
        function,
        result,
        &artifacts,
        opts.timing.then_some(elapsed),
    );
    Ok(Outcome { report, artifacts })
}
