use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use psop_cli::{load_config, run, CliError, JobConfig, Outcome, RunOptions, Task, SCHEMA_VERSION};
use psop_core::verify::Suite;
use psop_core::Exec;

#[derive(Parser)]
#[command(
    name = "psop",
    version,
    about = "Operators on power series spaces: classification, orbits, Laurent symbols"
)]
struct Cli {
    /// Run grid sweeps on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    /// Add wall-clock time to the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the job described by a JSON config file.
    Run {
        config: PathBuf,
        /// Directory for report.json and CSV tables (default: report on stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite: inequalities, identities, classifiers, laurent or all.
    Verify {
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a laurent job; the coefficient CSV goes to stdout unless --out is given.
    Laurent {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn thread_cap() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PSOP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::Config(format!(
            "PSOP_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    psop_core::exec::set_thread_cap(n).map_err(CliError::Config)
}

fn finish(
    outcome: &Outcome,
    out: Option<&Path>,
    stdout: impl FnOnce(&Outcome) -> String,
) -> Result<(), CliError> {
    match out {
        Some(dir) => outcome.write(dir)?,
        None => print!("{}", stdout(outcome)),
    }
    if outcome.passed() {
        Ok(())
    } else {
        Err(CliError::Verification("at least one check failed".into()))
    }
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    thread_cap()?;
    let opts = RunOptions {
        exec: if cli.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        },
        timing: cli.timing,
    };
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(&config)?;
            let out = out.or_else(|| cfg.output.dir.as_ref().map(PathBuf::from));
            let outcome = run(&cfg, opts)?;
            finish(&outcome, out.as_deref(), Outcome::report_json)
        }
        Command::Verify { suite, out } => {
            let suite: Suite = suite
                .parse()
                .map_err(|e: psop_core::Error| CliError::Config(e.to_string()))?;
            let cfg = JobConfig {
                schema_version: SCHEMA_VERSION,
                space: None,
                operator: None,
                task: Task::Verify { suite },
                grid: Default::default(),
                output: Default::default(),
            };
            let outcome = run(&cfg, opts)?;
            if out.is_some() {
                if let psop_cli::TaskResult::Verify { report } = &outcome.report.result {
                    print!("{}", report.summary());
                }
            }
            finish(&outcome, out.as_deref(), |o| match &o.report.result {
                psop_cli::TaskResult::Verify { report } => report.summary(),
                _ => unreachable!(),
            })
        }
        Command::Laurent { config, out } => {
            let cfg = load_config(&config)?;
            if !matches!(cfg.task, Task::Laurent { .. }) {
                return Err(CliError::Config(format!(
                    "expected a laurent task, found `{}`",
                    cfg.task.name()
                )));
            }
            let out = out.or_else(|| cfg.output.dir.as_ref().map(PathBuf::from));
            let outcome = run(&cfg, opts)?;
            finish(&outcome, out.as_deref(), |o| match &o.report.result {
                psop_cli::TaskResult::Laurent { coeffs } => coeffs.to_csv(),
                _ => unreachable!(),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("psop: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
