//! `utmq`: run one verification or evaluation scenario from a config file.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails,
//! 2 for configuration errors (nothing is written) and 3 for numerical
//! or I/O failures.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use thiserror::Error;
use utmq_core::UtmError;

use commands::{Check, Output};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] UtmError),
    #[error("cannot write artifacts: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) | Self::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "utmq", version, about = "Unified-transform solver for fourth-order half-line problems")]
struct Args {
    /// Run configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Worker threads for the quadrature.
    #[arg(long, env = "UTMQ_THREADS", value_name = "N")]
    threads: Option<usize>,
    /// Overrides the tolerance from the config.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
    /// Overrides the output directory from the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    command: &'a str,
    status: &'a str,
    tol: f64,
    checks: &'a [Check],
    results: &'a serde_json::Value,
    warnings: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn write_artifacts(dir: &Path, command: &str, tol: f64, out: &Output) -> std::io::Result<bool> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("results.csv"), &out.csv.text)?;
    let pass = out.checks.iter().all(|c| c.pass);
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command,
        status: if pass { "pass" } else { "fail" },
        tol,
        checks: &out.checks,
        results: &out.results,
        warnings: &out.warnings,
        error: None,
    };
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    std::fs::write(dir.join("plot.gp"), plot_script(command, out))?;
    Ok(pass)
}

fn write_failure(dir: &Path, command: &str, tol: f64, err: &CliError) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command,
        status: "numerical_failure",
        tol,
        checks: &[],
        results: &serde_json::Value::Null,
        warnings: &[],
        error: Some(err.to_string()),
    };
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")
}

fn plot_script(command: &str, out: &Output) -> String {
    let plots: Vec<String> = out
        .curves
        .iter()
        .map(|(using, title)| format!("'results.csv' every ::1 using {using} with points title '{title}'"))
        .collect();
    format!(
        "# gnuplot script for the {command} run; execute from this directory.\n\
         set datafile separator ','\n\
         set xlabel '{}'\n\
         set ylabel '{}'\n\
         set grid\n\
         plot {}\n\
         pause -1\n",
        out.axes.0,
        out.axes.1,
        plots.join(", \\\n     ")
    )
}

fn main() -> ExitCode {
    let args = Args::parse();
    let resolved = config::load(&args.config).and_then(|c| c.resolve(args.tol, args.out.clone()));
    let cfg = match resolved {
        Ok(c) => c,
        Err(e) => {
            eprintln!("utmq: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if let Some(n) = args.threads.filter(|&n| n > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("utmq: thread pool: {e}");
        }
    }
    let name = cfg.command.name();
    match commands::run(&cfg) {
        Ok(out) => match write_artifacts(&cfg.out, name, cfg.opts.tol, &out) {
            Ok(pass) => {
                for c in &out.checks {
                    println!("{} {}: {:e} (threshold {:e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
                }
                ExitCode::from(if pass { 0 } else { 1 })
            }
            Err(e) => {
                eprintln!("utmq: {}", CliError::Io(e));
                ExitCode::from(3)
            }
        },
        Err(e) => {
            eprintln!("utmq: {e}");
            if !matches!(e, CliError::Config(_)) {
                let _ = write_failure(&cfg.out, name, cfg.opts.tol, &e);
            }
            ExitCode::from(e.exit_code())
        }
    }
}
