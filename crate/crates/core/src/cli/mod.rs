//! Batch front end: TOML problem configs in, JSON reports and plot-ready columns out.
//!
//! `curvlab <mode> <config>... [--jobs N] [--out DIR]`. Exit codes: 0 pass or
//! complete, 2 contradiction / shape violation / oracle mismatch, 3 nonconvergence,
//! 4 config error; a batch exits with the largest code.

mod config;
mod report;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;

pub use config::{CaseTag, ConfigError, CriterionRequest, Mode, OracleSpec, ProbeSpec, ProblemConfig};
pub use report::{
    columnar, CriterionEntry, ErrorRecord, NodalTable, OracleRecord, ProbeRecord, Report, ReportBody, RunStatus,
    SolutionRecord, SCHEMA,
};
pub use run::{batch_exit_code, run, run_batch, run_path};

#[derive(Debug, Parser)]
#[command(name = "curvlab", version, about = "Prescribed curvature equation laboratory")]
pub struct Args {
    /// What to do with each config.
    #[arg(value_enum)]
    pub mode: Mode,
    /// TOML problem configurations.
    #[arg(required = true)]
    pub configs: Vec<PathBuf>,
    /// Worker threads for independent configs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Directory for `<stem>.json` reports and `<stem>.dat` columns; stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_outputs(report: &Report, dir: &Path) -> std::io::Result<()> {
    let stem = Path::new(&report.source).file_stem().map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    std::fs::write(dir.join(format!("{stem}.json")), report.to_json() + "\n")?;
    if let Some(nodes) = report.nodes() {
        std::fs::write(dir.join(format!("{stem}.dat")), columnar(nodes))?;
    }
    Ok(())
}

/// Runs the CLI and returns the process exit code.
pub fn main_with(args: Args) -> i32 {
    let reports = run_batch(&args.configs, args.mode, args.jobs);
    let mut stderr = std::io::stderr().lock();
    for r in &reports {
        if let Some(e) = &r.error {
            let at = match (e.line, e.column) {
                (Some(l), Some(c)) => format!(":{l}:{c}"),
                _ => String::new(),
            };
            let _ = writeln!(stderr, "{}{at}: {}: {}", r.source, e.kind, e.message);
        }
    }
    match &args.out {
        Some(dir) => {
            if let Err(e) = std::fs::create_dir_all(dir) {
                let _ = writeln!(stderr, "cannot create {}: {e}", dir.display());
                return 4;
            }
            for r in &reports {
                if let Err(e) = write_outputs(r, dir) {
                    let _ = writeln!(stderr, "cannot write report for {}: {e}", r.source);
                    return 4;
                }
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for r in &reports {
                let _ = writeln!(stdout, "{}", r.to_json());
            }
        }
    }
    batch_exit_code(&reports)
}
