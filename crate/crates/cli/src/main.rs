//! `coarsetop`: one task per invocation, reading a TOML config and writing
//! one report (JSON or CSV) to a file or stdout.
//!
//! Exit codes: 0 success; 2 parse/config error; 3 contract refusal, with a
//! machine-readable reason on stderr naming the violated precondition;
//! 4 budget exhausted, with whatever partial report could be salvaged still
//! written and flagged `partial`.

mod config;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use run::{execute, Overrides};

/// Desk-scale coarse invariants of finitely generated groups.
#[derive(Parser, Debug)]
#[command(name = "coarsetop", version, about)]
struct Cli {
    /// TOML config describing the group, subgroup, and task parameters.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Task to run; overrides the config's `task`.
    #[arg(long, value_name = "NAME")]
    task: Option<String>,

    /// RNG seed for randomized sweeps; recorded in the report.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Node budget for ball/BFS enumeration; overrides the config.
    #[arg(long, value_name = "N")]
    budget: Option<u64>,

    /// Output path; overrides the config. Without one, the report goes to
    /// stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Report format; overrides the config.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
}

/// Write bytes to `path` atomically: a temp file in the same directory is
/// renamed over the target, so readers never observe a half-written report.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let config_text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({
                    "error": {
                        "kind": "parse",
                        "statement": format!("cannot read config {}: {e}", cli.config.display()),
                    }
                })
            );
            return ExitCode::from(2);
        }
    };

    let plan = execute(
        &config_text,
        Overrides {
            task: cli.task,
            seed: cli.seed,
            budget: cli.budget,
            format: cli.format,
            out: cli.out,
        },
    );

    if let Some(note) = &plan.stderr {
        eprint!("{note}");
    }

    if let Some(bytes) = &plan.bytes {
        match &plan.out {
            Some(path) => {
                if let Err(e) = write_atomic(path, bytes) {
                    eprintln!(
                        "{}",
                        serde_json::json!({
                            "error": {
                                "kind": "parse",
                                "statement": format!("cannot write {}: {e}", path.display()),
                            }
                        })
                    );
                    return ExitCode::from(2);
                }
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                let _ = stdout.write_all(bytes);
                let _ = stdout.flush();
            }
        }
    }

    ExitCode::from(u8::try_from(plan.exit).unwrap_or(1))
}
