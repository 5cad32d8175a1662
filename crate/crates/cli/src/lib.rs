//! Command-line front end: argument validation, dispatch and output files.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use ksat_phase::io::{emit, render};
use ksat_phase::{Error, Result};

pub use commands::{dispatch, Artifact, KCOL_DOMAIN, MC_CAVEAT};
pub use config::{Cli, Command, ModelArg, RunConfig, StepArg, DEFAULT_BISECT_TOL, DEFAULT_TOL, OUT_DIR_ENV};

/// Directory used by `tables` when neither `--out` nor the output-directory
/// setting is given.
pub const DEFAULT_TABLES_DIR: &str = "ksat-phase-out";

/// Validation errors exit with 2, runtime errors with 1.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 1;

pub fn run(config: &RunConfig) -> Result<Vec<Artifact>> {
    config.validate()?;
    dispatch(config)
}

fn file_name(a: &Artifact, cfg: &RunConfig) -> String {
    format!("{}.{}", a.name, cfg.format.extension())
}

/// Writes artifacts to their destinations and returns the files written.
///
/// A single artifact goes to `--out` when given; several treat `--out` as a
/// directory. Without `--out` the output directory is used, and failing that
/// tables are printed to `stdout` (`tables` falls back to
/// [`DEFAULT_TABLES_DIR`]).
pub fn deliver(cfg: &RunConfig, artifacts: &[Artifact], stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let dir: Option<PathBuf> = match (&cfg.out, &cfg.out_dir) {
        (Some(out), _) if artifacts.len() == 1 && cfg.command != Command::Tables => {
            emit(&artifacts[0].table, cfg.format, out)?;
            return Ok(vec![out.clone()]);
        }
        (Some(out), _) => Some(out.clone()),
        (None, Some(d)) => Some(d.clone()),
        (None, None) if cfg.command == Command::Tables => Some(PathBuf::from(DEFAULT_TABLES_DIR)),
        (None, None) => None,
    };
    match dir {
        Some(dir) => artifacts
            .iter()
            .map(|a| {
                let path = dir.join(file_name(a, cfg));
                emit(&a.table, cfg.format, &path).map(|_| path)
            })
            .collect(),
        None => {
            let io = |e: std::io::Error| Error::Invalid(format!("stdout: {e}"));
            for (i, a) in artifacts.iter().enumerate() {
                if i > 0 {
                    writeln!(stdout).map_err(io)?;
                }
                if artifacts.len() > 1 {
                    writeln!(stdout, "# artifact: {}", a.name).map_err(io)?;
                }
                stdout.write_all(render(&a.table, cfg.format).as_bytes()).map_err(io)?;
            }
            Ok(Vec::new())
        }
    }
}

/// One-line JSON error record.
pub fn error_record(command: Option<&str>, err: &Error) -> String {
    serde_json::json!({
        "error": err.kind(),
        "message": err.to_string(),
        "command": command,
    })
    .to_string()
}

/// Parses `args`, runs, writes outputs and returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let name = cli.command.name();
    let cfg = match RunConfig::new(cli) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_record(Some(name), &e));
            return EXIT_USAGE;
        }
    };
    match run(&cfg).and_then(|a| deliver(&cfg, &a, stdout)) {
        Ok(paths) => {
            for p in paths {
                let _ = writeln!(stderr, "wrote {}", display(&p));
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_record(Some(name), &e));
            EXIT_FAILURE
        }
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
