//! File formats, run configuration, reports and the command implementations
//! behind the CLI. Every output file is written once, atomically.

pub mod commands;
pub mod config;
pub mod demos;
pub mod signal;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use commands::{cmd_conditions, cmd_demo, cmd_eval, cmd_learn, cmd_mosco, cmd_solve, CommandOutput};
pub use config::{DataSpec, GridSpec, RunConfig};
pub use demos::{builtin_dataset, run_demo, DemoReport};
pub use signal::{read_signal, write_signal};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// JSON schema of `report.json` written by `learn`.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

/// 2 for anything wrong with the input, 3 when a computation fails.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Solver(_) | Error::Estimation(_) | Error::NoSignChange { .. } | Error::Quadrature { .. } => EXIT_SOLVER,
        _ => EXIT_VALIDATION,
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
