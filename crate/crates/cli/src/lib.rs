//! Configuration-driven front end: `solve`, `convergence` and `validate`,
//! writing plot-ready CSV and JSON summaries.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 numerical failure. The config schema is documented in [`config`].

pub mod config;
pub mod run;
pub mod validate;

use std::fmt;
use std::path::Path;

pub use config::{CoeffSpec, Format, RunConfig, SolverBackend};
pub use run::{cmd_convergence, cmd_solve, solve_field, ConvergenceRow, ConvergenceTable, SolveOutcome};
pub use validate::{cmd_validate, run_suite, Check, ValidationReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::numerical(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Runs `f` on a dedicated pool of `threads` workers (all cores if `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| CliError::numerical(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}
