//! Reproducible Monte-Carlo experiment runner for the IRS case studies.
//!
//! A JSON [`ExperimentSpec`] names a scenario, a geometry, the surface model
//! and the solver, plus an optional parameter sweep and named variants. Each
//! (sweep point, trial) owns the seed `substream_seed(master_seed, sweep,
//! trial)`; all variants of that pair share it. Results are emitted as CSV in
//! (sweep point, trial, variant) order.

pub mod config;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod table;

pub use config::{parse_config, parse_str, ExperimentSpec, Resolved};
pub use error::CliError;
pub use experiment::{draw_instance, run_experiment, solve, Instance, Outcome};
pub use oracle::{oracle_check, OracleCase, OracleReport, ORACLE_TOLERANCE};
pub use table::{ResultRow, ResultTable};

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}"))),
    }
}

/// Without the `parallel` feature every run is sequential.
#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    Ok(f())
}
