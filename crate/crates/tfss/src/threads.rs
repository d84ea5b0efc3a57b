//! Worker-count control.

use crate::error::{CliError, Result};

pub const THREADS_VAR: &str = "TFSS_THREADS";

/// Worker count requested through `TFSS_THREADS`, if set.
pub fn requested_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => parse_threads(&v).map(Some),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(_) => Err(CliError::Usage(format!("{THREADS_VAR} is not valid unicode"))),
    }
}

fn parse_threads(v: &str) -> Result<usize> {
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
    }
}

/// Sizes the global worker pool from `TFSS_THREADS`. Without it rayon picks
/// one worker per core. Results do not depend on the count.
pub fn init_from_env() -> Result<()> {
    if let Some(n) = requested_threads()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot build worker pool: {e}")))?;
    }
    Ok(())
}
