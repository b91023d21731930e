//! Configuration, dispatch and report emission for the `inlslab` tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod suites;

pub use config::{parse_config, parse_config_in, InitialData, Mode, RunConfig};
pub use error::{CliError, Result};
pub use run::{run, RunSummary};

/// Builds the global rayon pool, honouring `INLSLAB_THREADS` when set.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("INLSLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::validation("INLSLAB_THREADS", format!("'{raw}' is not a positive integer")))?;
    // a pool already built by an embedding program is kept as is
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
