//! Command-line harness: configuration, dispatch and output files for every
//! experiment.

pub mod cli;
pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, CommandName, ExperimentConfig, RawSettings, Value};
pub use run::{run, RunReport};

/// Run inside a pool of `threads` workers, or the global pool.
pub fn run_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> anyhow::Result<RunReport> {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(|| run(cfg)),
        None => run(cfg),
    }
}
