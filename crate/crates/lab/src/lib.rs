//! Driver for the `roughn-lab` binary: parameter files, run configuration,
//! resumable jobs and the subcommands.

pub mod checkpoint;
pub mod commands;
pub mod params;
pub mod runner;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("stopped after {done} of {total} work units; checkpoint written to {checkpoint}")]
    Interrupted {
        done: u64,
        total: u64,
        checkpoint: PathBuf,
    },
    #[error(transparent)]
    Core(#[from] roughn_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// 2 for invalid configuration, 3 for an exhausted budget, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use roughn_core::Error as E;
        match self {
            LabError::Config(_) | LabError::Checkpoint(_) => 2,
            LabError::Interrupted { .. } => 3,
            LabError::Core(e) => match e {
                E::BudgetExceeded(_) => 3,
                E::InvalidArgument(_)
                | E::TableTooSmall { .. }
                | E::OutOfRange(_)
                | E::EmptySupport(_)
                | E::Malformed(_) => 2,
                E::NumericFailure(_) | E::Io(_) => 1,
            },
            LabError::Io(_) | LabError::Json(_) => 1,
        }
    }
}

pub const SUBCOMMANDS: [&str; 10] = [
    "sieve-scan",
    "sample",
    "moments",
    "c0",
    "axioms",
    "cramer-gaps",
    "pik",
    "window-search",
    "refute-679",
    "record-search",
];

/// Everything that determines a run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub subcommand: String,
    pub params_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Zero means one worker per core.
    pub workers: usize,
    /// Seconds between periodic checkpoints; zero disables them.
    pub checkpoint_secs: u64,
    pub resume: Option<PathBuf>,
    /// Stop with a checkpoint after this many work units.
    pub max_units: Option<u64>,
}

pub fn run(config: &RunConfig) -> Result<(), LabError> {
    if !SUBCOMMANDS.contains(&config.subcommand.as_str()) {
        return Err(LabError::Config(format!(
            "unknown subcommand {:?}",
            config.subcommand
        )));
    }
    let params = match &config.params_path {
        Some(p) => params::ParamFile::load(p)?,
        None => params::ParamFile::default(),
    };
    std::fs::create_dir_all(&config.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| LabError::Config(format!("cannot start {} workers: {e}", config.workers)))?;
    pool.install(|| commands::dispatch(config, &params))
}
