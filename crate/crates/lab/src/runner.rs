//! Resumable jobs: work is split into numbered units whose CSV output is
//! appended in unit order, so a run can stop after any unit and continue
//! from a checkpoint.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use roughn_core::report::csv_row;

use crate::checkpoint::{fingerprint, Checkpoint};
use crate::params::ParamFile;
use crate::{LabError, RunConfig};

pub const CHECKPOINT_FILE: &str = "checkpoint.rlck";

pub trait Job {
    /// CSV files written by the units, with their headers.
    fn files(&self) -> Vec<(&'static str, Vec<&'static str>)>;
    fn units(&self) -> u64;
    /// Runs one unit, appending rows to `outs` (ordered as in [`Job::files`]).
    fn run_unit(&mut self, unit: u64, outs: &mut [BufWriter<File>]) -> Result<(), LabError>;
    fn save_state(&self) -> Result<String, LabError>;
    fn load_state(&mut self, state: &str) -> Result<(), LabError>;
    /// Writes the final reports.
    fn finish(&mut self, out_dir: &Path) -> Result<(), LabError>;
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), LabError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn save(
    config: &RunConfig,
    fp: [u8; 32],
    cursor: u64,
    job: &dyn Job,
    outs: &mut [BufWriter<File>],
    names: &[&str],
) -> Result<PathBuf, LabError> {
    let mut files = Vec::new();
    for (w, name) in outs.iter_mut().zip(names) {
        w.flush()?;
        files.push((name.to_string(), w.get_ref().metadata()?.len()));
    }
    let ck = Checkpoint {
        subcommand: config.subcommand.clone(),
        fingerprint: fp,
        cursor,
        aggregate: job.save_state()?,
        files,
    };
    let path = config.out_dir.join(CHECKPOINT_FILE);
    ck.save(&path)?;
    Ok(path)
}

/// Runs `job` from the start or from `config.resume`.
pub fn drive(job: &mut dyn Job, config: &RunConfig, params: &ParamFile) -> Result<(), LabError> {
    let fp = fingerprint(&config.subcommand, config.seed, params.raw());
    let specs = job.files();
    let names: Vec<&str> = specs.iter().map(|(n, _)| *n).collect();
    let mut outs = Vec::new();
    let start = match &config.resume {
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            if ck.subcommand != config.subcommand || ck.fingerprint != fp {
                return Err(LabError::Checkpoint(
                    "checkpoint fingerprint does not match this configuration; refusing to resume"
                        .into(),
                ));
            }
            if ck.files.len() != names.len()
                || ck.files.iter().zip(&names).any(|((a, _), b)| a != b)
            {
                return Err(LabError::Checkpoint(
                    "checkpoint lists different output files".into(),
                ));
            }
            for (name, offset) in &ck.files {
                let path = config.out_dir.join(name);
                let f = OpenOptions::new().read(true).write(true).open(&path)?;
                if f.metadata()?.len() < *offset {
                    return Err(LabError::Checkpoint(format!(
                        "{name} is shorter than the checkpoint offset"
                    )));
                }
                f.set_len(*offset)?;
                drop(f);
                outs.push(BufWriter::new(OpenOptions::new().append(true).open(&path)?));
            }
            job.load_state(&ck.aggregate)?;
            ck.cursor
        }
        None => {
            for (name, header) in &specs {
                let mut w = BufWriter::new(File::create(config.out_dir.join(name))?);
                csv_row(&mut w, header)?;
                outs.push(w);
            }
            0
        }
    };
    let total = job.units();
    let mut last_save = Instant::now();
    for unit in start..total {
        if config.max_units.is_some_and(|m| unit - start >= m) {
            let checkpoint = save(config, fp, unit, job, &mut outs, &names)?;
            write_json(
                &config.out_dir.join("status.json"),
                &Status {
                    complete: false,
                    done: unit,
                    total,
                },
            )?;
            return Err(LabError::Interrupted {
                done: unit,
                total,
                checkpoint,
            });
        }
        job.run_unit(unit, &mut outs)?;
        if config.checkpoint_secs > 0 && last_save.elapsed().as_secs() >= config.checkpoint_secs {
            save(config, fp, unit + 1, job, &mut outs, &names)?;
            last_save = Instant::now();
        }
    }
    for w in &mut outs {
        w.flush()?;
    }
    job.finish(&config.out_dir)?;
    write_json(
        &config.out_dir.join("status.json"),
        &Status {
            complete: true,
            done: total,
            total,
        },
    )?;
    let ck = config.out_dir.join(CHECKPOINT_FILE);
    if ck.exists() {
        std::fs::remove_file(ck)?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct Status {
    complete: bool,
    done: u64,
    total: u64,
}
