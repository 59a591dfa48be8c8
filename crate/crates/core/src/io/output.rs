use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::solver::{run, write_checkpoint, Checkpoint, MHDState, RunObserver, RunOptions, Trajectory};

use super::config::RunConfig;
use super::csv::emit_series;
use super::manifest::{ManifestFile, RunManifest};

pub const SERIES_FILE: &str = "norms.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FINAL_CHECKPOINT: &str = "final.mhdk";

struct CheckpointWriter<'a> {
    dir: &'a Path,
    every: Option<usize>,
    mu: f64,
    nu: f64,
    written: Vec<String>,
}

impl RunObserver for CheckpointWriter<'_> {
    fn on_record(&mut self, state: &MHDState, step: usize) -> Result<()> {
        match self.every {
            Some(k) if step % k == 0 => {
                let name = format!("step_{step:08}.mhdk");
                write_checkpoint(
                    self.dir.join(&name),
                    &Checkpoint {
                        t: state.t,
                        mu: self.mu,
                        nu: self.nu,
                        fields: state.fields.clone(),
                    },
                )?;
                self.written.push(name);
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Result of [`execute_run`].
#[derive(Debug)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub trajectory: Trajectory,
    pub dir: PathBuf,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Runs `config` and writes `norms.csv`, checkpoints and `manifest.json`
/// into `out_dir`. Checkpoints are taken on recorded steps that are
/// multiples of `checkpoint_every`; the last state is always saved as
/// `final.mhdk`. If the run aborts, the partial series and last state are
/// written before the error is returned.
pub fn execute_run(config: &RunConfig, out_dir: impl AsRef<Path>) -> Result<RunOutput> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = RunManifest::new(config);
    manifest.started_unix_s = unix_now();

    let initial = config.initial_fields()?;
    let options = RunOptions {
        s_list: config.s_list.clone(),
        q_list: config.q_list.clone(),
        keep_snapshots: false,
        track_wraparound: config.track_wraparound,
    };
    let mut writer = CheckpointWriter {
        dir,
        every: config.checkpoint_every,
        mu: config.solver.mu,
        nu: config.solver.nu,
        written: Vec::new(),
    };
    let (trajectory, failure) = match run(&config.solver, &initial, &options, &mut writer) {
        Ok(t) => (t, None),
        Err(aborted) => {
            let aborted = *aborted;
            (aborted.partial, Some(aborted.error))
        }
    };

    let mut names = Vec::new();
    if !trajectory.series.is_empty() {
        emit_series(&trajectory.series, dir.join(SERIES_FILE))?;
        names.push(SERIES_FILE.to_string());
    }
    names.append(&mut writer.written);
    let last = &trajectory.final_state;
    write_checkpoint(
        dir.join(FINAL_CHECKPOINT),
        &Checkpoint {
            t: last.t,
            mu: config.solver.mu,
            nu: config.solver.nu,
            fields: last.fields.clone(),
        },
    )?;
    names.push(FINAL_CHECKPOINT.to_string());

    manifest.files = names
        .iter()
        .map(|n| ManifestFile::describe(dir, n))
        .collect::<Result<_>>()?;
    manifest.steps = trajectory.steps;
    manifest.status = match &failure {
        None => "completed".into(),
        Some(e) => format!("aborted: {e}"),
    };
    manifest.finished_unix_s = unix_now();
    manifest.write(dir.join(MANIFEST_FILE))?;
    match failure {
        Some(e) => Err(e),
        None => Ok(RunOutput {
            manifest,
            trajectory,
            dir: dir.to_path_buf(),
        }),
    }
}
