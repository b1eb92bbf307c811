//! Result files.
//!
//! A run directory holds:
//!
//! - `results.jsonl`: one [`ResultRecord`] per line, byte-identical across reruns.
//! - `manifest.toml`: the resolved config, itself a valid config file.
//! - `timings.json`: wall-clock seconds and the declared budget.
//! - `trajectories/<label>.csv` and `flows.jsonl` when requested.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::W2Options;

use super::{ResultRecord, RunOutput};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub experiment: String,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub within_budget: bool,
}

/// Paths written by [`emit_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub results: PathBuf,
    pub manifest: PathBuf,
    pub timings: PathBuf,
    pub trajectories: Vec<PathBuf>,
    pub flows: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Serialization(e.to_string()))
}

/// Writes one record per line.
pub fn write_results(records: &[ResultRecord], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    for r in records {
        writeln!(w, "{}", to_json(r)?).map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}

/// Parses a `results.jsonl` file.
pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|line| {
            let line = line.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| Error::Serialization(format!("{}: {e}", path.display())))
        })
        .collect()
}

/// Writes every output of `run` into `dir`, creating it if needed.
pub fn emit_outputs(run: &RunOutput, dir: &Path) -> Result<OutputFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let results = dir.join("results.jsonl");
    write_results(&run.records, &results)?;

    let manifest = dir.join("manifest.toml");
    fs::write(&manifest, run.config.to_toml_string()?).map_err(|e| Error::io(&manifest, e))?;

    let timings = dir.join("timings.json");
    let timing = Timing {
        experiment: run.config.experiment.name.clone(),
        seconds: run.seconds,
        budget_seconds: run.config.experiment.budget_seconds,
        within_budget: run.seconds <= run.config.experiment.budget_seconds,
    };
    fs::write(&timings, to_json(&timing)? + "\n").map_err(|e| Error::io(&timings, e))?;

    let mut trajectory_files = Vec::new();
    if !run.trajectories.is_empty() {
        let tdir = dir.join("trajectories");
        fs::create_dir_all(&tdir).map_err(|e| Error::io(&tdir, e))?;
        for (label, traj) in &run.trajectories {
            let path = tdir.join(format!("{label}.csv"));
            let w = create(&path)?;
            traj.write_csv(w)?;
            trajectory_files.push(path);
        }
    }

    let flows = match &run.flows {
        Some(it) => {
            let path = dir.join("flows.jsonl");
            let mut w = create(&path)?;
            let opts = W2Options {
                exact_cap: run.config.params.w2_exact_cap,
            };
            it.write_jsonl(&mut w, opts)?;
            finish(&path, w)?;
            Some(path)
        }
        None => None,
    };

    Ok(OutputFiles {
        results,
        manifest,
        timings,
        trajectories: trajectory_files,
        flows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentConfig;

    #[test]
    fn empty_run_writes_empty_results_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunOutput {
            config: ExperimentConfig::defaults("uniqueness").unwrap(),
            records: vec![],
            trajectories: vec![],
            flows: None,
            seconds: 0.0,
        };
        let files = emit_outputs(&run, dir.path()).unwrap();
        assert_eq!(fs::read_to_string(&files.results).unwrap(), "");
        let manifest = fs::read_to_string(&files.manifest).unwrap();
        assert!(manifest.contains("seed = 20240607"));
        assert!(read_results(&files.results).unwrap().is_empty());
    }

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            ResultRecord::check("x", "a", 0.1 + 0.2, 0.3, 1e-8).with_std_err(1.0 / 3.0),
            ResultRecord::info("x", "b", -2.5e-300),
        ];
        let path = dir.path().join("r.jsonl");
        write_results(&records, &path).unwrap();
        assert_eq!(read_results(&path).unwrap(), records);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let run = RunOutput {
            config: ExperimentConfig::defaults("uniqueness").unwrap(),
            records: vec![],
            trajectories: vec![],
            flows: None,
            seconds: 0.0,
        };
        match emit_outputs(&run, &blocker.join("sub")) {
            Err(Error::Io { path, .. }) => assert!(path.starts_with(&blocker)),
            other => panic!("expected an io error, got {other:?}"),
        }
    }
}
