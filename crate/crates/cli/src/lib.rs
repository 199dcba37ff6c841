//! Experiment runner behind the `mmshare` binary.

pub mod config;
pub mod emit;
pub mod runner;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub use config::{load_config, parse_config, ExperimentConfig, Format, Mode};
pub use runner::{run_experiment, ResultRow, ResultTable};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] mmshare::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("parse: {0}")]
    Parse(String),
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Writes the table, the failure list and any traces into `cfg.out_dir`;
/// returns the paths written.
pub fn write_outputs(cfg: &ExperimentConfig, table: &ResultTable, traces: &[runner::Trace]) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.clone(), e))?;
    let mut written = Vec::new();
    match cfg.format {
        Format::Csv => {
            let path = dir.join("results.csv");
            emit::write_csv(&table.rows, create(&path)?)?;
            written.push(path);
            if !table.failures.is_empty() {
                let path = dir.join("failures.csv");
                emit::write_failures_csv(&table.failures, create(&path)?)?;
                written.push(path);
            }
        }
        Format::Json => {
            let path = dir.join("results.json");
            emit::write_json(table, create(&path)?)?;
            written.push(path);
        }
    }
    for t in traces {
        let path = runner::trace_path(dir, t);
        let mut w = create(&path)?;
        for o in &t.outcomes {
            serde_json::to_writer(&mut w, o).map_err(|e| CliError::Parse(e.to_string()))?;
            w.write_all(b"\n").map_err(|e| CliError::Io(path.clone(), e))?;
        }
        w.flush().map_err(|e| CliError::Io(path.clone(), e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
