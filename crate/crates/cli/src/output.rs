use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::args::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::plot::{long_format, svg, Series};

/// Collects the files written by one run, in write order.
pub struct Sink {
    dir: PathBuf,
    format: Format,
    written: Vec<String>,
}

impl Sink {
    pub fn create(dir: &Path, format: Format) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            format,
            written: Vec::new(),
        })
    }

    /// Writes `rows` as `{stem}.csv` or `{stem}.json`.
    pub fn table<T: Serialize>(&mut self, stem: &str, rows: &[T]) -> CliResult<()> {
        let name = format!("{stem}.{}", self.format.extension());
        let path = self.dir.join(&name);
        match self.format {
            Format::Csv => {
                let csv_err = |source| CliError::Csv {
                    path: path.clone(),
                    source,
                };
                let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
                for row in rows {
                    w.serialize(row).map_err(csv_err)?;
                }
                w.flush().map_err(|e| CliError::io(&path, e))?;
            }
            Format::Json => {
                let mut text = serde_json::to_string_pretty(rows).map_err(|source| CliError::Json {
                    path: path.clone(),
                    source,
                })?;
                text.push('\n');
                fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
            }
        }
        self.written.push(name);
        Ok(())
    }

    /// Writes the long-format plot table and, when asked, an SVG chart.
    pub fn plot(&mut self, stem: &str, labels: [&str; 3], series: &[Series], with_svg: bool) -> CliResult<()> {
        self.table(&format!("{stem}_plot"), &long_format(series))?;
        if with_svg {
            let name = format!("{stem}.svg");
            let path = self.dir.join(&name);
            fs::write(&path, svg(labels[0], labels[1], labels[2], series)).map_err(|e| CliError::io(&path, e))?;
            self.written.push(name);
        }
        Ok(())
    }

    /// Writes `manifest.json`. Its `config` block is itself a valid config file.
    pub fn manifest(&self, config: &RunConfig, summary: serde_json::Value, wall_time: Duration) -> CliResult<()> {
        let path = self.dir.join("manifest.json");
        let manifest = Manifest {
            config,
            version: env!("CARGO_PKG_VERSION"),
            outputs: &self.written,
            summary,
            wall_time_seconds: wall_time.as_secs_f64(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|source| CliError::Json {
            path: path.clone(),
            source,
        })?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a RunConfig,
    version: &'static str,
    outputs: &'a [String],
    summary: serde_json::Value,
    wall_time_seconds: f64,
}

/// Space-separated column indices, for CSV cells.
pub fn join_indices(indices: &[usize]) -> String {
    indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}
