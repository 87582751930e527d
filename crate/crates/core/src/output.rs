//! Files produced by runs and queries: run traces, histograms, result
//! summaries.
//!
//! Numbers are written in Rust's shortest round-trip decimal form, so a
//! parsed value is bit-identical to the one written.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::engine::Run;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: malformed value `{value}`")]
    Malformed { path: PathBuf, value: String },
    #[error("histogram of an empty sample")]
    EmptySamples,
    #[error("histogram width must be positive and finite, got {0}")]
    BadWidth(f64),
    #[error("cannot bin non-finite sample {0}")]
    NonFinite(f64),
}

/// Fixed-width histogram anchored at the smallest sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub start: f64,
    pub width: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn bucket_start(&self, i: usize) -> f64 {
        self.start + i as f64 * self.width
    }

    /// `count / (total * width)`: integrates to one.
    pub fn density(&self, i: usize) -> f64 {
        self.counts[i] as f64 / (self.total as f64 * self.width)
    }

    pub fn densities(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| self.density(i)).collect()
    }

    /// Index of the fullest bucket; the first one on ties.
    pub fn peak(&self) -> usize {
        let mut best = 0;
        for (i, c) in self.counts.iter().enumerate() {
            if *c > self.counts[best] {
                best = i;
            }
        }
        best
    }
}

/// Bins `samples` into buckets `[min + k w, min + (k+1) w)`.
pub fn histogram(samples: &[f64], width: f64) -> Result<Histogram, OutputError> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(OutputError::BadWidth(width));
    }
    if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
        return Err(OutputError::NonFinite(*x));
    }
    let start = samples
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or(OutputError::EmptySamples)?;
    let mut counts = Vec::new();
    for x in samples {
        let k = ((x - start) / width).floor() as usize;
        if k >= counts.len() {
            counts.resize(k + 1, 0);
        }
        counts[k] += 1;
    }
    Ok(Histogram {
        start,
        width,
        counts,
        total: samples.len() as u64,
    })
}

/// Default bucket width: a twentieth of the sample range, or 1 when all
/// samples coincide.
pub fn default_width(samples: &[f64]) -> f64 {
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = (hi - lo) / 20.0;
    if w > 0.0 && w.is_finite() {
        w
    } else {
        1.0
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, OutputError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| OutputError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| OutputError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, OutputError> {
    Ok(csv::Writer::from_writer(create(path)?))
}

/// `run0.csv` -> `run0.events.csv`.
pub fn events_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.events.csv"))
}

/// Writes `time,<obs>...` rows to `path` and the events of the run to the
/// sibling `.events.csv` file.
pub fn write_run_csv(run: &Run, path: &Path) -> Result<(), OutputError> {
    let err = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv_writer(path)?;
    let header = std::iter::once("time").chain(run.columns.iter().map(|c| c.name.as_str()));
    w.write_record(header).map_err(err)?;
    let mut row = Vec::with_capacity(run.columns.len() + 1);
    for (t, vals) in run.times.iter().zip(&run.values) {
        row.clear();
        row.push(t.to_string());
        row.extend(vals.iter().map(f64::to_string));
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| err(e.into()))?;

    let epath = events_path(path);
    let eerr = |source| OutputError::Csv {
        path: epath.clone(),
        source,
    };
    let mut w = csv_writer(&epath)?;
    w.write_record(["time", "action", "component"]).map_err(eerr)?;
    for e in &run.events {
        w.write_record([e.time.to_string().as_str(), &e.action, &e.component])
            .map_err(eerr)?;
    }
    w.flush().map_err(|e| eerr(e.into()))
}

/// A run CSV read back: column names (without `time`), times and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTable {
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

pub fn read_run_csv(path: &Path) -> Result<RunTable, OutputError> {
    let err = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let columns = r.headers().map_err(err)?.iter().skip(1).map(str::to_string).collect();
    let mut table = RunTable {
        columns,
        times: Vec::new(),
        values: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec.map_err(err)?;
        let mut nums = rec.iter().map(|s| {
            s.parse::<f64>().map_err(|_| OutputError::Malformed {
                path: path.to_path_buf(),
                value: s.to_string(),
            })
        });
        let Some(t) = nums.next() else { continue };
        table.times.push(t?);
        table.values.push(nums.collect::<Result<_, _>>()?);
    }
    Ok(table)
}

/// `bucket_start,count,density` (or `log_density`, natural log).
pub fn write_histogram_csv(h: &Histogram, path: &Path, log_density: bool) -> Result<(), OutputError> {
    let err = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv_writer(path)?;
    let last = if log_density { "log_density" } else { "density" };
    w.write_record(["bucket_start", "count", last]).map_err(err)?;
    for (i, c) in h.counts.iter().enumerate() {
        let d = h.density(i);
        let d = if log_density { d.ln() } else { d };
        w.write_record([h.bucket_start(i).to_string(), c.to_string(), d.to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| err(e.into()))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), OutputError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| OutputError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|source| OutputError::Io {
            path: path.to_path_buf(),
            source,
        })
}
