//! CSV and JSON writers. Floats are written in shortest round-trip form, so
//! re-reading a file and writing it again reproduces it byte for byte.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use confnet_core::sim::StepRow;
use serde::Serialize;

use crate::error::CliError;

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    write_file(path, &json_bytes(value)?)
}

/// Rows serialized under their field names as the header.
pub fn csv_bytes<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

pub const TRAJECTORY_HEADER: [&str; 9] =
    ["t", "price", "mean_opinion", "min_opinion", "max_opinion", "dividend", "g", "essential_agents", "clusters"];

pub fn trajectory_csv(rows: &[StepRow]) -> Result<Vec<u8>, CliError> {
    csv_bytes(rows, &TRAJECTORY_HEADER)
}

pub fn read_trajectory_csv(reader: impl Read) -> Result<Vec<StepRow>, CliError> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != TRAJECTORY_HEADER {
        return Err(CliError::Output(format!("unexpected trajectory header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct MeanPathRow {
    pub t: usize,
    pub mean_price: f64,
    pub variance: f64,
}

pub const MEAN_PATH_HEADER: [&str; 3] = ["t", "mean_price", "variance"];

pub fn mean_path_rows(mean: &[f64], variance: &[f64]) -> Vec<MeanPathRow> {
    mean.iter()
        .zip(variance)
        .enumerate()
        .map(|(k, (&mean_price, &variance))| MeanPathRow { t: k + 1, mean_price, variance })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramRow {
    pub epsilon: f64,
    pub bin: usize,
    pub lower: f64,
    pub upper: f64,
    pub frequency: f64,
}

pub const HISTOGRAM_HEADER: [&str; 5] = ["epsilon", "bin", "lower", "upper", "frequency"];

pub fn histogram_rows(epsilon: f64, histogram: &[f64]) -> Vec<HistogramRow> {
    let bins = histogram.len() as f64;
    histogram
        .iter()
        .enumerate()
        .map(|(b, &frequency)| HistogramRow {
            epsilon,
            bin: b,
            lower: b as f64 / bins,
            upper: (b + 1) as f64 / bins,
            frequency,
        })
        .collect()
}

pub fn stdout_line(line: &str) {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "{line}");
}
