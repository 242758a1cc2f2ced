//! Confidence structures read from text: edge lists `i j [w]` or square
//! matrix CSV. Blank lines and `#` comments are ignored.

use std::path::Path;

use confnet_core::graph::{
    classify, AgentClassification, GantmacherForm, POSITIVE_WEIGHT_THRESHOLD,
};
use confnet_core::opinion::{gantmacher_convergence_check, ConvergenceVerdict};
use confnet_core::{DirectedGraph, Matrix};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    EdgeList,
    MatrixCsv,
}

impl InputFormat {
    /// `.csv` files are matrices, anything else an edge list.
    pub fn guess(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::MatrixCsv,
            _ => InputFormat::EdgeList,
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((k + 1, l))
    })
}

fn input_error(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Input { path: path.to_path_buf(), line, message: message.into() }
}

/// Weighted adjacency; repeated edges add up. `n` is one past the largest
/// index seen.
pub fn parse_edge_list(text: &str, path: &Path) -> Result<Matrix, CliError> {
    let mut edges = Vec::new();
    for (line, l) in content_lines(text) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(input_error(path, line, format!("expected `i j [w]`, found {} fields", fields.len())));
        }
        let index = |s: &str| {
            s.parse::<usize>().map_err(|_| input_error(path, line, format!("`{s}` is not a vertex index")))
        };
        let (i, j) = (index(fields[0])?, index(fields[1])?);
        let w = match fields.get(2) {
            None => 1.0,
            Some(s) => s.parse::<f64>().map_err(|_| input_error(path, line, format!("`{s}` is not a weight")))?,
        };
        if !(w.is_finite() && w > 0.0) {
            return Err(input_error(path, line, format!("weight {w} must be positive and finite")));
        }
        edges.push((i, j, w));
    }
    if edges.is_empty() {
        return Err(input_error(path, 0, "no edges"));
    }
    let n = edges.iter().map(|&(i, j, _)| i.max(j)).max().unwrap_or(0) + 1;
    let mut m = Matrix::zeros(n);
    for (i, j, w) in edges {
        m.set(i, j, m.get(i, j) + w);
    }
    Ok(m)
}

pub fn parse_matrix_csv(text: &str, path: &Path) -> Result<Matrix, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut lines = Vec::new();
    for (line, l) in content_lines(text) {
        let row = l
            .split(',')
            .map(|s| {
                let s = s.trim();
                match s.parse::<f64>() {
                    Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
                    Ok(v) => Err(input_error(path, line, format!("entry {v} must be finite and nonnegative"))),
                    Err(_) => Err(input_error(path, line, format!("`{s}` is not a number"))),
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
        lines.push(line);
    }
    if rows.is_empty() {
        return Err(input_error(path, 0, "empty matrix"));
    }
    let n = rows.len();
    if let Some(k) = rows.iter().position(|r| r.len() != n) {
        return Err(input_error(path, lines[k], format!("row has {} entries, expected {n}", rows[k].len())));
    }
    Matrix::from_rows(&rows).map_err(|e| input_error(path, 0, e.to_string()))
}

pub fn read_matrix(path: &Path, format: InputFormat) -> Result<Matrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    match format {
        InputFormat::EdgeList => parse_edge_list(&text, path),
        InputFormat::MatrixCsv => parse_matrix_csv(&text, path),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub g: usize,
    pub essential: Vec<Vec<usize>>,
    pub inessential: Vec<Vec<usize>>,
    pub labels: Vec<&'static str>,
    pub refined_labels: Vec<&'static str>,
    pub gantmacher: GantmacherForm,
    /// Only for row-stochastic input.
    pub convergence: Option<ConvergenceVerdict>,
}

pub fn classification_report(m: &Matrix) -> ClassificationReport {
    let AgentClassification { essential, inessential, label_of, refined_label_of } = classify(m);
    let stochastic = m.max_row_sum_deviation() < 1e-9;
    ClassificationReport {
        n: m.n(),
        g: essential.len(),
        essential,
        inessential,
        labels: label_of.iter().map(|l| l.as_str()).collect(),
        refined_labels: refined_label_of.iter().map(|l| l.as_str()).collect(),
        gantmacher: GantmacherForm::from_graph(&DirectedGraph::from_matrix(m, POSITIVE_WEIGHT_THRESHOLD)),
        convergence: stochastic.then(|| gantmacher_convergence_check(m)),
    }
}
