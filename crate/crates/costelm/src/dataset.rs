use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Training targets: integer class labels in `1..=class_count`, or real
/// regression values.
#[derive(Debug, Clone)]
pub enum Targets {
    Classes { labels: Vec<usize>, class_count: usize },
    Reals(Vec<f64>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Classes { labels, .. } => labels.len(),
            Targets::Reals(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn class_count(&self) -> Option<usize> {
        match self {
            Targets::Classes { class_count, .. } => Some(*class_count),
            Targets::Reals(_) => None,
        }
    }
}

/// A feature matrix with per-row targets.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Matrix,
    pub targets: Targets,
}

impl Dataset {
    pub fn new(x: Matrix, targets: Targets) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidDataset("empty feature matrix".into()));
        }
        if x.nrows() != targets.len() {
            return Err(Error::InvalidDataset(format!(
                "{} samples but {} targets",
                x.nrows(),
                targets.len()
            )));
        }
        if let Targets::Classes { labels, class_count } = &targets {
            for &l in labels {
                if l < 1 || l > *class_count {
                    return Err(Error::InvalidLabel {
                        label: l,
                        class_count: *class_count,
                    });
                }
            }
        }
        Ok(Self { x, targets })
    }

    pub fn sample_count(&self) -> usize {
        self.x.nrows()
    }

    pub fn feature_count(&self) -> usize {
        self.x.ncols()
    }

    /// Restrict the dataset to the given row indices.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let x = Matrix::from_fn(indices.len(), self.x.ncols(), |i, j| self.x[(indices[i], j)]);
        let targets = match &self.targets {
            Targets::Classes { labels, class_count } => Targets::Classes {
                labels: indices.iter().map(|&i| labels[i]).collect(),
                class_count: *class_count,
            },
            Targets::Reals(v) => Targets::Reals(indices.iter().map(|&i| v[i]).collect()),
        };
        Self { x, targets }
    }
}

/// Mode of the final column when loading a delimited file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    Classification,
    Regression,
}

/// Load a comma-delimited dataset: numeric feature columns, final column
/// the label (classification) or target (regression). A non-numeric first
/// line is treated as a header and skipped.
pub fn load_dataset(path: &Path, mode: LoadMode) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, mode)
}

pub fn parse_dataset(text: &str, mode: LoadMode) -> Result<Dataset> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if rows.is_empty() && lineno == 0 => continue, // header
            Err(_) => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: "non-numeric field".into(),
                })
            }
        };
        if values.len() < 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: "need at least one feature column and one target column".into(),
            });
        }
        if let Some(w) = width {
            if values.len() != w {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected {w} fields, found {}", values.len()),
                });
            }
        } else {
            width = Some(values.len());
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::InvalidDataset("no data rows".into()));
    }
    let n = rows.len();
    let cols = width.unwrap() - 1;
    let x = Matrix::from_fn(n, cols, |i, j| rows[i][j]);
    let targets = match mode {
        LoadMode::Regression => Targets::Reals(rows.iter().map(|r| r[cols]).collect()),
        LoadMode::Classification => {
            let mut labels = Vec::with_capacity(n);
            for (i, r) in rows.iter().enumerate() {
                let raw = r[cols];
                if raw.fract() != 0.0 || raw < 1.0 {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("label {raw} is not a positive integer"),
                    });
                }
                labels.push(raw as usize);
            }
            let class_count = *labels.iter().max().unwrap();
            Targets::Classes { labels, class_count }
        }
    };
    Dataset::new(x, targets)
}
