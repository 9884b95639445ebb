//! Labeled point clouds and their CSV representation.
//!
//! A dataset file has the header `x0,...,x{d-1},y` followed by one row per
//! sample, all fields decimal numbers.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Points `x_i ∈ ℝ^d` (row-major) with binary labels `y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCloud {
    dim: usize,
    points: Vec<f64>,
    labels: Vec<u8>,
    seed: Option<u64>,
    model_id: String,
}

impl LabeledCloud {
    pub fn new(dim: usize, points: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        if points.len() != dim * labels.len() {
            return Err(Error::domain(format!(
                "{} coordinates do not form {} points in dimension {dim}",
                points.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::domain(format!("label {bad} is not binary")));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("point coordinates must be finite"));
        }
        Ok(Self { dim, points, labels, seed: None, model_id: String::from("unknown") })
    }

    pub fn with_provenance(mut self, seed: Option<u64>, model_id: impl Into<String>) -> Self {
        self.seed = seed;
        self.model_id = model_id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn labels_f64(&self) -> Vec<f64> {
        self.labels.iter().map(|&y| f64::from(y)).collect()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    /// Fraction of labels equal to 1.
    pub fn ones_fraction(&self) -> f64 {
        self.labels.iter().filter(|&&y| y == 1).count() as f64 / self.len().max(1) as f64
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let values = self.labels_f64();
        write_valued_csv(w, self.dim, &self.points, &values)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (dim, points, values) = read_valued_csv(r)?;
        let labels = values
            .iter()
            .enumerate()
            .map(|(i, &v)| match v {
                v if v == 0.0 => Ok(0),
                v if v == 1.0 => Ok(1),
                other => Err(Error::domain(format!("row {}: label {other} is not 0 or 1", i + 1))),
            })
            .collect::<Result<Vec<u8>>>()?;
        LabeledCloud::new(dim, points, labels)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

/// Writes points with an arbitrary real value column `y`.
pub fn write_valued_csv<W: Write>(w: W, dim: usize, points: &[f64], values: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    header.push("y".into());
    out.write_record(&header).map_err(csv_err)?;
    for (i, v) in values.iter().enumerate() {
        let mut row: Vec<String> = points[i * dim..(i + 1) * dim].iter().map(|c| c.to_string()).collect();
        row.push(v.to_string());
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `(dim, points, values)` from a dataset-shaped CSV without
/// requiring binary values.
pub fn read_valued_csv<R: Read>(r: R) -> Result<(usize, Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let dim = header.len().checked_sub(1).filter(|&d| d > 0).ok_or_else(|| {
        Error::Parse("dataset header must have at least one coordinate column and `y`".into())
    })?;
    for (k, name) in header.iter().enumerate() {
        let expected = if k == dim { "y".to_string() } else { format!("x{k}") };
        if name != expected {
            return Err(Error::Parse(format!("header column {k} is `{name}`, expected `{expected}`")));
        }
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: field {k} `{field}` is not a number", row + 1)))?;
            if k == dim {
                values.push(v);
            } else {
                points.push(v);
            }
        }
    }
    if values.is_empty() {
        return Err(Error::domain("dataset has no rows"));
    }
    Ok((dim, points, values))
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    } else {
        Error::Parse(e.to_string())
    }
}
