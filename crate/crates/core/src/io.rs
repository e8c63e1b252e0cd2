//! Sample files: CSV with a header row naming the columns `x_1..x_N`, then
//! optionally `y` (label) and `w` (weight). Missing weights mean uniform.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{merge_duplicates, LabeledSample, WeightedEmpirical};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleFile {
    pub points: Vec<Vec<f64>>,
    pub labels: Option<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
}

impl SampleFile {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Weighted support; repeated points are merged.
    pub fn to_empirical(&self) -> Result<WeightedEmpirical> {
        let weights = self.weights.clone().unwrap_or_else(|| vec![1.0; self.points.len()]);
        merge_duplicates(self.points.clone(), weights)
    }

    pub fn to_labeled(&self) -> Result<LabeledSample> {
        let labels = self
            .labels
            .clone()
            .ok_or_else(|| Error::param("y", "sample file has no label column"))?;
        LabeledSample::new(self.points.clone(), labels)
    }
}

struct Layout {
    dim: usize,
    y: Option<usize>,
    w: Option<usize>,
}

fn layout(header: &csv::StringRecord) -> Result<Layout> {
    let bad = |message: String| Error::Parse { line: 1, message };
    let mut dim = 0;
    let (mut y, mut w) = (None, None);
    for (col, name) in header.iter().enumerate() {
        match name.trim() {
            "y" if y.is_none() && w.is_none() => y = Some(col),
            "w" if w.is_none() => w = Some(col),
            other => {
                let expected = format!("x_{}", dim + 1);
                if other != expected || y.is_some() || w.is_some() {
                    return Err(bad(format!("unexpected column `{other}` at position {}", col + 1)));
                }
                dim += 1;
            }
        }
    }
    if dim == 0 {
        return Err(bad("header names no x_1 column".into()));
    }
    Ok(Layout { dim, y, w })
}

pub fn read_sample_csv<R: Read>(reader: R) -> Result<SampleFile> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let layout = layout(header)?;
    let width = layout.dim + usize::from(layout.y.is_some()) + usize::from(layout.w.is_some());

    let mut file = SampleFile {
        points: Vec::new(),
        labels: layout.y.map(|_| Vec::new()),
        weights: layout.w.map(|_| Vec::new()),
    };
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let mut values = Vec::with_capacity(width);
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {}: `{field}` is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column {}: value is not finite", col + 1),
                });
            }
            values.push(v);
        }
        file.points.push(values[..layout.dim].to_vec());
        if let (Some(c), Some(labels)) = (layout.y, file.labels.as_mut()) {
            labels.push(values[c]);
        }
        if let (Some(c), Some(weights)) = (layout.w, file.weights.as_mut()) {
            if values[c] < 0.0 {
                return Err(Error::Parse {
                    line,
                    message: "negative weight".into(),
                });
            }
            weights.push(values[c]);
        }
    }
    if file.points.is_empty() {
        return Err(Error::EmptySupport);
    }
    Ok(file)
}

pub fn read_sample_file(path: impl AsRef<Path>) -> Result<SampleFile> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_sample_csv(f)
}

pub fn write_sample_csv<W: Write>(writer: W, file: &SampleFile) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=file.dim()).map(|i| format!("x_{i}")).collect();
    if file.labels.is_some() {
        header.push("y".into());
    }
    if file.weights.is_some() {
        header.push("w".into());
    }
    wtr.write_record(&header).map_err(io)?;
    for (i, x) in file.points.iter().enumerate() {
        let mut row: Vec<String> = x.iter().map(f64::to_string).collect();
        if let Some(labels) = &file.labels {
            row.push(labels[i].to_string());
        }
        if let Some(weights) = &file.weights {
            row.push(weights[i].to_string());
        }
        wtr.write_record(&row).map_err(io)?;
    }
    wtr.flush().map_err(|e| Error::Io(e.to_string()))
}
