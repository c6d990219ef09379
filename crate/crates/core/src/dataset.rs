//! Biomarker CSV ingestion and marker orientation.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::ThreeClassSample;

/// Cell contents treated as missing.
const MISSING: [&str; 5] = ["", "NA", "NaN", "nan", "."];

/// One marker measured on three ordered classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerDataset {
    pub marker_name: String,
    pub sample: ThreeClassSample,
    pub class_labels: [String; 3],
    pub oriented: bool,
    /// −1 when every value was negated so that class means increase.
    pub orientation_sign: i8,
    /// Rows dropped because the value or the class label was missing.
    pub dropped_rows: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MarkerDataset {
    /// Dataset from values already split by class.
    pub fn new(
        marker_name: &str,
        sample: ThreeClassSample,
        class_labels: [String; 3],
    ) -> Result<Self> {
        if let Some(k) = sample.sizes().iter().position(|&n| n < 2) {
            return Err(Error::Data(format!(
                "class '{}' has {} usable rows; at least 2 are needed",
                class_labels[k],
                sample.sizes()[k]
            )));
        }
        Ok(Self {
            marker_name: marker_name.to_string(),
            sample,
            class_labels,
            oriented: false,
            orientation_sign: 1,
            dropped_rows: 0,
            warnings: Vec::new(),
        })
    }

    pub fn class_means(&self) -> [f64; 3] {
        [0, 1, 2].map(|k| {
            let c = self.sample.class(k);
            c.iter().sum::<f64>() / c.len() as f64
        })
    }
}

/// Reads `value_column` and `class_column` from a headed, comma-separated
/// file and splits the values by class, class 1 being `class_order[0]`.
pub fn load_csv(
    path: impl AsRef<Path>,
    value_column: &str,
    class_column: &str,
    class_order: &[String; 3],
) -> Result<MarkerDataset> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv(file, value_column, class_column, class_order)
}

/// [`load_csv`] from any reader.
pub fn read_csv<R: io::Read>(
    reader: R,
    value_column: &str,
    class_column: &str,
    class_order: &[String; 3],
) -> Result<MarkerDataset> {
    if class_order[0] == class_order[1]
        || class_order[1] == class_order[2]
        || class_order[0] == class_order[2]
    {
        return Err(Error::InvalidInput(format!(
            "class labels {class_order:?} must be distinct"
        )));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Data(format!(
                "column '{name}' not found; columns are: {}",
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let (vi, ci) = (column(value_column)?, column(class_column)?);
    let mut classes: [Vec<f64>; 3] = Default::default();
    let mut dropped = 0usize;
    for (i, record) in rdr.records().enumerate() {
        // Line numbers count the header as line 1.
        let row = i + 2;
        let record = record.map_err(|e| Error::DataRow {
            row,
            message: e.to_string(),
        })?;
        let (value, label) = (record.get(vi).unwrap_or(""), record.get(ci).unwrap_or(""));
        if MISSING.contains(&value) || MISSING.contains(&label) {
            dropped += 1;
            continue;
        }
        let k = class_order
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::DataRow {
                row,
                message: format!(
                    "class label '{label}' is not one of {}",
                    class_order.join(", ")
                ),
            })?;
        let v: f64 = value
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::DataRow {
                row,
                message: format!("value '{value}' is not a finite number"),
            })?;
        classes[k].push(v);
    }
    if let Some(k) = classes.iter().position(|c| c.len() < 2) {
        return Err(Error::Data(format!(
            "class '{}' has {} usable rows; at least 2 are needed",
            class_order[k],
            classes[k].len()
        )));
    }
    let [a, b, c] = classes;
    let mut ds = MarkerDataset::new(
        value_column,
        ThreeClassSample::new(a, b, c)?,
        class_order.clone(),
    )?;
    ds.dropped_rows = dropped;
    if dropped > 0 {
        ds.warnings.push(format!(
            "{dropped} rows with a missing value or class label were dropped"
        ));
    }
    Ok(ds)
}

/// Makes larger values indicate higher classes. Strictly decreasing class
/// means flip the sign of every value; strictly increasing ones are left
/// alone; any other pattern is left alone with a warning. Applying it twice
/// gives the same result as applying it once.
pub fn orient(dataset: &MarkerDataset) -> MarkerDataset {
    let mut out = dataset.clone();
    if out.oriented {
        return out;
    }
    out.oriented = true;
    let [m1, m2, m3] = out.class_means();
    if m1 > m2 && m2 > m3 {
        out.sample = out
            .sample
            .map(|x| -x)
            .expect("negation keeps values finite");
        out.orientation_sign = -out.orientation_sign;
    } else if !(m1 < m2 && m2 < m3) {
        out.warnings.push(format!(
            "class means ({m1:.4}, {m2:.4}, {m3:.4}) are not monotone; values left unchanged"
        ));
    }
    out
}
