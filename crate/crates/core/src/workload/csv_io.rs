use std::collections::HashSet;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Clone, Debug, Serialize)]
pub struct CsvIngest {
    #[serde(skip)]
    pub points: Vec<Point>,
    pub rows: u64,
    pub duplicates: u64,
    pub non_finite: u64,
    /// Per-axis minimum and maximum of the accepted points.
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Loads points from the first `dims` numeric fields of each row.
/// Duplicates collapse to their first occurrence; rows with non-finite
/// values are dropped and counted.
pub fn ingest_csv(path: &Path, dims: usize, has_header: bool) -> Result<CsvIngest> {
    if dims < 2 {
        return Err(Error::TooFewDimensions(dims));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })?;
    let mut out = CsvIngest {
        points: Vec::new(),
        rows: 0,
        duplicates: 0,
        non_finite: 0,
        min: vec![f64::INFINITY; dims],
        max: vec![f64::NEG_INFINITY; dims],
    };
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        out.rows += 1;
        let coords: Vec<f64> = record
            .iter()
            .filter_map(|f| f.parse::<f64>().ok())
            .take(dims)
            .collect();
        if coords.len() < dims {
            return Err(Error::Parse {
                line,
                message: format!("expected {dims} numeric fields, found {}", coords.len()),
            });
        }
        let Ok(p) = Point::new(coords) else {
            out.non_finite += 1;
            continue;
        };
        if !seen.insert(p.clone()) {
            out.duplicates += 1;
            continue;
        }
        for (axis, &c) in p.coords().iter().enumerate() {
            out.min[axis] = out.min[axis].min(c);
            out.max[axis] = out.max[axis].max(c);
        }
        out.points.push(p);
    }
    Ok(out)
}

pub fn write_csv(path: &Path, points: &[Point]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
    for p in points {
        w.write_record(p.coords().iter().map(|c| c.to_string()))
            .map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}
