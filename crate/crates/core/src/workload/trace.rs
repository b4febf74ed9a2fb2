//! Line-oriented trace format: `S lo.. hi..`, `I c..`, `E`.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::TraceOp;
use crate::error::{Error, Result};
use crate::point::{Point, QueryBox};

pub fn format_trace(ops: &[TraceOp]) -> String {
    let mut out = String::new();
    for op in ops {
        match op {
            TraceOp::Search(q) => {
                out.push('S');
                for c in q.lo().coords().iter().chain(q.hi().coords()) {
                    let _ = write!(out, " {c}");
                }
            }
            TraceOp::Insert(p) => {
                out.push('I');
                for c in p.coords() {
                    let _ = write!(out, " {c}");
                }
            }
            TraceOp::EraseRandomLive => out.push('E'),
        }
        out.push('\n');
    }
    out
}

pub fn write_trace(path: &Path, ops: &[TraceOp]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(format_trace(ops).as_bytes())?;
    f.flush()?;
    Ok(())
}

fn parse_line(line: &str, dims: usize, line_no: u64) -> Result<Option<TraceOp>> {
    let err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let mut fields = line.split_whitespace();
    let Some(tag) = fields.next() else {
        return Ok(None);
    };
    let values = fields
        .map(|f| {
            f.parse::<f64>()
                .map_err(|e| err(format!("bad number {f:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let expect = |n: usize| {
        if values.len() == n {
            Ok(())
        } else {
            Err(err(format!(
                "expected {n} values after {tag}, found {}",
                values.len()
            )))
        }
    };
    let op = match tag {
        "S" => {
            expect(2 * dims)?;
            let q = QueryBox::from_coords(&values[..dims], &values[dims..])
                .map_err(|e| err(e.to_string()))?;
            TraceOp::Search(q)
        }
        "I" => {
            expect(dims)?;
            TraceOp::Insert(Point::new(values).map_err(|e| err(e.to_string()))?)
        }
        "E" => {
            expect(0)?;
            TraceOp::EraseRandomLive
        }
        other => return Err(err(format!("unknown op {other:?}"))),
    };
    Ok(Some(op))
}

/// Parses a trace; blank lines are skipped.
pub fn parse_trace(reader: impl BufRead, dims: usize) -> Result<Vec<TraceOp>> {
    let mut ops = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        if let Some(op) = parse_line(&line?, dims, i as u64 + 1)? {
            ops.push(op);
        }
    }
    Ok(ops)
}

pub fn read_trace(path: &Path, dims: usize) -> Result<Vec<TraceOp>> {
    parse_trace(BufReader::new(std::fs::File::open(path)?), dims)
}
