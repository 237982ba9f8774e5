//! Point-set files: a header `x1,…,xd[,f]` followed by one row per point.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use pumbo_core::{Error as CoreError, PointSet, Points};

use crate::error::{CliError, Result};

/// A loaded file after removal of repeated rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub set: PointSet,
    /// Data rows (1-based, header excluded) dropped as repeats of an earlier row.
    pub dropped_rows: Vec<usize>,
}

pub fn load_csv(path: &Path) -> Result<Loaded> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv(file, path)
}

/// Parses point-set CSV from `reader`; `path` is only used in messages.
pub fn read_csv<R: Read>(reader: R, path: &Path) -> Result<Loaded> {
    let parse_err = |line: u64, msg: String| CliError::Parse { path: path.to_path_buf(), line, msg };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);

    let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let has_values = names.last() == Some(&"f");
    let dim = names.len() - usize::from(has_values);
    if dim == 0 || names.iter().take(dim).enumerate().any(|(i, n)| *n != format!("x{}", i + 1)) {
        return Err(parse_err(1, format!("expected header `x1,...,xd[,f]`, found `{}`", names.join(","))));
    }

    let width = names.len();
    let mut coords = Vec::new();
    let mut values = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(row as u64 + 2, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        if !more {
            break;
        }
        row += 1;
        let line = record.position().map_or(row as u64 + 1, |p| p.line());
        if record.len() != width {
            return Err(parse_err(line, format!("data row {row}: expected {width} fields, found {}", record.len())));
        }
        for (k, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                parse_err(line, format!("data row {row}: `{cell}` in column {} is not a number", names[k]))
            })?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("data row {row}: non-finite value in column {}", names[k])));
            }
            if k < dim {
                coords.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if row == 0 {
        return Err(CliError::Data { path: path.to_path_buf(), msg: "no data rows".into() });
    }

    let points = Points::new(dim, coords)?;
    let set = PointSet::new(points, has_values.then_some(values))?;
    match set.dedup() {
        Ok((set, dropped)) => Ok(Loaded { set, dropped_rows: dropped.into_iter().map(|i| i + 1).collect() }),
        Err(CoreError::ConflictingDuplicate { first, second }) => Err(CliError::Data {
            path: path.to_path_buf(),
            msg: format!("data rows {} and {} share coordinates but have different values", first + 1, second + 1),
        }),
        Err(e) => Err(e.into()),
    }
}

pub fn save_csv(path: &Path, set: &PointSet) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv(&mut out, set.points(), set.values()).and_then(|_| out.flush()).map_err(|e| CliError::io(path, e))
}

/// Writes coordinates (and values if given) with 17 significant digits.
pub fn write_csv<W: Write>(out: &mut W, points: &Points, values: Option<&[f64]>) -> io::Result<()> {
    let mut header: Vec<String> = (1..=points.dim()).map(|i| format!("x{i}")).collect();
    if values.is_some() {
        header.push("f".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for (i, p) in points.iter().enumerate() {
        let mut cells: Vec<String> = p.iter().map(|c| format_f64(*c)).collect();
        if let Some(v) = values {
            cells.push(format_f64(v[i]));
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}
