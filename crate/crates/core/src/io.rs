//! CSV datasets and query files, and atomic file output.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Dataset, LabeledSample, Point};
use crate::scalar::Scalar;

fn parse_row<T: Scalar>(rec: &csv::StringRecord, line: u64, width: usize) -> Result<Vec<T>> {
    if rec.len() != width {
        return Err(Error::Parse(format!(
            "line {line}: expected {width} fields, found {}",
            rec.len()
        )));
    }
    rec.iter()
        .enumerate()
        .map(|(i, f)| {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {line}, column {}: `{f}` is not a number", i + 1)))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("line {line}, column {}: value is not finite", i + 1)));
            }
            Ok(T::of(v))
        })
        .collect()
}

fn reader<R: Read>(src: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(src)
}

fn header_width<R: Read>(rdr: &mut csv::Reader<R>) -> Result<Option<usize>> {
    match rdr.headers() {
        Ok(h) if h.is_empty() => Ok(None),
        Ok(h) => Ok(Some(h.len())),
        Err(e) => Err(Error::Parse(format!("line 1: {e}"))),
    }
}

fn rows<T: Scalar, R: Read>(rdr: &mut csv::Reader<R>, width: usize) -> Result<Vec<Vec<T>>> {
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        out.push(parse_row(&rec, line, width)?);
    }
    Ok(out)
}

/// Reads a dataset with header `x1,...,xn,f`.
pub fn read_dataset<T: Scalar, R: Read>(src: R, noise_sigma: T) -> Result<Dataset<T>> {
    let mut rdr = reader(src);
    let width = header_width(&mut rdr)?.ok_or_else(|| Error::Parse("line 1: missing header".into()))?;
    if width < 2 {
        return Err(Error::Parse("line 1: header needs at least one coordinate and a value column".into()));
    }
    let rows: Vec<Vec<T>> = rows(&mut rdr, width)?;
    if rows.is_empty() {
        return Err(Error::Parse("dataset has no samples".into()));
    }
    let samples = rows
        .into_iter()
        .map(|mut r| {
            let v = r.pop().expect("width >= 2");
            LabeledSample::new(Point::new(r)?, v)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(samples, noise_sigma)
}

/// Reads query points with header `x1,...,xn`. An empty file has no points.
pub fn read_points<T: Scalar, R: Read>(src: R) -> Result<Vec<Point<T>>> {
    let mut rdr = reader(src);
    let Some(width) = header_width(&mut rdr)? else {
        return Ok(Vec::new());
    };
    rows(&mut rdr, width)?.into_iter().map(Point::new).collect()
}

pub fn read_dataset_file<T: Scalar>(path: &Path, noise_sigma: T) -> Result<Dataset<T>> {
    let f = fs::File::open(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    read_dataset(f, noise_sigma)
}

pub fn read_points_file<T: Scalar>(path: &Path) -> Result<Vec<Point<T>>> {
    let f = fs::File::open(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    read_points(f)
}

/// Dataset as CSV with header `x1,...,xn,f`.
pub fn dataset_csv<T: Scalar>(data: &Dataset<T>) -> String {
    let mut out: Vec<String> = (1..=data.ambient_dim()).map(|i| format!("x{i}")).collect();
    out.push("f".into());
    let mut s = out.join(",");
    s.push('\n');
    for smp in data.samples() {
        let mut row: Vec<String> = smp.location.coords().iter().map(|c| c.as_f64().to_string()).collect();
        row.push(smp.value.as_f64().to_string());
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::invalid(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}
