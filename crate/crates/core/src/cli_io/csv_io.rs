use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;

use crate::clustering::Dataset;
use crate::error::{Error, Result};

/// A CSV column chosen by header name or by 0-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl FromStr for ColumnRef {
    type Err = Error;

    /// Digits select by index, anything else by name.
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidArgument("empty column reference".into()));
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnRef::Name(n) => f.write_str(n),
            ColumnRef::Index(i) => write!(f, "{i}"),
        }
    }
}

/// How to read a CSV file into a [`Dataset`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvFormat {
    pub has_header: bool,
    pub label: Option<ColumnRef>,
    pub id: Option<ColumnRef>,
    /// Reject negative features (needed before kernel mapping).
    pub require_nonnegative: bool,
}

fn resolve(col: &ColumnRef, header: Option<&csv::StringRecord>, width: usize) -> Result<usize> {
    let idx = match col {
        ColumnRef::Index(i) => *i,
        ColumnRef::Name(name) => header
            .ok_or_else(|| {
                Error::InvalidArgument(format!("column '{name}' named but the file has no header"))
            })?
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no column named '{name}'")))?,
    };
    if idx >= width {
        return Err(Error::InvalidArgument(format!(
            "column index {idx} out of range for {width} columns"
        )));
    }
    Ok(idx)
}

fn parse_label(s: &str) -> Option<i64> {
    s.parse::<i64>().ok().or_else(|| {
        let v = s.parse::<f64>().ok()?;
        (v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
    })
}

/// Reads a comma-separated file with one sample per row.
pub fn load_dataset(path: &Path, format: &CsvFormat) -> Result<Dataset> {
    read_dataset(File::open(path)?, format)
}

/// [`load_dataset`] over any reader.
pub fn read_dataset<R: std::io::Read>(reader: R, format: &CsvFormat) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = if format.has_header {
        match records.next() {
            Some(r) => Some(r?),
            None => return Err(Error::Empty("file has no rows")),
        }
    } else {
        None
    };

    let mut width: Option<usize> = header.as_ref().map(|h| h.len());
    let mut label_idx = None;
    let mut id_idx = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    let mut n = 0;
    let mut d = 0;
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::Parse {
                line,
                column: rec.len().min(w) + 1,
                message: format!("expected {w} fields, found {}", rec.len()),
            });
        }
        if n == 0 {
            label_idx = format.label.as_ref().map(|c| resolve(c, header.as_ref(), w)).transpose()?;
            id_idx = format.id.as_ref().map(|c| resolve(c, header.as_ref(), w)).transpose()?;
            if label_idx.is_some() && label_idx == id_idx {
                return Err(Error::InvalidArgument("label and id columns coincide".into()));
            }
            d = w - usize::from(label_idx.is_some()) - usize::from(id_idx.is_some());
        }
        for (c, field) in rec.iter().enumerate() {
            if Some(c) == label_idx {
                labels.push(parse_label(field).ok_or_else(|| Error::Parse {
                    line,
                    column: c + 1,
                    message: format!("label '{field}' is not an integer"),
                })?);
            } else if Some(c) == id_idx {
                ids.push(field.to_string());
            } else {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    column: c + 1,
                    message: format!("'{field}' is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        column: c + 1,
                        message: format!("'{field}' is not finite"),
                    });
                }
                values.push(v);
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty("file has no data rows"));
    }
    let values = Array2::from_shape_vec((n, d), values)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut ds = Dataset::new(values)?;
    if label_idx.is_some() {
        ds = ds.with_labels(labels)?;
    }
    if id_idx.is_some() {
        ds = ds.with_ids(ids)?;
    }
    if format.require_nonnegative {
        ds.check_nonnegative()?;
    }
    Ok(ds)
}

/// Writes a matrix as CSV with header `f0,f1,...` and, when given, a
/// trailing `label` column. Floats use the shortest representation that
/// parses back to the same value.
pub fn write_matrix_csv<W: Write>(
    out: W,
    values: &Array2<f64>,
    labels: Option<&[i64]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..values.ncols()).map(|j| format!("f{j}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for (i, row) in values.outer_iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = labels {
            rec.push(l[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one integer per line; blank lines are skipped and a non-numeric
/// first line is treated as a header.
pub fn read_int_column(path: &Path) -> Result<Vec<i64>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        match parse_label(t) {
            Some(v) => out.push(v),
            None if i == 0 => continue,
            None => {
                return Err(Error::Parse {
                    line: i + 1,
                    column: 1,
                    message: format!("'{t}' is not an integer"),
                })
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Empty("integer column"));
    }
    Ok(out)
}

/// One assignment per line.
pub fn write_int_column<W: Write>(mut out: W, values: &[usize]) -> Result<()> {
    for v in values {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}
