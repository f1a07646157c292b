//! Matrix and vector files.
//!
//! CSV cells hold a real number or a complex literal such as `3+4i`,
//! `-1.5-2j` or `2i`. A first row that does not parse is taken as a header.
//! Vector CSVs have one value per row, either as a single complex cell or as
//! two real columns `re,im`. JSON files hold an array (of rows) whose entries
//! are numbers, `[re, im]` pairs or complex strings.

use std::path::Path;

use num_complex::Complex64;
use serde_json::Value;

use crate::error::{QdfError, Result};
use crate::linalg::{CMatrix, CVector};

fn parse_err(path: &Path, msg: impl std::fmt::Display) -> QdfError {
    QdfError::Parse(format!("{}: {msg}", path.display()))
}

/// Parses one cell.
pub fn parse_complex(cell: &str) -> Result<Complex64> {
    let t = cell.trim();
    if t.is_empty() {
        return Err(QdfError::Parse("empty cell".into()));
    }
    let z: Complex64 = t.parse().map_err(|_| QdfError::Parse(format!("not a number: '{t}'")))?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(QdfError::Parse(format!("non-finite value '{t}'")));
    }
    Ok(z)
}

/// Formats a cell so that [`parse_complex`] reads it back exactly.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else if z.im < 0.0 {
        format!("{:?}-{:?}i", z.re, -z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn read_csv_rows(path: &Path) -> Result<Vec<Vec<Complex64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => QdfError::Io(io),
            other => parse_err(path, format!("{other:?}")),
        })?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e))?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let parsed: Result<Vec<Complex64>> = record.iter().map(parse_complex).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => return Err(parse_err(path, format!("row {}: {e}", line + 1))),
        }
    }
    Ok(rows)
}

fn json_entry(v: &Value) -> Result<Complex64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(|x| Complex64::new(x, 0.0))
            .ok_or_else(|| QdfError::Parse(format!("bad number {n}"))),
        Value::String(s) => parse_complex(s),
        Value::Array(pair) if pair.len() == 2 && pair.iter().all(Value::is_number) => {
            Ok(Complex64::new(pair[0].as_f64().unwrap_or(f64::NAN), pair[1].as_f64().unwrap_or(f64::NAN)))
        }
        other => Err(QdfError::Parse(format!("unsupported entry {other}"))),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

fn rows_to_matrix(path: &Path, rows: Vec<Vec<Complex64>>) -> Result<CMatrix> {
    let m = rows.len();
    if m == 0 {
        return Err(parse_err(path, "no data rows"));
    }
    let n = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(parse_err(path, format!("row {} has {} entries, expected {n}", i + 1, r.len())));
    }
    Ok(CMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    let rows = if is_json(path) {
        match read_json(path)? {
            Value::Array(rows) => rows
                .iter()
                .map(|row| match row {
                    Value::Array(cells) => cells.iter().map(json_entry).collect::<Result<Vec<_>>>(),
                    _ => Err(QdfError::Parse("matrix rows must be arrays".into())),
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| parse_err(path, e))?,
            _ => return Err(parse_err(path, "expected an array of rows")),
        }
    } else {
        read_csv_rows(path)?
    };
    rows_to_matrix(path, rows)
}

pub fn read_vector(path: &Path) -> Result<CVector> {
    let values = if is_json(path) {
        match read_json(path)? {
            Value::Array(cells) => {
                cells.iter().map(json_entry).collect::<Result<Vec<_>>>().map_err(|e| parse_err(path, e))?
            }
            _ => return Err(parse_err(path, "expected an array")),
        }
    } else {
        let rows = read_csv_rows(path)?;
        let mut values = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            match row.as_slice() {
                [z] => values.push(*z),
                [re, im] if re.im == 0.0 && im.im == 0.0 => values.push(Complex64::new(re.re, im.re)),
                _ => {
                    // a single row of values is accepted as a row vector
                    if rows.len() == 1 {
                        values.extend_from_slice(row);
                    } else {
                        return Err(parse_err(path, format!("row {} has {} entries", i + 1, row.len())));
                    }
                }
            }
        }
        values
    };
    if values.is_empty() {
        return Err(parse_err(path, "no values"));
    }
    Ok(CVector::from_vec(values))
}

/// Writes a matrix as CSV with a `c0,c1,…` header.
pub fn write_matrix_csv(path: &Path, a: &CMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| parse_err(path, e))?;
    let header: Vec<String> = (0..a.ncols()).map(|j| format!("c{j}")).collect();
    w.write_record(&header).map_err(|e| parse_err(path, e))?;
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| format_complex(a[(i, j)])).collect();
        w.write_record(&row).map_err(|e| parse_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a vector as CSV with columns `re,im`.
pub fn write_vector_csv(path: &Path, v: &CVector) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| parse_err(path, e))?;
    w.write_record(["re", "im"]).map_err(|e| parse_err(path, e))?;
    for z in v.iter() {
        w.write_record([format!("{:?}", z.re), format!("{:?}", z.im)]).map_err(|e| parse_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}
