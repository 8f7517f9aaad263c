//! CSV and key=value file formats.
//!
//! * Panels: header row of labels, then one comma-separated row per time point.
//! * Matrix paths: long format `t,i,j,value` with 1-based indices and all
//!   `p²` entries per time point.
//! * Coefficient paths: `t,j,k,phi` for `k < j`, 1-based.
//!
//! Floats are written with 17 significant digits so a read reproduces the
//! written value exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::garch::GarchFit;
use crate::linalg::{Matrix, SymMatrix};
use crate::model::CholeskyPath;
use crate::panel::{CovariancePath, TimeSeriesPanel};
use crate::scalar::Scalar;

/// 17 significant digits in scientific notation.
pub fn format_value<S: Scalar>(v: S) -> String {
    format!("{:.16e}", v.as_f64())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_err(path, e))
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn parse_float(path: &Path, line: u64, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(path, line, format!("not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value {field:?}")));
    }
    Ok(v)
}

fn parse_index(path: &Path, line: u64, field: &str, name: &str) -> Result<usize> {
    match field.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v - 1),
        _ => Err(parse_err(path, line, format!("{name} must be a 1-based index, got {field:?}"))),
    }
}

pub fn read_panel_csv<S: Scalar>(path: impl AsRef<Path>) -> Result<TimeSeriesPanel<S>> {
    let path = path.as_ref();
    let mut rdr = csv_reader(path)?;
    let labels: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if labels.is_empty() || labels.iter().any(String::is_empty) {
        return Err(parse_err(path, 1, "header must name every column"));
    }
    let p = labels.len();
    let mut data = Vec::new();
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record_line(&rec);
        if rec.len() != p {
            return Err(parse_err(path, line, format!("expected {p} fields, found {}", rec.len())));
        }
        for field in rec.iter() {
            if field.is_empty() {
                return Err(parse_err(path, line, "missing value"));
            }
            data.push(S::of(parse_float(path, line, field)?));
        }
        n += 1;
    }
    TimeSeriesPanel::new(Matrix::from_row_major(n, p, data)?, labels).map_err(|e| match e {
        Error::InvalidPanel(m) => parse_err(path, 0, m),
        other => other,
    })
}

pub fn write_panel_csv<S: Scalar>(path: impl AsRef<Path>, panel: &TimeSeriesPanel<S>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(panel.labels()).map_err(|e| io_err(path, e))?;
    for t in 0..panel.n() {
        w.write_record(panel.row(t).iter().map(|&v| format_value(v)))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes named columns of equal length.
pub fn write_columns_csv<S: Scalar>(path: impl AsRef<Path>, names: &[&str], columns: &[&[S]]) -> Result<()> {
    let path = path.as_ref();
    let n = columns.first().map_or(0, |c| c.len());
    if names.len() != columns.len() || columns.iter().any(|c| c.len() != n) {
        return Err(Error::DimensionMismatch("column names and lengths disagree".into()));
    }
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(names).map_err(|e| io_err(path, e))?;
    for t in 0..n {
        w.write_record(columns.iter().map(|c| format_value(c[t])))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_matrix_path_csv<S: Scalar>(path: impl AsRef<Path>, cov: &CovariancePath<S>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["t", "i", "j", "value"]).map_err(|e| io_err(path, e))?;
    let p = cov.p();
    for (t, s) in cov.iter().enumerate() {
        for i in 0..p {
            for j in 0..p {
                w.write_record([
                    (t + 1).to_string(),
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    format_value(s[(i, j)]),
                ])
                .map_err(|e| io_err(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a long-format matrix path. Either the full matrix or one triangle
/// may be given per time point; entries given twice must agree.
pub fn read_matrix_path_csv<S: Scalar>(path: impl AsRef<Path>) -> Result<CovariancePath<S>> {
    let path = path.as_ref();
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    let expect = ["t", "i", "j", "value"];
    if headers.len() != 4 || headers.iter().zip(expect).any(|(h, e)| !h.eq_ignore_ascii_case(e)) {
        return Err(parse_err(path, 1, "header must be t,i,j,value"));
    }
    let mut entries = Vec::new();
    let (mut n, mut p) = (0, 0);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record_line(&rec);
        if rec.len() != 4 {
            return Err(parse_err(path, line, format!("expected 4 fields, found {}", rec.len())));
        }
        let t = parse_index(path, line, &rec[0], "t")?;
        let i = parse_index(path, line, &rec[1], "i")?;
        let j = parse_index(path, line, &rec[2], "j")?;
        let v = parse_float(path, line, &rec[3])?;
        n = n.max(t + 1);
        p = p.max(i.max(j) + 1);
        entries.push((t, i, j, v, line));
    }
    if n == 0 {
        return Err(parse_err(path, 1, "no entries"));
    }
    let mut vals: Vec<Option<f64>> = vec![None; n * p * p];
    for (t, i, j, v, line) in entries {
        let (a, b) = if i >= j { (i, j) } else { (j, i) };
        let slot = &mut vals[(t * p + a) * p + b];
        match slot {
            Some(prev) if *prev != v => {
                return Err(parse_err(
                    path,
                    line,
                    format!("entry ({}, {}) at t = {} is not symmetric", i + 1, j + 1, t + 1),
                ))
            }
            _ => *slot = Some(v),
        }
    }
    let mut sigmas = Vec::with_capacity(n);
    for t in 0..n {
        let mut missing = None;
        let s = SymMatrix::from_lower_fn(p, |a, b| match vals[(t * p + a) * p + b] {
            Some(v) => S::of(v),
            None => {
                missing.get_or_insert((a, b));
                S::nan()
            }
        });
        if let Some((a, b)) = missing {
            return Err(parse_err(
                path,
                0,
                format!("missing entry ({}, {}) at t = {}", a + 1, b + 1, t + 1),
            ));
        }
        sigmas.push(s);
    }
    CovariancePath::new(sigmas)
}

/// `t,j,k,phi` rows for every strictly-lower coefficient, in fitted order.
pub fn write_coeff_path_csv<S: Scalar>(path: impl AsRef<Path>, chol: &CholeskyPath<S>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["t", "j", "k", "phi"]).map_err(|e| io_err(path, e))?;
    for (t, tm) in chol.t_path.iter().enumerate() {
        for j in 1..tm.dim() {
            for k in 0..j {
                w.write_record([
                    (t + 1).to_string(),
                    (j + 1).to_string(),
                    (k + 1).to_string(),
                    format_value(tm.coefficient(j, k)),
                ])
                .map_err(|e| io_err(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_garch_params_csv<S: Scalar>(
    path: impl AsRef<Path>,
    labels: &[String],
    fits: &[GarchFit<S>],
) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["series", "omega", "alpha", "beta", "loglik", "converged"])
        .map_err(|e| io_err(path, e))?;
    for (label, f) in labels.iter().zip(fits) {
        w.write_record([
            label.clone(),
            format_value(f.params.omega),
            format_value(f.params.alpha1()),
            format_value(f.params.beta1()),
            format_value(f.loglik),
            f.converged.to_string(),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes `key = value` lines.
pub fn write_key_values(path: impl AsRef<Path>, pairs: &[(String, String)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for (k, v) in pairs {
        writeln!(w, "{k} = {v}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn read_key_values(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| parse_err(path, idx as u64 + 1, format!("expected key = value, got {body:?}")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(parse_err(path, idx as u64 + 1, "empty key"));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panel_parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1,2\n3,4\n5,x\n").unwrap();
        match read_panel_csv::<f64>(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&path, "a,b\n1,2\n3,4\n5,\n").unwrap();
        assert!(matches!(read_panel_csv::<f64>(&path), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn matrix_path_accepts_lower_triangle() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "t,i,j,value\n1,1,1,2.0\n1,2,1,0.5\n1,2,2,3.0\n").unwrap();
        let m: CovariancePath<f64> = read_matrix_path_csv(&path).unwrap();
        assert_eq!(m.at(0)[(0, 1)], 0.5);
        std::fs::write(&path, "t,i,j,value\n1,1,1,2.0\n1,2,2,3.0\n").unwrap();
        assert!(read_matrix_path_csv::<f64>(&path).is_err());
        std::fs::write(&path, "t,i,j,value\n1,1,1,2.0\n1,2,1,0.5\n1,1,2,0.6\n1,2,2,3.0\n").unwrap();
        assert!(read_matrix_path_csv::<f64>(&path).is_err());
    }

    #[test]
    fn key_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg");
        std::fs::write(&path, "# comment\nmodel = cgarch\n\nseed=7 # trailing\n").unwrap();
        let kv = read_key_values(&path).unwrap();
        assert_eq!(kv, vec![("model".into(), "cgarch".into()), ("seed".into(), "7".into())]);
        std::fs::write(&path, "novalue\n").unwrap();
        assert!(matches!(read_key_values(&path), Err(Error::Parse { line: 1, .. })));
    }
}
