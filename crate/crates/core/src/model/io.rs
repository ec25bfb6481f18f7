//! LIBSVM and CSV readers/writers. Sparse input is densified.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use super::Dataset;
use crate::error::{Error, Result};

fn parse_label(tok: &str) -> std::result::Result<f64, String> {
    let v: f64 = tok
        .parse()
        .map_err(|_| format!("cannot parse label {tok:?}"))?;
    if v == 1.0 {
        Ok(1.0)
    } else if v == -1.0 || v == 0.0 {
        Ok(-1.0)
    } else {
        Err(format!("label {tok:?} does not map to -1 or +1"))
    }
}

type SparseRow = Vec<(usize, f64)>;

fn parse_libsvm_line(line: &str) -> std::result::Result<(f64, SparseRow), String> {
    let mut toks = line.split_whitespace();
    let label = parse_label(toks.next().ok_or("empty line")?)?;
    let mut entries = Vec::new();
    let mut last = 0usize;
    for tok in toks {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| format!("expected idx:val, got {tok:?}"))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| format!("bad feature index {idx:?}"))?;
        if idx == 0 {
            return Err("feature indices are 1-based".into());
        }
        if idx <= last {
            return Err(format!(
                "feature index {idx} is not strictly increasing (previous {last})"
            ));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| format!("bad feature value {val:?}"))?;
        if !val.is_finite() {
            return Err(format!("non-finite feature value {val}"));
        }
        last = idx;
        entries.push((idx - 1, val));
    }
    Ok((label, entries))
}

/// Reads a LIBSVM text file, maps 0/1 labels onto -1/+1 and shuffles the
/// rows once with `seed`. The dimension is the largest index seen.
pub fn load_libsvm(path: impl AsRef<Path>, seed: u64) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    let mut rows: Vec<SparseRow> = Vec::new();
    let mut p = 0usize;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (y, entries) = parse_libsvm_line(trimmed).map_err(|msg| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        })?;
        if let Some(&(j, _)) = entries.last() {
            p = p.max(j + 1);
        }
        labels.push(y);
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: "no samples".into(),
        });
    }
    if p == 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: "no features".into(),
        });
    }
    let mut x = Array2::<f64>::zeros((rows.len(), p));
    for (k, entries) in rows.iter().enumerate() {
        for &(j, v) in entries {
            x[[k, j]] = v;
        }
    }
    Ok(Dataset::new(x, labels, seed)?.shuffled(seed))
}

/// Reads a CSV file with header `label,f1,...,fp`, then shuffles like
/// [`load_libsvm`].
pub fn load_csv(path: impl AsRef<Path>, seed: u64) -> Result<Dataset> {
    let path = path.as_ref();
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| parse_err(0, e.to_string()))?;
    let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let p = header.len().saturating_sub(1);
    let header_ok = header.get(0) == Some("label")
        && (1..=p).all(|j| header.get(j) == Some(format!("f{j}").as_str()));
    if p == 0 || !header_ok {
        return Err(parse_err(1, "header must be label,f1,...,fp".into()));
    }
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        if rec.len() != p + 1 {
            return Err(parse_err(line, format!("expected {} fields, got {}", p + 1, rec.len())));
        }
        labels.push(parse_label(rec[0].trim()).map_err(|m| parse_err(line, m))?);
        for j in 1..=p {
            let v: f64 = rec[j]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad value {:?}", &rec[j])))?;
            values.push(v);
        }
    }
    if labels.is_empty() {
        return Err(parse_err(0, "no samples".into()));
    }
    let x = Array2::from_shape_vec((labels.len(), p), values)
        .map_err(|e| parse_err(0, e.to_string()))?;
    Ok(Dataset::new(x, labels, seed)?.shuffled(seed))
}

/// Writes rows in LIBSVM format, skipping zero entries. Labels print as +1/-1.
pub fn write_libsvm(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let io = |e| Error::io(path, e);
    for k in 0..data.len() {
        let y = if data.label(k) > 0.0 { "+1" } else { "-1" };
        write!(w, "{y}").map_err(io)?;
        for (j, v) in data.row(k).iter().enumerate() {
            if *v != 0.0 {
                write!(w, " {}:{}", j + 1, v).map_err(io)?;
            }
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let io = |e| Error::io(path, e);
    write!(w, "label").map_err(io)?;
    for j in 1..=data.dim() {
        write!(w, ",f{j}").map_err(io)?;
    }
    writeln!(w).map_err(io)?;
    for k in 0..data.len() {
        write!(w, "{}", data.label(k)).map_err(io)?;
        for v in data.row(k) {
            write!(w, ",{v}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}
