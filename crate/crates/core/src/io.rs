//! Dense tensor import and export.
//!
//! * CSV (order 2 only): one matrix row per line, comma separated, no header.
//! * DSTL binary (any order): `b"DSTL"`, then little-endian `u32` version,
//!   `n` and `p`, followed by `n^p` little-endian `f64` entries in
//!   lexicographic index order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Tensor};

pub const DSTL_MAGIC: &[u8; 4] = b"DSTL";
pub const DSTL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Binary,
}

impl Format {
    /// Guesses the format from a file extension (`.csv` → CSV, otherwise binary).
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn ingest(path: &Path, format: Format) -> Result<DenseTensor> {
    match format {
        Format::Csv => read_csv(path),
        Format::Binary => read_binary(path),
    }
}

pub fn read_csv(path: &Path) -> Result<DenseTensor> {
    let file = File::open(path)?;
    read_csv_from(file, path)
}

pub fn read_csv_from<R: Read>(reader: R, path: &Path) -> Result<DenseTensor> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (row_no, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(row_no as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(
                path,
                format!("line {line}: ragged row with {} fields, expected {w}", record.len()),
            ));
        }
        let mut row = Vec::with_capacity(w);
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                parse_err(path, format!("line {line}, column {}: not a number: {field:?}", col + 1))
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    path,
                    format!("line {line}, column {}: non-finite entry {field:?}", col + 1),
                ));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, "empty matrix"));
    }
    if rows.len() != rows[0].len() {
        return Err(parse_err(
            path,
            format!("matrix is {}x{}, expected square", rows.len(), rows[0].len()),
        ));
    }
    DenseTensor::from_rows(&rows)
}

pub fn write_csv<T: Tensor + ?Sized>(t: &T, path: &Path) -> Result<()> {
    if t.order() != 2 {
        return Err(Error::InvalidArgument(format!(
            "CSV export needs an order-2 tensor, got order {}",
            t.order()
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    let n = t.side();
    for i in 1..=n {
        let line: Vec<String> = (1..=n).map(|j| format!("{:?}", t.value(&[i, j]))).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<DenseTensor> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|_| parse_err(path, "truncated header"))?;
    if &header[0..4] != DSTL_MAGIC {
        return Err(parse_err(path, "bad magic, expected \"DSTL\""));
    }
    let word = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let (version, n, p) = (word(4), word(8) as usize, word(12) as usize);
    if version != DSTL_VERSION {
        return Err(parse_err(path, format!("unsupported version {version}")));
    }
    if n == 0 || p == 0 {
        return Err(parse_err(path, format!("header declares n = {n}, p = {p}")));
    }
    let len = u32::try_from(p)
        .ok()
        .and_then(|p| n.checked_pow(p))
        .ok_or_else(|| Error::Capacity(format!("{n}^{p} entries do not fit in memory")))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(parse_err(
            path,
            format!("header declares {len} entries, payload holds {} bytes", bytes.len()),
        ));
    }
    let mut data = Vec::with_capacity(len);
    for (i, chunk) in bytes.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(parse_err(path, format!("non-finite entry at offset {i}")));
        }
        data.push(v);
    }
    DenseTensor::new(n, p, data)
}

pub fn write_binary<T: Tensor + ?Sized>(t: &T, path: &Path) -> Result<()> {
    let (n, p) = (t.side(), t.order());
    let n32 = u32::try_from(n).map_err(|_| Error::InvalidDimension(format!("n = {n} exceeds u32")))?;
    let p32 = u32::try_from(p).map_err(|_| Error::InvalidDimension(format!("p = {p} exceeds u32")))?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(DSTL_MAGIC)?;
    w.write_all(&DSTL_VERSION.to_le_bytes())?;
    w.write_all(&n32.to_le_bytes())?;
    w.write_all(&p32.to_le_bytes())?;
    let dense = DenseTensor::from_fn(n, p, |idx| t.value(idx))?;
    for v in dense.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn export<T: Tensor + ?Sized>(t: &T, path: &Path, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_csv(t, path),
        Format::Binary => write_binary(t, path),
    }
}
