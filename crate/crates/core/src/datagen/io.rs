//! Dense-vector dataset files: `.fvecs` and delimited text.
//!
//! An fvecs file is a sequence of records, each a little-endian `i32`
//! dimension `D` followed by `D` little-endian `f32` values. All records in a
//! file share `D`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Streams fvecs records one vector at a time.
pub struct FvecsReader<R> {
    inner: R,
    path: PathBuf,
    offset: u64,
    dim: Option<usize>,
}

impl FvecsReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Ok(Self::new(BufReader::new(File::open(path)?), path))
    }
}

impl<R: Read> FvecsReader<R> {
    pub fn new(inner: R, path: impl Into<PathBuf>) -> Self {
        Self {
            inner,
            path: path.into(),
            offset: 0,
            dim: None,
        }
    }

    /// Dimension of the records seen so far.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    fn format_error(&self, offset: u64, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.clone(),
            offset,
            message: message.into(),
        }
    }

    /// Reads the next record, or `None` at a clean end of file.
    pub fn next_record(&mut self) -> Result<Option<Vec<f32>>> {
        let start = self.offset;
        let mut head = [0u8; 4];
        let got = read_full(&mut self.inner, &mut head)?;
        if got == 0 {
            return Ok(None);
        }
        if got < 4 {
            return Err(self.format_error(start, "truncated record header"));
        }
        let dim = i32::from_le_bytes(head);
        if dim <= 0 {
            return Err(self.format_error(start, format!("non-positive dimension {dim}")));
        }
        let dim = dim as usize;
        if let Some(expected) = self.dim {
            if expected != dim {
                return Err(self.format_error(
                    start,
                    format!("inconsistent dimension {dim}, earlier records have {expected}"),
                ));
            }
        }
        let mut body = vec![0u8; dim * 4];
        let got = read_full(&mut self.inner, &mut body)?;
        if got < body.len() {
            return Err(self.format_error(
                start,
                format!("truncated record: expected {} value bytes, found {got}", body.len()),
            ));
        }
        let values: Vec<f32> = body
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(self.format_error(start + 4 + 4 * i as u64, "non-finite value"));
        }
        self.dim = Some(dim);
        self.offset = start + 4 + body.len() as u64;
        Ok(Some(values))
    }
}

impl<R: Read> Iterator for FvecsReader<R> {
    type Item = Result<Vec<f32>>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_record().transpose()
    }
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Reads a whole fvecs stream into a `D x n` matrix. An empty stream yields a
/// `0 x 0` matrix.
pub fn read_fvecs<R: Read>(reader: R, path: impl Into<PathBuf>) -> Result<DenseMatrix> {
    let mut records = FvecsReader::new(reader, path);
    let mut values = Vec::new();
    let mut n = 0;
    while let Some(rec) = records.next_record()? {
        values.extend_from_slice(&rec);
        n += 1;
    }
    DenseMatrix::new(records.dim().unwrap_or(0), n, values)
}

pub fn load_fvecs(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    read_fvecs(BufReader::new(File::open(path)?), path)
}

/// Appends one fvecs record.
pub fn write_fvecs_record<W: Write>(out: &mut W, values: &[f32]) -> Result<()> {
    let dim = i32::try_from(values.len())
        .map_err(|_| Error::InvalidArgument("vector too long for fvecs".into()))?;
    out.write_all(&dim.to_le_bytes())?;
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_fvecs<W: Write>(out: &mut W, m: &DenseMatrix) -> Result<()> {
    for col in m.columns() {
        write_fvecs_record(out, col)?;
    }
    Ok(())
}

pub fn save_fvecs(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_fvecs(&mut out, m)?;
    out.flush()?;
    Ok(())
}

/// Reads delimited text with one sample per line into a `d x n` matrix.
pub fn load_csv(path: impl AsRef<Path>, delimiter: u8) -> Result<DenseMatrix> {
    let path = path.as_ref();
    read_csv(File::open(path)?, path, delimiter)
}

pub fn read_csv<R: Read>(reader: R, path: impl Into<PathBuf>, delimiter: u8) -> Result<DenseMatrix> {
    let path = path.into();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut dim: Option<usize> = None;
    let mut n = 0;
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.clone(),
        line,
        message,
    };
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match dim {
            Some(d) if d != record.len() => {
                return Err(parse_err(
                    line,
                    format!("ragged row: {} fields, expected {d}", record.len()),
                ))
            }
            _ => dim = Some(record.len()),
        }
        for (i, field) in record.iter().enumerate() {
            let v: f32 = field
                .parse()
                .map_err(|_| parse_err(line, format!("field {} is not a number: {field:?}", i + 1)))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("field {} is not finite", i + 1)));
            }
            values.push(v);
        }
        n += 1;
    }
    DenseMatrix::new(dim.unwrap_or(0), n, values)
}

pub fn save_csv(path: impl AsRef<Path>, m: &DenseMatrix, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_path(path)
        .map_err(|e| Error::Io(e.into()))?;
    for col in m.columns() {
        w.write_record(col.iter().map(|v| v.to_string()))
            .map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}
