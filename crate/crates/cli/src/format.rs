//! Binary layouts for projection models (`WTAH`) and code sets (`WTAY`).
//!
//! All integers are little-endian. Both files end with an FNV-1a 64-bit
//! checksum of every preceding byte.
//!
//! ```text
//! WTAH: "WTAH" | version u32 | d u32 | d_out u32 | k u32 | c u32 | seed u64
//!       | d_out rows x c ascending u32 column indices | checksum u64
//! WTAY: "WTAY" | version u32 | d_out u32 | k u32
//!       | n columns x k ascending u32 row indices    | checksum u64
//! ```
//!
//! A code file carries no column count; it follows from the file length, which
//! lets codes be streamed out without seeking back.

use std::fs::File;
use std::hash::Hasher;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use wtahash::{Axis, BinaryCodeMatrix, ModelConfig};

pub const MODEL_MAGIC: &[u8; 4] = b"WTAH";
pub const CODES_MAGIC: &[u8; 4] = b"WTAY";
pub const VERSION: u32 = 1;
pub const MODEL_HEADER_LEN: usize = 32;
pub const CODES_HEADER_LEN: usize = 16;
pub const CHECKSUM_LEN: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("{path}: checksum mismatch (stored {stored:#018x}, computed {computed:#018x})")]
    Checksum {
        path: PathBuf,
        stored: u64,
        computed: u64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Exact size of a model file.
pub fn model_file_len(d_out: usize, c: usize) -> usize {
    MODEL_HEADER_LEN + 4 * d_out * c + CHECKSUM_LEN
}

/// Exact size of a code file holding `n` codes of weight `k`.
pub fn codes_file_len(n: usize, k: usize) -> usize {
    CODES_HEADER_LEN + 4 * n * k + CHECKSUM_LEN
}

/// Writer that checksums everything passing through it.
struct Checksummed<W> {
    inner: W,
    hasher: FnvHasher,
}

impl<W: Write> Checksummed<W> {
    fn new(inner: W) -> Self {
        Self {
            inner,
            hasher: FnvHasher::default(),
        }
    }

    fn put_u32(&mut self, v: u32) -> io::Result<()> {
        self.write_all(&v.to_le_bytes())
    }

    fn finish(mut self) -> io::Result<W> {
        let sum = self.hasher.finish();
        self.inner.write_all(&sum.to_le_bytes())?;
        self.inner.flush()?;
        Ok(self.inner)
    }
}

impl<W: Write> Write for Checksummed<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.write(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn checksum(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

fn to_u32(v: usize, what: &str) -> io::Result<u32> {
    u32::try_from(v).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, format!("{what} exceeds u32")))
}

pub fn write_model<W: Write>(out: W, config: &ModelConfig, w: &BinaryCodeMatrix) -> io::Result<W> {
    if w.axis() != Axis::PerRow || w.rows() != config.d_out || w.cols() != config.d || w.weight() != config.c {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "projection matrix does not match model config",
        ));
    }
    let mut out = Checksummed::new(out);
    out.write_all(MODEL_MAGIC)?;
    out.put_u32(VERSION)?;
    out.put_u32(to_u32(config.d, "d")?)?;
    out.put_u32(to_u32(config.d_out, "d_out")?)?;
    out.put_u32(to_u32(config.k, "k")?)?;
    out.put_u32(to_u32(config.c, "c")?)?;
    out.write_all(&config.seed.to_le_bytes())?;
    for &i in w.indices() {
        out.put_u32(i)?;
    }
    out.finish()
}

pub fn save_model(path: &Path, config: &ModelConfig, w: &BinaryCodeMatrix) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_model(BufWriter::new(file), config, w).map_err(io_err)?;
    Ok(())
}

/// Cursor over a checksum-verified payload.
struct Payload<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Payload<'a> {
    fn verify(path: &'a Path, bytes: &'a [u8], magic: &[u8; 4], header_len: usize) -> Result<Self, FormatError> {
        let invalid = |message: String| FormatError::Invalid {
            path: path.to_path_buf(),
            message,
        };
        if bytes.len() < header_len + CHECKSUM_LEN {
            return Err(invalid(format!("file too short ({} bytes)", bytes.len())));
        }
        if &bytes[..4] != magic {
            return Err(invalid(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&bytes[..4]),
                String::from_utf8_lossy(magic)
            )));
        }
        let (body, tail) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
        let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
        let computed = checksum(body);
        if stored != computed {
            return Err(FormatError::Checksum {
                path: path.to_path_buf(),
                stored,
                computed,
            });
        }
        let mut p = Self { path, bytes: body, pos: 4 };
        let version = p.u32();
        if version != VERSION {
            return Err(invalid(format!("unsupported version {version}")));
        }
        Ok(p)
    }

    fn u32(&mut self) -> u32 {
        let v = u32::from_le_bytes(self.bytes[self.pos..self.pos + 4].try_into().expect("4 bytes"));
        self.pos += 4;
        v
    }

    fn u64(&mut self) -> u64 {
        let v = u64::from_le_bytes(self.bytes[self.pos..self.pos + 8].try_into().expect("8 bytes"));
        self.pos += 8;
        v
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn indices(&mut self) -> Vec<u32> {
        let out = self.bytes[self.pos..]
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")))
            .collect();
        self.pos = self.bytes.len();
        out
    }

    fn invalid(&self, message: impl Into<String>) -> FormatError {
        FormatError::Invalid {
            path: self.path.to_path_buf(),
            message: message.into(),
        }
    }
}

fn read_all(path: &Path) -> Result<Vec<u8>, FormatError> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| FormatError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(bytes)
}

pub fn parse_model(path: &Path, bytes: &[u8]) -> Result<(ModelConfig, BinaryCodeMatrix), FormatError> {
    // Report truncation before the checksum, which would fail for it anyway.
    if bytes.len() >= MODEL_HEADER_LEN && &bytes[..4] == MODEL_MAGIC {
        let field = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as u64;
        let expected = field(12)
            .checked_mul(field(20))
            .and_then(|n| n.checked_mul(4))
            .and_then(|n| n.checked_add((MODEL_HEADER_LEN + CHECKSUM_LEN) as u64));
        if expected != Some(bytes.len() as u64) {
            return Err(FormatError::Invalid {
                path: path.to_path_buf(),
                message: format!(
                    "file is {} bytes but its header describes {}",
                    bytes.len(),
                    expected.map_or_else(|| "an impossible size".to_string(), |n| format!("{n} bytes"))
                ),
            });
        }
    }
    let mut p = Payload::verify(path, bytes, MODEL_MAGIC, MODEL_HEADER_LEN)?;
    let (d, d_out, k, c) = (
        p.u32() as usize,
        p.u32() as usize,
        p.u32() as usize,
        p.u32() as usize,
    );
    let seed = p.u64();
    let config = ModelConfig { d, d_out, k, c, seed };
    config
        .validate()
        .map_err(|e| p.invalid(format!("invalid header: {e}")))?;
    if p.remaining() != 4 * d_out * c {
        return Err(p.invalid(format!(
            "expected {} index bytes for {d_out} rows of {c}, found {}",
            4 * d_out * c,
            p.remaining()
        )));
    }
    let w = BinaryCodeMatrix::from_sorted_indices(d_out, d, c, Axis::PerRow, p.indices())
        .map_err(|e| p.invalid(e.to_string()))?;
    Ok((config, w))
}

pub fn load_model(path: &Path) -> Result<(ModelConfig, BinaryCodeMatrix), FormatError> {
    parse_model(path, &read_all(path)?)
}

/// Streams codes into a `WTAY` file.
pub struct CodeWriter<W: Write> {
    out: Checksummed<W>,
    d_out: usize,
    k: usize,
    count: usize,
}

impl<W: Write> CodeWriter<W> {
    pub fn new(out: W, d_out: usize, k: usize) -> io::Result<Self> {
        let mut out = Checksummed::new(out);
        out.write_all(CODES_MAGIC)?;
        out.put_u32(VERSION)?;
        out.put_u32(to_u32(d_out, "d_out")?)?;
        out.put_u32(to_u32(k, "k")?)?;
        Ok(Self { out, d_out, k, count: 0 })
    }

    /// Appends one code given as `k` ascending row indices.
    pub fn push(&mut self, code: &[u32]) -> io::Result<()> {
        let ok = code.len() == self.k
            && code.windows(2).all(|p| p[0] < p[1])
            && code.last().is_none_or(|&i| (i as usize) < self.d_out);
        if !ok {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("code {code:?} is not {} ascending indices below {}", self.k, self.d_out),
            ));
        }
        for &i in code {
            self.out.put_u32(i)?;
        }
        self.count += 1;
        Ok(())
    }

    pub fn push_all(&mut self, codes: &BinaryCodeMatrix) -> io::Result<()> {
        codes.lines().try_for_each(|c| self.push(c))
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(self) -> io::Result<W> {
        self.out.finish()
    }
}

pub fn save_codes(path: &Path, codes: &BinaryCodeMatrix) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = CodeWriter::new(BufWriter::new(file), codes.rows(), codes.weight()).map_err(io_err)?;
    w.push_all(codes).map_err(io_err)?;
    w.finish().map_err(io_err)?;
    Ok(())
}

pub fn parse_codes(path: &Path, bytes: &[u8]) -> Result<BinaryCodeMatrix, FormatError> {
    let mut p = Payload::verify(path, bytes, CODES_MAGIC, CODES_HEADER_LEN)?;
    let (d_out, k) = (p.u32() as usize, p.u32() as usize);
    if k == 0 || k > d_out {
        return Err(p.invalid(format!("invalid header: k = {k}, d_out = {d_out}")));
    }
    if p.remaining() % (4 * k) != 0 {
        return Err(p.invalid(format!(
            "payload of {} bytes is not a whole number of {k}-index codes",
            p.remaining()
        )));
    }
    let n = p.remaining() / (4 * k);
    BinaryCodeMatrix::from_sorted_indices(d_out, n, k, Axis::PerColumn, p.indices())
        .map_err(|e| p.invalid(e.to_string()))
}

pub fn load_codes(path: &Path) -> Result<BinaryCodeMatrix, FormatError> {
    parse_codes(path, &read_all(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_model() -> (ModelConfig, BinaryCodeMatrix) {
        let cfg = ModelConfig::new(5, 3, 1, Some(2), 42).unwrap();
        let w = BinaryCodeMatrix::from_lines(3, 5, 2, Axis::PerRow, [vec![0u32, 4], vec![1, 2], vec![3, 4]])
            .unwrap();
        (cfg, w)
    }

    #[test]
    fn model_layout() {
        let (cfg, w) = sample_model();
        let bytes = write_model(Vec::new(), &cfg, &w).unwrap();
        assert_eq!(bytes.len(), model_file_len(3, 2));
        assert_eq!(&bytes[..4], b"WTAH");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[24..32], &42u64.to_le_bytes());
        assert_eq!(&bytes[32..36], &0u32.to_le_bytes());
        assert_eq!(&bytes[36..40], &4u32.to_le_bytes());
        let (cfg2, w2) = parse_model(Path::new("mem"), &bytes).unwrap();
        assert_eq!(cfg2, cfg);
        assert_eq!(w2, w);
    }

    #[test]
    fn corruption_is_detected() {
        let (cfg, w) = sample_model();
        let mut bytes = write_model(Vec::new(), &cfg, &w).unwrap();
        bytes[34] ^= 1;
        assert!(matches!(
            parse_model(Path::new("mem"), &bytes),
            Err(FormatError::Checksum { .. })
        ));
        let bytes = write_model(Vec::new(), &cfg, &w).unwrap();
        assert!(parse_model(Path::new("mem"), &bytes[..bytes.len() - 1]).is_err());
        assert!(parse_codes(Path::new("mem"), &bytes).is_err());
    }

    #[test]
    fn truncated_model_reports_expected_length() {
        let (cfg, w) = sample_model();
        let bytes = write_model(Vec::new(), &cfg, &w).unwrap();
        let err = parse_model(Path::new("mem"), &bytes[..40]).unwrap_err().to_string();
        assert!(err.contains("40 bytes") && err.contains(&model_file_len(3, 2).to_string()), "{err}");
    }

    #[test]
    fn code_layout_and_streaming() {
        let mut w = CodeWriter::new(Vec::new(), 6, 2).unwrap();
        w.push(&[0, 5]).unwrap();
        w.push(&[2, 3]).unwrap();
        assert!(w.push(&[3, 2]).is_err());
        assert!(w.push(&[1, 6]).is_err());
        assert_eq!(w.count(), 2);
        let bytes = w.finish().unwrap();
        assert_eq!(bytes.len(), codes_file_len(2, 2));
        let y = parse_codes(Path::new("mem"), &bytes).unwrap();
        assert_eq!((y.rows(), y.cols(), y.weight()), (6, 2, 2));
        assert_eq!(y.line(1), &[2, 3]);
    }

    #[test]
    fn empty_code_file() {
        let bytes = CodeWriter::new(Vec::new(), 6, 2).unwrap().finish().unwrap();
        assert_eq!(bytes.len(), codes_file_len(0, 2));
        assert_eq!(parse_codes(Path::new("mem"), &bytes).unwrap().cols(), 0);
    }
}
