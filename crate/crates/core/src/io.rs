//! Netpbm graymaps (PGM) and comma-separated matrices.
//!
//! PGM: `P2` (ASCII) and `P5` (binary, one byte per sample) are read, with `#` comments
//! allowed anywhere in the header; only `maxval ≤ 255` is supported. Writing always
//! produces `P5`.
//!
//! CSV: one matrix row per line, values separated by commas, `.` as the decimal mark,
//! no header unless asked. Values are printed in Rust's shortest round-trip form, so
//! reading back what was written gives identical `f64`s.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u8,
    /// Row-major gray values, each at most `maxval`.
    pub pixels: Vec<u8>,
}

impl PgmImage {
    pub fn new(width: usize, height: usize, maxval: u8, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if maxval == 0 {
            return Err(Error::invalid("maxval must be positive"));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                context: "pixel count",
                expected: width * height,
                found: pixels.len(),
            });
        }
        if let Some(p) = pixels.iter().find(|&&p| p > maxval) {
            return Err(Error::invalid(format!("pixel value {p} exceeds maxval {maxval}")));
        }
        Ok(PgmImage {
            width,
            height,
            maxval,
            pixels,
        })
    }

    /// `height × width` matrix of gray values.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.height, self.width, |i, j| self.pixels[i * self.width + j] as f64)
    }

    /// Clamps to `[0, maxval]` and rounds half to even.
    pub fn from_matrix(m: &Matrix, maxval: u8) -> Result<Self> {
        m.check_finite()?;
        let pixels = m
            .as_slice()
            .iter()
            .map(|v| v.clamp(0.0, maxval as f64).round_ties_even() as u8)
            .collect();
        PgmImage::new(m.cols(), m.rows(), maxval, pixels)
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self, what: &str) -> Result<&[u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("missing {what}")));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let t = self.token(what)?;
        std::str::from_utf8(t)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("invalid {what}: {:?}", String::from_utf8_lossy(t))))
    }
}

pub fn parse_pgm(bytes: &[u8]) -> Result<PgmImage> {
    let mut r = HeaderReader { bytes, pos: 0 };
    let magic = r.token("magic number")?.to_vec();
    let binary = match magic.as_slice() {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(Error::Format(format!(
                "unsupported magic number {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = r.number("width")? as usize;
    let height = r.number("height")? as usize;
    let maxval = r.number("maxval")?;
    if maxval > 255 {
        return Err(Error::UnsupportedDepth(maxval));
    }
    if maxval == 0 || width == 0 || height == 0 {
        return Err(Error::Format("zero width, height or maxval".into()));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("image dimensions overflow".into()))?;
    let pixels = if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(r.pos) {
            Some(b) if b.is_ascii_whitespace() => r.pos += 1,
            _ => return Err(Error::Format("missing whitespace before raster".into())),
        }
        let raster = &bytes[r.pos..];
        if raster.len() < count {
            return Err(Error::Format(format!(
                "truncated raster: expected {count} bytes, found {}",
                raster.len()
            )));
        }
        raster[..count].to_vec()
    } else {
        let mut px = Vec::with_capacity(count);
        for i in 0..count {
            let v = r.number("pixel").map_err(|e| match e {
                Error::Format(m) if m.starts_with("missing") => {
                    Error::Format(format!("truncated raster: expected {count} values, found {i}"))
                }
                other => other,
            })?;
            if v > maxval {
                return Err(Error::Format(format!("pixel value {v} exceeds maxval {maxval}")));
            }
            px.push(v as u8);
        }
        px
    };
    PgmImage::new(width, height, maxval as u8, pixels).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<PgmImage> {
    parse_pgm(&fs::read(path)?)
}

/// Binary (`P5`) encoding.
pub fn encode_pgm(img: &PgmImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", img.width, img.height, img.maxval).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// ASCII (`P2`) encoding, mainly for fixtures.
pub fn encode_pgm_ascii(img: &PgmImage) -> String {
    let mut out = format!("P2\n{} {}\n{}\n", img.width, img.height, img.maxval);
    for row in img.pixels.chunks(img.width) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_pgm(img: &PgmImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

pub fn parse_csv(text: &str, skip_header: bool) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(skip_header)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(Error::Format(format!("line {line}, field {}: non-finite value", col + 1))),
                Err(_) => Err(Error::Format(format!("line {line}, field {}: cannot parse {field:?}", col + 1))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format("no data rows".into()));
    }
    Matrix::from_rows(&rows)
}

pub fn read_csv(path: impl AsRef<Path>, skip_header: bool) -> Result<Matrix> {
    parse_csv(&fs::read_to_string(path)?, skip_header)
}

pub fn format_csv(m: &Matrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| format!("{v:?}")))
            .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("ASCII output")
}

pub fn write_csv(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_csv(m))?;
    Ok(())
}

/// Reads a vector stored either as one column or as one row.
pub fn read_csv_vector(path: impl AsRef<Path>, skip_header: bool) -> Result<Vec<f64>> {
    let m = read_csv(path, skip_header)?;
    if m.cols() == 1 || m.rows() == 1 {
        Ok(m.into_vec())
    } else {
        Err(Error::Format(format!(
            "expected a single row or column, found {}x{}",
            m.rows(),
            m.cols()
        )))
    }
}
