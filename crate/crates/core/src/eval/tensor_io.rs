//! Tensor ingestion: binary PGM images and raw little-endian f32 tensors.
//!
//! Raw tensors start with a 16-byte header: magic `TNSR`, then `C`, `H`,
//! `W` as u32 little-endian, followed by `C·H·W` f32 little-endian values.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::entropy::TensorShape;
use crate::error::{Error, Result};

pub const RAW_MAGIC: [u8; 4] = *b"TNSR";
pub const RAW_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TensorFormat {
    RawF32,
    Pgm,
}

impl TensorFormat {
    /// Guesses the format from the leading bytes.
    pub fn sniff(bytes: &[u8]) -> Option<TensorFormat> {
        if bytes.starts_with(&RAW_MAGIC) {
            Some(TensorFormat::RawF32)
        } else if bytes.starts_with(b"P5") {
            Some(TensorFormat::Pgm)
        } else {
            None
        }
    }
}

impl FromStr for TensorFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<TensorFormat> {
        match s {
            "raw_f32" | "raw" => Ok(TensorFormat::RawF32),
            "pgm" => Ok(TensorFormat::Pgm),
            other => Err(Error::InvalidArgument(format!("unknown tensor format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: TensorShape,
    /// Channel-major values.
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: TensorShape, data: Vec<f64>) -> Result<Tensor> {
        shape.check(data.len())?;
        Ok(Tensor { shape, data })
    }

    /// One row per channel, `H·W` symbols each.
    pub fn channel_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks_exact(self.shape.h * self.shape.w)
            .map(<[f64]>::to_vec)
            .collect()
    }
}

pub fn load_tensor(path: impl AsRef<Path>, format: TensorFormat) -> Result<Tensor> {
    let bytes = fs::read(path)?;
    match format {
        TensorFormat::RawF32 => parse_raw_f32(&bytes),
        TensorFormat::Pgm => parse_pgm(&bytes),
    }
}

/// Loads a tensor, detecting the format from its leading bytes.
pub fn load_tensor_auto(path: impl AsRef<Path>) -> Result<Tensor> {
    let bytes = fs::read(path)?;
    match TensorFormat::sniff(&bytes) {
        Some(TensorFormat::RawF32) => parse_raw_f32(&bytes),
        Some(TensorFormat::Pgm) => parse_pgm(&bytes),
        None => Err(Error::Malformed("unrecognized tensor file (expected TNSR or P5)".into())),
    }
}

pub fn parse_raw_f32(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() < RAW_HEADER_LEN {
        return Err(Error::Truncated {
            expected: RAW_HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != RAW_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let dim = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().unwrap()) as usize;
    let shape = TensorShape::new(dim(0), dim(1), dim(2));
    let expected = shape
        .c
        .checked_mul(shape.h)
        .and_then(|x| x.checked_mul(shape.w))
        .and_then(|x| x.checked_mul(4))
        .and_then(|x| x.checked_add(RAW_HEADER_LEN))
        .ok_or_else(|| Error::Malformed("tensor dimensions overflow".into()))?;
    if bytes.len() != expected {
        return Err(Error::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    let data = bytes[RAW_HEADER_LEN..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    Tensor::new(shape, data)
}

/// Serializes with values rounded to f32.
pub fn raw_f32_bytes(t: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + 4 * t.data.len());
    out.extend_from_slice(&RAW_MAGIC);
    for d in [t.shape.c, t.shape.h, t.shape.w] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &v in &t.data {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn write_raw_f32(path: impl AsRef<Path>, t: &Tensor) -> Result<()> {
    fs::write(path, raw_f32_bytes(t))?;
    Ok(())
}

fn pgm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Malformed("PGM header ended early".into()));
    }
    Ok(&bytes[start..*pos])
}

fn pgm_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = pgm_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Malformed(format!("PGM {what} is not a number")))
}

/// Binary 8-bit PGM; pixel `v` maps to `2v/maxval - 1`.
pub fn parse_pgm(bytes: &[u8]) -> Result<Tensor> {
    let mut pos = 0;
    if pgm_token(bytes, &mut pos)? != b"P5" {
        return Err(Error::Malformed("not a binary PGM (P5)".into()));
    }
    let width = pgm_number(bytes, &mut pos, "width")?;
    let height = pgm_number(bytes, &mut pos, "height")?;
    let maxval = pgm_number(bytes, &mut pos, "maxval")?;
    if !(1..=255).contains(&maxval) {
        return Err(Error::Malformed(format!("PGM maxval {maxval} is not 8-bit")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Malformed("PGM has zero size".into()));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let expected = pos + width * height;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    let scale = maxval as f64;
    let data = bytes[pos..expected]
        .iter()
        .map(|&v| 2.0 * v as f64 / scale - 1.0)
        .collect();
    Tensor::new(TensorShape::new(1, height, width), data)
}

/// Binary PGM with maxval 255.
pub fn pgm_bytes(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}
