//! Paired TCQ-vs-SQ rate-distortion measurements.
//!
//! Both quantizers always see the same sample matrix. Rates are reported in
//! bits per quantized symbol; the one-byte initial-state header each TCQ
//! sequence carries is itemized separately in `header_overhead_bits`.

mod source;
mod tensor_io;

pub use source::{generate_source, SourceKind, SourceSpec};
pub use tensor_io::{
    load_tensor, load_tensor_auto, parse_pgm, parse_raw_f32, pgm_bytes, raw_f32_bytes, write_raw_f32, Tensor,
    TensorFormat, RAW_HEADER_LEN, RAW_MAGIC,
};

use std::fmt;
use std::io;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codebook::{Codebook, ScalarQuantizer};
use crate::entropy::{encode_plane, ModelKind, TensorShape};
use crate::error::{Error, Result};
use crate::indexing::{index_plane_method1, index_plane_method2, Method};
use crate::softquant::SoftQuantConfig;
use crate::trellis::{quantize_batch, reconstruct, TrellisSpec};

/// Largest rate accepted by the comparison harness.
pub const MAX_COMPARE_RATE: u32 = 8;

/// Header bits carried by each TCQ sequence (the initial-state byte).
pub const TCQ_HEADER_BITS_PER_SEQUENCE: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantizer {
    #[serde(rename = "TCQ")]
    Tcq,
    #[serde(rename = "SQ")]
    Sq,
}

impl fmt::Display for Quantizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantizer::Tcq => "TCQ",
            Quantizer::Sq => "SQ",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RDReport {
    pub quantizer: Quantizer,
    pub rate_bits_per_symbol: f64,
    pub header_overhead_bits: u64,
    pub num_symbols: usize,
    /// Mean square of the input samples.
    pub signal_power: f64,
    pub mse: f64,
    pub snr_db: f64,
    /// Peak is the width of the declared dynamic range.
    pub psnr_db: f64,
    pub entropy_coded_bpp: Option<f64>,
    /// Mean squared gap between soft-quantized and hard TCQ values.
    pub soft_gap_mse: Option<f64>,
    pub elapsed_ms: f64,
}

impl RDReport {
    fn new(quantizer: Quantizer, rate: u32, rows: &[Vec<f64>], recon: &[Vec<f64>], peak: f64) -> RDReport {
        let n: usize = rows.iter().map(Vec::len).sum();
        let power = rows.iter().flatten().map(|x| x * x).sum::<f64>() / n as f64;
        let mse = rows
            .iter()
            .flatten()
            .zip(recon.iter().flatten())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / n as f64;
        RDReport {
            quantizer,
            rate_bits_per_symbol: rate as f64,
            header_overhead_bits: 0,
            num_symbols: n,
            signal_power: power,
            mse,
            snr_db: snr_db(power, mse),
            psnr_db: snr_db(peak * peak, mse),
            entropy_coded_bpp: None,
            soft_gap_mse: None,
            elapsed_ms: 0.0,
        }
    }

    /// Header overhead spread over the symbols.
    pub fn header_overhead_per_symbol(&self) -> f64 {
        self.header_overhead_bits as f64 / self.num_symbols as f64
    }
}

pub fn snr_db(power: f64, mse: f64) -> f64 {
    10.0 * (power / mse).log10()
}

/// Options for [`run_compare`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareConfig {
    pub rate: u32,
    /// Indexing method whose plane is entropy coded.
    pub method: Method,
    /// Temperature for the soft-quantization gap report.
    pub sigma: Option<f64>,
    /// Model for entropy-coding the index planes.
    pub entropy: Option<ModelKind>,
}

impl CompareConfig {
    pub fn new(rate: u32) -> CompareConfig {
        CompareConfig {
            rate,
            method: Method::Union,
            sigma: None,
            entropy: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=MAX_COMPARE_RATE).contains(&self.rate) {
            return Err(Error::InvalidRate {
                rate: self.rate,
                max: MAX_COMPARE_RATE,
            });
        }
        if self.method == Method::Entropy {
            return Err(Error::InvalidArgument("compare method must be 1 or 2".into()));
        }
        if let Some(s) = self.sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidArgument(format!("sigma must be > 0, got {s}")));
            }
        }
        Ok(())
    }
}

fn entropy_bpp(planes: &[Vec<u32>], alphabet: usize, model: ModelKind) -> Result<f64> {
    let bytes = planes
        .par_iter()
        .map(|p| {
            let mut m = model.build(alphabet)?;
            Ok(encode_plane(p, TensorShape::flat(p.len()), m.as_mut())?.len())
        })
        .collect::<Result<Vec<usize>>>()?;
    let n: usize = planes.iter().map(Vec::len).sum();
    Ok(8.0 * bytes.iter().sum::<usize>() as f64 / n as f64)
}

/// Quantizes `rows` with TCQ and SQ over `[v_min, v_max]` at the same rate.
pub fn compare_rows(rows: &[Vec<f64>], v_min: f64, v_max: f64, cfg: &CompareConfig) -> Result<(RDReport, RDReport)> {
    cfg.validate()?;
    let cb = Codebook::new(cfg.rate, v_min, v_max)?;
    let sq = ScalarQuantizer::new(cfg.rate, v_min, v_max)?;
    let trellis = TrellisSpec::default4();
    let peak = v_max - v_min;

    let start = Instant::now();
    let paths = quantize_batch(rows, &cb, &trellis)?;
    let tcq_recon = paths
        .iter()
        .map(|qs| reconstruct(qs, &cb, &trellis))
        .collect::<Result<Vec<_>>>()?;
    let tcq_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut tcq = RDReport::new(Quantizer::Tcq, cfg.rate, rows, &tcq_recon, peak);
    tcq.header_overhead_bits = TCQ_HEADER_BITS_PER_SEQUENCE * rows.len() as u64;
    tcq.elapsed_ms = tcq_ms;

    let start = Instant::now();
    let (sq_idx, sq_recon): (Vec<Vec<u32>>, Vec<Vec<f64>>) = rows
        .par_iter()
        .map(|r| r.iter().map(|&z| sq.quantize(z)).map(|(i, v)| (i as u32, v)).unzip())
        .unzip();
    let mut sqr = RDReport::new(Quantizer::Sq, cfg.rate, rows, &sq_recon, peak);
    sqr.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    if let Some(model) = cfg.entropy {
        let planes = paths
            .iter()
            .map(|qs| {
                let p = match cfg.method {
                    Method::Subset => index_plane_method1(qs, &cb, &trellis)?,
                    _ => index_plane_method2(qs, &cb, &trellis)?,
                };
                Ok(p.indices)
            })
            .collect::<Result<Vec<_>>>()?;
        let k = 1usize << cfg.rate;
        tcq.entropy_coded_bpp = Some(entropy_bpp(&planes, k, model)?);
        sqr.entropy_coded_bpp = Some(entropy_bpp(&sq_idx, k, model)?);
    }

    if let Some(sigma) = cfg.sigma {
        let soft = SoftQuantConfig::from_codebook(sigma, &cb)?;
        let gap = rows
            .iter()
            .flatten()
            .zip(tcq_recon.iter().flatten())
            .map(|(&z, &h)| (soft.value(z) - h).powi(2))
            .sum::<f64>()
            / tcq.num_symbols as f64;
        tcq.soft_gap_mse = Some(gap);
    }
    Ok((tcq, sqr))
}

/// Generates the source and compares TCQ with SQ on it.
pub fn run_compare(spec: &SourceSpec, cfg: &CompareConfig) -> Result<(RDReport, RDReport)> {
    let rows = generate_source(spec)?;
    let (v_min, v_max) = spec.bounds();
    compare_rows(&rows, v_min, v_max, cfg)
}

/// One CSV line of a rate sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub quantizer: Quantizer,
    #[serde(rename = "R")]
    pub rate: u32,
    pub bits_per_symbol: f64,
    pub mse: f64,
    pub snr_db: f64,
    pub psnr_db: f64,
    pub entropy_bpp: Option<f64>,
    pub elapsed_ms: f64,
}

impl From<&RDReport> for SweepRow {
    fn from(r: &RDReport) -> SweepRow {
        SweepRow {
            quantizer: r.quantizer,
            rate: r.rate_bits_per_symbol as u32,
            bits_per_symbol: r.rate_bits_per_symbol,
            mse: r.mse,
            snr_db: r.snr_db,
            psnr_db: r.psnr_db,
            entropy_bpp: r.entropy_coded_bpp,
            elapsed_ms: r.elapsed_ms,
        }
    }
}

/// Rows ordered by rate, TCQ before SQ at each rate.
pub fn run_rd_sweep(spec: &SourceSpec, rates: &[u32], base: &CompareConfig) -> Result<Vec<SweepRow>> {
    if rates.is_empty() {
        return Err(Error::InvalidArgument("rate list is empty".into()));
    }
    let rows = generate_source(spec)?;
    let (v_min, v_max) = spec.bounds();
    let mut out = Vec::with_capacity(2 * rates.len());
    for &rate in rates {
        let cfg = CompareConfig { rate, ..*base };
        let (tcq, sq) = compare_rows(&rows, v_min, v_max, &cfg)?;
        out.push(SweepRow::from(&tcq));
        out.push(SweepRow::from(&sq));
    }
    Ok(out)
}

pub fn write_sweep_csv<W: io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv_file(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    write_sweep_csv(rows, std::fs::File::create(path)?)
}

pub fn read_sweep_csv<R: io::Read>(input: R) -> Result<Vec<SweepRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
