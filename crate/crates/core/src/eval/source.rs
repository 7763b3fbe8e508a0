use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::tensor_io::{load_tensor, TensorFormat};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    /// Memoryless uniform on `[v_min, v_max)`.
    Uniform { v_min: f64, v_max: f64 },
    /// Zero-mean Gaussian clipped to `[-1, 1]`.
    Gaussian { sigma: f64 },
    /// Zero-mean Laplacian clipped to `[-1, 1]`.
    Laplacian { scale: f64 },
    /// Samples read from a tensor file.
    File { path: PathBuf, format: TensorFormat },
}

/// Description of a test signal, cut into rows of `seq_len` symbols.
///
/// For [`SourceKind::File`] the sample count comes from the file; `seq_len`
/// of 0 selects one row per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub samples: usize,
    pub seq_len: usize,
    pub seed: u64,
}

impl SourceSpec {
    pub fn uniform(samples: usize, seq_len: usize, seed: u64) -> SourceSpec {
        SourceSpec {
            kind: SourceKind::Uniform {
                v_min: -1.0,
                v_max: 1.0,
            },
            samples,
            seq_len,
            seed,
        }
    }

    /// Signal range the quantizers should cover.
    pub fn bounds(&self) -> (f64, f64) {
        match self.kind {
            SourceKind::Uniform { v_min, v_max } => (v_min, v_max),
            _ => (-1.0, 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            SourceKind::Uniform { v_min, v_max } => {
                if !(v_min.is_finite() && v_max.is_finite() && v_min < v_max) {
                    return Err(Error::InvalidBounds {
                        v_min: *v_min,
                        v_max: *v_max,
                    });
                }
            }
            SourceKind::Gaussian { sigma: s } | SourceKind::Laplacian { scale: s } => {
                if !(s.is_finite() && *s > 0.0) {
                    return Err(Error::InvalidArgument(format!("source scale must be > 0, got {s}")));
                }
            }
            SourceKind::File { .. } => return Ok(()),
        }
        if self.samples == 0 || self.seq_len == 0 {
            return Err(Error::InvalidArgument("samples and seq_len must be positive".into()));
        }
        if !self.samples.is_multiple_of(self.seq_len) {
            return Err(Error::InvalidArgument(format!(
                "samples {} not divisible by seq_len {}",
                self.samples, self.seq_len
            )));
        }
        Ok(())
    }
}

/// Deterministic `samples/seq_len × seq_len` matrix for the given seed.
pub fn generate_source(spec: &SourceSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let flat: Vec<f64> = match &spec.kind {
        SourceKind::Uniform { v_min, v_max } => (0..spec.samples)
            .map(|_| rng.random_range(*v_min..*v_max))
            .collect(),
        SourceKind::Gaussian { sigma } => {
            let normal = Normal::new(0.0, *sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            (0..spec.samples)
                .map(|_| normal.sample(&mut rng).clamp(-1.0, 1.0))
                .collect()
        }
        SourceKind::Laplacian { scale } => (0..spec.samples)
            .map(|_| {
                let u: f64 = rng.random_range(-0.5..0.5);
                (-scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()).clamp(-1.0, 1.0)
            })
            .collect(),
        SourceKind::File { path, format } => {
            let t = load_tensor(path, *format)?;
            if spec.seq_len == 0 {
                return Ok(t.channel_rows());
            }
            if t.data.len() % spec.seq_len != 0 {
                return Err(Error::InvalidArgument(format!(
                    "{} samples not divisible by seq_len {}",
                    t.data.len(),
                    spec.seq_len
                )));
            }
            t.data
        }
    };
    Ok(flat.chunks_exact(spec.seq_len).map(<[f64]>::to_vec).collect())
}
