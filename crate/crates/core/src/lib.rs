//! Trellis coded quantization.
//!
//! A 4-state trellis constrains each symbol's codeword to one of four
//! interleaved subsets of a uniform `2^(R+1)`-point codebook; Viterbi search
//! finds the minimum squared-error path, which is then packed into a
//! bitstream (subset or union indexing) or arithmetic coded as an index
//! plane. Soft quantization supplies a differentiable backward pass.
//!
//! ```
//! use tcq::{viterbi_quantize, reconstruct, Codebook, TrellisSpec};
//!
//! let cb = Codebook::symmetric(2).unwrap();
//! let t = TrellisSpec::default4();
//! let qs = viterbi_quantize(&[0.1, -0.4, 0.8], &cb, &t).unwrap();
//! assert_eq!(reconstruct(&qs, &cb, &t).unwrap().len(), 3);
//! ```

pub mod bitio;
pub mod codebook;
#[cfg(feature = "conformance")]
pub mod conformance;
pub mod entropy;
pub mod error;
pub mod eval;
pub mod indexing;
pub mod softquant;
pub mod trellis;

pub use codebook::{Codebook, ScalarQuantizer, Subset, Union};
pub use entropy::{EntropyContainer, ModelKind, ProbabilityModel, TensorShape};
pub use error::{Error, Result};
pub use indexing::{decode, encode_method1, encode_method2, Bitstream, Method};
pub use softquant::{soft_quantize, soft_quantize_grad, SoftQuantConfig};
pub use trellis::{quantize_batch, reconstruct, viterbi_quantize, QuantizedSeq, TrellisSpec};
