//! Adaptive arithmetic coding of index planes.
//!
//! Planes are stored channel-major (`C×H×W`, row-major) and coded in causal
//! order: rows top to bottom, positions left to right, and all channels of a
//! position before moving on. Probability models plug in through
//! [`ProbabilityModel`].
//!
//! The container extends the indexing header with method byte 3:
//!
//! ```text
//! 0   12  indexing header (method = 3, num_symbols = C·H·W)
//! 12  4   C, u32 big-endian
//! 16  4   H, u32 big-endian
//! 20  4   W, u32 big-endian
//! 24  1   model id (0 static, 1 order0, 2 neighbor)
//! 25  ..  arithmetic-coded method-II indices
//! ```

mod coder;
mod model;

pub use coder::{ac_decode, ac_encode, ArithmeticDecoder, ArithmeticEncoder};
pub use model::{
    AdaptiveModel, ModelKind, NeighborModel, ProbabilityModel, StaticModel, MAX_ADAPTIVE_ALPHABET,
    MAX_NEIGHBOR_ALPHABET, MAX_TOTAL, RESCALE_AT,
};

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::indexing::{index_plane_method2, path_from_plane, Header, IndexPlane, Method, HEADER_LEN};
use crate::trellis::{QuantizedSeq, TrellisSpec};

/// Dimensions of a feature-map index tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct TensorShape {
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl TensorShape {
    pub fn new(c: usize, h: usize, w: usize) -> TensorShape {
        TensorShape { c, h, w }
    }

    /// A single row of `n` symbols.
    pub fn flat(n: usize) -> TensorShape {
        TensorShape { c: 1, h: 1, w: n }
    }

    pub fn len(&self) -> usize {
        self.c * self.h * self.w
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Offset of `(c, i, j)` in channel-major storage.
    pub fn offset(&self, c: usize, i: usize, j: usize) -> usize {
        (c * self.h + i) * self.w + j
    }

    pub fn check(&self, len: usize) -> Result<()> {
        if self.is_empty() || self.len() != len {
            return Err(Error::InvalidShape {
                c: self.c,
                h: self.h,
                w: self.w,
                len,
            });
        }
        Ok(())
    }
}

/// Positions `(c, i, j)` in coding order: `i` outer, `j` middle, `c` inner.
pub fn traversal_order(shape: TensorShape) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..shape.h).flat_map(move |i| (0..shape.w).flat_map(move |j| (0..shape.c).map(move |c| (c, i, j))))
}

/// Arithmetic-codes a channel-major plane in traversal order.
pub fn encode_plane(plane: &[u32], shape: TensorShape, model: &mut dyn ProbabilityModel) -> Result<Vec<u8>> {
    shape.check(plane.len())?;
    let ordered: Vec<u32> = traversal_order(shape)
        .map(|(c, i, j)| plane[shape.offset(c, i, j)])
        .collect();
    ac_encode(&ordered, model)
}

/// Inverse of [`encode_plane`]; returns the plane in channel-major order.
pub fn decode_plane(bytes: &[u8], shape: TensorShape, model: &mut dyn ProbabilityModel) -> Result<Vec<u32>> {
    shape.check(shape.len())?;
    let ordered = ac_decode(bytes, shape.len(), model)?;
    let mut plane = vec![0u32; shape.len()];
    for ((c, i, j), v) in traversal_order(shape).zip(ordered) {
        plane[shape.offset(c, i, j)] = v;
    }
    Ok(plane)
}

pub const CONTAINER_PREFIX_LEN: usize = HEADER_LEN + 13;

/// Arithmetic-coded method-II index plane of one trellis sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyContainer {
    pub header: Header,
    pub shape: TensorShape,
    pub model: ModelKind,
    pub payload: Vec<u8>,
}

impl EntropyContainer {
    /// Codes the path's method-II indices, laid out as `shape`.
    pub fn encode(
        qs: &QuantizedSeq,
        cb: &Codebook,
        t: &TrellisSpec,
        shape: TensorShape,
        model: ModelKind,
    ) -> Result<EntropyContainer> {
        let plane = index_plane_method2(qs, cb, t)?;
        shape.check(plane.len())?;
        for d in [shape.c, shape.h, shape.w] {
            if u32::try_from(d).is_err() {
                return Err(Error::InvalidArgument(format!("dimension {d} exceeds u32")));
            }
        }
        let num_symbols = u32::try_from(plane.len())
            .map_err(|_| Error::InvalidArgument(format!("{} symbols exceed u32", plane.len())))?;
        let mut m = model.build(plane.alphabet_size())?;
        let payload = encode_plane(&plane.indices, shape, m.as_mut())?;
        Ok(EntropyContainer {
            header: Header {
                rate: cb.rate(),
                method: Method::Entropy,
                num_symbols,
                initial_state: qs.initial_state,
            },
            shape,
            model,
            payload,
        })
    }

    /// Recovers the path (distortion is reported as 0).
    pub fn decode(&self, cb: &Codebook, t: &TrellisSpec) -> Result<QuantizedSeq> {
        if self.header.rate != cb.rate() {
            return Err(Error::Malformed(format!(
                "container rate {} does not match codebook rate {}",
                self.header.rate,
                cb.rate()
            )));
        }
        let mut m = self.model.build(1 << self.header.rate)?;
        let indices = decode_plane(&self.payload, self.shape, m.as_mut())?;
        path_from_plane(
            &IndexPlane {
                rate: self.header.rate,
                indices,
            },
            self.header.initial_state,
            cb,
            t,
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(CONTAINER_PREFIX_LEN + self.payload.len());
        out.extend_from_slice(&self.header.to_bytes());
        for d in [self.shape.c, self.shape.h, self.shape.w] {
            out.extend_from_slice(&(d as u32).to_be_bytes());
        }
        out.push(self.model as u8);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<EntropyContainer> {
        let header = Header::parse(bytes)?;
        if header.method != Method::Entropy {
            return Err(Error::MethodMismatch {
                expected: Method::Entropy as u8,
                found: header.method as u8,
            });
        }
        if bytes.len() < CONTAINER_PREFIX_LEN {
            return Err(Error::Truncated {
                expected: CONTAINER_PREFIX_LEN,
                actual: bytes.len(),
            });
        }
        let dim = |k: usize| {
            let o = HEADER_LEN + 4 * k;
            u32::from_be_bytes(bytes[o..o + 4].try_into().unwrap()) as usize
        };
        let shape = TensorShape::new(dim(0), dim(1), dim(2));
        shape.check(header.num_symbols as usize)?;
        let model = ModelKind::from_byte(bytes[HEADER_LEN + 12])?;
        Ok(EntropyContainer {
            header,
            shape,
            model,
            payload: bytes[CONTAINER_PREFIX_LEN..].to_vec(),
        })
    }
}

/// Empirical order-0 entropy in bits/symbol.
pub fn empirical_entropy(symbols: &[u32]) -> f64 {
    if symbols.is_empty() {
        return 0.0;
    }
    let mut counts = std::collections::HashMap::new();
    for &s in symbols {
        *counts.entry(s).or_insert(0usize) += 1;
    }
    let n = symbols.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traversal_is_channel_innermost() {
        let order: Vec<_> = traversal_order(TensorShape::new(2, 1, 2)).collect();
        assert_eq!(order, vec![(0, 0, 0), (1, 0, 0), (0, 0, 1), (1, 0, 1)]);
        let order: Vec<_> = traversal_order(TensorShape::new(1, 2, 2)).collect();
        assert_eq!(order, vec![(0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1)]);
    }

    #[test]
    fn traversal_covers_every_position_once() {
        let shape = TensorShape::new(3, 4, 5);
        let mut seen = vec![false; shape.len()];
        for (c, i, j) in traversal_order(shape) {
            let o = shape.offset(c, i, j);
            assert!(!seen[o]);
            seen[o] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn plane_round_trip_in_channel_major_layout() {
        let shape = TensorShape::new(3, 5, 7);
        let plane: Vec<u32> = (0..shape.len() as u32).map(|x| (x * 5 + x / 3) % 8).collect();
        for kind in [ModelKind::Static, ModelKind::Order0, ModelKind::Neighbor] {
            let bytes = encode_plane(&plane, shape, kind.build(8).unwrap().as_mut()).unwrap();
            let back = decode_plane(&bytes, shape, kind.build(8).unwrap().as_mut()).unwrap();
            assert_eq!(back, plane, "{kind:?}");
        }
    }

    #[test]
    fn shape_mismatch() {
        let err = encode_plane(&[0, 1, 2], TensorShape::new(1, 2, 2), &mut StaticModel::uniform(4).unwrap());
        assert!(matches!(err, Err(Error::InvalidShape { .. })));
    }

    #[test]
    fn container_bytes_round_trip() {
        let cb = Codebook::symmetric(2).unwrap();
        let t = TrellisSpec::default4();
        let x: Vec<f64> = (0..24).map(|i| (i as f64 / 12.0) - 1.0).collect();
        let qs = crate::trellis::viterbi_quantize(&x, &cb, &t).unwrap();
        let c = EntropyContainer::encode(&qs, &cb, &t, TensorShape::new(2, 3, 4), ModelKind::Neighbor).unwrap();
        let bytes = c.to_bytes();
        assert_eq!(&bytes[..4], b"TCQ1");
        assert_eq!(bytes[6], 3);
        assert_eq!(&bytes[12..16], &2u32.to_be_bytes());
        assert_eq!(bytes[24], 2);
        let parsed = EntropyContainer::from_bytes(&bytes).unwrap();
        assert_eq!(parsed, c);
        let back = parsed.decode(&cb, &t).unwrap();
        assert_eq!(back.codeword_ids, qs.codeword_ids);
        assert_eq!(back.branch_bits, qs.branch_bits);
        assert!(EntropyContainer::from_bytes(&bytes[..20]).is_err());
    }

    #[test]
    fn entropy_of_simple_streams() {
        assert_eq!(empirical_entropy(&[1, 1, 1]), 0.0);
        assert!((empirical_entropy(&[0, 1, 2, 3]) - 2.0).abs() < 1e-12);
    }
}
