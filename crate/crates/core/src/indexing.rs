//! Serialization of trellis paths under the two indexing methods.
//!
//! Method I sends, per symbol, the branch bit `q` followed by the `R-1`-bit
//! rank of the codeword inside the branch's subset. Method II sends the
//! `R`-bit rank of the codeword inside the union quantizer of the current
//! state; the decoder recovers `q` from the subset the codeword falls in.
//! Ranks are 0-based and ascending in codeword value.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "TCQ1"
//! 4       1     version (1)
//! 5       1     rate R
//! 6       1     method (1 | 2 | 3)
//! 7       4     num_symbols, u32 big-endian
//! 11      1     initial_state
//! 12      ..    payload, MSB-first, zero-padded
//! ```

use crate::bitio::{BitReader, BitWriter};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::trellis::{QuantizedSeq, TrellisSpec, NUM_STATES};

pub const MAGIC: [u8; 4] = *b"TCQ1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 12;

/// Method byte values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Method {
    /// Branch bit plus rank within the subset.
    Subset = 1,
    /// Rank within the state's union quantizer.
    Union = 2,
    /// Arithmetic-coded method-II index plane.
    Entropy = 3,
}

impl Method {
    pub fn from_byte(b: u8) -> Result<Method> {
        match b {
            1 => Ok(Method::Subset),
            2 => Ok(Method::Union),
            3 => Ok(Method::Entropy),
            other => Err(Error::UnknownMethod(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub rate: u32,
    pub method: Method,
    pub num_symbols: u32,
    pub initial_state: u8,
}

impl Header {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4] = VERSION;
        out[5] = self.rate as u8;
        out[6] = self.method as u8;
        out[7..11].copy_from_slice(&self.num_symbols.to_be_bytes());
        out[11] = self.initial_state;
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Header> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Truncated {
                expected: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::BadMagic { found: magic });
        }
        if bytes[4] != VERSION {
            return Err(Error::UnsupportedVersion(bytes[4]));
        }
        let rate = bytes[5] as u32;
        if rate == 0 || rate > crate::codebook::MAX_RATE {
            return Err(Error::Malformed(format!("header rate {rate}")));
        }
        let method = Method::from_byte(bytes[6])?;
        let num_symbols = u32::from_be_bytes(bytes[7..11].try_into().unwrap());
        let initial_state = bytes[11];
        if initial_state as usize >= NUM_STATES {
            return Err(Error::Malformed(format!("initial state {initial_state}")));
        }
        Ok(Header {
            rate,
            method,
            num_symbols,
            initial_state,
        })
    }
}

/// Header plus packed payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream {
    pub header: Header,
    pub payload: Vec<u8>,
}

impl Bitstream {
    /// Payload length in bits before padding.
    pub fn payload_bits(&self) -> usize {
        self.header.num_symbols as usize * self.header.rate as usize
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&self.header.to_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses a method I or II stream. Trailing bytes beyond the padded
    /// payload are rejected.
    pub fn from_bytes(bytes: &[u8]) -> Result<Bitstream> {
        let header = Header::parse(bytes)?;
        if header.method == Method::Entropy {
            return Err(Error::Malformed(
                "entropy-coded container; use the entropy module to read it".into(),
            ));
        }
        let need = (header.num_symbols as usize * header.rate as usize).div_ceil(8);
        let have = bytes.len() - HEADER_LEN;
        if have < need {
            return Err(Error::Truncated {
                expected: HEADER_LEN + need,
                actual: bytes.len(),
            });
        }
        if have > need {
            return Err(Error::Malformed(format!(
                "{} trailing bytes after payload",
                have - need
            )));
        }
        Ok(Bitstream {
            header,
            payload: bytes[HEADER_LEN..].to_vec(),
        })
    }
}

/// Per-symbol method-II indices in `[0, 2^R)`, in sequence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPlane {
    pub rate: u32,
    pub indices: Vec<u32>,
}

impl IndexPlane {
    pub fn alphabet_size(&self) -> usize {
        1 << self.rate
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn num_symbols(qs: &QuantizedSeq) -> Result<u32> {
    u32::try_from(qs.len()).map_err(|_| Error::InvalidArgument(format!("{} symbols exceed u32", qs.len())))
}

fn require_trellis(t: &TrellisSpec) -> Result<()> {
    t.validate()
        .map_err(|v| Error::InvalidTrellis(v.into_iter().map(|x| x.message).collect::<Vec<_>>().join("; ")))
}

/// Method-I code of each symbol as an `R`-bit integer: `q` in the top bit,
/// subset rank below.
pub fn index_plane_method1(qs: &QuantizedSeq, cb: &Codebook, t: &TrellisSpec) -> Result<IndexPlane> {
    qs.check_path(cb, t)?;
    let shift = cb.rate() - 1;
    let indices = qs
        .codeword_ids
        .iter()
        .zip(&qs.branch_bits)
        .map(|(&id, &q)| ((q as u32) << shift) | cb.rank_in_subset(id as usize) as u32)
        .collect();
    Ok(IndexPlane {
        rate: cb.rate(),
        indices,
    })
}

/// Method-II index of each symbol: rank of the codeword within the union
/// quantizer of the state it was coded from.
pub fn index_plane_method2(qs: &QuantizedSeq, cb: &Codebook, t: &TrellisSpec) -> Result<IndexPlane> {
    qs.check_path(cb, t)?;
    // every codeword of a consistent path lies in its state's union
    let indices = qs
        .codeword_ids
        .iter()
        .map(|&id| cb.rank_in_union(id as usize) as u32)
        .collect();
    Ok(IndexPlane {
        rate: cb.rate(),
        indices,
    })
}

pub fn encode_method1(qs: &QuantizedSeq, cb: &Codebook, t: &TrellisSpec) -> Result<Bitstream> {
    let plane = index_plane_method1(qs, cb, t)?;
    Ok(pack(&plane, Method::Subset, qs.initial_state, num_symbols(qs)?))
}

pub fn encode_method2(qs: &QuantizedSeq, cb: &Codebook, t: &TrellisSpec) -> Result<Bitstream> {
    let plane = index_plane_method2(qs, cb, t)?;
    Ok(pack(&plane, Method::Union, qs.initial_state, num_symbols(qs)?))
}

fn pack(plane: &IndexPlane, method: Method, initial_state: u8, n: u32) -> Bitstream {
    let mut w = BitWriter::new();
    for &v in &plane.indices {
        w.write_bits(v, plane.rate);
    }
    Bitstream {
        header: Header {
            rate: plane.rate,
            method,
            num_symbols: n,
            initial_state,
        },
        payload: w.finish(),
    }
}

fn check_stream(bs: &Bitstream, cb: &Codebook, method: Method) -> Result<()> {
    if bs.header.method != method {
        return Err(Error::MethodMismatch {
            expected: method as u8,
            found: bs.header.method as u8,
        });
    }
    if bs.header.rate != cb.rate() {
        return Err(Error::Malformed(format!(
            "stream rate {} does not match codebook rate {}",
            bs.header.rate,
            cb.rate()
        )));
    }
    Ok(())
}

/// Decoded sequences carry `distortion = 0.0`; the source is not known.
pub fn decode_method1(bs: &Bitstream, cb: &Codebook, t: &TrellisSpec) -> Result<QuantizedSeq> {
    check_stream(bs, cb, Method::Subset)?;
    require_trellis(t)?;
    let n = bs.header.num_symbols as usize;
    let rank_bits = cb.rate() - 1;
    let mut r = BitReader::new(&bs.payload);
    let mut state = bs.header.initial_state as usize;
    let mut codeword_ids = Vec::with_capacity(n);
    let mut branch_bits = Vec::with_capacity(n);
    for _ in 0..n {
        let q = r.read_bits(1)? as u8;
        let rank = r.read_bits(rank_bits)? as usize;
        let id = cb
            .index_from_subset_rank(t.subset(state, q), rank)
            .expect("subset rank fits in R-1 bits");
        codeword_ids.push(id as u32);
        branch_bits.push(q);
        state = t.next(state, q);
    }
    Ok(QuantizedSeq {
        initial_state: bs.header.initial_state,
        codeword_ids,
        branch_bits,
        distortion: 0.0,
    })
}

/// Rebuilds a path from method-II indices and the initial state.
pub fn path_from_plane(plane: &IndexPlane, initial_state: u8, cb: &Codebook, t: &TrellisSpec) -> Result<QuantizedSeq> {
    require_trellis(t)?;
    if plane.rate != cb.rate() {
        return Err(Error::Malformed(format!(
            "plane rate {} does not match codebook rate {}",
            plane.rate,
            cb.rate()
        )));
    }
    if initial_state as usize >= NUM_STATES {
        return Err(Error::Malformed(format!("initial state {initial_state}")));
    }
    let mut state = initial_state as usize;
    let mut codeword_ids = Vec::with_capacity(plane.len());
    let mut branch_bits = Vec::with_capacity(plane.len());
    for (pos, &rank) in plane.indices.iter().enumerate() {
        let id = cb
            .index_from_union_rank(t.union_of(state), rank as usize)
            .ok_or(Error::SymbolOutOfRange {
                symbol: rank as usize,
                alphabet: plane.alphabet_size(),
            })?;
        let q = t.branch_for(state, cb.subset_of(id)).ok_or_else(|| Error::InconsistentPath {
            position: pos,
            reason: format!("state {state} has no branch into {}", cb.subset_of(id)),
        })?;
        codeword_ids.push(id as u32);
        branch_bits.push(q);
        state = t.next(state, q);
    }
    Ok(QuantizedSeq {
        initial_state,
        codeword_ids,
        branch_bits,
        distortion: 0.0,
    })
}

pub fn decode_method2(bs: &Bitstream, cb: &Codebook, t: &TrellisSpec) -> Result<QuantizedSeq> {
    check_stream(bs, cb, Method::Union)?;
    let n = bs.header.num_symbols as usize;
    let mut r = BitReader::new(&bs.payload);
    let indices = (0..n)
        .map(|_| r.read_bits(cb.rate()))
        .collect::<Result<Vec<_>>>()?;
    path_from_plane(
        &IndexPlane {
            rate: cb.rate(),
            indices,
        },
        bs.header.initial_state,
        cb,
        t,
    )
}

/// Decodes either method according to the header.
pub fn decode(bs: &Bitstream, cb: &Codebook, t: &TrellisSpec) -> Result<QuantizedSeq> {
    match bs.header.method {
        Method::Subset => decode_method1(bs, cb, t),
        Method::Union => decode_method2(bs, cb, t),
        Method::Entropy => Err(Error::MethodMismatch {
            expected: Method::Union as u8,
            found: Method::Entropy as u8,
        }),
    }
}
