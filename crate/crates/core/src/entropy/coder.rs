//! 32-bit integer arithmetic coder with bit-level renormalization.
//!
//! `low` and `high` bound the current interval inside a 32-bit window.
//! When both share their top bit it is shifted out; when the interval
//! straddles the midpoint inside the middle half (underflow) the window is
//! expanded and the decision deferred as a pending bit. Finishing emits a
//! single `1` followed by the pending zeros; the decoder reads zeros past
//! the end of the data.

use super::model::{ProbabilityModel, MAX_TOTAL};
use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};

const STATE_BITS: u32 = 32;
const FULL: u64 = 1 << STATE_BITS;
const HALF: u64 = FULL >> 1;
const QUARTER: u64 = HALF >> 1;
const MASK: u64 = FULL - 1;

fn check_cum(cum: &[u32], symbol: usize) -> Result<()> {
    let k = cum.len() - 1;
    if symbol >= k {
        return Err(Error::SymbolOutOfRange { symbol, alphabet: k });
    }
    if cum[symbol + 1] <= cum[symbol] {
        return Err(Error::InvalidModel(format!("symbol {symbol} has zero frequency")));
    }
    if cum[k] > MAX_TOTAL {
        return Err(Error::InvalidModel(format!("total {} exceeds {MAX_TOTAL}", cum[k])));
    }
    Ok(())
}

#[derive(Debug)]
pub struct ArithmeticEncoder {
    low: u64,
    high: u64,
    pending: u64,
    out: BitWriter,
}

impl Default for ArithmeticEncoder {
    fn default() -> Self {
        ArithmeticEncoder::new()
    }
}

impl ArithmeticEncoder {
    pub fn new() -> ArithmeticEncoder {
        ArithmeticEncoder {
            low: 0,
            high: MASK,
            pending: 0,
            out: BitWriter::new(),
        }
    }

    fn emit(&mut self, bit: bool) {
        self.out.write_bit(bit);
        for _ in 0..self.pending {
            self.out.write_bit(!bit);
        }
        self.pending = 0;
    }

    /// Narrows the interval to `symbol`'s slice of the cumulative table.
    pub fn encode(&mut self, cum: &[u32], symbol: usize) -> Result<()> {
        check_cum(cum, symbol)?;
        let total = *cum.last().unwrap() as u64;
        let range = self.high - self.low + 1;
        let new_low = self.low + range * cum[symbol] as u64 / total;
        let new_high = self.low + range * cum[symbol + 1] as u64 / total - 1;
        self.low = new_low;
        self.high = new_high;
        loop {
            if (self.low ^ self.high) & HALF == 0 {
                let bit = self.low >> (STATE_BITS - 1) == 1;
                self.emit(bit);
                self.low = (self.low << 1) & MASK;
                self.high = ((self.high << 1) & MASK) | 1;
            } else if self.low & !self.high & QUARTER != 0 {
                self.pending += 1;
                self.low = (self.low << 1) ^ HALF;
                self.high = ((self.high ^ HALF) << 1) | HALF | 1;
            } else {
                break;
            }
        }
        Ok(())
    }

    /// Bytes fully determined so far.
    pub fn completed(&self) -> &[u8] {
        self.out.completed()
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.emit(true);
        self.out.finish()
    }
}

#[derive(Debug)]
pub struct ArithmeticDecoder<'a> {
    low: u64,
    high: u64,
    code: u64,
    input: BitReader<'a>,
    limit: usize,
}

impl<'a> ArithmeticDecoder<'a> {
    pub fn new(data: &'a [u8]) -> ArithmeticDecoder<'a> {
        let mut input = BitReader::new(data);
        let mut code = 0;
        for _ in 0..STATE_BITS {
            code = (code << 1) | input.read_bit_or_zero() as u64;
        }
        ArithmeticDecoder {
            low: 0,
            high: MASK,
            code,
            input,
            // the encoder's final `1` means a valid stream is never read more
            // than STATE_BITS - 1 bits past its end
            limit: data.len() * 8 + STATE_BITS as usize - 1,
        }
    }

    /// True once the decoder has read further past the end of the data than
    /// any stream produced by [`ArithmeticEncoder`] allows.
    pub fn exhausted(&self) -> bool {
        self.input.position() > self.limit
    }

    pub fn decode(&mut self, cum: &[u32]) -> Result<usize> {
        let k = cum.len() - 1;
        let total = cum[k] as u64;
        if total > MAX_TOTAL as u64 {
            return Err(Error::InvalidModel(format!("total {total} exceeds {MAX_TOTAL}")));
        }
        let range = self.high - self.low + 1;
        let offset = self.code - self.low;
        let value = ((offset + 1) * total - 1) / range;
        let symbol = cum.partition_point(|&c| c as u64 <= value) - 1;
        check_cum(cum, symbol)?;

        let base = self.low;
        self.low = base + range * cum[symbol] as u64 / total;
        self.high = base + range * cum[symbol + 1] as u64 / total - 1;
        loop {
            if (self.low ^ self.high) & HALF == 0 {
                self.low = (self.low << 1) & MASK;
                self.high = ((self.high << 1) & MASK) | 1;
                self.code = ((self.code << 1) & MASK) | self.input.read_bit_or_zero() as u64;
            } else if self.low & !self.high & QUARTER != 0 {
                self.low = (self.low << 1) ^ HALF;
                self.high = ((self.high ^ HALF) << 1) | HALF | 1;
                self.code = (self.code & HALF) | ((self.code << 1) & (MASK >> 1)) | self.input.read_bit_or_zero() as u64;
            } else {
                break;
            }
        }
        Ok(symbol)
    }
}

/// Codes `symbols` in order, querying then updating `model` for each.
///
/// The symbol count is not stored in the output; the container carries it.
pub fn ac_encode(symbols: &[u32], model: &mut dyn ProbabilityModel) -> Result<Vec<u8>> {
    let k = model.alphabet_size();
    let mut enc = ArithmeticEncoder::new();
    for &s in symbols {
        let s = s as usize;
        if s >= k {
            return Err(Error::SymbolOutOfRange { symbol: s, alphabet: k });
        }
        enc.encode(model.cumulative(), s)?;
        model.update(s);
    }
    Ok(enc.finish())
}

/// Inverse of [`ac_encode`] given an identically initialized model.
///
/// A desynchronized model cannot be detected; it decodes to garbage.
/// Truncation is reported once the decoder runs past the end of `bytes`
/// further than a complete stream would allow.
pub fn ac_decode(bytes: &[u8], n_symbols: usize, model: &mut dyn ProbabilityModel) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(n_symbols);
    if n_symbols == 0 {
        return Ok(out);
    }
    let mut dec = ArithmeticDecoder::new(bytes);
    for i in 0..n_symbols {
        if dec.exhausted() {
            return Err(Error::StreamExhausted {
                decoded: i,
                requested: n_symbols,
            });
        }
        let s = dec.decode(model.cumulative())?;
        model.update(s);
        out.push(s as u32);
    }
    if dec.exhausted() {
        return Err(Error::StreamExhausted {
            decoded: n_symbols,
            requested: n_symbols,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::model::{AdaptiveModel, StaticModel};
    use super::*;

    #[test]
    fn uniform_four_symbols_costs_two_bits_each() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let symbols: Vec<u32> = (0..1000).map(|_| rng.random_range(0..4)).collect();
        let bytes = ac_encode(&symbols, &mut StaticModel::uniform(4).unwrap()).unwrap();
        assert!((250..=254).contains(&bytes.len()), "{}", bytes.len());
        let back = ac_decode(&bytes, 1000, &mut StaticModel::uniform(4).unwrap()).unwrap();
        assert_eq!(back, symbols);
    }

    #[test]
    fn adaptive_run_is_cheap() {
        let symbols = vec![3u32; 1000];
        let bytes = ac_encode(&symbols, &mut AdaptiveModel::new(4).unwrap()).unwrap();
        assert!(bytes.len() < 40, "{}", bytes.len());
        let back = ac_decode(&bytes, 1000, &mut AdaptiveModel::new(4).unwrap()).unwrap();
        assert_eq!(back, symbols);
    }

    #[test]
    fn out_of_alphabet_symbol() {
        let err = ac_encode(&[0, 4], &mut StaticModel::uniform(4).unwrap()).unwrap_err();
        assert!(matches!(err, Error::SymbolOutOfRange { symbol: 4, alphabet: 4 }));
    }

    #[test]
    fn empty_stream_for_nonzero_count_is_exhausted() {
        let err = ac_decode(&[], 5, &mut StaticModel::uniform(4).unwrap()).unwrap_err();
        assert!(matches!(err, Error::StreamExhausted { decoded: 0, .. }));
    }

    #[test]
    fn heavy_truncation_is_detected() {
        let symbols: Vec<u32> = (0..4000).map(|i| (i * 7 % 5) as u32).collect();
        let bytes = ac_encode(&symbols, &mut StaticModel::uniform(5).unwrap()).unwrap();
        let cut = &bytes[..bytes.len() / 2];
        assert!(matches!(
            ac_decode(cut, symbols.len(), &mut StaticModel::uniform(5).unwrap()),
            Err(Error::StreamExhausted { .. })
        ));
    }

    #[test]
    fn skewed_static_model_with_underflow() {
        // non-power-of-two totals exercise the pending-bit path
        let freqs = [1, 3000, 7, 1, 999, 2];
        let mut state = 12345u64;
        let symbols: Vec<u32> = (0..20_000)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let r = (state >> 33) % 4010;
                let mut acc = 0;
                freqs.iter().position(|&f| {
                    acc += f as u64;
                    r < acc
                }).unwrap() as u32
            })
            .collect();
        let bytes = ac_encode(&symbols, &mut StaticModel::new(&freqs).unwrap()).unwrap();
        let back = ac_decode(&bytes, symbols.len(), &mut StaticModel::new(&freqs).unwrap()).unwrap();
        assert_eq!(back, symbols);
    }
}
