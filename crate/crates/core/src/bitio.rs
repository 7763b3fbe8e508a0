//! MSB-first bit packing.

use crate::error::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u8,
    used: u32,
}

impl BitWriter {
    pub fn new() -> BitWriter {
        BitWriter::default()
    }

    #[inline]
    pub fn write_bit(&mut self, bit: bool) {
        self.acc = (self.acc << 1) | bit as u8;
        self.used += 1;
        if self.used == 8 {
            self.bytes.push(self.acc);
            self.acc = 0;
            self.used = 0;
        }
    }

    /// Writes the low `count` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u32, count: u32) {
        debug_assert!(count <= 32);
        for i in (0..count).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    pub fn bit_len(&self) -> usize {
        self.bytes.len() * 8 + self.used as usize
    }

    /// Bytes already completed; the partial byte is not included.
    pub fn completed(&self) -> &[u8] {
        &self.bytes
    }

    /// Flushes, zero-padding the last byte.
    pub fn finish(mut self) -> Vec<u8> {
        if self.used > 0 {
            self.bytes.push(self.acc << (8 - self.used));
        }
        self.bytes
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> BitReader<'a> {
        BitReader { data, pos: 0 }
    }

    /// Bits consumed so far, including any read past the end.
    pub fn position(&self) -> usize {
        self.pos
    }

    /// Next bit, or zero once the data is exhausted.
    #[inline]
    pub fn read_bit_or_zero(&mut self) -> bool {
        let byte = self.pos / 8;
        let bit = match self.data.get(byte) {
            Some(b) => (b >> (7 - self.pos % 8)) & 1 == 1,
            None => false,
        };
        self.pos += 1;
        bit
    }

    pub fn read_bits(&mut self, count: u32) -> Result<u32> {
        let end = self.pos + count as usize;
        if end > self.data.len() * 8 {
            return Err(Error::Truncated {
                expected: end.div_ceil(8),
                actual: self.data.len(),
            });
        }
        let mut v = 0u32;
        for _ in 0..count {
            v = (v << 1) | self.read_bit_or_zero() as u32;
        }
        Ok(v)
    }
}
