//! Packed bit strings.
//!
//! A [`BitString`] is an immutable, ordered sequence of bits stored eight per
//! byte, most significant bit first. The byte layout is exactly the layout
//! used on the wire by the session protocol, so merged feature encodings can
//! be framed and shipped without repacking. Padding bits in the final byte
//! are always zero.

use std::fmt;

/// Errors from bit-string construction.
#[derive(Debug, thiserror::Error)]
pub enum BitsError {
    #[error("invalid bit character {found:?} at position {index} (expected '0' or '1')")]
    BadBitChar { index: usize, found: char },
    #[error("packed byte length mismatch: expected {expected} bytes, found {found}")]
    ByteLengthMismatch { expected: usize, found: usize },
    #[error("padding bits in the final byte must be zero")]
    NonZeroPadding,
}

/// Immutable packed bit sequence. Bit 0 is the first (leftmost) bit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    /// All-zero string of the given length.
    pub fn zeros(len: usize) -> Self {
        BitString {
            bytes: vec![0u8; len.div_ceil(8)],
            len,
        }
    }

    /// Collects bits from an iterator of booleans.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut b = Builder::new();
        for bit in bits {
            b.push(bit);
        }
        b.finish()
    }

    /// Parses a string of `0`/`1` characters; whitespace is ignored.
    pub fn from_bit_str(s: &str) -> Result<Self, BitsError> {
        let mut b = Builder::new();
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => b.push(false),
                '1' => b.push(true),
                c if c.is_whitespace() => {}
                c => return Err(BitsError::BadBitChar { index: i, found: c }),
            }
        }
        Ok(b.finish())
    }

    /// Reconstructs a bit string from packed bytes (MSB-first, zero padding).
    pub fn from_packed_bytes(bytes: &[u8], len: usize) -> Result<Self, BitsError> {
        let expected = len.div_ceil(8);
        if bytes.len() != expected {
            return Err(BitsError::ByteLengthMismatch {
                expected,
                found: bytes.len(),
            });
        }
        if !len.is_multiple_of(8) {
            let pad_mask = 0xffu8 >> (len % 8);
            if let Some(&last) = bytes.last() {
                if last & pad_mask != 0 {
                    return Err(BitsError::NonZeroPadding);
                }
            }
        }
        Ok(BitString {
            bytes: bytes.to_vec(),
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at position `i`. Panics if out of range.
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    /// Packed byte view (MSB-first, zero padding in the final byte).
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Number of positions at which `self` and `other` differ.
    pub fn hamming_distance(&self, other: &BitString) -> Option<usize> {
        if self.len != other.len {
            return None;
        }
        Some(
            self.bytes
                .iter()
                .zip(&other.bytes)
                .map(|(a, b)| (a ^ b).count_ones() as usize)
                .sum(),
        )
    }
}

/// Incremental constructor; the only mutation path for bit strings.
pub struct Builder {
    bytes: Vec<u8>,
    len: usize,
}

impl Builder {
    pub fn new() -> Self {
        Builder {
            bytes: Vec::new(),
            len: 0,
        }
    }

    pub fn with_capacity(bits: usize) -> Self {
        Builder {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn finish(self) -> BitString {
        BitString {
            bytes: self.bytes,
            len: self.len,
        }
    }
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({} bits: {})", self.len, self)
    }
}
