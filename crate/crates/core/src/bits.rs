use std::fmt;

use crate::error::{Error, Result};

/// An ordered sequence of bits.
///
/// The hex form packs bits MSB-first into bytes; the final byte is padded
/// with zero bits. The bit length is carried separately wherever hex is used.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    bits: Vec<bool>,
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        write!(f, "BitVector({s})")
    }
}

impl BitVector {
    pub fn new(bits: Vec<bool>) -> Self {
        BitVector { bits }
    }

    pub fn zeros(len: usize) -> Self {
        BitVector {
            bits: vec![false; len],
        }
    }

    /// Parses a string of `'0'`/`'1'` characters; whitespace is ignored.
    pub fn from_str01(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("invalid bit character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVector::new)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(BitVector::new(
            self.iter().zip(other.iter()).map(|(a, b)| a ^ b).collect(),
        ))
    }

    pub fn complement(&self) -> BitVector {
        BitVector::new(self.iter().map(|b| !b).collect())
    }

    pub fn hamming_distance(&self, other: &BitVector) -> Result<usize> {
        Ok(self.xor(other)?.count_ones())
    }

    /// MSB-first packing into bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
            })
            .collect()
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::LengthMismatch {
                expected: len.div_ceil(8),
                actual: bytes.len(),
            });
        }
        let bits = (0..len)
            .map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1 == 1)
            .collect();
        Ok(BitVector { bits })
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Parse(format!("bad hex: {e}")))?;
        Self::from_bytes(&bytes, len)
    }
}

impl FromIterator<bool> for BitVector {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitVector::new(iter.into_iter().collect())
    }
}

impl From<Vec<bool>> for BitVector {
    fn from(bits: Vec<bool>) -> Self {
        BitVector::new(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bytes_are_msb_first() {
        let v = BitVector::from_str01("1010 0000 1").unwrap();
        assert_eq!(v.to_bytes(), vec![0xA0, 0x80]);
        assert_eq!(v.to_hex(), "a080");
        assert_eq!(BitVector::from_hex("a080", 9).unwrap(), v);
        assert!(BitVector::from_hex("a0", 9).is_err());
    }

    #[test]
    fn xor_requires_equal_lengths() {
        let a = BitVector::zeros(3);
        let b = BitVector::zeros(4);
        assert!(a.xor(&b).is_err());
        let c = BitVector::from_str01("101").unwrap();
        assert_eq!(a.xor(&c).unwrap(), c);
        assert_eq!(c.complement(), BitVector::from_str01("010").unwrap());
    }
}
