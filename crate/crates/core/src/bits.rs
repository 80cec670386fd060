use std::fmt;
use std::ops::Deref;

/// Ordered sequence of bits. Byte conversions are MSB first.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        bytes
            .iter()
            .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
            .collect()
    }

    /// Packs into bytes; a trailing partial byte is dropped.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0
            .chunks_exact(8)
            .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8))
            .collect()
    }

    /// Packs into bytes, zero-filling a trailing partial byte.
    pub fn to_bytes_padded(&self) -> Vec<u8> {
        let mut padded = self.clone();
        padded.pad_to_multiple(8);
        padded.to_bytes()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    /// Appends the low `width` bits of `value`, MSB first.
    pub fn push_bits(&mut self, value: u32, width: usize) {
        for i in (0..width).rev() {
            self.0.push((value >> i) & 1 == 1);
        }
    }

    /// Reads `width` bits starting at `pos` as an unsigned integer.
    pub fn read_bits(&self, pos: usize, width: usize) -> Option<u32> {
        let slice = self.0.get(pos..pos + width)?;
        Some(slice.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
    }

    pub fn pad_to_multiple(&mut self, n: usize) {
        if n > 0 {
            let rem = self.0.len() % n;
            if rem != 0 {
                self.0.resize(self.0.len() + n - rem, false);
            }
        }
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }
}

impl Deref for BitString {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

impl From<Vec<bool>> for BitString {
    fn from(v: Vec<bool>) -> Self {
        Self(v)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(")?;
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_packing() {
        let bits = BitString::from_bytes(&[0x80, 0x01]);
        assert!(bits[0]);
        assert!(bits[15]);
        assert_eq!(bits.iter().filter(|&&b| b).count(), 2);
        assert_eq!(bits.to_bytes(), vec![0x80, 0x01]);
    }

    #[test]
    fn push_and_read_bits() {
        let mut bits = BitString::new();
        bits.push_bits(0b101101, 6);
        bits.push_bits(63, 6);
        assert_eq!(bits.read_bits(0, 6), Some(0b101101));
        assert_eq!(bits.read_bits(6, 6), Some(63));
        assert_eq!(bits.read_bits(8, 6), None);
    }

    #[test]
    fn padding() {
        let mut bits: BitString = vec![true; 5].into();
        bits.pad_to_multiple(8);
        assert_eq!(bits.len(), 8);
        assert_eq!(bits.to_bytes(), vec![0b1111_1000]);
        let partial: BitString = vec![true; 3].into();
        assert!(partial.to_bytes().is_empty());
        assert_eq!(partial.to_bytes_padded(), vec![0b1110_0000]);
    }
}
