//! Packed bit vectors for label sequences.

use std::fmt;

/// Fixed-length packed bit vector. Bits past `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector { words: vec![!0; len.div_ceil(64)], len };
        v.clear_tail();
        v
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for (w, word) in words.iter_mut().enumerate() {
            let base = w * 64;
            let end = (base + 64).min(len);
            let mut acc = 0u64;
            for i in base..end {
                acc |= (f(i) as u64) << (i - base);
            }
            *word = acc;
        }
        BitVector { words, len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_fn(bits.len(), |i| bits[i])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn count_zeros(&self) -> u64 {
        self.len as u64 - self.count_ones()
    }

    /// `|self & other|`
    pub fn and_count(&self, other: &BitVector) -> u64 {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as u64).sum()
    }

    /// `|self & !other|`
    pub fn and_not_count(&self, other: &BitVector) -> u64 {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).map(|(a, b)| (a & !b).count_ones() as u64).sum()
    }

    pub fn not(&self) -> BitVector {
        let mut out = BitVector { words: self.words.iter().map(|w| !w).collect(), len: self.len };
        out.clear_tail();
        out
    }

    pub fn and(&self, other: &BitVector) -> BitVector {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn or(&self, other: &BitVector) -> BitVector {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn or_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// True when every set bit of `self` is also set in `other`.
    pub fn is_subset(&self, other: &BitVector) -> bool {
        self.and_not_count(other) == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// Copies bits `start..start + len` into a new vector.
    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        BitVector::from_fn(len, |i| self.get(start + i))
    }

    fn zip_with(&self, other: &BitVector, f: impl Fn(u64, u64) -> u64) -> BitVector {
        debug_assert_eq!(self.len, other.len);
        BitVector { words: self.words.iter().zip(&other.words).map(|(a, b)| f(*a, *b)).collect(), len: self.len }
    }

    fn clear_tail(&mut self) {
        let rem = self.len & 63;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tail_bits_stay_clear() {
        let v = BitVector::ones(70);
        assert_eq!(v.count_ones(), 70);
        assert_eq!(v.not().count_ones(), 0);
        assert_eq!(BitVector::zeros(70).not().count_ones(), 70);
    }

    proptest! {
        #[test]
        fn counts_match_bool_reference(a in proptest::collection::vec(any::<bool>(), 0..200), seed in any::<u64>()) {
            let b: Vec<bool> = a.iter().enumerate().map(|(i, _)| (seed >> (i % 64)) & 1 == 1).collect();
            let va = BitVector::from_bools(&a);
            let vb = BitVector::from_bools(&b);
            let and = a.iter().zip(&b).filter(|(x, y)| **x && **y).count() as u64;
            let and_not = a.iter().zip(&b).filter(|(x, y)| **x && !**y).count() as u64;
            prop_assert_eq!(va.and_count(&vb), and);
            prop_assert_eq!(va.and_not_count(&vb), and_not);
            prop_assert_eq!(va.or(&vb).count_ones(), a.iter().zip(&b).filter(|(x, y)| **x || **y).count() as u64);
            prop_assert_eq!(va.count_ones() + va.count_zeros(), a.len() as u64);
            prop_assert_eq!(va.iter().collect::<Vec<_>>(), a);
        }
    }
}
