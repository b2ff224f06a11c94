//! Small shared utilities: the seeded integer mixer used everywhere a
//! deterministic, locally recomputable pseudorandom value is needed, and a
//! compact bit set.

/// SplitMix64 step. Fixed published constants; every party that knows the
/// inputs reproduces the output bit-exactly, which is what the
/// local-knowledge contract of covering families requires.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a master seed and a label path.
#[inline]
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut acc = mix64(master);
    for &l in labels {
        acc = mix64(acc ^ l);
    }
    acc
}

/// Fixed-capacity bit set over `u64` words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    /// Sets bit `i`; returns true when the bit was previously clear.
    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        debug_assert!(i < self.len);
        let w = &mut self.words[i / 64];
        let mask = 1u64 << (i % 64);
        let fresh = *w & mask == 0;
        *w |= mask;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Smallest set bit at or after `from`, if any.
    pub fn next_set_bit(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let mut wi = from / 64;
        let mut word = self.words[wi] & (!0u64 << (from % 64));
        loop {
            if word != 0 {
                let bit = wi * 64 + word.trailing_zeros() as usize;
                return (bit < self.len).then_some(bit);
            }
            wi += 1;
            if wi == self.words.len() {
                return None;
            }
            word = self.words[wi];
        }
    }

    pub fn iter(&self) -> BitIter<'_> {
        BitIter { set: self, at: 0 }
    }
}

pub struct BitIter<'a> {
    set: &'a BitSet,
    at: usize,
}

impl Iterator for BitIter<'_> {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        let next = self.set.next_set_bit(self.at)?;
        self.at = next + 1;
        Some(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix64_is_stable() {
        // Frozen reference values; membership predicates must never drift.
        assert_eq!(mix64(0), 0xe220a8397b1dcdaf);
        assert_eq!(mix64(1), 0x910a2dec89025cc1);
        assert_eq!(mix64(0xdeadbeef), 0x4adfb90f68c9eb9b);
    }

    #[test]
    fn bitset_basics() {
        let mut b = BitSet::new(130);
        assert!(b.insert(0));
        assert!(!b.insert(0));
        assert!(b.insert(129));
        assert_eq!(b.count(), 2);
        assert_eq!(b.next_set_bit(1), Some(129));
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 129]);
        b.remove(129);
        assert_eq!(b.next_set_bit(1), None);
    }
}
