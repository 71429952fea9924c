//! Fixed-width vertex bitsets.

/// A subset of `0..len` stored as packed 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexMask {
    len: usize,
    words: Vec<u64>,
}

impl VertexMask {
    pub fn empty(len: usize) -> Self {
        VertexMask { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn full(len: usize) -> Self {
        let mut m = Self::empty(len);
        for w in m.words.iter_mut() {
            *w = u64::MAX;
        }
        m.trim();
        m
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut m = Self::empty(len);
        for &i in indices {
            m.insert(i);
        }
        m
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut m = Self::empty(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                m.insert(i);
            }
        }
        m
    }

    fn trim(&mut self) {
        let extra = self.words.len() * 64 - self.len;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= u64::MAX >> extra;
            }
        }
    }

    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn complement(&self) -> Self {
        let mut m = VertexMask { len: self.len, words: self.words.iter().map(|w| !w).collect() };
        m.trim();
        m
    }

    pub fn union(&self, other: &Self) -> Self {
        VertexMask {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn difference(&self, other: &Self) -> Self {
        VertexMask {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    pub fn intersection_count(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_respects_length() {
        let m = VertexMask::from_indices(70, &[0, 65]);
        let c = m.complement();
        assert_eq!(c.count(), 68);
        assert!(!c.contains(65));
        assert!(!c.contains(70));
        assert_eq!(VertexMask::full(70).count(), 70);
    }

    #[test]
    fn iter_round_trips() {
        let idx = vec![1, 3, 63, 64, 127, 128];
        let m = VertexMask::from_indices(130, &idx);
        assert_eq!(m.to_vec(), idx);
    }
}
