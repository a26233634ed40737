//! Fixed-width bitset over dense indices, used by the enumeration engines.

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(width: usize) -> Self {
        BitSet {
            words: vec![0; width.div_ceil(64).max(1)],
        }
    }

    pub fn full(width: usize) -> Self {
        let mut s = BitSet::new(width);
        for i in 0..width {
            s.insert(i);
        }
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(width: usize, it: I) -> Self {
        let mut s = BitSet::new(width);
        for i in it {
            s.insert(i);
        }
        s
    }

    /// Addressable width, rounded up to whole words.
    pub fn capacity(&self) -> usize {
        self.words.len() * 64
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// Number of members of `self ∩ other`.
    /// True when `self` and `other` agree on every index below `bound`.
    pub fn agrees_below(&self, other: &BitSet, bound: usize) -> bool {
        let full = bound / 64;
        if self.words[..full] != other.words[..full] {
            return false;
        }
        let rem = bound % 64;
        if rem == 0 {
            return true;
        }
        let mask = (1u64 << rem) - 1;
        (self.words[full] ^ other.words[full]) & mask == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz)
            })
        })
    }
}
