//! Fixed-capacity bitset over part-local vertex indices.

use rand::Rng;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartSet {
    words: Vec<u64>,
    len: usize,
    capacity: usize,
}

impl PartSet {
    pub fn empty(capacity: usize) -> Self {
        Self { words: vec![0; capacity.div_ceil(64)], len: 0, capacity }
    }

    pub fn full(capacity: usize) -> Self {
        let mut s = Self::empty(capacity);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        if !capacity.is_multiple_of(64) {
            if let Some(last) = s.words.last_mut() {
                *last = (1u64 << (capacity % 64)) - 1;
            }
        }
        s.len = capacity;
        s
    }

    pub fn from_indices(capacity: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(capacity);
        for i in indices {
            s.insert(i);
        }
        s
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
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.capacity && self.words[i >> 6] & (1u64 << (i & 63)) != 0
    }

    /// Returns true if `i` was newly inserted.
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.capacity, "index {i} out of capacity {}", self.capacity);
        let (w, b) = (i >> 6, 1u64 << (i & 63));
        if self.words[w] & b == 0 {
            self.words[w] |= b;
            self.len += 1;
            true
        } else {
            false
        }
    }

    /// Returns true if `i` was present.
    pub fn remove(&mut self, i: usize) -> bool {
        if i >= self.capacity {
            return false;
        }
        let (w, b) = (i >> 6, 1u64 << (i & 63));
        if self.words[w] & b != 0 {
            self.words[w] &= !b;
            self.len -= 1;
            true
        } else {
            false
        }
    }

    /// Index of the `rank`-th set bit (0-based) in increasing order.
    pub fn select(&self, mut rank: usize) -> Option<usize> {
        if rank >= self.len {
            return None;
        }
        for (wi, &w) in self.words.iter().enumerate() {
            let c = w.count_ones() as usize;
            if rank < c {
                let mut w = w;
                for _ in 0..rank {
                    w &= w - 1;
                }
                return Some(wi * 64 + w.trailing_zeros() as usize);
            }
            rank -= c;
        }
        None
    }

    /// Uniformly random member, or `None` when empty.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        if self.len == 0 {
            return None;
        }
        self.select(rng.gen_range(0..self.len))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_and_empty() {
        let f = PartSet::full(130);
        assert_eq!(f.len(), 130);
        assert!(f.contains(129));
        assert!(!f.contains(130));
        assert_eq!(f.iter().count(), 130);
        assert!(PartSet::empty(5).is_empty());
        assert_eq!(PartSet::full(64).iter().last(), Some(63));
    }

    proptest! {
        #[test]
        fn select_matches_sorted_members(cap in 1usize..300, members in proptest::collection::btree_set(0usize..300, 0..60)) {
            let members: Vec<usize> = members.into_iter().filter(|&m| m < cap).collect();
            let s = PartSet::from_indices(cap, members.iter().copied());
            prop_assert_eq!(s.len(), members.len());
            prop_assert_eq!(s.iter().collect::<Vec<_>>(), members.clone());
            for (rank, &m) in members.iter().enumerate() {
                prop_assert_eq!(s.select(rank), Some(m));
            }
            prop_assert_eq!(s.select(members.len()), None);
        }
    }
}
