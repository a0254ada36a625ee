//! Fixed-length bitsets backing predicate extensions.

use crate::exec;

const WORD: usize = 64;

/// A fixed-length set of state indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD)
}

impl Bits {
    pub fn empty(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; word_count(len)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Bits {
            len,
            words: vec![!0; word_count(len)],
        };
        b.clear_tail();
        b
    }

    /// Builds a bitset by evaluating `f` on every index, in parallel over
    /// 64-bit words when the `parallel` feature is enabled.
    pub fn from_fn<F>(len: usize, f: F) -> Self
    where
        F: Fn(usize) -> bool + Sync + Send,
    {
        let words = exec::map_range(word_count(len), |w| {
            let start = w * WORD;
            let end = (start + WORD).min(len);
            let mut word = 0u64;
            for i in start..end {
                if f(i) {
                    word |= 1 << (i - start);
                }
            }
            word
        });
        Bits { len, words }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, it: I) -> Self {
        let mut b = Bits::empty(len);
        for i in it {
            b.insert(i);
        }
        b
    }

    /// Interprets the low `len` bits of `value` as a set (bit i ↦ index i).
    pub fn from_u64(len: usize, value: u64) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 indices");
        let mut b = Bits {
            len,
            words: if len == 0 { vec![] } else { vec![value] },
        };
        b.clear_tail();
        b
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    fn zip_with(&self, other: &Bits, f: impl Fn(u64, u64) -> u64) -> Bits {
        assert_eq!(self.len, other.len, "bitset length mismatch");
        let mut b = Bits {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        };
        b.clear_tail();
        b
    }

    pub fn and(&self, other: &Bits) -> Bits {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Bits) -> Bits {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn implies(&self, other: &Bits) -> Bits {
        self.zip_with(other, |a, b| !a | b)
    }

    pub fn iff(&self, other: &Bits) -> Bits {
        self.zip_with(other, |a, b| !(a ^ b))
    }

    pub fn not(&self) -> Bits {
        let mut b = Bits {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        b.clear_tail();
        b
    }

    pub fn or_assign(&mut self, other: &Bits) {
        assert_eq!(self.len, other.len, "bitset length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        assert_eq!(self.len, other.len, "bitset length mismatch");
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Least index present in exactly one of the two sets.
    pub fn first_difference(&self, other: &Bits) -> Option<usize> {
        assert_eq!(self.len, other.len, "bitset length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .find_map(|(w, (a, b))| {
                let d = a ^ b;
                (d != 0).then(|| w * WORD + d.trailing_zeros() as usize)
            })
    }

    /// Least index in `self` but not in `other`.
    pub fn first_outside(&self, other: &Bits) -> Option<usize> {
        assert_eq!(self.len, other.len, "bitset length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .find_map(|(w, (a, b))| {
                let d = a & !b;
                (d != 0).then(|| w * WORD + d.trailing_zeros() as usize)
            })
    }

    pub fn ones(&self) -> Ones<'_> {
        Ones {
            bits: self,
            word: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }
}

/// Ascending iterator over the members of a [`Bits`].
pub struct Ones<'a> {
    bits: &'a Bits,
    word: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let tz = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word * WORD + tz);
            }
            self.word += 1;
            if self.word >= self.bits.words.len() {
                return None;
            }
            self.current = self.bits.words[self.word];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_has_exact_length() {
        for len in [0, 1, 63, 64, 65, 130] {
            assert_eq!(Bits::full(len).count(), len);
            assert_eq!(Bits::full(len).not().count(), 0);
        }
    }

    #[test]
    fn ones_iterates_ascending() {
        let b = Bits::from_indices(200, [3, 64, 199, 0]);
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![0, 3, 64, 199]);
    }

    #[test]
    fn from_fn_matches_insert() {
        let b = Bits::from_fn(150, |i| i % 7 == 2);
        let c = Bits::from_indices(150, (0..150).filter(|i| i % 7 == 2));
        assert_eq!(b, c);
    }

    #[test]
    fn first_difference_is_least() {
        let a = Bits::from_indices(100, [5, 70]);
        let b = Bits::from_indices(100, [70, 80]);
        assert_eq!(a.first_difference(&b), Some(5));
        assert_eq!(b.first_outside(&a), Some(80));
        assert_eq!(a.first_difference(&a), None);
    }
}
