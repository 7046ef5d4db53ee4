//! Vertex sets as packed bit words, used by the search kernels.
//!
//! Small graphs use a fixed number of `u64` words so the hot loops stay on
//! the stack; anything beyond 256 vertices falls back to a heap vector.

pub(crate) trait VertexSet: Clone + Send + Sync + PartialEq {
    fn empty(n: usize) -> Self;
    fn words(&self) -> &[u64];
    fn words_mut(&mut self) -> &mut [u64];

    fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    #[inline]
    fn insert(&mut self, v: usize) {
        self.words_mut()[v / 64] |= 1 << (v % 64);
    }

    #[inline]
    fn contains(&self, v: usize) -> bool {
        self.words()[v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    fn is_empty(&self) -> bool {
        self.words().iter().all(|&w| w == 0)
    }

    #[inline]
    fn len(&self) -> u32 {
        self.words().iter().map(|w| w.count_ones()).sum()
    }

    /// `|self ∩ other|`
    #[inline]
    fn intersection_len(&self, other: &Self) -> u32 {
        self.words()
            .iter()
            .zip(other.words())
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    /// `self ∩ mask ⊆ other ∩ mask`
    #[inline]
    fn subset_within(&self, other: &Self, mask: &Self) -> bool {
        self.words()
            .iter()
            .zip(other.words())
            .zip(mask.words())
            .all(|((a, b), m)| a & m & !b == 0)
    }

    #[inline]
    fn remove_all(&mut self, other: &Self) {
        for (a, b) in self.words_mut().iter_mut().zip(other.words()) {
            *a &= !b;
        }
    }

    fn iter(&self) -> Ones<'_> {
        Ones {
            words: self.words(),
            index: 0,
            current: self.words().first().copied().unwrap_or(0),
        }
    }
}

pub(crate) struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * 64 + bit);
            }
            self.index += 1;
            self.current = *self.words.get(self.index)?;
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct FixedSet<const W: usize>([u64; W]);

impl<const W: usize> VertexSet for FixedSet<W> {
    fn empty(n: usize) -> Self {
        debug_assert!(n <= 64 * W);
        FixedSet([0; W])
    }

    #[inline]
    fn words(&self) -> &[u64] {
        &self.0
    }

    #[inline]
    fn words_mut(&mut self) -> &mut [u64] {
        &mut self.0
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct HeapSet(Vec<u64>);

impl VertexSet for HeapSet {
    fn empty(n: usize) -> Self {
        HeapSet(vec![0; n.div_ceil(64)])
    }

    fn words(&self) -> &[u64] {
        &self.0
    }

    fn words_mut(&mut self) -> &mut [u64] {
        &mut self.0
    }
}

/// Calls `$body` with the type alias `$set` bound to the narrowest set type for `$n` vertices.
macro_rules! with_vertex_set {
    ($n:expr, $set:ident => $body:expr) => {{
        let n = $n;
        if n <= 64 {
            type $set = $crate::bitset::FixedSet<1>;
            $body
        } else if n <= 128 {
            type $set = $crate::bitset::FixedSet<2>;
            $body
        } else if n <= 256 {
            type $set = $crate::bitset::FixedSet<4>;
            $body
        } else {
            type $set = $crate::bitset::HeapSet;
            $body
        }
    }};
}
pub(crate) use with_vertex_set;
