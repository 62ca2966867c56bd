//! Systems of contracts as bitsets over the element indices of a poset.

use std::cmp::Ordering;
use std::fmt;

/// Maximum number of contracts a poset may hold.
pub const MAX_ELEMENTS: usize = 128;

/// A set of contract indices.
///
/// A `System` does not remember its poset; the owning [`Poset`](crate::Poset)
/// gives the indices their meaning. The ordering is the canonical one used
/// throughout the crate: ascending by cardinality, ties broken by comparing
/// the ascending index sequences lexicographically.
#[derive(Copy, Clone, Default, PartialEq, Eq, Hash)]
pub struct System(u128);

impl System {
    pub const EMPTY: System = System(0);

    pub fn from_bits(bits: u128) -> Self {
        System(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn singleton(index: usize) -> Self {
        debug_assert!(index < MAX_ELEMENTS);
        System(1u128 << index)
    }

    /// The first `n` indices.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_ELEMENTS);
        if n == MAX_ELEMENTS {
            System(u128::MAX)
        } else {
            System((1u128 << n) - 1)
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices
            .into_iter()
            .fold(System::EMPTY, |acc, i| acc.with(i))
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_ELEMENTS && self.0 >> index & 1 == 1
    }

    #[must_use]
    pub fn with(self, index: usize) -> Self {
        System(self.0 | 1u128 << index)
    }

    #[must_use]
    pub fn without(self, index: usize) -> Self {
        System(self.0 & !(1u128 << index))
    }

    #[must_use]
    pub fn union(self, other: System) -> Self {
        System(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: System) -> Self {
        System(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: System) -> Self {
        System(self.0 & !other.0)
    }

    pub fn is_subset(self, other: System) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Indices in ascending order.
    pub fn iter(self) -> Indices {
        Indices(self.0)
    }

    /// Lowest index, if any.
    pub fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }
}

pub struct Indices(u128);

impl Iterator for Indices {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Indices {}

impl IntoIterator for System {
    type Item = usize;
    type IntoIter = Indices;

    fn into_iter(self) -> Indices {
        self.iter()
    }
}

impl FromIterator<usize> for System {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        System::from_indices(iter)
    }
}

impl Ord for System {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.len().cmp(&other.len()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        // the lowest differing index decides: the set holding it sorts first
        if self.0 >> diff.trailing_zeros() & 1 == 1 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for System {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
