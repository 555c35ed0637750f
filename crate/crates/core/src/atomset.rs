//! Bitset of atom indices.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Index of an atom inside its owning lattice.
pub type AtomId = usize;

/// Hard ceiling on atoms per lattice: an [`AtomSet`] is one machine word.
pub const MAX_ATOMS: usize = 64;

/// A finite set of atoms, stored as a 64-bit mask.
///
/// Sets order lexicographically by their ascending member lists, so
/// `{} < {0} < {0,1} < {0,2} < {1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AtomSet(u64);

impl AtomSet {
    pub const EMPTY: AtomSet = AtomSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        AtomSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `{0, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_ATOMS, "atom count {n} exceeds {MAX_ATOMS}");
        if n == MAX_ATOMS {
            AtomSet(u64::MAX)
        } else {
            AtomSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(p: AtomId) -> Self {
        assert!(p < MAX_ATOMS);
        AtomSet(1u64 << p)
    }

    pub fn contains(self, p: AtomId) -> bool {
        p < MAX_ATOMS && self.0 >> p & 1 == 1
    }

    pub fn insert(&mut self, p: AtomId) {
        assert!(p < MAX_ATOMS);
        self.0 |= 1u64 << p;
    }

    pub fn remove(&mut self, p: AtomId) {
        if p < MAX_ATOMS {
            self.0 &= !(1u64 << p);
        }
    }

    pub fn with(mut self, p: AtomId) -> Self {
        self.insert(p);
        self
    }

    pub fn union(self, other: Self) -> Self {
        AtomSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        AtomSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        AtomSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset(self, other: Self) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Smallest member, if any.
    pub fn first(self) -> Option<AtomId> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as AtomId)
    }

    /// Members in ascending order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    /// Image under an atom map given as a lookup table.
    pub fn map(self, table: &[AtomId]) -> AtomSet {
        let mut out = 0u64;
        for p in self.iter() {
            out |= 1u64 << table[p];
        }
        AtomSet(out)
    }

    pub fn to_vec(self) -> Vec<AtomId> {
        self.iter().collect()
    }
}

impl Ord for AtomSet {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0 == other.0 {
            return Ordering::Equal;
        }
        // Members below the lowest differing bit agree; the set holding that
        // bit is smaller unless the other set has nothing left after it.
        let k = (self.0 ^ other.0).trailing_zeros();
        let (rest, self_holds) = if self.0 >> k & 1 == 1 {
            (other.0 >> k, true)
        } else {
            (self.0 >> k, false)
        };
        let holder_smaller = rest != 0;
        if holder_smaller == self_holds {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for AtomSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<AtomId> for AtomSet {
    fn from_iter<I: IntoIterator<Item = AtomId>>(iter: I) -> Self {
        let mut s = AtomSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl<'a> FromIterator<&'a AtomId> for AtomSet {
    fn from_iter<I: IntoIterator<Item = &'a AtomId>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

impl IntoIterator for AtomSet {
    type Item = AtomId;
    type IntoIter = Iter;
    fn into_iter(self) -> Iter {
        self.iter()
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = AtomId;

    fn next(&mut self) -> Option<AtomId> {
        if self.0 == 0 {
            return None;
        }
        let p = self.0.trailing_zeros() as AtomId;
        self.0 &= self.0 - 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for AtomSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for AtomSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(deserializer)?;
        if let Some(&bad) = members.iter().find(|&&p| p >= MAX_ATOMS) {
            return Err(serde::de::Error::custom(format!(
                "atom index {bad} exceeds the {MAX_ATOMS}-atom limit"
            )));
        }
        Ok(members.into_iter().collect())
    }
}
