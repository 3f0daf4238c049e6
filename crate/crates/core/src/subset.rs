use std::fmt;

use fixedbitset::FixedBitSet;

use crate::algebra::PointId;

/// A set of points of one algebra, stored as a bitset over point ranks.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    bits: FixedBitSet,
}

impl Subset {
    pub fn empty(universe: usize) -> Self {
        Subset {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        Subset { bits }
    }

    pub fn from_ids(universe: usize, ids: impl IntoIterator<Item = PointId>) -> Self {
        let mut s = Self::empty(universe);
        for id in ids {
            s.insert(id);
        }
        s
    }

    pub fn singleton(universe: usize, id: PointId) -> Self {
        Self::from_ids(universe, [id])
    }

    /// Number of points of the owning algebra.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.bits.contains(id.index())
    }

    pub fn insert(&mut self, id: PointId) -> bool {
        !self.bits.put(id.index())
    }

    pub fn remove(&mut self, id: PointId) {
        self.bits.set(id.index(), false);
    }

    pub fn iter(&self) -> impl Iterator<Item = PointId> + '_ {
        self.bits.ones().map(PointId::from_index)
    }

    pub fn first(&self) -> Option<PointId> {
        self.bits.ones().next().map(PointId::from_index)
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &Subset) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn union_with(&mut self, other: &Subset) {
        self.bits.union_with(&other.bits);
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Subset { bits }
    }

    pub fn union(&self, other: &Subset) -> Subset {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Subset { bits }
    }

    pub fn complement(&self) -> Subset {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        Subset { bits }
    }

    pub fn to_vec(&self) -> Vec<PointId> {
        self.iter().collect()
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.bits.ones()).finish()
    }
}
