//! Finite median algebras stored as median-closed sets of bit-vectors.
//!
//! Every algebra lives inside an ambient hypercube `{0,1}^d` (`d <= 64`) and
//! the median is the coordinatewise majority. Points are kept in
//! lexicographic order and a point's rank in that order is its [`PointId`].
//! Coordinate `0` is the leftmost character of the bit-string form and is
//! stored in the most significant used bit, so numeric order of the packed
//! words coincides with lexicographic order of the strings.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::subset::Subset;

/// Algebras up to this many points get a precomputed median table.
pub(crate) const TABLE_CAP: usize = 128;

/// Rank of a point inside its algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u32);

impl PointId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        PointId(i as u32)
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[inline]
pub(crate) fn dim_mask(dim: usize) -> u64 {
    if dim >= 64 {
        u64::MAX
    } else {
        (1u64 << dim) - 1
    }
}

#[inline]
pub(crate) fn majority(a: u64, b: u64, c: u64) -> u64 {
    (a & b) | (b & c) | (a & c)
}

/// A vertex of `{0,1}^dim`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitVector {
    bits: u64,
    dim: u8,
}

impl BitVector {
    pub fn new(bits: u64, dim: usize) -> Result<Self> {
        if dim > 64 {
            return Err(Error::DimensionTooLarge(dim, 64));
        }
        if bits & !dim_mask(dim) != 0 {
            return Err(Error::InvalidPoint(format!(
                "word {bits:#x} has bits beyond dimension {dim}"
            )));
        }
        Ok(BitVector {
            bits,
            dim: dim as u8,
        })
    }

    pub(crate) fn from_raw(bits: u64, dim: usize) -> Self {
        debug_assert!(bits & !dim_mask(dim) == 0);
        BitVector {
            bits,
            dim: dim as u8,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(0, dim)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn dim(self) -> usize {
        self.dim as usize
    }

    /// Value of coordinate `i` (0 is the leftmost character).
    pub fn get(self, i: usize) -> bool {
        assert!(i < self.dim(), "coordinate {i} out of range");
        (self.bits >> (self.dim() - 1 - i)) & 1 == 1
    }

    pub fn with(self, i: usize, value: bool) -> Self {
        assert!(i < self.dim(), "coordinate {i} out of range");
        let bit = 1u64 << (self.dim() - 1 - i);
        let bits = if value { self.bits | bit } else { self.bits & !bit };
        Self::from_raw(bits, self.dim())
    }

    /// Number of coordinates equal to 1.
    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn majority(a: Self, b: Self, c: Self) -> Self {
        assert!(a.dim == b.dim && b.dim == c.dim, "dimension mismatch");
        Self::from_raw(majority(a.bits, b.bits, c.bits), a.dim())
    }

    /// Concatenation `self ++ other`.
    pub fn concat(self, other: Self) -> Result<Self> {
        let dim = self.dim() + other.dim();
        if dim > 64 {
            return Err(Error::DimensionTooLarge(dim, 64));
        }
        let high = if other.dim() >= 64 {
            0
        } else {
            self.bits << other.dim()
        };
        Ok(Self::from_raw(high | other.bits, dim))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() > 64 {
            return Err(Error::DimensionTooLarge(s.len(), 64));
        }
        let mut bits = 0u64;
        for ch in s.chars() {
            bits <<= 1;
            match ch {
                '0' => {}
                '1' => bits |= 1,
                other => {
                    return Err(Error::InvalidPoint(format!(
                        "unexpected character {other:?} in bit-string {s:?}"
                    )))
                }
            }
        }
        Ok(Self::from_raw(bits, s.len()))
    }
}

/// Size caps applied when building algebras.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_points: usize,
    pub max_dim: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_points: 4096,
            max_dim: 64,
        }
    }
}

impl Limits {
    /// Default limits, with `MEDLAB_MAX_POINTS` overriding the point cap.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(n) = std::env::var("MEDLAB_MAX_POINTS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            limits.max_points = n;
        }
        limits
    }
}

/// A finite median algebra embedded in `{0,1}^dim`.
#[derive(Clone)]
pub struct MedianAlgebra {
    dim: usize,
    points: Vec<u64>,
    name: Option<String>,
    reduced: bool,
    table: OnceLock<Option<Arc<[u16]>>>,
}

impl PartialEq for MedianAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points
    }
}

impl Eq for MedianAlgebra {}

impl fmt::Debug for MedianAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self.points().map(|p| p.to_string()).collect();
        f.debug_struct("MedianAlgebra")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("points", &pts)
            .finish()
    }
}

impl MedianAlgebra {
    /// Builds an algebra from arbitrary points, sorting and deduplicating
    /// them and verifying median-closure.
    pub fn new(dim: usize, points: Vec<BitVector>) -> Result<Self> {
        Self::with_limits(dim, points, Limits::default())
    }

    pub fn with_limits(dim: usize, points: Vec<BitVector>, limits: Limits) -> Result<Self> {
        if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::InvalidPoint(format!(
                "{bad} has length {} but the ambient dimension is {dim}",
                bad.dim()
            )));
        }
        let mut raw: Vec<u64> = points.into_iter().map(BitVector::bits).collect();
        raw.sort_unstable();
        raw.dedup();
        Self::from_sorted(dim, raw, true, limits)
    }

    /// The full hypercube `{0,1}^n`; point `k` is the vertex whose packed word is `k`.
    pub fn hypercube(n: usize) -> Result<Self> {
        let limits = Limits::default();
        if n > limits.max_dim || n >= 32 {
            return Err(Error::DimensionTooLarge(n, limits.max_dim.min(31)));
        }
        let count = 1usize << n;
        if count > limits.max_points {
            return Err(Error::TooManyPoints(count, limits.max_points));
        }
        Ok(Self::from_sorted_unchecked(n, (0..count as u64).collect()))
    }

    pub(crate) fn from_sorted(
        dim: usize,
        points: Vec<u64>,
        check_closure: bool,
        limits: Limits,
    ) -> Result<Self> {
        if dim > limits.max_dim {
            return Err(Error::DimensionTooLarge(dim, limits.max_dim));
        }
        if points.is_empty() {
            return Err(Error::EmptyAlgebra);
        }
        if points.len() > limits.max_points {
            return Err(Error::TooManyPoints(points.len(), limits.max_points));
        }
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        let algebra = Self::from_sorted_unchecked(dim, points);
        if check_closure {
            algebra.check_closure()?;
        }
        Ok(algebra)
    }

    pub(crate) fn from_sorted_unchecked(dim: usize, points: Vec<u64>) -> Self {
        let reduced = compute_reduced(dim, &points);
        MedianAlgebra {
            dim,
            points,
            name: None,
            reduced,
            table: OnceLock::new(),
        }
    }

    fn check_closure(&self) -> Result<()> {
        let n = self.points.len();
        let pts = &self.points;
        let witness = (0..n).into_par_iter().find_map_first(|i| {
            for j in i + 1..n {
                for k in j + 1..n {
                    let m = majority(pts[i], pts[j], pts[k]);
                    if pts.binary_search(&m).is_err() {
                        return Some((i, j, k, m));
                    }
                }
            }
            None
        });
        match witness {
            None => Ok(()),
            Some((i, j, k, m)) => {
                let show = |w: u64| BitVector::from_raw(w, self.dim).to_string();
                Err(Error::NotMedianClosed(
                    show(pts[i]),
                    show(pts[j]),
                    show(pts[k]),
                    show(m),
                ))
            }
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false: empty algebras are rejected at construction.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// No constant coordinate and no two coordinates inducing the same partition.
    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn point(&self, id: PointId) -> BitVector {
        BitVector::from_raw(self.points[id.index()], self.dim)
    }

    pub(crate) fn word(&self, id: PointId) -> u64 {
        self.points[id.index()]
    }

    pub fn points(&self) -> impl Iterator<Item = BitVector> + '_ {
        self.points
            .iter()
            .map(move |&w| BitVector::from_raw(w, self.dim))
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> {
        (0..self.points.len()).map(PointId::from_index)
    }

    pub fn id_of(&self, p: BitVector) -> Option<PointId> {
        if p.dim() != self.dim {
            return None;
        }
        self.locate(p.bits())
    }

    /// Looks a point up by its bit-string.
    pub fn id_of_str(&self, s: &str) -> Result<PointId> {
        let p: BitVector = s.parse()?;
        self.id_of(p)
            .ok_or_else(|| Error::InvalidPoint(format!("{s} is not a point of this algebra")))
    }

    #[inline]
    pub(crate) fn locate(&self, bits: u64) -> Option<PointId> {
        self.points
            .binary_search(&bits)
            .ok()
            .map(PointId::from_index)
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.len())
    }

    pub fn subset_of(&self, ids: impl IntoIterator<Item = PointId>) -> Subset {
        Subset::from_ids(self.len(), ids)
    }

    /// Subset from bit-strings.
    pub fn subset_from_strs(&self, strs: &[&str]) -> Result<Subset> {
        let mut s = Subset::empty(self.len());
        for p in strs {
            s.insert(self.id_of_str(p)?);
        }
        Ok(s)
    }

    pub(crate) fn check_subset(&self, s: &Subset) -> Result<()> {
        if s.universe() != self.len() {
            return Err(Error::SubsetMismatch {
                expected: self.len(),
                got: s.universe(),
            });
        }
        Ok(())
    }

    /// Median table for small algebras, built on first use.
    pub(crate) fn median_table(&self) -> Option<&[u16]> {
        self.table
            .get_or_init(|| {
                let n = self.len();
                if n > TABLE_CAP {
                    return None;
                }
                let mut t = vec![0u16; n * n * n];
                for x in 0..n {
                    for y in 0..n {
                        for z in 0..n {
                            let m = majority(self.points[x], self.points[y], self.points[z]);
                            t[(x * n + y) * n + z] = self.locate(m).expect("closure").0 as u16;
                        }
                    }
                }
                Some(Arc::from(t))
            })
            .as_deref()
    }

    /// `m(x, y, z)`.
    #[inline]
    pub fn median(&self, x: PointId, y: PointId, z: PointId) -> PointId {
        let m = majority(self.word(x), self.word(y), self.word(z));
        self.locate(m)
            .expect("median-closure is an invariant of MedianAlgebra")
    }

    /// `[x, y] = { u : m(x, y, u) = u }`.
    pub fn interval(&self, x: PointId, y: PointId) -> Subset {
        let (a, b) = (self.word(x), self.word(y));
        let fixed = !(a ^ b);
        let mut s = Subset::empty(self.len());
        for (i, &u) in self.points.iter().enumerate() {
            if fixed & (u ^ a) == 0 {
                s.insert(PointId::from_index(i));
            }
        }
        s
    }

    #[inline]
    pub(crate) fn in_interval(&self, u: PointId, x: PointId, y: PointId) -> bool {
        let (a, b) = (self.word(x), self.word(y));
        !(a ^ b) & (self.word(u) ^ a) == 0
    }

    pub fn is_convex(&self, c: &Subset) -> bool {
        let members = c.to_vec();
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                if !self.interval(a, b).is_subset(c) {
                    return false;
                }
            }
        }
        true
    }

    /// Smallest convex superset, by closing under intervals.
    pub fn convex_hull(&self, s: &Subset) -> Subset {
        let mut hull = s.clone();
        loop {
            let members = hull.to_vec();
            let mut next = hull.clone();
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    next.union_with(&self.interval(a, b));
                }
            }
            if next == hull {
                return hull;
            }
            hull = next;
        }
    }

    /// The gate of `x` in the convex set `c`: the unique `y` in `c` lying in
    /// `[x, z]` for every `z` in `c`.
    pub fn gate(&self, c: &Subset, x: PointId) -> Result<PointId> {
        self.check_subset(c)?;
        if c.is_empty() {
            return Err(Error::EmptySet);
        }
        if !self.is_convex(c) {
            return Err(Error::NotConvex);
        }
        self.gate_unchecked(c, x)
            .ok_or_else(|| Error::Postcondition("convex set without a gate".into()))
    }

    pub(crate) fn gate_unchecked(&self, c: &Subset, x: PointId) -> Option<PointId> {
        if c.contains(x) {
            return Some(x);
        }
        c.iter()
            .find(|&y| c.iter().all(|z| self.in_interval(y, x, z)))
    }

    /// Gate-projection onto a non-empty convex set, as an endomorphism.
    pub fn gate_projection(&self, c: &Subset) -> Result<Morphism> {
        self.check_subset(c)?;
        if c.is_empty() {
            return Err(Error::EmptySet);
        }
        if !self.is_convex(c) {
            return Err(Error::NotConvex);
        }
        let map = self
            .ids()
            .map(|x| {
                self.gate_unchecked(c, x)
                    .ok_or_else(|| Error::Postcondition("convex set without a gate".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Morphism::new_unchecked(self.len(), self.len(), map))
    }

    /// Cartesian product with coordinatewise median.
    pub fn product(&self, other: &MedianAlgebra) -> Result<MedianAlgebra> {
        self.product_with_limits(other, Limits::default())
    }

    pub fn product_with_limits(&self, other: &MedianAlgebra, limits: Limits) -> Result<Self> {
        let dim = self.dim + other.dim;
        if dim > limits.max_dim {
            return Err(Error::DimensionTooLarge(dim, limits.max_dim));
        }
        let count = self.len().saturating_mul(other.len());
        if count > limits.max_points {
            return Err(Error::TooManyPoints(count, limits.max_points));
        }
        let shift = other.dim;
        let mut points = Vec::with_capacity(count);
        for &a in &self.points {
            for &b in &other.points {
                let high = if shift >= 64 { 0 } else { a << shift };
                points.push(high | b);
            }
        }
        Ok(Self::from_sorted_unchecked(dim, points))
    }

    /// Smallest median-closed superset of `s`.
    pub fn closure(&self, s: &Subset) -> Result<Subset> {
        self.check_subset(s)?;
        if s.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut closed = s.clone();
        let mut members = closed.to_vec();
        // Medians involving at least one point added in the previous round.
        let mut frontier_start = 0;
        loop {
            let mut added = Vec::new();
            let len = members.len();
            for k in frontier_start..len {
                for i in 0..len {
                    for j in i..len {
                        let m = self.median(members[i], members[j], members[k]);
                        if closed.insert(m) {
                            added.push(m);
                        }
                    }
                }
            }
            if added.is_empty() {
                return Ok(closed);
            }
            frontier_start = len;
            members.extend(added);
        }
    }

    pub fn is_median_closed(&self, s: &Subset) -> bool {
        self.closure_witness(s).is_none()
    }

    /// A triple of members whose median falls outside `s`, with that median.
    pub fn closure_witness(&self, s: &Subset) -> Option<(PointId, PointId, PointId, PointId)> {
        let members = s.to_vec();
        for (i, &a) in members.iter().enumerate() {
            for (j, &b) in members.iter().enumerate().skip(i + 1) {
                for &c in &members[j + 1..] {
                    let m = self.median(a, b, c);
                    if !s.contains(m) {
                        return Some((a, b, c, m));
                    }
                }
            }
        }
        None
    }

    /// Materializes a median-closed subset as an algebra of its own, with
    /// the inclusion morphism into `self`. The view keeps the ambient
    /// coordinates, so it is usually not reduced.
    pub fn subalgebra(&self, s: &Subset) -> Result<(MedianAlgebra, Morphism)> {
        self.check_subset(s)?;
        if s.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some((a, b, c, m)) = self.closure_witness(s) {
            return Err(Error::NotMedianClosed(
                self.point(a).to_string(),
                self.point(b).to_string(),
                self.point(c).to_string(),
                self.point(m).to_string(),
            ));
        }
        let ids = s.to_vec();
        let points = ids.iter().map(|&id| self.word(id)).collect();
        let view = Self::from_sorted_unchecked(self.dim, points);
        Ok((view, Morphism::new_unchecked(ids.len(), self.len(), ids)))
    }

    /// For each coordinate, the set of points on the side not containing
    /// point 0. Constant coordinates yield the empty set.
    pub(crate) fn coordinate_sides(&self) -> Vec<FixedBitSet> {
        coordinate_sides(self.dim, &self.points)
    }

    /// Drops constant coordinates and coordinates duplicating the partition
    /// of an earlier one. Point order, and therefore every `PointId`, is
    /// unchanged; the returned morphism is the identity on ranks.
    pub fn reduce(&self) -> (MedianAlgebra, Morphism) {
        let sides = self.coordinate_sides();
        let mut seen = HashSet::new();
        let mut keep = Vec::new();
        for (i, side) in sides.iter().enumerate() {
            if !side.is_clear() && seen.insert(side.clone()) {
                keep.push(i);
            }
        }
        let new_dim = keep.len();
        let points: Vec<u64> = self
            .points
            .iter()
            .map(|&w| {
                keep.iter().fold(0u64, |acc, &i| {
                    (acc << 1) | ((w >> (self.dim - 1 - i)) & 1)
                })
            })
            .collect();
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        let mut reduced = Self::from_sorted_unchecked(new_dim, points);
        reduced.name = self.name.clone();
        debug_assert!(reduced.reduced);
        let iso = Morphism::new_unchecked(self.len(), self.len(), self.ids().collect());
        (reduced, iso)
    }

    /// Checks `f(m(x,y,z)) = m(f x, f y, f z)` on every triple.
    pub fn is_morphism(&self, target: &MedianAlgebra, map: &[PointId]) -> bool {
        morphism_witness(self, target, map).is_none()
    }
}

fn coordinate_sides(dim: usize, points: &[u64]) -> Vec<FixedBitSet> {
    let n = points.len();
    (0..dim)
        .map(|i| {
            let shift = dim - 1 - i;
            let base = (points[0] >> shift) & 1;
            let mut side = FixedBitSet::with_capacity(n);
            for (k, &w) in points.iter().enumerate() {
                if (w >> shift) & 1 != base {
                    side.insert(k);
                }
            }
            side
        })
        .collect()
}

fn compute_reduced(dim: usize, points: &[u64]) -> bool {
    if points.is_empty() {
        return false;
    }
    let mut seen = HashSet::new();
    coordinate_sides(dim, points)
        .into_iter()
        .all(|side| !side.is_clear() && seen.insert(side))
}

/// First triple (up to symmetry) on which `map` fails to commute with the
/// median, or a description of why the map is malformed.
pub(crate) fn morphism_witness(
    source: &MedianAlgebra,
    target: &MedianAlgebra,
    map: &[PointId],
) -> Option<String> {
    if map.len() != source.len() {
        return Some(format!(
            "map has {} entries for {} source points",
            map.len(),
            source.len()
        ));
    }
    if let Some(bad) = map.iter().find(|p| p.index() >= target.len()) {
        return Some(format!("image {bad} is not a target point"));
    }
    let n = source.len();
    (0..n).into_par_iter().find_map_first(|i| {
        let x = PointId::from_index(i);
        for j in i..n {
            let y = PointId::from_index(j);
            for k in j..n {
                let z = PointId::from_index(k);
                let lhs = map[source.median(x, y, z).index()];
                let rhs = target.median(map[i], map[j], map[k]);
                if lhs != rhs {
                    return Some(format!(
                        "f(m({}, {}, {})) = {} but m(f..) = {}",
                        source.point(x),
                        source.point(y),
                        source.point(z),
                        target.point(lhs),
                        target.point(rhs)
                    ));
                }
            }
        }
        None
    })
}

/// A median morphism between two algebras, stored as a rank-to-rank map.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Morphism {
    source_len: usize,
    target_len: usize,
    map: Vec<PointId>,
}

impl Morphism {
    /// Verifies the intertwining identity on all triples.
    pub fn new(source: &MedianAlgebra, target: &MedianAlgebra, map: Vec<PointId>) -> Result<Self> {
        if let Some(w) = morphism_witness(source, target, &map) {
            return Err(Error::NotAMorphism(w));
        }
        Ok(Self::new_unchecked(source.len(), target.len(), map))
    }

    pub(crate) fn new_unchecked(source_len: usize, target_len: usize, map: Vec<PointId>) -> Self {
        debug_assert_eq!(map.len(), source_len);
        Morphism {
            source_len,
            target_len,
            map,
        }
    }

    pub fn identity(algebra: &MedianAlgebra) -> Self {
        Self::new_unchecked(algebra.len(), algebra.len(), algebra.ids().collect())
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    #[inline]
    pub fn apply(&self, x: PointId) -> PointId {
        self.map[x.index()]
    }

    pub fn as_slice(&self) -> &[PointId] {
        &self.map
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Morphism) -> Morphism {
        assert_eq!(self.target_len, other.source_len, "morphisms do not compose");
        Morphism::new_unchecked(
            self.source_len,
            other.target_len,
            self.map.iter().map(|&x| other.apply(x)).collect(),
        )
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = FixedBitSet::with_capacity(self.target_len);
        self.map.iter().all(|p| !seen.put(p.index()))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = FixedBitSet::with_capacity(self.target_len);
        for p in &self.map {
            seen.insert(p.index());
        }
        seen.is_full()
    }

    pub fn image(&self, s: &Subset) -> Subset {
        Subset::from_ids(self.target_len, s.iter().map(|x| self.apply(x)))
    }

    pub fn image_all(&self) -> Subset {
        Subset::from_ids(self.target_len, self.map.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(dim: usize, pts: &[&str]) -> MedianAlgebra {
        MedianAlgebra::new(dim, pts.iter().map(|s| s.parse().unwrap()).collect()).unwrap()
    }

    fn id(m: &MedianAlgebra, s: &str) -> PointId {
        m.id_of_str(s).unwrap()
    }

    #[test]
    fn median_examples() {
        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let p = id(&c3, "101");
        assert_eq!(c3.median(p, p, id(&c3, "010")), p);

        let c2 = MedianAlgebra::hypercube(2).unwrap();
        assert_eq!(
            c2.median(id(&c2, "00"), id(&c2, "01"), id(&c2, "11")),
            id(&c2, "01")
        );

        let path = alg(2, &["00", "01", "11"]);
        assert_eq!(
            path.median(id(&path, "00"), id(&path, "11"), id(&path, "01")),
            id(&path, "01")
        );
    }

    #[test]
    fn bitvector_string_form() {
        let b: BitVector = "0110".parse().unwrap();
        assert_eq!(b.to_string(), "0110");
        assert!(!b.get(0) && b.get(1) && b.get(2) && !b.get(3));
        assert_eq!(b.with(0, true).to_string(), "1110");
        assert!("01a".parse::<BitVector>().is_err());
        let e: BitVector = "".parse().unwrap();
        assert_eq!(e.dim(), 0);
    }

    #[test]
    fn construction_rejects_bad_inputs() {
        assert_eq!(
            MedianAlgebra::new(2, vec![]).unwrap_err(),
            Error::EmptyAlgebra
        );
        // {001, 010, 100} is missing its median 000.
        let err = MedianAlgebra::new(
            3,
            ["001", "010", "100"].iter().map(|s| s.parse().unwrap()).collect(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotMedianClosed(..)));
        let err = MedianAlgebra::new(3, vec!["01".parse().unwrap()]).unwrap_err();
        assert!(matches!(err, Error::InvalidPoint(_)));
    }

    #[test]
    fn interval_examples() {
        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let iv = c3.interval(id(&c3, "000"), id(&c3, "011"));
        let expect = c3.subset_from_strs(&["000", "001", "010", "011"]).unwrap();
        assert_eq!(iv, expect);
        let x = id(&c3, "110");
        assert_eq!(c3.interval(x, x), c3.subset_of([x]));

        let path = alg(2, &["00", "01", "11"]);
        assert_eq!(path.interval(id(&path, "00"), id(&path, "11")), path.full());
    }

    #[test]
    fn convexity_examples() {
        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let face = c3.subset_of(c3.ids().filter(|&p| !c3.point(p).get(0)));
        assert!(c3.is_convex(&face));
        let pair = c3.subset_from_strs(&["000", "011"]).unwrap();
        assert!(!c3.is_convex(&pair));
        assert!(c3.is_convex(&Subset::empty(c3.len())));
    }

    #[test]
    fn hull_examples() {
        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let pair = c3.subset_from_strs(&["000", "011"]).unwrap();
        let expect = c3.subset_from_strs(&["000", "001", "010", "011"]).unwrap();
        assert_eq!(c3.convex_hull(&pair), expect);
        assert_eq!(c3.convex_hull(&expect), expect);
        let empty = Subset::empty(c3.len());
        assert_eq!(c3.convex_hull(&empty), empty);
    }

    #[test]
    fn gate_examples() {
        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let face = c3.subset_of(c3.ids().filter(|&p| !c3.point(p).get(0)));
        assert_eq!(c3.gate(&face, id(&c3, "111")).unwrap(), id(&c3, "011"));
        let x = id(&c3, "010");
        assert_eq!(c3.gate(&face, x).unwrap(), x);

        // Gate onto an interval is the median.
        let (a, b) = (id(&c3, "100"), id(&c3, "111"));
        let iv = c3.interval(a, b);
        for z in c3.ids() {
            assert_eq!(c3.gate(&iv, z).unwrap(), c3.median(a, b, z));
        }

        let pair = c3.subset_from_strs(&["000", "011"]).unwrap();
        assert_eq!(c3.gate(&pair, x).unwrap_err(), Error::NotConvex);
        assert_eq!(
            c3.gate(&Subset::empty(8), x).unwrap_err(),
            Error::EmptySet
        );
    }

    #[test]
    fn product_examples() {
        let c1 = MedianAlgebra::hypercube(1).unwrap();
        assert_eq!(c1.product(&c1).unwrap(), MedianAlgebra::hypercube(2).unwrap());

        let path = alg(2, &["00", "01", "11"]);
        let grid = path.product(&c1).unwrap();
        assert_eq!(grid.len(), 6);
        assert_eq!(grid.dim(), 3);
        assert!(grid.is_median_closed(&grid.full()));

        let one = MedianAlgebra::hypercube(0).unwrap();
        let same = path.product(&one).unwrap();
        assert_eq!(same, path);

        let big = MedianAlgebra::hypercube(7).unwrap();
        let limits = Limits {
            max_points: 100,
            max_dim: 64,
        };
        assert!(matches!(
            big.product_with_limits(&big, limits),
            Err(Error::TooManyPoints(16384, 100))
        ));
    }

    #[test]
    fn closure_examples() {
        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let ends = c3.subset_from_strs(&["000", "111"]).unwrap();
        assert_eq!(c3.closure(&ends).unwrap(), ends);

        let atoms = c3.subset_from_strs(&["001", "010", "100"]).unwrap();
        let expect = c3.subset_from_strs(&["000", "001", "010", "100"]).unwrap();
        assert_eq!(c3.closure(&atoms).unwrap(), expect);
        assert_eq!(c3.closure(&expect).unwrap(), expect);
        assert_eq!(
            c3.closure(&Subset::empty(8)).unwrap_err(),
            Error::EmptySet
        );

        let (view, incl) = c3.subalgebra(&expect).unwrap();
        assert_eq!(view.len(), 4);
        assert!(view.is_morphism(&c3, incl.as_slice()));
        assert!(incl.is_injective());
    }

    #[test]
    fn morphism_examples() {
        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let c2 = MedianAlgebra::hypercube(2).unwrap();
        // Drop the last coordinate.
        let proj: Vec<PointId> = c3
            .ids()
            .map(|p| PointId((c3.word(p) >> 1) as u32))
            .collect();
        assert!(c3.is_morphism(&c2, &proj));

        let constant = vec![PointId(2); 8];
        assert!(c3.is_morphism(&c2, &constant));

        let swap = [
            id(&c2, "00"),
            id(&c2, "10"),
            id(&c2, "01"),
            id(&c2, "11"),
        ];
        assert!(c2.is_morphism(&c2, &swap));
        let bad = [id(&c2, "11"), id(&c2, "01"), id(&c2, "10"), id(&c2, "11")];
        assert!(!c2.is_morphism(&c2, &bad));
        assert!(Morphism::new(&c2, &c2, bad.to_vec()).is_err());
    }

    #[test]
    fn reduce_drops_redundant_coordinates() {
        // Path embedded with a duplicated, a complemented and a constant coordinate.
        let m = alg(5, &["00110", "00011", "11011"]);
        assert!(!m.is_reduced());
        let (r, iso) = m.reduce();
        assert!(r.is_reduced());
        assert_eq!(r.dim(), 2);
        assert_eq!(r.len(), 3);
        assert_eq!(iso.as_slice(), &[PointId(0), PointId(1), PointId(2)]);
        assert!(m.is_morphism(&r, iso.as_slice()));
    }
}
