//! Half-spaces, walls, separation and cube detection.
//!
//! In a finite median algebra every half-space is clopen, so the walls of a
//! reduced embedding are exactly its coordinates. That identification is
//! cross-checked against [`brute_force_halfspaces`] on small algebras.
//!
//! Each wall has a canonical side: the side that does not contain point 0
//! (the lexicographically smallest point). The wall embedding records
//! membership in the canonical side, so point 0 always maps to the origin.

use crate::algebra::{MedianAlgebra, Morphism, PointId};
use crate::error::{Error, Result};
use crate::subset::Subset;

/// Largest algebra [`brute_force_halfspaces`] will scan.
pub const BRUTE_FORCE_CAP: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HalfSpace {
    /// Id of the wall this half-space is a side of.
    pub wall: usize,
    pub members: Subset,
}

impl HalfSpace {
    pub fn complement(&self) -> HalfSpace {
        HalfSpace {
            wall: self.wall,
            members: self.members.complement(),
        }
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.members.contains(p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Wall {
    pub id: usize,
    /// Canonical side: the half-space not containing point 0.
    pub positive: Subset,
    /// Ambient coordinate inducing this wall, when known.
    pub coordinate: Option<usize>,
}

impl Wall {
    pub fn negative(&self) -> Subset {
        self.positive.complement()
    }

    pub fn positive_half(&self) -> HalfSpace {
        HalfSpace {
            wall: self.id,
            members: self.positive.clone(),
        }
    }

    pub fn negative_half(&self) -> HalfSpace {
        HalfSpace {
            wall: self.id,
            members: self.negative(),
        }
    }

    /// Sizes of the canonical side and its complement.
    pub fn side_sizes(&self) -> (usize, usize) {
        let p = self.positive.len();
        (p, self.positive.universe() - p)
    }
}

/// Walls induced by the distinct non-constant coordinates of any embedding.
pub(crate) fn coordinate_walls(m: &MedianAlgebra) -> Vec<Wall> {
    let (reduced_coords, sides) = {
        let sides = m.coordinate_sides();
        let mut seen = std::collections::HashSet::new();
        let mut coords = Vec::new();
        let mut kept = Vec::new();
        for (i, side) in sides.into_iter().enumerate() {
            if !side.is_clear() && seen.insert(side.clone()) {
                coords.push(i);
                kept.push(side);
            }
        }
        (coords, kept)
    };
    reduced_coords
        .into_iter()
        .zip(sides)
        .enumerate()
        .map(|(id, (coord, side))| Wall {
            id,
            positive: Subset::from_ids(m.len(), side.ones().map(PointId::from_index)),
            coordinate: Some(coord),
        })
        .collect()
}

/// One wall per ambient coordinate of a reduced algebra, in coordinate order.
pub fn enumerate_walls(m: &MedianAlgebra) -> Result<Vec<Wall>> {
    if !m.is_reduced() {
        return Err(Error::NotReduced);
    }
    let walls = coordinate_walls(m);
    debug_assert_eq!(walls.len(), m.dim());
    Ok(walls)
}

fn interval_masks(m: &MedianAlgebra) -> Vec<Vec<u32>> {
    let n = m.len();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    m.interval(PointId::from_index(a), PointId::from_index(b))
                        .iter()
                        .fold(0u32, |acc, p| acc | (1 << p.index()))
                })
                .collect()
        })
        .collect()
}

fn mask_is_convex(mask: u32, intervals: &[Vec<u32>]) -> bool {
    let mut rest = mask;
    while rest != 0 {
        let a = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let mut others = rest;
        while others != 0 {
            let b = others.trailing_zeros() as usize;
            others &= others - 1;
            if intervals[a][b] & !mask != 0 {
                return false;
            }
        }
    }
    true
}

/// Every half-space of `m`, found by testing all bipartitions for two-sided
/// convexity. Half-spaces come in complementary pairs sharing a wall index;
/// walls are numbered in scan order of their canonical sides.
pub fn brute_force_halfspaces(m: &MedianAlgebra) -> Result<Vec<HalfSpace>> {
    let n = m.len();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge(format!(
            "{n} points exceed the brute-force cap of {BRUTE_FORCE_CAP}"
        )));
    }
    let intervals = interval_masks(m);
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let to_subset = |mask: u32| {
        Subset::from_ids(
            n,
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(PointId::from_index),
        )
    };
    let mut out = Vec::new();
    // Canonical sides never contain point 0, so scan even masks only.
    let mut mask = 2u32;
    let mut wall = 0;
    while mask < full {
        let comp = full & !mask;
        if mask_is_convex(mask, &intervals) && mask_is_convex(comp, &intervals) {
            out.push(HalfSpace {
                wall,
                members: to_subset(mask),
            });
            out.push(HalfSpace {
                wall,
                members: to_subset(comp),
            });
            wall += 1;
        }
        mask += 2;
    }
    Ok(out)
}

/// Walls assembled from [`brute_force_halfspaces`].
pub fn brute_force_walls(m: &MedianAlgebra) -> Result<Vec<Wall>> {
    Ok(brute_force_halfspaces(m)?
        .chunks(2)
        .map(|pair| Wall {
            id: pair[0].wall,
            positive: pair[0].members.clone(),
            coordinate: None,
        })
        .collect())
}

fn check_separation_inputs(m: &MedianAlgebra, a: &Subset, b: &Subset) -> Result<()> {
    m.check_subset(a)?;
    m.check_subset(b)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !a.is_disjoint(b) {
        return Err(Error::NotDisjoint);
    }
    Ok(())
}

/// `Δ(A, B)`: all half-spaces containing `a` whose complement contains `b`,
/// ordered by wall id.
pub fn delta(m: &MedianAlgebra, a: &Subset, b: &Subset) -> Result<Vec<HalfSpace>> {
    check_separation_inputs(m, a, b)?;
    let mut out = Vec::new();
    for w in coordinate_walls(m) {
        let neg = w.negative();
        if a.is_subset(&w.positive) && b.is_subset(&neg) {
            out.push(w.positive_half());
        } else if a.is_subset(&neg) && b.is_subset(&w.positive) {
            out.push(w.negative_half());
        }
    }
    Ok(out)
}

/// A half-space containing `c` and missing `c2`; the one with the smallest
/// wall id.
pub fn separate(m: &MedianAlgebra, c: &Subset, c2: &Subset) -> Result<HalfSpace> {
    check_separation_inputs(m, c, c2)?;
    if !m.is_convex(c) || !m.is_convex(c2) {
        return Err(Error::NotConvex);
    }
    delta(m, c, c2)?
        .into_iter()
        .next()
        .ok_or(Error::NoSeparator)
}

/// A point `a` of the convex set `a_set` with `Δ(A, B) = Δ(a, B)`: the gate
/// in `A` of the smallest point of `B`.
pub fn gate_representative(m: &MedianAlgebra, a_set: &Subset, b: &Subset) -> Result<PointId> {
    check_separation_inputs(m, a_set, b)?;
    let b0 = b.first().expect("non-empty");
    let a = m.gate(a_set, b0)?;
    let whole = delta(m, a_set, b)?;
    let single = delta(m, &Subset::singleton(m.len(), a), b)?;
    if whole != single {
        return Err(Error::Postcondition(format!(
            "Δ(A, B) has {} half-spaces but Δ(a, B) has {}",
            whole.len(),
            single.len()
        )));
    }
    Ok(a)
}

/// Two distinct walls are transverse when all four side intersections are
/// non-empty.
pub fn is_transverse(w1: &Wall, w2: &Wall) -> Result<bool> {
    if w1.positive == w2.positive {
        return Err(Error::SameWall);
    }
    let (p1, n1) = (&w1.positive, w1.negative());
    let (p2, n2) = (&w2.positive, w2.negative());
    Ok(!p1.intersection(p2).is_empty()
        && !p1.intersection(&n2).is_empty()
        && !n1.intersection(p2).is_empty()
        && !n1.intersection(&n2).is_empty())
}

/// Indicator map of the canonical sides of `walls`, into `{0,1}^|walls|`.
/// Wall `i` becomes coordinate `i` of the target cube.
pub fn wall_embedding(m: &MedianAlgebra, walls: &[Wall]) -> Result<(MedianAlgebra, Morphism)> {
    let cube = MedianAlgebra::hypercube(walls.len())?;
    let k = walls.len();
    let map: Vec<PointId> = m
        .ids()
        .map(|x| {
            let word = walls.iter().enumerate().fold(0u64, |acc, (i, w)| {
                acc | ((w.positive.contains(x) as u64) << (k - 1 - i))
            });
            PointId(word as u32)
        })
        .collect();
    let iso = Morphism::new(m, &cube, map)?;
    Ok((cube, iso))
}

/// Witness that a median-closed subset is a cube.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeCertificate {
    /// The cube's points, as ranks in the enclosing algebra.
    pub points: Vec<PointId>,
    /// Walls of the cube, over ranks of `points` (rank `i` is `points[i]`).
    pub walls: Vec<Wall>,
    /// Bijection from ranks of `points` to vertices of `{0,1}^dim`.
    pub iso: Morphism,
    pub inverse: Morphism,
}

impl CubeCertificate {
    pub fn dim(&self) -> usize {
        self.walls.len()
    }

    /// The cube's points as a subset of the enclosing algebra.
    pub fn point_set(&self, universe: usize) -> Subset {
        Subset::from_ids(universe, self.points.iter().copied())
    }

    /// Cube vertex (packed word) of the `i`-th cube point.
    pub fn vertex_of(&self, i: usize) -> u64 {
        self.iso.as_slice()[i].0 as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotCubeReason {
    /// Two points no wall separates.
    NotSeparated(PointId, PointId),
    /// Two walls (ids in the subalgebra's wall list) that are nested.
    NonTransverse(usize, usize),
    /// `|S| != 2^walls`.
    Cardinality { points: usize, walls: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CubeOutcome {
    Cube(CubeCertificate),
    /// Every failed check, each with its first witness.
    NotCube(Vec<NotCubeReason>),
}

impl CubeOutcome {
    pub fn certificate(&self) -> Option<&CubeCertificate> {
        match self {
            CubeOutcome::Cube(c) => Some(c),
            CubeOutcome::NotCube(_) => None,
        }
    }

    pub fn is_cube(&self) -> bool {
        matches!(self, CubeOutcome::Cube(_))
    }
}

/// Decides whether the median-closed subset `s` is a cube: its walls must be
/// separating and pairwise transverse.
pub fn detect_cube(m: &MedianAlgebra, s: &Subset) -> Result<CubeOutcome> {
    let (view, inclusion) = m.subalgebra(s)?;
    let (reduced, _) = view.reduce();
    let walls = enumerate_walls(&reduced)?;
    let points = inclusion.as_slice().to_vec();
    let mut reasons = Vec::new();

    let signature = |x: PointId| -> Vec<bool> { walls.iter().map(|w| w.positive.contains(x)).collect() };
    'sep: for x in reduced.ids() {
        for y in reduced.ids().skip(x.index() + 1) {
            if signature(x) == signature(y) {
                reasons.push(NotCubeReason::NotSeparated(points[x.index()], points[y.index()]));
                break 'sep;
            }
        }
    }
    'tr: for (i, w1) in walls.iter().enumerate() {
        for w2 in &walls[i + 1..] {
            if !is_transverse(w1, w2)? {
                reasons.push(NotCubeReason::NonTransverse(w1.id, w2.id));
                break 'tr;
            }
        }
    }
    let k = walls.len();
    if k >= usize::BITS as usize - 1 || reduced.len() != 1usize << k {
        reasons.push(NotCubeReason::Cardinality {
            points: reduced.len(),
            walls: k,
        });
    }
    if !reasons.is_empty() {
        return Ok(CubeOutcome::NotCube(reasons));
    }

    let (cube, iso) = wall_embedding(&reduced, &walls)?;
    if !(iso.is_injective() && iso.is_surjective()) {
        return Err(Error::Postcondition(
            "cube embedding is not bijective".into(),
        ));
    }
    let mut inv = vec![PointId(0); cube.len()];
    for x in reduced.ids() {
        inv[iso.apply(x).index()] = x;
    }
    let inverse = Morphism::new(&cube, &reduced, inv)?;
    Ok(CubeOutcome::Cube(CubeCertificate {
        points,
        walls,
        iso,
        inverse,
    }))
}

/// [`detect_cube`] on the whole algebra.
pub fn detect_cube_algebra(m: &MedianAlgebra) -> Result<CubeOutcome> {
    detect_cube(m, &m.full())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(dim: usize, pts: &[&str]) -> MedianAlgebra {
        MedianAlgebra::new(dim, pts.iter().map(|s| s.parse().unwrap()).collect()).unwrap()
    }

    fn path3() -> MedianAlgebra {
        alg(2, &["00", "01", "11"])
    }

    fn partitions(walls: &[Wall]) -> std::collections::BTreeSet<Vec<PointId>> {
        walls.iter().map(|w| w.positive.to_vec()).collect()
    }

    #[test]
    fn enumerate_walls_examples() {
        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let walls = enumerate_walls(&c3).unwrap();
        assert_eq!(walls.len(), 3);
        for w in &walls {
            assert_eq!(w.side_sizes(), (4, 4));
        }

        let p = path3();
        let walls = enumerate_walls(&p).unwrap();
        assert_eq!(walls.len(), 2);
        let sides: Vec<Vec<String>> = walls
            .iter()
            .map(|w| w.negative().iter().map(|x| p.point(x).to_string()).collect())
            .collect();
        assert_eq!(sides, vec![vec!["00", "01"], vec!["00"]]);

        let one = MedianAlgebra::hypercube(0).unwrap();
        assert!(enumerate_walls(&one).unwrap().is_empty());

        let unreduced = alg(3, &["000", "110"]);
        assert_eq!(enumerate_walls(&unreduced).unwrap_err(), Error::NotReduced);
    }

    #[test]
    fn brute_force_examples() {
        let c2 = MedianAlgebra::hypercube(2).unwrap();
        assert_eq!(brute_force_halfspaces(&c2).unwrap().len(), 4);
        assert_eq!(brute_force_walls(&c2).unwrap().len(), 2);

        let p = path3();
        assert_eq!(brute_force_halfspaces(&p).unwrap().len(), 4);
        assert_eq!(
            partitions(&brute_force_walls(&p).unwrap()),
            partitions(&enumerate_walls(&p).unwrap())
        );

        let one = MedianAlgebra::hypercube(0).unwrap();
        assert!(brute_force_halfspaces(&one).unwrap().is_empty());

        let big = MedianAlgebra::hypercube(5).unwrap();
        assert!(matches!(
            brute_force_halfspaces(&big),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn delta_examples() {
        let c2 = MedianAlgebra::hypercube(2).unwrap();
        let a = c2.subset_from_strs(&["00"]).unwrap();
        let b = c2.subset_from_strs(&["11"]).unwrap();
        let d = delta(&c2, &a, &b).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|h| h.contains(c2.id_of_str("00").unwrap())));

        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let a = c3.subset_from_strs(&["000"]).unwrap();
        let b = c3.subset_from_strs(&["001"]).unwrap();
        let d = delta(&c3, &a, &b).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].wall, 2);
        assert_eq!(d[0].members.len(), 4);

        // Non-convex sets may have no separator: the two diagonals of a square.
        let a = c2.subset_from_strs(&["00", "11"]).unwrap();
        let b = c2.subset_from_strs(&["01", "10"]).unwrap();
        assert!(delta(&c2, &a, &b).unwrap().is_empty());

        assert_eq!(delta(&c2, &a, &a).unwrap_err(), Error::NotDisjoint);
        assert_eq!(
            delta(&c2, &a, &Subset::empty(4)).unwrap_err(),
            Error::EmptyInput
        );
    }

    #[test]
    fn separate_examples() {
        let c2 = MedianAlgebra::hypercube(2).unwrap();
        let a = c2.subset_from_strs(&["00"]).unwrap();
        let b = c2.subset_from_strs(&["11"]).unwrap();
        let h = separate(&c2, &a, &b).unwrap();
        assert_eq!(h.wall, 0);
        assert_eq!(h.members, c2.subset_from_strs(&["00", "01"]).unwrap());

        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let face = c3.subset_of(c3.ids().filter(|&p| !c3.point(p).get(0)));
        let top = c3.subset_from_strs(&["111"]).unwrap();
        assert_eq!(separate(&c3, &face, &top).unwrap().members, face);

        for x in c3.ids() {
            for y in c3.ids().filter(|&y| y != x) {
                let h = separate(&c3, &c3.subset_of([x]), &c3.subset_of([y])).unwrap();
                assert!(h.contains(x) && !h.contains(y));
            }
        }

        let diag = c2.subset_from_strs(&["00", "11"]).unwrap();
        let other = c2.subset_from_strs(&["01"]).unwrap();
        assert_eq!(separate(&c2, &diag, &other).unwrap_err(), Error::NotConvex);
    }

    #[test]
    fn gate_representative_examples() {
        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let face = c3.subset_of(c3.ids().filter(|&p| !c3.point(p).get(0)));
        let top = c3.subset_from_strs(&["111"]).unwrap();
        let a = gate_representative(&c3, &face, &top).unwrap();
        assert_eq!(c3.point(a).to_string(), "011");
        let d = delta(&c3, &face, &top).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].members, face);

        let x = c3.id_of_str("101").unwrap();
        let single = c3.subset_of([x]);
        assert_eq!(gate_representative(&c3, &single, &top).unwrap(), x);

        let iv = c3.interval(c3.id_of_str("000").unwrap(), c3.id_of_str("011").unwrap());
        let b = c3.subset_from_strs(&["100", "111"]).unwrap();
        let a = gate_representative(&c3, &iv, &b).unwrap();
        assert_eq!(c3.point(a).to_string(), "000");
        assert_eq!(
            delta(&c3, &iv, &b).unwrap(),
            delta(&c3, &c3.subset_of([a]), &b).unwrap()
        );
    }

    #[test]
    fn transversality_examples() {
        let c2 = MedianAlgebra::hypercube(2).unwrap();
        let w = enumerate_walls(&c2).unwrap();
        assert!(is_transverse(&w[0], &w[1]).unwrap());
        assert_eq!(is_transverse(&w[0], &w[0]).unwrap_err(), Error::SameWall);

        let p = path3();
        let w = enumerate_walls(&p).unwrap();
        assert!(!is_transverse(&w[0], &w[1]).unwrap());

        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let w = enumerate_walls(&c3).unwrap();
        assert!(is_transverse(&w[0], &w[2]).unwrap());
    }

    #[test]
    fn wall_embedding_examples() {
        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let (cube, iso) = wall_embedding(&c3, &enumerate_walls(&c3).unwrap()).unwrap();
        assert_eq!(cube.len(), 8);
        assert!(iso.is_injective() && iso.is_surjective());

        let p = path3();
        let w = enumerate_walls(&p).unwrap();
        let (cube, f) = wall_embedding(&p, &w[..1]).unwrap();
        assert_eq!(cube.len(), 2);
        assert!(f.is_surjective() && !f.is_injective());

        let (cube, f) = wall_embedding(&p, &[]).unwrap();
        assert_eq!(cube.len(), 1);
        assert!(f.as_slice().iter().all(|&x| x == PointId(0)));
    }

    #[test]
    fn detect_cube_examples() {
        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let cert = detect_cube_algebra(&c3).unwrap();
        assert_eq!(cert.certificate().unwrap().dim(), 3);

        let p = path3();
        match detect_cube_algebra(&p).unwrap() {
            CubeOutcome::NotCube(reasons) => {
                assert!(reasons
                    .iter()
                    .any(|r| matches!(r, NotCubeReason::NonTransverse(0, 1))));
            }
            CubeOutcome::Cube(_) => panic!("a path is not a cube"),
        }

        let c2 = MedianAlgebra::hypercube(2).unwrap();
        let anti = c2.subset_from_strs(&["01", "10"]).unwrap();
        let cert = detect_cube(&c2, &anti).unwrap();
        let cert = cert.certificate().unwrap();
        assert_eq!(cert.dim(), 1);
        assert_eq!(cert.point_set(4), anti);

        let c3 = MedianAlgebra::hypercube(3).unwrap();
        let not_closed = c3.subset_from_strs(&["000", "011", "101"]).unwrap();
        assert!(matches!(
            detect_cube(&c3, &not_closed),
            Err(Error::NotMedianClosed(..))
        ));
    }

    #[test]
    fn certificate_iso_inverts() {
        let m = alg(4, &["0000", "0011", "1100", "1111"]);
        let cert = detect_cube_algebra(&m).unwrap();
        let cert = cert.certificate().unwrap();
        assert_eq!(cert.dim(), 2);
        for i in 0..4 {
            let x = PointId(i);
            assert_eq!(cert.inverse.apply(cert.iso.apply(x)), x);
        }
        assert_eq!(cert.vertex_of(0), 0);
    }
}
