//! Finite groups of automorphisms, invariant measures and invariant cubes.
//!
//! Finite groups are amenable, and averaging over the group is the finite
//! stand-in for an invariant mean. Automorphisms are median morphisms, so
//! `Φ` commutes with them and preserves invariance; a search for balanced
//! measures started from an invariant measure therefore stays invariant,
//! and the cube supporting the limit is mapped to itself by the group.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num::{BigInt, BigRational, Zero};
use rayon::prelude::*;

use crate::algebra::{MedianAlgebra, PointId};
use crate::error::{Error, Result};
use crate::measures::{
    random_start, run_start, CubicalCertificate, FloatMeasure, Measure, SearchParams, StartRecord,
};
use crate::subset::Subset;
use crate::walls::CubeCertificate;

pub const DEFAULT_GROUP_CAP: usize = 100_000;
/// Largest algebra [`brute_force_automorphisms`] accepts.
pub const AUTOMORPHISM_SEARCH_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutomorphismViolation {
    WrongLength { expected: usize, got: usize },
    OutOfRange { index: usize, value: u32 },
    /// Two points with the same image.
    Collision { a: PointId, b: PointId, image: PointId },
    /// A triple whose median is not preserved.
    NotMorphism { x: PointId, y: PointId, z: PointId },
}

impl fmt::Display for AutomorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::WrongLength { expected, got } => {
                write!(f, "permutation has {got} entries, expected {expected}")
            }
            Self::OutOfRange { index, value } => {
                write!(f, "entry {index} maps to {value}, which is not a point")
            }
            Self::Collision { a, b, image } => write!(f, "{a} and {b} both map to {image}"),
            Self::NotMorphism { x, y, z } => {
                write!(f, "median of ({x}, {y}, {z}) is not preserved")
            }
        }
    }
}

/// A median-preserving permutation of the points of one algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Automorphism {
    perm: Vec<PointId>,
    inverse: Vec<PointId>,
}

impl Automorphism {
    pub fn identity(len: usize) -> Self {
        let perm: Vec<PointId> = (0..len).map(PointId::from_index).collect();
        Automorphism {
            inverse: perm.clone(),
            perm,
        }
    }

    fn from_perm_unchecked(perm: Vec<PointId>) -> Self {
        let mut inverse = vec![PointId(0); perm.len()];
        for (i, p) in perm.iter().enumerate() {
            inverse[p.index()] = PointId::from_index(i);
        }
        Automorphism { perm, inverse }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: PointId) -> PointId {
        self.perm[x.index()]
    }

    pub fn perm(&self) -> &[PointId] {
        &self.perm
    }

    pub fn inverse(&self) -> Automorphism {
        Automorphism {
            perm: self.inverse.clone(),
            inverse: self.perm.clone(),
        }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Automorphism) -> Automorphism {
        Self::from_perm_unchecked(self.perm.iter().map(|&x| other.apply(x)).collect())
    }

    pub fn image(&self, s: &Subset) -> Subset {
        Subset::from_ids(s.universe(), s.iter().map(|x| self.apply(x)))
    }

    /// `g_*μ`, i.e. `(g_*μ)(g x) = μ(x)`.
    pub fn push(&self, mu: &Measure) -> Measure {
        let mut w = vec![BigRational::zero(); mu.len()];
        for x in 0..mu.len() {
            w[self.perm[x].index()] = mu.weights()[x].clone();
        }
        Measure::new(w).expect("permuted probability measure")
    }

    fn push_float(&self, mu: &FloatMeasure) -> Vec<f64> {
        let mut w = vec![0.0; mu.len()];
        for (x, &v) in mu.weights().iter().enumerate() {
            w[self.perm[x].index()] = v;
        }
        w
    }
}

fn median_violation(m: &MedianAlgebra, perm: &[PointId]) -> Option<(PointId, PointId, PointId)> {
    let n = m.len();
    (0..n).into_par_iter().find_map_first(|i| {
        let x = PointId::from_index(i);
        for j in i..n {
            let y = PointId::from_index(j);
            for k in j..n {
                let z = PointId::from_index(k);
                if perm[m.median(x, y, z).index()] != m.median(perm[i], perm[j], perm[k]) {
                    return Some((x, y, z));
                }
            }
        }
        None
    })
}

/// Checks bijectivity and that the permutation and its inverse preserve
/// medians.
pub fn validate_automorphism(m: &MedianAlgebra, perm: Vec<PointId>) -> Result<Automorphism> {
    let invalid = |v| Err(Error::InvalidAutomorphism(v));
    if perm.len() != m.len() {
        return invalid(AutomorphismViolation::WrongLength {
            expected: m.len(),
            got: perm.len(),
        });
    }
    let mut preimage: Vec<Option<PointId>> = vec![None; m.len()];
    for (i, &p) in perm.iter().enumerate() {
        if p.index() >= m.len() {
            return invalid(AutomorphismViolation::OutOfRange {
                index: i,
                value: p.0,
            });
        }
        if let Some(a) = preimage[p.index()] {
            return invalid(AutomorphismViolation::Collision {
                a,
                b: PointId::from_index(i),
                image: p,
            });
        }
        preimage[p.index()] = Some(PointId::from_index(i));
    }
    let g = Automorphism::from_perm_unchecked(perm);
    for map in [&g.perm, &g.inverse] {
        if let Some((x, y, z)) = median_violation(m, map) {
            return invalid(AutomorphismViolation::NotMorphism { x, y, z });
        }
    }
    Ok(g)
}

/// A finite group of automorphisms, listed in breadth-first order from the
/// identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    elements: Vec<Automorphism>,
    generators: Vec<Automorphism>,
}

impl FiniteGroup {
    pub fn trivial(m: &MedianAlgebra) -> Self {
        FiniteGroup {
            elements: vec![Automorphism::identity(m.len())],
            generators: Vec::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Automorphism] {
        &self.elements
    }

    pub fn generators(&self) -> &[Automorphism] {
        &self.generators
    }

    pub fn fixes_measure(&self, mu: &Measure) -> bool {
        self.generators.iter().all(|g| g.push(mu) == *mu)
    }

    /// Setwise invariance of a subset under every element.
    pub fn fixes_set(&self, s: &Subset) -> bool {
        self.elements.iter().all(|g| g.image(s) == *s)
    }
}

/// Closes the generators under composition.
pub fn group_closure(
    m: &MedianAlgebra,
    generators: Vec<Automorphism>,
    cap: usize,
) -> Result<FiniteGroup> {
    if let Some(g) = generators.iter().find(|g| g.len() != m.len()) {
        return Err(Error::InvalidAutomorphism(AutomorphismViolation::WrongLength {
            expected: m.len(),
            got: g.len(),
        }));
    }
    let id = Automorphism::identity(m.len());
    let mut index: HashMap<Vec<PointId>, usize> = HashMap::new();
    index.insert(id.perm.clone(), 0);
    let mut elements = vec![id];
    let mut queue = VecDeque::from([0usize]);
    while let Some(e) = queue.pop_front() {
        for g in &generators {
            let h = elements[e].then(g);
            if index.contains_key(&h.perm) {
                continue;
            }
            if elements.len() >= cap {
                return Err(Error::CapExceeded(cap));
            }
            index.insert(h.perm.clone(), elements.len());
            queue.push_back(elements.len());
            elements.push(h);
        }
    }
    Ok(FiniteGroup {
        elements,
        generators,
    })
}

/// `(1/|G|) Σ_g g_*μ`, checked to be invariant.
pub fn average_measure(group: &FiniteGroup, mu: &Measure) -> Result<Measure> {
    let n = mu.len();
    let mut w = vec![BigRational::zero(); n];
    for g in &group.elements {
        if g.len() != n {
            return Err(Error::InvalidMeasure("measure and group act on different algebras".into()));
        }
        for (x, wx) in mu.weights().iter().enumerate() {
            w[g.perm[x].index()] += wx;
        }
    }
    let order = BigRational::from_integer(BigInt::from(group.order()));
    let avg = Measure::new(w.into_iter().map(|v| v / &order).collect())?;
    if !group.fixes_measure(&avg) {
        return Err(Error::Postcondition("group average is not invariant".into()));
    }
    Ok(avg)
}

fn average_float(group: &FiniteGroup, mu: &FloatMeasure) -> FloatMeasure {
    let mut w = vec![0.0; mu.len()];
    for g in &group.elements {
        for (acc, v) in w.iter_mut().zip(g.push_float(mu)) {
            *acc += v;
        }
    }
    FloatMeasure::new(w).expect("average of probability vectors")
}

/// One start of an invariant search.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantStartRecord {
    pub record: StartRecord,
    /// The snapped measure is exactly invariant under the group.
    pub invariant: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantSearch {
    pub starts: Vec<InvariantStartRecord>,
    /// Distinct verified invariant balanced measures, in order of discovery.
    pub results: Vec<(Measure, CubicalCertificate)>,
}

impl InvariantSearch {
    pub fn unresolved(&self) -> usize {
        self.starts
            .iter()
            .filter(|s| !(s.invariant && s.record.is_cubical() == Some(true)))
            .count()
    }
}

/// Searches for invariant balanced measures. Start 0 is the uniform measure
/// on the algebra; start `i > 0` is a random measure drawn with
/// `params.start_seed(i)`. Every start is averaged over the group before
/// iterating.
pub fn invariant_balanced_search(
    m: &MedianAlgebra,
    group: &FiniteGroup,
    params: &SearchParams,
) -> Result<InvariantSearch> {
    let starts = (0..params.starts)
        .into_par_iter()
        .map(|i| {
            let seed = params.start_seed(i);
            let raw = if i == 0 {
                Measure::uniform(m.len()).to_float()
            } else {
                random_start(m.len(), seed)
            };
            let start = average_float(group, &raw);
            let record = run_start(m, &start, seed, params)?;
            let invariant = record
                .snapped
                .as_ref()
                .is_some_and(|mu| group.fixes_measure(mu));
            Ok(InvariantStartRecord { record, invariant })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut results: Vec<(Measure, CubicalCertificate)> = Vec::new();
    for s in &starts {
        if !s.invariant {
            continue;
        }
        let (Some(mu), Some(cert)) = (
            &s.record.snapped,
            s.record.classification.as_ref().and_then(|c| c.certificate()),
        ) else {
            continue;
        };
        if !results.iter().any(|(seen, _)| seen == mu) {
            results.push((mu.clone(), cert.clone()));
        }
    }
    Ok(InvariantSearch { starts, results })
}

/// A cube mapped to itself by every group element, taken from the
/// highest-dimensional verified invariant balanced measure.
pub fn invariant_cube(
    m: &MedianAlgebra,
    group: &FiniteGroup,
    params: &SearchParams,
) -> Result<CubeCertificate> {
    select_invariant_cube(m, group, &invariant_balanced_search(m, group, params)?)
}

/// The selection step of [`invariant_cube`], for a search already run.
pub fn select_invariant_cube(
    m: &MedianAlgebra,
    group: &FiniteGroup,
    search: &InvariantSearch,
) -> Result<CubeCertificate> {
    let best = search
        .results
        .iter()
        .map(|(_, c)| &c.cube)
        .fold(None::<&CubeCertificate>, |best, c| match best {
            Some(b) if b.dim() >= c.dim() => Some(b),
            _ => Some(c),
        })
        .ok_or(Error::Unresolved)?;
    if !group.fixes_set(&best.point_set(m.len())) {
        return Err(Error::Postcondition(
            "cube of an invariant balanced measure is not invariant".into(),
        ));
    }
    Ok(best.clone())
}

/// Every automorphism of a small algebra, by backtracking. Meant for tests.
pub fn brute_force_automorphisms(m: &MedianAlgebra) -> Result<Vec<Automorphism>> {
    let n = m.len();
    if n > AUTOMORPHISM_SEARCH_CAP {
        return Err(Error::TooLarge(format!(
            "{n} points exceed the automorphism search cap of {AUTOMORPHISM_SEARCH_CAP}"
        )));
    }
    let mut out = Vec::new();
    let mut perm: Vec<Option<PointId>> = vec![None; n];
    let mut used = vec![false; n];
    extend(m, 0, &mut perm, &mut used, &mut out);
    Ok(out)
}

fn extend(
    m: &MedianAlgebra,
    k: usize,
    perm: &mut Vec<Option<PointId>>,
    used: &mut Vec<bool>,
    out: &mut Vec<Automorphism>,
) {
    let n = m.len();
    if k == n {
        let p: Vec<PointId> = perm.iter().map(|p| p.expect("assigned")).collect();
        if median_violation(m, &p).is_none() {
            out.push(Automorphism::from_perm_unchecked(p));
        }
        return;
    }
    for image in 0..n {
        if used[image] {
            continue;
        }
        perm[k] = Some(PointId::from_index(image));
        if consistent(m, k, perm) {
            used[image] = true;
            extend(m, k + 1, perm, used, out);
            used[image] = false;
        }
    }
    perm[k] = None;
}

/// Checks triples involving point `k` whose points and median are all assigned.
fn consistent(m: &MedianAlgebra, k: usize, perm: &[Option<PointId>]) -> bool {
    let kk = PointId::from_index(k);
    for i in 0..=k {
        for j in i..=k {
            let (x, y) = (PointId::from_index(i), PointId::from_index(j));
            let med = m.median(x, y, kk);
            let (Some(fm), Some(fx), Some(fy), Some(fk)) =
                (perm[med.index()], perm[i], perm[j], perm[k])
            else {
                continue;
            };
            if fm != m.median(fx, fy, fk) {
                return false;
            }
        }
    }
    true
}
