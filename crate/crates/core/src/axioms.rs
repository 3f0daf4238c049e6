//! Explicit ternary operation tables: axiom checking and canonical embedding
//! into a hypercube.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{BitVector, Limits, MedianAlgebra, PointId};
use crate::error::{Error, Result};

/// Exhaustive Med 3 checking is O(N^5); above this size it is sampled.
pub const EXHAUSTIVE_MED3_CAP: usize = 40;
/// Number of sampled 5-tuples for Med 3 above [`EXHAUSTIVE_MED3_CAP`].
pub const MED3_SAMPLES: usize = 1_000_000;

/// A ternary operation on `{0, .., size-1}`, stored densely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MedianTable {
    size: usize,
    values: Vec<u32>,
}

impl MedianTable {
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize, usize) -> usize) -> Self {
        let mut values = Vec::with_capacity(size * size * size);
        for x in 0..size {
            for y in 0..size {
                for z in 0..size {
                    values.push(f(x, y, z) as u32);
                }
            }
        }
        MedianTable { size, values }
    }

    /// Builds a table from a flat `size^3` array indexed `(x*size + y)*size + z`.
    pub fn from_values(size: usize, values: Vec<u32>) -> Result<Self> {
        if values.len() != size * size * size {
            return Err(Error::Parse(format!(
                "table has {} entries, expected {}",
                values.len(),
                size * size * size
            )));
        }
        Ok(MedianTable { size, values })
    }

    pub fn of_algebra(m: &MedianAlgebra) -> Self {
        Self::from_fn(m.len(), |x, y, z| {
            m.median(
                PointId::from_index(x),
                PointId::from_index(y),
                PointId::from_index(z),
            )
            .index()
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> usize {
        self.values[(x * self.size + y) * self.size + z] as usize
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: usize) {
        self.values[(x * self.size + y) * self.size + z] = value as u32;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    /// Every entry names an element of the carrier.
    Range,
    /// `m(x,y,z) = m(x,z,y) = m(y,x,z)`.
    Med1,
    /// `m(x,x,y) = x`.
    Med2,
    /// `m(m(x,y,z),u,v) = m(x,m(y,u,v),m(z,u,v))`.
    Med3,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub witness: Vec<usize>,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} fails at {:?}", self.axiom, self.witness)
    }
}

/// Checks the three median axioms, sampling Med 3 with seed 0 above the
/// exhaustive cap.
pub fn validate_axioms(table: &MedianTable) -> Result<(), AxiomViolation> {
    validate_axioms_with(table, EXHAUSTIVE_MED3_CAP, MED3_SAMPLES, 0)
}

pub fn validate_axioms_with(
    table: &MedianTable,
    exhaustive_cap: usize,
    samples: usize,
    seed: u64,
) -> Result<(), AxiomViolation> {
    let n = table.size;
    if let Some(pos) = table.values.iter().position(|&v| v as usize >= n) {
        let x = pos / (n * n);
        let y = (pos / n) % n;
        let z = pos % n;
        return Err(AxiomViolation {
            axiom: Axiom::Range,
            witness: vec![x, y, z],
        });
    }
    let m = |x, y, z| table.get(x, y, z);

    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let v = m(x, y, z);
                if v != m(x, z, y) || v != m(y, x, z) {
                    return Err(AxiomViolation {
                        axiom: Axiom::Med1,
                        witness: vec![x, y, z],
                    });
                }
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            if m(x, x, y) != x {
                return Err(AxiomViolation {
                    axiom: Axiom::Med2,
                    witness: vec![x, x, y],
                });
            }
        }
    }

    let med3 = |x: usize, y: usize, z: usize, u: usize, v: usize| {
        m(m(x, y, z), u, v) == m(x, m(y, u, v), m(z, u, v))
    };
    let failure = if n <= exhaustive_cap {
        (0..n).into_par_iter().find_map_first(|x| {
            for y in 0..n {
                for z in 0..n {
                    for u in 0..n {
                        for v in 0..n {
                            if !med3(x, y, z, u, v) {
                                return Some(vec![x, y, z, u, v]);
                            }
                        }
                    }
                }
            }
            None
        })
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples).find_map(|_| {
            let t: [usize; 5] = std::array::from_fn(|_| rng.gen_range(0..n));
            (!med3(t[0], t[1], t[2], t[3], t[4])).then(|| t.to_vec())
        })
    };
    match failure {
        Some(witness) => Err(AxiomViolation {
            axiom: Axiom::Med3,
            witness,
        }),
        None => Ok(()),
    }
}

/// Embeds an abstract median algebra into a hypercube, one coordinate per
/// wall.
///
/// Walls are found from adjacent pairs: when `[x, y] = {x, y}` the set
/// `{z : m(x, y, z) = x}` is a half-space, and every wall separates some
/// adjacent pair. Each coordinate records membership in the side of its
/// wall that does not contain table element 0. Returns the reduced algebra
/// and the map from table elements to point ranks.
pub fn from_table(table: &MedianTable) -> Result<(MedianAlgebra, Vec<PointId>)> {
    validate_axioms(table).map_err(Error::Violation)?;
    let n = table.size;
    if n == 0 {
        return Err(Error::EmptyAlgebra);
    }
    let m = |x, y, z| table.get(x, y, z);

    // Keys compare the membership vector from the highest element down, so
    // walls whose sides hold later elements come first.
    let mut walls: BTreeSet<Vec<bool>> = BTreeSet::new();
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let adjacent = (0..n).all(|u| u == x || u == y || m(x, y, u) != u);
            if !adjacent {
                continue;
            }
            let side_x: Vec<bool> = (0..n).map(|z| m(x, y, z) == x).collect();
            let flip = side_x[0];
            let key: Vec<bool> = (0..n).rev().map(|z| side_x[z] != flip).collect();
            walls.insert(key);
        }
    }
    let dim = walls.len();
    let limits = Limits::from_env();
    if dim > limits.max_dim {
        return Err(Error::DimensionTooLarge(dim, limits.max_dim));
    }
    let walls: Vec<Vec<bool>> = walls.into_iter().collect();
    let words: Vec<u64> = (0..n)
        .map(|p| {
            walls
                .iter()
                .fold(0u64, |acc, key| (acc << 1) | key[n - 1 - p] as u64)
        })
        .collect();

    let mut distinct = words.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != n {
        return Err(Error::Postcondition(
            "wall embedding of the table is not injective".into(),
        ));
    }
    let points = words
        .iter()
        .map(|&w| BitVector::new(w, dim))
        .collect::<Result<Vec<_>>>()?;
    let algebra = MedianAlgebra::with_limits(dim, points, limits)?;
    let ids: Vec<PointId> = words
        .iter()
        .map(|&w| {
            algebra
                .id_of(BitVector::new(w, dim).expect("in range"))
                .expect("embedded point")
        })
        .collect();
    for x in 0..n {
        for y in x..n {
            for z in y..n {
                if ids[m(x, y, z)] != algebra.median(ids[x], ids[y], ids[z]) {
                    return Err(Error::NotAMorphism(format!(
                        "table median of ({x}, {y}, {z}) disagrees with the embedding"
                    )));
                }
            }
        }
    }
    Ok((algebra, ids))
}
