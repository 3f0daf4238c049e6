//! Example algebras: hypercubes, trees, grids, products and seeded random
//! subalgebras of small hypercubes.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Limits, MedianAlgebra, PointId};
use crate::error::{Error, Result};
use crate::subset::Subset;

pub const MAX_HYPERCUBE_DIM: usize = 12;
pub const MAX_RANDOM_DIM: usize = 10;
pub const MAX_GRID_POINTS: usize = 4096;

/// A reproducible description of a generated algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Hypercube { n: usize },
    Tree { edges: Vec<(usize, usize)> },
    Grid { a: usize, b: usize },
    Product { left: Box<GeneratorSpec>, right: Box<GeneratorSpec> },
    RandomSubalgebra { d: usize, k: usize, seed: u64 },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<MedianAlgebra> {
        let m = match self {
            Self::Hypercube { n } => hypercube(*n)?,
            Self::Tree { edges } => tree(edges)?,
            Self::Grid { a, b } => grid(*a, *b)?,
            Self::Product { left, right } => left.build()?.product(&right.build()?)?,
            Self::RandomSubalgebra { d, k, seed } => random_subalgebra(*d, *k, *seed)?,
        };
        Ok(m.with_name(self.label()))
    }

    pub fn label(&self) -> String {
        match self {
            Self::Hypercube { n } => format!("hypercube({n})"),
            Self::Tree { edges } => {
                let e: Vec<String> = edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
                format!("tree({})", e.join(","))
            }
            Self::Grid { a, b } => format!("grid({a},{b})"),
            Self::Product { left, right } => format!("{} x {}", left.label(), right.label()),
            Self::RandomSubalgebra { d, k, seed } => format!("random_subalgebra({d},{k},{seed})"),
        }
    }
}

pub fn hypercube(n: usize) -> Result<MedianAlgebra> {
    if n > MAX_HYPERCUBE_DIM {
        return Err(Error::OutOfRange(format!(
            "hypercube dimension {n} exceeds {MAX_HYPERCUBE_DIM}"
        )));
    }
    MedianAlgebra::hypercube(n)
}

/// A tree on vertices `0..=edges.len()`, one coordinate per edge.
pub fn tree(edges: &[(usize, usize)]) -> Result<MedianAlgebra> {
    tree_with_vertices(edges).map(|(m, _)| m)
}

/// Like [`tree`], also returning the point of each vertex.
///
/// Coordinate `i` is 1 exactly on the vertices separated from vertex 0 by
/// edge `i`, so vertex 0 is the origin.
pub fn tree_with_vertices(edges: &[(usize, usize)]) -> Result<(MedianAlgebra, Vec<PointId>)> {
    let v = edges.len() + 1;
    let limits = Limits::default();
    if edges.len() > limits.max_dim {
        return Err(Error::DimensionTooLarge(edges.len(), limits.max_dim));
    }
    let mut adj = vec![Vec::new(); v];
    for (i, &(a, b)) in edges.iter().enumerate() {
        if a >= v || b >= v {
            return Err(Error::NotATree(format!(
                "edge {a}-{b} names a vertex outside 0..{v}"
            )));
        }
        if a == b {
            return Err(Error::NotATree(format!("loop at vertex {a}")));
        }
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    // Depth-first from vertex 0; a vertex's word is its parent's word plus
    // the bit of the connecting edge.
    let dim = edges.len();
    let mut word: Vec<Option<u64>> = vec![None; v];
    word[0] = Some(0);
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        let wu = word[u].expect("visited");
        for &(w, e) in &adj[u] {
            if word[w].is_none() {
                word[w] = Some(wu | 1u64 << (dim - 1 - e));
                stack.push(w);
            }
        }
    }
    let words: Vec<u64> = match word.into_iter().collect::<Option<Vec<_>>>() {
        Some(w) => w,
        None => return Err(Error::NotATree("edges do not connect every vertex".into())),
    };
    // Connected with |V| - 1 edges, so acyclic; the words are then distinct.
    let mut sorted = words.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != v {
        return Err(Error::NotATree("edges contain a cycle".into()));
    }
    let m = MedianAlgebra::from_sorted(dim, sorted, cfg!(debug_assertions), limits)?;
    let ids = words
        .iter()
        .map(|&w| m.locate(w).expect("vertex word"))
        .collect();
    Ok((m, ids))
}

/// The path with `k ≥ 1` vertices.
pub fn path(k: usize) -> Result<MedianAlgebra> {
    if k == 0 {
        return Err(Error::OutOfRange("a path needs at least one vertex".into()));
    }
    tree(&(1..k).map(|i| (i - 1, i)).collect::<Vec<_>>())
}

/// The star with a center (vertex 0) and `leaves` leaves.
pub fn star(leaves: usize) -> Result<MedianAlgebra> {
    tree(&(1..=leaves).map(|i| (0, i)).collect::<Vec<_>>())
}

/// Product of an `a`-vertex path and a `b`-vertex path.
pub fn grid(a: usize, b: usize) -> Result<MedianAlgebra> {
    if a == 0 || b == 0 {
        return Err(Error::OutOfRange("grid sides must be at least 1".into()));
    }
    if a.saturating_mul(b) > MAX_GRID_POINTS {
        return Err(Error::TooManyPoints(a.saturating_mul(b), MAX_GRID_POINTS));
    }
    path(a)?.product(&path(b)?)
}

/// Median closure of `k` distinct points of `{0,1}^d` drawn uniformly with
/// a ChaCha8 stream seeded by `seed`, returned in reduced form.
pub fn random_subalgebra(d: usize, k: usize, seed: u64) -> Result<MedianAlgebra> {
    if d > MAX_RANDOM_DIM {
        return Err(Error::OutOfRange(format!(
            "random subalgebra dimension {d} exceeds {MAX_RANDOM_DIM}"
        )));
    }
    let n = 1usize << d;
    if k == 0 || k > n {
        return Err(Error::OutOfRange(format!("need 1 <= k <= {n}, got {k}")));
    }
    let cube = MedianAlgebra::hypercube(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = sample(&mut rng, n, k);
    let s = Subset::from_ids(n, chosen.iter().map(PointId::from_index));
    let closed = cube.closure(&s)?;
    let (sub, _) = cube.subalgebra(&closed)?;
    Ok(sub.reduce().0)
}
