//! Probability measures on finite median algebras and the self-median
//! operator `Φ(μ) = m_*(μ³)`.
//!
//! Exact measures carry arbitrary-precision rationals. Fixed points are
//! searched for with a floating-point iteration, then rounded to dyadic
//! weights and re-checked with exact arithmetic: balanced measures are
//! uniform on cubes, so their weights are powers of two.

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::algebra::{MedianAlgebra, Morphism, PointId};
use crate::error::{Error, Result};
use crate::subset::Subset;
use crate::walls::{coordinate_walls, detect_cube, CubeCertificate, CubeOutcome, HalfSpace, NotCubeReason};

/// Identifier of the generator behind every seeded draw in this crate.
pub const PRNG_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64";

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// An exact probability measure, indexed by point rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Measure {
    weights: Vec<BigRational>,
}

impl Measure {
    /// Requires non-negative weights summing to exactly 1.
    pub fn new(weights: Vec<BigRational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("no weights".into()));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidMeasure("negative weight".into()));
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(Measure { weights })
    }

    pub fn dirac(len: usize, x: PointId) -> Self {
        let mut weights = vec![BigRational::zero(); len];
        weights[x.index()] = BigRational::one();
        Measure { weights }
    }

    pub fn uniform(len: usize) -> Self {
        Self::uniform_on(&Subset::full(len)).expect("non-empty")
    }

    pub fn uniform_on(s: &Subset) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::EmptySet);
        }
        let w = BigRational::new(BigInt::one(), BigInt::from(s.len()));
        let weights = (0..s.universe())
            .map(|i| {
                if s.contains(PointId::from_index(i)) {
                    w.clone()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        Ok(Measure { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn weight(&self, x: PointId) -> &BigRational {
        &self.weights[x.index()]
    }

    /// Total mass of a subset.
    pub fn mass(&self, s: &Subset) -> BigRational {
        s.iter().map(|x| &self.weights[x.index()]).sum()
    }

    /// `{x : μ(x) > 0}`.
    pub fn support(&self) -> Subset {
        Subset::from_ids(
            self.len(),
            self.weights
                .iter()
                .enumerate()
                .filter(|(_, w)| w.is_positive())
                .map(|(i, _)| PointId::from_index(i)),
        )
    }

    pub fn to_float(&self) -> FloatMeasure {
        FloatMeasure {
            weights: self
                .weights
                .iter()
                .map(|w| w.to_f64().unwrap_or(0.0))
                .collect(),
        }
    }
}

/// Support of a measure.
pub fn support(mu: &Measure) -> Subset {
    mu.support()
}

/// Floating-point working copy of a measure.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatMeasure {
    weights: Vec<f64>,
}

impl FloatMeasure {
    /// Clamps small negatives to zero and renormalizes.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("no weights".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < -1e-15) {
            return Err(Error::InvalidMeasure(
                "weights must be finite and non-negative".into(),
            ));
        }
        let mut m = FloatMeasure { weights };
        if !m.normalize() {
            return Err(Error::InvalidMeasure("zero total mass".into()));
        }
        Ok(m)
    }

    fn normalize(&mut self) -> bool {
        for w in &mut self.weights {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = self.weights.iter().sum();
        if total <= 0.0 {
            return false;
        }
        if (total - 1.0).abs() > 0.0 {
            for w in &mut self.weights {
                *w /= total;
            }
        }
        true
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn max_distance(&self, other: &FloatMeasure) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_len(m: &MedianAlgebra, len: usize) -> Result<()> {
    if m.len() != len {
        return Err(Error::InvalidMeasure(format!(
            "measure has {len} weights for {} points",
            m.len()
        )));
    }
    Ok(())
}

/// Sums `w(a) w(b) w(c)` into the median of each triple, over `support`.
fn triple_sum<T, F>(m: &MedianAlgebra, support: &[usize], weight: F) -> Vec<T>
where
    T: Clone + Send + Sync + Zero + std::ops::AddAssign + for<'a> std::ops::Mul<&'a T, Output = T>,
    F: Fn(usize) -> T + Sync,
{
    let n = m.len();
    let table = m.median_table();
    let median = |a: usize, b: usize, c: usize| -> usize {
        match table {
            Some(t) => t[(a * n + b) * n + c] as usize,
            None => m
                .median(
                    PointId::from_index(a),
                    PointId::from_index(b),
                    PointId::from_index(c),
                )
                .index(),
        }
    };
    support
        .par_iter()
        .fold(
            || vec![T::zero(); n],
            |mut acc, &a| {
                let wa = weight(a);
                for &b in support {
                    let wab = weight(b) * &wa;
                    for &c in support {
                        acc[median(a, b, c)] += weight(c) * &wab;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![T::zero(); n],
            |mut x, y| {
                for (xi, yi) in x.iter_mut().zip(y) {
                    *xi += yi;
                }
                x
            },
        )
}

/// `Φ(μ)(y) = Σ_{m(a,b,c) = y} μ(a) μ(b) μ(c)`, exactly.
pub fn phi(m: &MedianAlgebra, mu: &Measure) -> Result<Measure> {
    check_len(m, mu.len())?;
    let support: Vec<usize> = mu.support().iter().map(PointId::index).collect();
    let denom = support
        .iter()
        .fold(BigInt::one(), |acc, &i| acc.lcm(mu.weights[i].denom()));
    let numer = |i: usize| -> BigInt { (&mu.weights[i] * &denom).to_integer() };
    let denom3 = &denom * &denom * &denom;

    // Every partial sum is bounded by denom^3, so small denominators fit u128.
    let sums: Vec<BigInt> = if denom.bits() <= 42 {
        let nums: Vec<u128> = (0..m.len())
            .map(|i| {
                if mu.weights[i].is_zero() {
                    0
                } else {
                    numer(i).to_u128().expect("bounded by denominator")
                }
            })
            .collect();
        triple_sum::<U128, _>(m, &support, |i| U128(nums[i]))
            .into_iter()
            .map(|v| BigInt::from(v.0))
            .collect()
    } else {
        let nums: Vec<BigInt> = (0..m.len()).map(numer).collect();
        triple_sum::<BigInt, _>(m, &support, |i| nums[i].clone())
    };
    let weights = sums
        .into_iter()
        .map(|s| BigRational::new(s, denom3.clone()))
        .collect();
    Ok(Measure { weights })
}

#[derive(Clone, Copy, Debug, Default)]
struct U128(u128);

impl Zero for U128 {
    fn zero() -> Self {
        U128(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl std::ops::Add for U128 {
    type Output = U128;
    fn add(self, rhs: U128) -> U128 {
        U128(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for U128 {
    fn add_assign(&mut self, rhs: U128) {
        self.0 += rhs.0;
    }
}

impl<'a> std::ops::Mul<&'a U128> for U128 {
    type Output = U128;
    fn mul(self, rhs: &'a U128) -> U128 {
        U128(self.0 * rhs.0)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct F64(f64);

impl Zero for F64 {
    fn zero() -> Self {
        F64(0.0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
}

impl std::ops::Add for F64 {
    type Output = F64;
    fn add(self, rhs: F64) -> F64 {
        F64(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for F64 {
    fn add_assign(&mut self, rhs: F64) {
        self.0 += rhs.0;
    }
}

impl<'a> std::ops::Mul<&'a F64> for F64 {
    type Output = F64;
    fn mul(self, rhs: &'a F64) -> F64 {
        F64(self.0 * rhs.0)
    }
}

/// Floating-point `Φ`, clamped and renormalized.
pub fn phi_float(m: &MedianAlgebra, mu: &FloatMeasure) -> Result<FloatMeasure> {
    check_len(m, mu.len())?;
    let support: Vec<usize> = (0..mu.len()).filter(|&i| mu.weights[i] > 0.0).collect();
    let sums = phi_float_sums(m, &support, &mu.weights);
    let mut out = FloatMeasure { weights: sums };
    out.normalize();
    Ok(out)
}

fn phi_float_sums(m: &MedianAlgebra, support: &[usize], w: &[f64]) -> Vec<f64> {
    let n = m.len();
    let mut acc = vec![0.0; n];
    match m.median_table() {
        Some(t) => {
            for &a in support {
                let wa = w[a];
                for &b in support {
                    let wab = wa * w[b];
                    let row = &t[(a * n + b) * n..(a * n + b + 1) * n];
                    for &c in support {
                        acc[row[c] as usize] += wab * w[c];
                    }
                }
            }
        }
        None => {
            // Large algebras: parallel over the first argument.
            acc = triple_sum::<F64, _>(m, support, |i| F64(w[i]))
                .into_iter()
                .map(|v| v.0)
                .collect();
        }
    }
    acc
}

/// Exact test `Φ(μ) = μ`.
pub fn is_balanced(m: &MedianAlgebra, mu: &Measure) -> Result<bool> {
    Ok(phi(m, mu)? == *mu)
}

/// `f_*(μ)(y) = Σ_{f(x) = y} μ(x)`.
pub fn pushforward(f: &Morphism, mu: &Measure) -> Result<Measure> {
    if f.source_len() != mu.len() {
        return Err(Error::InvalidMeasure(format!(
            "measure has {} weights but the morphism source has {} points",
            mu.len(),
            f.source_len()
        )));
    }
    let mut weights = vec![BigRational::zero(); f.target_len()];
    for (x, w) in mu.weights.iter().enumerate() {
        if !w.is_zero() {
            weights[f.apply(PointId::from_index(x)).index()] += w;
        }
    }
    Ok(Measure { weights })
}

pub fn halfspace_mass(mu: &Measure, h: &HalfSpace) -> BigRational {
    mu.mass(&h.members)
}

/// `1/2^k` on each point of a `k`-cube, zero elsewhere.
pub fn uniform_on_cube(m: &MedianAlgebra, cert: &CubeCertificate) -> Result<Measure> {
    if cert.points.iter().any(|p| p.index() >= m.len()) {
        return Err(Error::InvalidPoint("certificate point outside the algebra".into()));
    }
    let s = cert.point_set(m.len());
    if s.len() != 1usize << cert.dim() {
        return Err(Error::Postcondition("certificate is not a cube".into()));
    }
    Measure::uniform_on(&s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationResult {
    pub measure: FloatMeasure,
    pub iterations: usize,
    /// `‖Φ(μ) − μ‖∞` at the returned measure.
    pub residual: f64,
    pub converged: bool,
}

/// Repeats `μ ← Φ(μ)` until a step moves no weight by `tol` or more, or
/// `max_iter` steps were taken.
pub fn iterate_phi(
    m: &MedianAlgebra,
    start: &FloatMeasure,
    tol: f64,
    max_iter: usize,
) -> Result<IterationResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::OutOfRange(format!("tolerance {tol} must be positive")));
    }
    if max_iter == 0 {
        return Err(Error::OutOfRange("max_iter must be at least 1".into()));
    }
    check_len(m, start.len())?;
    let mut current = start.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let next = phi_float(m, &current)?;
        iterations += 1;
        let step = next.max_distance(&current);
        current = next;
        if step < tol {
            converged = true;
            break;
        }
    }
    let residual = phi_float(m, &current)?.max_distance(&current);
    Ok(IterationResult {
        measure: current,
        iterations,
        residual,
        converged,
    })
}

/// Rounds every weight to the nearest multiple of `2^-max_denominator_log2`,
/// renormalizes exactly, and keeps the result only if it is exactly balanced.
pub fn snap_and_verify(
    m: &MedianAlgebra,
    mu: &FloatMeasure,
    max_denominator_log2: u32,
) -> Result<Measure> {
    check_len(m, mu.len())?;
    let scale = 2f64.powi(max_denominator_log2 as i32);
    let counts: Vec<BigInt> = mu
        .weights
        .iter()
        .map(|w| BigInt::from_f64_rounded(w * scale))
        .collect();
    let total: BigInt = counts.iter().sum();
    if total.is_zero() {
        return Err(Error::NoSnap);
    }
    let weights = counts
        .into_iter()
        .map(|k| BigRational::new(k, total.clone()))
        .collect();
    let snapped = Measure { weights };
    if is_balanced(m, &snapped)? {
        Ok(snapped)
    } else {
        Err(Error::NoSnap)
    }
}

trait FromF64Rounded {
    fn from_f64_rounded(x: f64) -> BigInt;
}

impl FromF64Rounded for BigInt {
    fn from_f64_rounded(x: f64) -> BigInt {
        num::FromPrimitive::from_f64(x.round()).unwrap_or_else(BigInt::zero)
    }
}

/// A balanced measure shown to be uniform on a cube.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicalCertificate {
    pub cube: CubeCertificate,
    pub uniform: bool,
    pub measure: Measure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotCubicalWitness {
    SupportNotClosed(PointId, PointId, PointId, PointId),
    SupportNotCube(Vec<NotCubeReason>),
    NotUniform { point: PointId, weight: BigRational },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Cubical(CubicalCertificate),
    /// A balanced measure that is not cubical: a counterexample to the
    /// structure theorem, never expected.
    NotCubical(NotCubicalWitness),
}

impl Classification {
    pub fn is_cubical(&self) -> bool {
        matches!(self, Classification::Cubical(_))
    }

    pub fn certificate(&self) -> Option<&CubicalCertificate> {
        match self {
            Classification::Cubical(c) => Some(c),
            Classification::NotCubical(_) => None,
        }
    }
}

/// Checks that a balanced measure is the uniform measure on a cube.
pub fn classify_balanced(m: &MedianAlgebra, mu: &Measure) -> Result<Classification> {
    if !is_balanced(m, mu)? {
        return Err(Error::NotBalancedInput);
    }
    let supp = mu.support();
    if let Some((a, b, c, med)) = m.closure_witness(&supp) {
        return Ok(Classification::NotCubical(NotCubicalWitness::SupportNotClosed(
            a, b, c, med,
        )));
    }
    let cube = match detect_cube(m, &supp)? {
        CubeOutcome::Cube(c) => c,
        CubeOutcome::NotCube(reasons) => {
            return Ok(Classification::NotCubical(NotCubicalWitness::SupportNotCube(
                reasons,
            )))
        }
    };
    let expected = BigRational::new(BigInt::one(), BigInt::one() << cube.dim());
    if let Some(p) = supp.iter().find(|&p| *mu.weight(p) != expected) {
        return Ok(Classification::NotCubical(NotCubicalWitness::NotUniform {
            point: p,
            weight: mu.weight(p).clone(),
        }));
    }
    Ok(Classification::Cubical(CubicalCertificate {
        cube,
        uniform: true,
        measure: mu.clone(),
    }))
}

/// Masses of the canonical side and its complement, for every wall of `m`.
pub fn wall_masses(m: &MedianAlgebra, mu: &Measure) -> Vec<(BigRational, BigRational)> {
    coordinate_walls(m)
        .iter()
        .map(|w| (mu.mass(&w.positive), mu.mass(&w.negative())))
        .collect()
}

/// Parameters of a randomized fixed-point search.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchParams {
    pub starts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    /// Defaults to `ambient_dim + 2` when unset.
    pub max_denominator_log2: Option<u32>,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            starts: 100,
            seed: 0,
            tol: 1e-12,
            max_iter: 10_000,
            max_denominator_log2: None,
        }
    }
}

impl SearchParams {
    pub fn denominator_log2(&self, m: &MedianAlgebra) -> u32 {
        self.max_denominator_log2.unwrap_or(m.dim() as u32 + 2)
    }

    /// Seed of the `i`-th start.
    pub fn start_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_add(i as u64)
    }
}

/// A uniformly random point of the probability simplex.
pub fn random_start(len: usize, seed: u64) -> FloatMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..len).map(|_| Exp1.sample(&mut rng)).collect();
    FloatMeasure::new(draws).expect("exponential draws are positive")
}

/// Outcome of one search start.
#[derive(Clone, Debug, PartialEq)]
pub struct StartRecord {
    pub start_seed: u64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    /// The exactly verified balanced measure, when snapping succeeded.
    pub snapped: Option<Measure>,
    pub classification: Option<Classification>,
}

impl StartRecord {
    pub fn is_cubical(&self) -> Option<bool> {
        self.classification.as_ref().map(Classification::is_cubical)
    }

    pub fn cube_dim(&self) -> Option<usize> {
        self.classification
            .as_ref()
            .and_then(Classification::certificate)
            .map(|c| c.cube.dim())
    }
}

/// Iterates, snaps and classifies from one starting measure.
pub fn run_start(
    m: &MedianAlgebra,
    start: &FloatMeasure,
    start_seed: u64,
    params: &SearchParams,
) -> Result<StartRecord> {
    let it = iterate_phi(m, start, params.tol, params.max_iter)?;
    let snapped = match snap_and_verify(m, &it.measure, params.denominator_log2(m)) {
        Ok(mu) => Some(mu),
        Err(Error::NoSnap) => None,
        Err(e) => return Err(e),
    };
    let classification = snapped
        .as_ref()
        .map(|mu| classify_balanced(m, mu))
        .transpose()?;
    Ok(StartRecord {
        start_seed,
        converged: it.converged,
        iterations: it.iterations,
        residual: it.residual,
        snapped,
        classification,
    })
}

/// Runs `params.starts` independent random starts; records come back in
/// start order regardless of scheduling.
pub fn balance_search(m: &MedianAlgebra, params: &SearchParams) -> Result<Vec<StartRecord>> {
    (0..params.starts)
        .into_par_iter()
        .map(|i| {
            let seed = params.start_seed(i);
            run_start(m, &random_start(m.len(), seed), seed, params)
        })
        .collect()
}
