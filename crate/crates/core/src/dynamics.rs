//! The self-median operator on parity-invariant measures of `{0,1}^n`.
//!
//! A measure on the `n`-cube that is constant on the even-weight vertices
//! (`K₀`) and on the odd-weight vertices (`K₁`) is determined by the total
//! mass `t` of `K₀`. `Φ` maps this family to itself through the cubic
//! `φ(t) = t + (-1)^n 2^(2-n) (t - 1/2)(t² - t + c_n)` with
//! `c_n = 1/4 + (-1)^n 3/4 - (-1)^n 2^(n-2)`.
//!
//! The triples with median `0` are counted by parity class: `a_i(n)` is the
//! number of such triples with exactly `i` odd-weight entries. They are
//! available three ways: brute-force enumeration, the linear recurrence,
//! and the closed forms. Everything here is exact.

use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::algebra::{MedianAlgebra, PointId};
use crate::error::{Error, Result};
use crate::measures::{phi, Measure};

/// Largest `n` accepted by [`count_xi_bruteforce`] (`8^n` triples).
pub const BRUTE_FORCE_MAX_N: u32 = 8;
/// Largest `n` for which exact `Φ` on the full cube is evaluated.
pub const EXACT_PHI_MAX_N: u32 = 6;
/// Largest `n` for which `a_i(n)` fits the integer representation.
pub const COUNTS_MAX_N: u32 = 62;

/// Lift counts: entry `(i, j)` is the number of triples of `X_i(n)` above
/// one triple of `X_j(n-1)`.
pub const LIFT_MATRIX: [[u128; 4]; 4] = [[1, 1, 0, 0], [3, 1, 2, 0], [0, 2, 1, 3], [0, 0, 1, 1]];

/// `a_i(1)`.
pub const INITIAL_COUNTS: [u128; 4] = [1, 3, 0, 0];

/// `a_0(n), .., a_3(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct XiCounts {
    pub n: u32,
    pub a: [u128; 4],
}

impl XiCounts {
    pub fn total(&self) -> u128 {
        self.a.iter().sum()
    }
}

impl fmt::Display for XiCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a0, a1, a2, a3] = self.a;
        write!(f, "({a0}, {a1}, {a2}, {a3})")
    }
}

fn r(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `2^e` for any integer exponent.
fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

fn sign(n: u32) -> BigRational {
    if n.is_multiple_of(2) {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange("cube dimension must be at least 1".into()));
    }
    Ok(())
}

fn check_t(t: &BigRational) -> Result<()> {
    if t.is_negative() || *t > BigRational::one() {
        return Err(Error::OutOfRange(format!("t = {t} is outside [0, 1]")));
    }
    Ok(())
}

/// Even-weight vertices carry `t / 2^(n-1)` each, odd-weight ones
/// `(1 - t) / 2^(n-1)`. Point ranks are the vertex words.
pub fn mu_t(n: u32, t: &BigRational) -> Result<Measure> {
    check_n(n)?;
    check_t(t)?;
    let cube = MedianAlgebra::hypercube(n as usize)?;
    let scale = pow2(-(n as i64 - 1));
    let even = t * &scale;
    let odd = (BigRational::one() - t) * &scale;
    let weights = cube
        .points()
        .map(|p| {
            if p.weight() % 2 == 0 {
                even.clone()
            } else {
                odd.clone()
            }
        })
        .collect();
    Measure::new(weights)
}

/// `c_n = 1/4 + (-1)^n 3/4 - (-1)^n 2^(n-2)`.
pub fn quadratic_constant(n: u32) -> BigRational {
    let s = sign(n);
    r(1, 4) + &s * r(3, 4) - &s * pow2(n as i64 - 2)
}

/// `φ(t)` for the `n`-cube.
pub fn phi_poly(n: u32, t: &BigRational) -> BigRational {
    let half = r(1, 2);
    let quad = t * t - t + quadratic_constant(n);
    t + sign(n) * pow2(2 - n as i64) * (t - half) * quad
}

/// Exact check of `Φ(μ_t) = μ_φ(t)` on the full cube.
pub fn phi_conjugation_check(n: u32, t: &BigRational) -> Result<bool> {
    check_n(n)?;
    if n > EXACT_PHI_MAX_N {
        return Err(Error::TooLarge(format!(
            "exact Φ on the {n}-cube (limit {EXACT_PHI_MAX_N})"
        )));
    }
    let cube = MedianAlgebra::hypercube(n as usize)?;
    let lhs = phi(&cube, &mu_t(n, t)?)?;
    let rhs = mu_t(n, &phi_poly(n, t))?;
    Ok(lhs == rhs)
}

/// Enumerates every triple of `{0,1}^n` with coordinatewise majority `0`
/// and buckets it by the number of odd-weight entries.
pub fn count_xi_bruteforce(n: u32) -> Result<XiCounts> {
    check_n(n)?;
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge(format!(
            "brute force over 8^{n} triples (limit n = {BRUTE_FORCE_MAX_N})"
        )));
    }
    let size = 1u64 << n;
    let a = (0..size)
        .into_par_iter()
        .map(|x| {
            let mut local = [0u128; 4];
            for y in 0..size {
                for z in 0..size {
                    if (x & y) | (y & z) | (x & z) == 0 {
                        let odd = (x.count_ones() & 1) + (y.count_ones() & 1) + (z.count_ones() & 1);
                        local[odd as usize] += 1;
                    }
                }
            }
            local
        })
        .reduce(
            || [0u128; 4],
            |mut p, q| {
                for i in 0..4 {
                    p[i] += q[i];
                }
                p
            },
        );
    Ok(XiCounts { n, a })
}

/// Applies [`LIFT_MATRIX`] `n - 1` times to [`INITIAL_COUNTS`].
pub fn ai_recurrence(n: u32) -> Result<XiCounts> {
    check_n(n)?;
    if n > COUNTS_MAX_N {
        return Err(Error::TooLarge(format!("a_i({n}) overflows (limit {COUNTS_MAX_N})")));
    }
    let mut a = INITIAL_COUNTS;
    for _ in 1..n {
        let mut next = [0u128; 4];
        for (i, row) in LIFT_MATRIX.iter().enumerate() {
            next[i] = row.iter().zip(&a).map(|(s, v)| s * v).sum();
        }
        a = next;
    }
    Ok(XiCounts { n, a })
}

/// Closed forms `a_i(n) = 2^n (α_i + β_i (-1)^n + γ_i 2^n)`.
pub fn ai_closed_form(n: u32) -> Result<XiCounts> {
    check_n(n)?;
    if n > COUNTS_MAX_N {
        return Err(Error::TooLarge(format!("a_i({n}) overflows (limit {COUNTS_MAX_N})")));
    }
    let s = sign(n);
    let p = pow2(n as i64);
    let eighth = |k: i64| r(k, 8);
    let exact = [
        &p * ((eighth(3) + &s * eighth(1)) + &p * eighth(1)),
        &p * ((eighth(3) - &s * eighth(3)) + &p * eighth(3)),
        &p * ((eighth(-3) + &s * eighth(3)) + &p * eighth(3)),
        &p * ((eighth(-3) - &s * eighth(1)) + &p * eighth(1)),
    ];
    let mut a = [0u128; 4];
    for (slot, v) in a.iter_mut().zip(exact) {
        if !v.is_integer() || v.is_negative() {
            return Err(Error::Postcondition(format!("closed form gave {v} at n = {n}")));
        }
        *slot = v
            .to_integer()
            .to_u128()
            .ok_or_else(|| Error::TooLarge(format!("a_i({n})")))?;
    }
    Ok(XiCounts { n, a })
}

/// Mass of `X = m⁻¹(0)` under `μ_t³`, summed over an explicit enumeration of `X`.
fn mu3_mass_of_x(n: u32, t: &BigRational) -> Result<BigRational> {
    let mu = mu_t(n, t)?;
    let size = 1u64 << n;
    let mask = size - 1;
    let w = |v: u64| mu.weight(PointId(v as u32));
    let mut total = BigRational::zero();
    for x in 0..size {
        for y in 0..size {
            if x & y != 0 {
                continue;
            }
            // z is free where x and y are both 0 and forced to 0 elsewhere.
            let free = !(x | y) & mask;
            let wxy = w(x) * w(y);
            let mut z = free;
            loop {
                total += &wxy * w(z);
                if z == 0 {
                    break;
                }
                z = (z - 1) & free;
            }
        }
    }
    Ok(total)
}

/// `Σ a_i t^(3-i) (1-t)^i / 8^(n-1)` with the closed-form coefficients.
pub fn mu3_mass_polynomial(n: u32, t: &BigRational) -> Result<BigRational> {
    let a = ai_closed_form(n)?.a;
    let one_minus = BigRational::one() - t;
    let mut total = BigRational::zero();
    for (i, &ai) in a.iter().enumerate() {
        let mut term = BigRational::from_integer(BigInt::from(ai));
        for _ in 0..(3 - i) {
            term *= t;
        }
        for _ in 0..i {
            term *= &one_minus;
        }
        total += term;
    }
    Ok(total * pow2(-3 * (n as i64 - 1)))
}

/// Checks that the enumerated mass of `X`, the parity-class polynomial and
/// `φ(t) / 2^(n-1)` all agree.
pub fn mu3_mass_identity_check(n: u32, t: &BigRational) -> Result<bool> {
    check_n(n)?;
    check_t(t)?;
    if n > EXACT_PHI_MAX_N {
        return Err(Error::TooLarge(format!(
            "mass identity on the {n}-cube (limit {EXACT_PHI_MAX_N})"
        )));
    }
    let direct = mu3_mass_of_x(n, t)?;
    let poly = mu3_mass_polynomial(n, t)?;
    let via_phi = phi_poly(n, t) * pow2(-(n as i64 - 1));
    Ok(direct == poly && poly == via_phi)
}

/// An exact real number `rational + coeff·√radicand`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    pub rational: BigRational,
    pub coeff: BigRational,
    pub radicand: BigRational,
}

impl QuadraticSurd {
    pub fn from_rational(q: BigRational) -> Self {
        QuadraticSurd {
            rational: q,
            coeff: BigRational::zero(),
            radicand: BigRational::zero(),
        }
    }

    /// `rational + coeff·√radicand`, with rational square roots folded in.
    pub fn new(rational: BigRational, coeff: BigRational, radicand: BigRational) -> Self {
        assert!(!radicand.is_negative(), "negative radicand");
        if let Some(root) = rational_sqrt(&radicand) {
            return Self::from_rational(rational + coeff * root);
        }
        if coeff.is_zero() {
            return Self::from_rational(rational);
        }
        QuadraticSurd {
            rational,
            coeff,
            radicand,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        (self.coeff.is_zero() || self.radicand.is_zero()).then_some(&self.rational)
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.rational.to_f64().unwrap_or(f64::NAN);
        let b = self.coeff.to_f64().unwrap_or(f64::NAN);
        let r = self.radicand.to_f64().unwrap_or(f64::NAN);
        a + b * r.sqrt()
    }

    /// Exact comparison with a rational.
    pub fn cmp_rational(&self, q: &BigRational) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        let u = &self.rational - q;
        if self.coeff.is_zero() || self.radicand.is_zero() {
            return u.cmp(&BigRational::zero());
        }
        let surd_sign = if self.coeff.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        };
        let u_sign = u.cmp(&BigRational::zero());
        if u_sign == Ordering::Equal || u_sign == surd_sign {
            return surd_sign;
        }
        // Opposite signs: the larger magnitude wins.
        let lhs = &u * &u;
        let rhs = &self.coeff * &self.coeff * &self.radicand;
        match lhs.cmp(&rhs) {
            Ordering::Greater => u_sign,
            Ordering::Less => surd_sign,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn in_closed_unit_interval(&self) -> bool {
        self.cmp_rational(&BigRational::zero()).is_ge() && self.cmp_rational(&BigRational::one()).is_le()
    }

    pub fn in_open_unit_interval(&self) -> bool {
        self.cmp_rational(&BigRational::zero()).is_gt() && self.cmp_rational(&BigRational::one()).is_lt()
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(q) => write!(f, "{q}"),
            None => write!(f, "{} + {}*sqrt({})", self.rational, self.coeff, self.radicand),
        }
    }
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    let n = q.numer();
    let d = q.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}

/// A root of `φ(t) = t` with its multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FixedPoint {
    pub value: QuadraticSurd,
    pub multiplicity: u32,
}

/// All roots of `φ(t) = t` in `[0, 1]`, in increasing order.
///
/// `φ(t) - t` factors as a non-zero constant times `(t - 1/2)(t² - t + c_n)`,
/// and the quadratic's roots are `(1 ± √(1 - 4c_n)) / 2`.
pub fn phi_fixed_points(n: u32) -> Result<Vec<FixedPoint>> {
    check_n(n)?;
    let half = r(1, 2);
    let disc = BigRational::one() - r(4, 1) * quadratic_constant(n);
    let mut roots: Vec<FixedPoint> = Vec::new();
    if disc.is_negative() {
        roots.push(FixedPoint {
            value: QuadraticSurd::from_rational(half),
            multiplicity: 1,
        });
    } else if disc.is_zero() {
        roots.push(FixedPoint {
            value: QuadraticSurd::from_rational(half),
            multiplicity: 3,
        });
    } else {
        let low = QuadraticSurd::new(half.clone(), -half.clone(), disc.clone());
        let high = QuadraticSurd::new(half.clone(), half.clone(), disc);
        for value in [low, QuadraticSurd::from_rational(half), high] {
            roots.push(FixedPoint {
                value,
                multiplicity: 1,
            });
        }
    }
    Ok(roots
        .into_iter()
        .filter(|p| p.value.in_closed_unit_interval())
        .collect())
}

/// Roots of `φ(t) = t` strictly inside `(0, 1)`.
pub fn phi_fixed_points_open(n: u32) -> Result<Vec<FixedPoint>> {
    Ok(phi_fixed_points(n)?
        .into_iter()
        .filter(|p| p.value.in_open_unit_interval())
        .collect())
}
