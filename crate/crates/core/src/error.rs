use thiserror::Error;

use crate::axioms::AxiomViolation;
use crate::groups::AutomorphismViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("a median algebra needs at least one point")]
    EmptyAlgebra,
    #[error("point set is not closed under the median: m({0}, {1}, {2}) = {3} is missing")]
    NotMedianClosed(String, String, String, String),
    #[error("ambient dimension {0} exceeds the cap of {1}")]
    DimensionTooLarge(usize, usize),
    #[error("{0} points exceed the cap of {1}")]
    TooManyPoints(usize, usize),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("axiom violation: {0}")]
    Violation(AxiomViolation),
    #[error("subset is not convex")]
    NotConvex,
    #[error("subset is empty")]
    EmptySet,
    #[error("subset does not belong to this algebra (expected {expected} points, got {got})")]
    SubsetMismatch { expected: usize, got: usize },
    #[error("algebra is not in reduced form")]
    NotReduced,
    #[error("input too large for this operation: {0}")]
    TooLarge(String),
    #[error("subsets are not disjoint")]
    NotDisjoint,
    #[error("empty input subset")]
    EmptyInput,
    #[error("no separating half-space exists between the given convex sets")]
    NoSeparator,
    #[error("the two walls are the same wall")]
    SameWall,
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("edge list does not describe a tree: {0}")]
    NotATree(String),
    #[error("map is not a median morphism: {0}")]
    NotAMorphism(String),
    #[error("invalid automorphism: {0}")]
    InvalidAutomorphism(AutomorphismViolation),
    #[error("group closure exceeded the cap of {0} elements")]
    CapExceeded(usize),
    #[error("input measure is not balanced")]
    NotBalancedInput,
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("float iterate does not snap to a dyadic balanced measure")]
    NoSnap,
    #[error("no search start produced a verified balanced measure")]
    Unresolved,
    #[error("internal consistency check failed: {0}")]
    Postcondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}
