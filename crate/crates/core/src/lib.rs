//! Finite median algebras embedded in hypercubes, the self-median operator
//! on probability measures, and exact verification of its fixed points.
//!
//! Points are bit-vectors packed in a `u64`, coordinate 0 in the most
//! significant used bit, so numeric order is lexicographic order and a
//! point's [`PointId`] is its rank. Exact results use `BigRational`; the
//! float iteration is only a search heuristic whose output is re-verified
//! exactly.

pub mod algebra;
pub mod axioms;
pub mod dynamics;
pub mod error;
pub mod generators;
pub mod groups;
pub mod io;
pub mod measures;
pub mod subset;
pub mod walls;

pub use algebra::{BitVector, Limits, MedianAlgebra, Morphism, PointId};
pub use axioms::{from_table, validate_axioms, Axiom, AxiomViolation, MedianTable};
pub use error::{Error, Result};
pub use groups::{Automorphism, FiniteGroup};
pub use measures::{Classification, FloatMeasure, Measure, SearchParams};
pub use num::BigRational;
pub use subset::Subset;
pub use walls::{CubeCertificate, CubeOutcome, HalfSpace, NotCubeReason, Wall};
