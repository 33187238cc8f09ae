//! Finite-dimensional completely positive maps between matrix algebras.
//!
//! Minimal Stinespring dilations, the Radon-Nikodym derivative of one CP map
//! with respect to another, orthogonality and disjointness, CP-measures and
//! their `κ` operators, central decompositions, and local states on lattice
//! nets.
//!
//! ```
//! use cpsector::catalog;
//! use cpsector::cpmap::stinespring_for;
//! use cpsector::decomp::{central_decomposition, is_disjoint};
//! use cpsector::tolerance::ToleranceConfig;
//!
//! let tol = ToleranceConfig::default();
//! let rep = stinespring_for(&catalog::depolarizing(), &tol).unwrap();
//! assert_eq!(rep.dilation_dim(), 8);
//!
//! let dec = central_decomposition(&catalog::counting(2), &tol).unwrap();
//! assert_eq!(dec.measure.atoms(), 2);
//! assert!(is_disjoint(&catalog::delta(2, 0), &catalog::delta(2, 1), &tol).unwrap().disjoint);
//! ```

pub mod algebra;
pub mod catalog;
pub mod cpmap;
pub mod decomp;
pub mod error;
pub mod io;
pub mod linalg;
pub mod localnet;
pub mod oracle;
pub mod random;
pub mod selftest;
pub mod tolerance;
