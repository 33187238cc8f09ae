//! Order structure of CP maps below a fixed map, and the decompositions
//! built on it.
//!
//! Maps `T' ≤ T` correspond to operators `0 ≤ R ≤ 1` in the relative
//! commutant of the minimal dilation of `T`. Orthogonality, disjointness,
//! CP-valued measures and the central decomposition are all decided through
//! these operators.

mod measure;
mod order;
mod relations;
mod tomita;

pub use measure::{
    binary_split_disjointness, binary_splits, central_decomposition, central_decomposition_with_rep,
    is_orthogonal_measure, is_subcentral, kappa, measure_from_abelian, set_partitions, CPMeasure,
    CentralDecomposition, KappaFamily, OrthogonalMeasureReport, SubcentralReport, MAX_SPLIT_ATOMS,
};
pub use order::{cp_from_operator, order_leq, rn_derivative, OrderCertificate};
pub use relations::{
    irreducible_components, is_disjoint, is_orthogonal, is_quasi_equivalent, quasi_equivalence_of_reps,
    DisjointnessReport, Irreducible, OrthogonalityReport, QuasiEquivalenceReport,
};
pub use tomita::{dominated_by, tomita_correspondence_check, TomitaReport};
