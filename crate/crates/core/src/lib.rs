//! Exact-arithmetic analysis of Hodge-Lefschetz packages.
//!
//! A package bundles a graded vector space `H = (+) H^l` over the rationals,
//! two commuting nilpotent degree-2 operators `eta` and `L`, the twisted
//! Poincare form built from per-degree pairing blocks, and optionally a Weil
//! operator, a defect table and fiber class/restriction data. The crate
//! computes weight filtrations, Lefschetz and double Lefschetz
//! decompositions, the perverse filtration induced by `L`, the induced
//! bilinear forms on graded pieces, and verifies the package against the
//! structure theorems these objects are expected to satisfy: hard Lefschetz
//! for the graded pieces, self-duality, orthogonality and positivity of the
//! induced forms, intersection-form nondegeneracy and signature constraints.
//!
//! All arithmetic is exact. The linear algebra layer is generic over an
//! ordered-field [`scalar::Scalar`]; the crate-level alias [`Rational`]
//! (arbitrary-precision `BigRational`) is the type every consumer uses.

pub mod corpus;
pub mod double;
pub mod error;
pub mod filtration;
pub mod graded;
pub mod inertia;
pub mod lefschetz;
pub mod matrix;
pub mod perverse;
pub mod report;
pub mod scalar;
pub mod subspace;
pub mod weight;
pub mod weil;

/// The concrete scalar every package computation runs over.
pub type Rational = num_rational::BigRational;

pub use error::{Error, Result};
pub use graded::{
    check_infinitesimal_automorphism, commutator_check, twisted_form, CheckOutcome,
    GradedOperator, GradedSpace, PoincarePairing, TwistedForm,
};
pub use inertia::{signature, Inertia};
pub use matrix::Matrix;
pub use report::{Report, ReportItem, Status};
pub use subspace::{image, kernel, Subspace};
pub use weight::{jordan_weight_oracle, weight_filtration, WeightFiltration};
