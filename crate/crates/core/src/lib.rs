//! Numerical laboratory for supercyclic sets of operators on ℂ^d.
//!
//! Families of operators are built in [`families`], their projective orbits
//! are tested for density in [`density`], transitivity notions live in
//! [`transitivity`], the supercyclicity criterion in [`criterion`] and
//! semigroup / regularized-group grids in [`semigroups`]. [`scenario`] ties
//! everything to JSON configs and reports for the command-line tool.

pub mod error;
pub mod numerics;

pub use error::{LabError, Result};
pub use numerics::{CVector, Complex64, DenseOperator, ToleranceConfig};
pub mod criterion;
pub mod density;
pub mod families;
pub mod report;
pub mod scenario;
pub mod semigroups;
pub mod transitivity;

pub use report::Verdict;
