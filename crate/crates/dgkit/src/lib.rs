//! Exact workbench for finite dg-categories over a field.
//!
//! Everything here computes with exact arithmetic (rationals or a prime
//! field) and verifies the isomorphisms it claims with explicit witnesses:
//! chain maps that are checked to be mutually inverse, units and counits
//! whose triangle identities are evaluated as matrix equalities, and
//! quasi-isomorphisms certified degreewise on cohomology.

pub mod complex;
pub mod dgcat;
pub mod dgmod;
pub mod derived;
pub mod duality;
pub mod endcoend;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod linalg;
pub mod oracle;
pub mod report;
pub mod run;
pub mod workspace;

pub use error::{DgError, Result};
pub use field::{Field, Scalar};
pub use linalg::Matrix;
