//! Gaussian steering, separability and monogamy criteria for multimode
//! covariance matrices under Gaussian measurements.

// Negated float comparisons are used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaigns;
pub mod channels;
pub mod error;
pub mod gaussian;
pub mod higher_order;
pub mod io;
pub mod partition;
pub mod repro;
pub mod sampling;
pub mod steering;
pub mod symmat;

pub use error::{Error, Result};
pub use gaussian::CovarianceMatrix;
pub use partition::ModePartition;
pub use symmat::{HermPair, PsdVerdict, SymMatrix};
