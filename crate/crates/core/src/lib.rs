//! Guided-mode and two-photon spectral model of type-II parametric
//! down-conversion in a rectangular periodically poled KTP waveguide.

// Negated comparisons are deliberate: they reject NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dispersion;
pub mod error;
pub mod fit;
pub mod modesolver;
pub mod pdc;
pub mod quantum;

pub use error::{Error, Result};
