//! Pseudospectral lab for forced active scalar equations on the torus.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod io;
pub mod spectral;
pub mod stats;
pub mod tangent;
pub mod timestepper;

pub use error::{Error, Result};
