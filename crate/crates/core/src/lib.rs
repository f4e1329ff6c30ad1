//! Convolution, dual convolution and Toeplitz operators on power series
//! spaces Λ₁(α) and Λ∞(α): exact and certified evaluation, inequality
//! sweeps, three-valued operator classification and Laurent symbol
//! extraction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod element;
pub mod error;
pub mod exec;
pub mod laurent;
pub mod num;
pub mod operators;
pub mod oracle;
pub mod spaces;
pub mod symbols;
pub mod tail;
pub mod verify;

pub use element::Element;
pub use error::{Error, Result};
pub use exec::Exec;
pub use num::{Coeffs, Rational, Scalar};
pub use spaces::{DualCertificate, ExponentSequence, SpaceSpec, SpaceType};
pub use symbols::Symbol;
pub use tail::{Decay, Envelope, TailCert};
