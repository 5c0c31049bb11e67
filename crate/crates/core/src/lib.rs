//! Heat transport through a spin junction coupled to two bosonic reservoirs,
//! treated with explicit reaction coordinates and a Redfield master equation.
// Negated comparisons are used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod quad;
pub mod methods;
pub mod redfield;

pub use error::{Error, Result};
