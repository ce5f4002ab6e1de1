//! Expected number of real zeros of random sparse polynomials.
//!
//! For a support set `S = {e_1, ..., e_k}` and i.i.d. standard normal
//! coefficients, the crate evaluates the zero density of
//! `f_S = Σ a_i x^{e_i}`, integrates it over intervals of the real line,
//! checks the closed-form upper and lower bounds against those integrals,
//! and validates everything against Monte Carlo root counts.

// Kronrod constants keep their published digits; `!(x > 0.0)` guards are
// written that way on purpose so NaN fails them.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod density;
pub mod error;
pub mod exactpoly;
pub mod extended;
pub mod logspace;
pub mod lowerbound;
pub mod montecarlo;
pub mod quadrature;
pub mod sparse;
pub mod supportset;

pub use density::{DensityForm, DensityKernel};
pub use error::{Error, Result};
pub use logspace::LogValue;
pub use supportset::SupportSet;
