//! Positive Bergman-type operators on the upper half-plane, their dyadic
//! model operators, Bekolle-Bonami weight classes, and a numerical harness
//! that stress-tests the weighted norm inequalities relating them.
//!
//! The crate is organized around five pieces:
//!
//! - [`geometry`]: shifted dyadic grids, Carleson squares, covering lemmas.
//! - [`measure`]: the measures `dV_alpha`, weights, weighted norms, class
//!   constants, reverse doubling, and exponent arithmetic.
//! - [`operators`]: the fractional Bergman operator by quadrature, its
//!   dyadic models with in/out splits, and maximal functions.
//! - [`harness`]: the inequality experiments (strong, weak, special
//!   exponents), level-set decomposition, and testing-condition checks.
//! - [`cli`]: configuration, orchestration, and JSON/CSV report emission
//!   behind the `bekolle` binary.
//!
//! Start from the `examples/` directory for runnable tours of each
//! capability.

pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod measure;
pub mod operators;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
