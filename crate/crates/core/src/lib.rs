//! Type-based statistical classification with training sequences.
//!
//! The crate implements Gutman's generalized Jensen-Shannon (GJS) test for
//! binary classification, its rejection-capable M-ary relatives, the
//! divergence functionals and error-exponent programs that describe their
//! performance, and a simulation harness (Monte Carlo plus exact
//! enumeration over type classes) for checking finite-sample behaviour.
//!
//! All logarithms are natural; divergences are reported in nats.
//!
//! Modules, bottom-up:
//!
//! - [`special`]: normal and chi-squared distribution functions and inverses.
//! - [`distributions`]: finite-alphabet distributions, empirical types, sampling.
//! - [`divergences`]: KL, GJS, Rényi, tilted distributions, information densities and moments.
//! - [`exponents`]: the constrained exponent programs `F`, `K`, `F_n` and finite-n slack terms.
//! - [`classifiers`]: decision rules and threshold formulas.
//! - [`simulation`]: Monte Carlo and exact error-probability computation.
//!
//! Trial loops run on rayon when the default `parallel` feature is enabled and
//! fall back to plain iterators otherwise; results are identical either way.

pub mod classifiers;
pub mod distributions;
pub mod divergences;
mod error;
pub mod exponents;
pub mod parallel;
pub mod simulation;
pub mod special;

pub use classifiers::{MultiStructure, ThresholdMode, Verdict};
pub use distributions::{Distribution, EmpiricalType, Sequence};
pub use error::{Error, Result};
pub use exponents::{ExponentSolution, SlackTerms};
pub use simulation::{ExactReport, SimulationReport};
pub use special::Probability;
