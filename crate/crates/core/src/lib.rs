//! Continued fractions, growth functions and Hausdorff dimension of the
//! exceptional sets in the Borel-Bernstein theorem.

pub mod cf;
pub mod construct;
pub mod dimension;
pub mod error;
pub mod growth;
pub mod numeric;
pub mod stochastic;

pub use cf::{
    convergents, cylinder, evaluate, expand, remove_digit_ratio, ConvergentPair, ConvergentState, Cylinder,
    DigitWord, Integer, Rational, RemovalRatio,
};
pub use error::{Error, Result};
pub use growth::{sparse_count, AsymptoticsReport, Extension, GrowthSpec, Limits, Regime, Theta};
