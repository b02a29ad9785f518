//! Exact finite-scale workbench for the multi-plant clique problem: the
//! truncated pseudo-calibrated pseudoexpectation and its moment matrix on the
//! sum-of-squares side, and row-mixture correlations, statistical dimension and
//! a VSTAT simulator on the statistical-query side.

pub mod cli;
pub mod error;
pub mod fourier;
pub mod matrix;
pub mod moments;
pub mod planted;
pub mod pseudo;
pub mod rational;
pub mod ribbon;
pub mod sq;
pub mod vstat;

pub use error::{Error, Result};
pub use fourier::{Character, Edge, Monomial, TruncationParams, Var};
pub use moments::Model;
pub use planted::{Graph, Planting};
pub use rational::ExactRational;
