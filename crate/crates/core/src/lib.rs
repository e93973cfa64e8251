//! Itô integration against a two-sided, finite-variance Lévy white noise
//! without Gaussian part.
//!
//! The crate samples the underlying Poisson random measure, evaluates
//! stochastic integrals of predictable simple processes, computes exact
//! moments through cumulant/partition sums, and checks moment bounds and the
//! Skorohod/Itô identification by Monte Carlo.

// `!(a <= b)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod error;
pub mod harness;
pub mod ito_integral;
pub mod levy_measure;
pub mod malliavin;
pub mod mc;
pub mod noise_sim;
pub mod quadrature;
pub mod rng;
pub mod sets;
pub mod stats;

pub use error::{Error, Result};
pub use levy_measure::{JumpSet, LevyMeasureModel, MeasureSpec, PowerLaw};
pub use mc::Execution;
pub use noise_sim::{sample_prm, PointRealization};
pub use rng::SeedToken;
pub use sets::{Interval, IntervalSet, StepFunction};
