//! Itô integrals of predictable simple processes and the moment bounds
//! they satisfy.
//!
//! * [`process`]: the coefficient catalog, [`SimpleProcess`] and pathwise
//!   `I_K(X)`.
//! * [`seminorm`]: the seminorm `[X]_{K,p}`.
//! * [`bounds`]: the moment bounds for `L(phi)` and `I(X)`.
//! * [`convolution`]: the space-time convolution bound.
//! * [`tail`], [`approx`], [`checks`]: convergence and martingale properties.

pub mod approx;
pub mod bounds;
pub mod checks;
pub mod convolution;
pub mod process;
pub mod seminorm;
pub mod tail;

pub use approx::{approximate_by_simple, approximation_errors, dyadic_mesh, GridProcess};
pub use bounds::{bound_lemma31, bound_thm34, ConstantConvention, RosenthalConstant};
pub use checks::{centering_check, isometry_check, martingale_check};
pub use convolution::{bound_thm35, ConvolutionSpec, Field, Kernel};
pub use process::{validate_simple, Coefficient, SimpleProcess, SimpleProcessSpec};
pub use seminorm::{estimate_seminorm, SeminormEstimate};
pub use tail::{tail_convergence, SmoothFn};
