//! Poisson chaos on step kernels: multiple integrals, conditional
//! expectations, the Malliavin derivative and the Skorohod integral of
//! predictable integrands.
//!
//! The derivative is computed by slicing kernels; the add-one-cost operator
//! `F(omega + delta_xi) - F(omega)` is kept alongside as an independent check.

pub mod chaos;
pub mod checks;
pub mod kernel;
pub mod skorohod;

pub use chaos::{add_one_cost, malliavin_derivative, ChaosFunctional};
pub use checks::{chaos_isometry_check, derivative_oracle_check, orthogonality_check, projection_check};
pub use kernel::{eval_multiple_integral, project_kernel, Cell, KernelEntry, KernelSpec, StepKernel};
pub use skorohod::{derivative_inner_product, duality_gap, skorohod_predictable, DualityReport, SkorohodIntegral};
