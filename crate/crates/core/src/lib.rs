//! Sum inverse energy efficiency (SIEE) minimization for multi-cell
//! downlink power control.
//!
//! The crate provides the system model, the fraction and quadratic
//! transforms that turn the sum-of-ratios objective into a multi-convex
//! problem, a scaled ADMM splitting with a closed-form power step and a
//! Newton consensus step, the alternate-convex-search driver, baselines,
//! fairness metrics and the scenario generator used by the experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod error;
pub mod fairness;
pub mod model;
pub mod scenario;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
pub use model::{PowerAllocation, SystemParams};
