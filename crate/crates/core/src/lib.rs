//! Simulation and analysis of continuous-time ant-colony pheromone dynamics
//! on `n` parallel paths.
//!
//! The crate covers the EigenAnt field `dx/dt = gamma (-alpha I + beta D / sum(x)) x`
//! and its generalizations with a max-reciprocal saturation and tanh or
//! signum activations:
//!
//! - [`models`]: vector fields and parameter validation.
//! - [`stability`]: equilibria, Jacobians and local stability labels.
//! - [`integrate`]: forward Euler and RK4 with positivity enforcement.
//! - [`oracle`]: the closed-form EigenAnt solution and its large-time expansion.
//! - [`analysis`]: decay-rate fits, global convergence checks, speed rankings.
//! - [`harness`]: named experiment presets producing CSV, SVG and reports.
//! - [`config`], [`report`], [`cli`]: configuration files, report text and
//!   the command-line front end.
//!
//! State vectors are always in canonical order (nonincreasing reciprocal
//! length); see [`models::PathSystem`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
mod error;
pub mod harness;
pub mod integrate;
pub mod models;
pub mod numerics;
pub mod oracle;
pub mod report;
pub mod stability;
pub mod svg;

pub use error::{Error, Result};
pub use integrate::{integrate, Scheme, Settings, Trajectory};
pub use models::{Activation, ModelSpec, PathSystem, Saturation};
