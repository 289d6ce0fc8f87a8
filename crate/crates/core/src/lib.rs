//! Simulation stack for autonomous level-curve tracking of a dispersing
//! pollutant plume by a unicycle surface vessel.
//!
//! The pieces, bottom-up:
//!
//! - [`field`]: concentration fields `c(x, t)` obeying
//!   `dc/dt + v.grad(c) = k lap(c)`, either as a superposition of closed-form
//!   Gaussian puffs or on an explicit finite-difference grid.
//! - [`vessel`]: unicycle kinematics and the offset ("head") point transform
//!   that turns the vessel into a planar single integrator.
//! - [`sensing`]: four point sensors on the hull and the minimum-norm
//!   second-order Taylor estimator of value, gradient and laplacian.
//! - [`guidance`]: the level-curve observer and tracking control law.
//! - [`simulator`]: scenario files, the closed-loop runner, logs and metrics.
//! - [`validation`]: a fast invariant suite used by `plume validate`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod field;
pub mod guidance;
pub mod sensing;
pub mod simulator;
pub mod validation;
pub mod vessel;

/// Planar vector in metres (or metres per second, ppb per metre, ...).
pub type Vec2 = nalgebra::Vector2<f64>;

pub use field::{Field, FieldError, FieldSample};
pub use guidance::{GuidanceGains, GuidanceState, ObserverStep, SignConvention, Status, TrackedPoint};
pub use sensing::{NoiseModel, SensorRig, SensorSample, StencilEstimate};
pub use simulator::{run, RunLog, RunMetrics, Scenario, Termination};
pub use vessel::{ActuatorCommand, VesselParams, VesselState};
