//! Concentration and flow fields.
//!
//! Every field evaluates to a [`FieldSample`]: the concentration together with
//! its spatial gradient and laplacian. Analytic fields return exact
//! derivatives; the grid field returns finite-difference estimates.

mod flow;
mod grid;
mod puff;
mod translating;

pub use flow::FlowField;
pub use grid::{Boundary, GridField, CFL_SAFETY};
pub use puff::{GaussianPuff, PuffPlume, PRUNE_PEAK};
pub use translating::TranslatingGaussian;

use crate::Vec2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("puff evaluated at t = {t} which is not after its release time {release}")]
    DegenerateTime { t: f64, release: f64 },
    #[error("flow is not uniform over [{from}, {to}]; the puff closed form does not apply")]
    NonUniformFlow { from: f64, to: f64 },
    #[error("time step {dt} exceeds the stable limit {limit}")]
    StepSize { dt: f64, limit: f64 },
    #[error("invalid field parameter: {0}")]
    Parameter(String),
    #[error("sample point ({x}, {y}) is outside the grid interior")]
    Domain { x: f64, y: f64 },
    #[error("field evaluated at t = {t} before its start time {start}")]
    BeforeStart { t: f64, start: f64 },
}

/// Concentration (ppb), gradient (ppb/m) and laplacian (ppb/m^2) at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub c: f64,
    pub grad: Vec2,
    pub lap: f64,
}

impl FieldSample {
    pub fn zero() -> Self {
        Self {
            c: 0.0,
            grad: Vec2::zeros(),
            lap: 0.0,
        }
    }
}

impl std::ops::Add for FieldSample {
    type Output = FieldSample;

    fn add(self, rhs: FieldSample) -> FieldSample {
        FieldSample {
            c: self.c + rhs.c,
            grad: self.grad + rhs.grad,
            lap: self.lap + rhs.lap,
        }
    }
}

impl std::ops::AddAssign for FieldSample {
    fn add_assign(&mut self, rhs: FieldSample) {
        *self = *self + rhs;
    }
}

/// The truth field of a simulation run.
#[derive(Debug, Clone)]
pub enum Field {
    Puff(PuffPlume),
    Translating(TranslatingGaussian),
    Grid(GridField),
}

impl Field {
    pub fn eval(&self, x: Vec2, t: f64) -> Result<FieldSample, FieldError> {
        match self {
            Field::Puff(p) => p.eval(x, t),
            Field::Translating(g) => Ok(g.eval(x, t)),
            Field::Grid(g) => g.sample(x),
        }
    }

    pub fn flow(&self) -> &FlowField {
        match self {
            Field::Puff(p) => &p.flow,
            Field::Translating(g) => &g.flow,
            Field::Grid(g) => &g.flow,
        }
    }

    /// Closed-form fields have an exact value everywhere at every time.
    pub fn is_analytic(&self) -> bool {
        !matches!(self, Field::Grid(_))
    }

    /// Advances time-stepped fields to `t`. Analytic fields ignore this.
    pub fn advance_to(&mut self, t: f64, max_dt: f64) -> Result<(), FieldError> {
        match self {
            Field::Grid(g) => g.advance_to(t, max_dt),
            _ => Ok(()),
        }
    }

    /// Mass-weighted centroid of the plume at time `t`.
    pub fn centroid(&self, t: f64) -> Option<Vec2> {
        match self {
            Field::Puff(p) => p.centroid(t),
            Field::Translating(g) => Some(g.center_at(t)),
            Field::Grid(g) => g.centroid(),
        }
    }

    /// Multiplies the concentration everywhere by `s`.
    pub fn scaled(&self, s: f64) -> Field {
        match self {
            Field::Puff(p) => Field::Puff(p.scaled(s)),
            Field::Translating(g) => Field::Translating(g.scaled(s)),
            Field::Grid(g) => Field::Grid(g.scaled(s)),
        }
    }
}
