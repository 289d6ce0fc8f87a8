//! Four point sensors on the hull and the second-order Taylor stencil
//! estimator.
//!
//! Around the rig centre `x_r = mean(x_Si)` each reading is modelled as
//! `c(x_Si) ~ c_r + d_i^T grad + 0.5 d_i^T H d_i` with `d_i = x_Si - x_r`.
//! Writing `h = [H11, H12, H21, H22]` and `gamma = [grad; h]`, the four
//! equations `B gamma = y` (with `y_i = c(x_Si) - mean(c)`) are
//! underdetermined; the estimate is the minimum-norm solution
//! `gamma = B^T (B B^T)^-1 y`, computed here from a QR factorisation of
//! `B^T`. The laplacian estimate is `h1 + h4`.
//!
//! Two structural properties follow from the minimum-norm choice:
//!
//! - For rigs symmetric under `d -> -d` the linear and quadratic columns of
//!   `B` act on orthogonal subspaces, so the gradient estimate is exact on
//!   any quadratic field. For asymmetric rigs it is generally biased even on
//!   affine fields.
//! - If in addition both sensor pairs are equally far from the centre (the
//!   default cross), the laplacian estimate is identically zero because the
//!   mean-referenced `y` always sums to zero.

use crate::field::{Field, FieldError};
use crate::vessel::VesselState;
use crate::Vec2;
use nalgebra::{Matrix2, SMatrix, SVector};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Reject stencils whose `B B^T` is worse conditioned than this.
pub const MAX_CONDITION: f64 = 1e10;

pub const SENSOR_COUNT: usize = 4;

type Design = SMatrix<f64, 4, 6>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensingError {
    #[error("degenerate sensor stencil: cond(B B^T) = {condition:e}")]
    DegenerateStencil { condition: f64 },
    #[error("invalid sensor rig: {0}")]
    Rig(String),
    #[error("invalid noise model: {0}")]
    Noise(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Body-frame sensor offsets, metres.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorRig {
    offsets: [Vec2; SENSOR_COUNT],
}

impl SensorRig {
    pub fn new(offsets: [Vec2; SENSOR_COUNT]) -> Result<Self, SensingError> {
        if offsets.iter().any(|o| !o.x.is_finite() || !o.y.is_finite()) {
            return Err(SensingError::Rig("non-finite offset".into()));
        }
        let mean = offsets.iter().sum::<Vec2>() / SENSOR_COUNT as f64;
        let scale = offsets.iter().map(|o| o.norm()).fold(0.0, f64::max);
        if !(scale > 0.0) {
            return Err(SensingError::Rig("all offsets are zero".into()));
        }
        if mean.norm() > 1e-9 * scale {
            return Err(SensingError::Rig(format!(
                "offsets must average to the hull centre, mean is ({}, {})",
                mean.x, mean.y
            )));
        }
        // Not all collinear: some pair of offsets spans the plane.
        let spans = offsets
            .iter()
            .any(|a| offsets.iter().any(|b| (a.x * b.y - a.y * b.x).abs() > 1e-9 * scale * scale));
        if !spans {
            return Err(SensingError::Rig("offsets are collinear".into()));
        }
        Ok(Self { offsets })
    }

    /// Sensors at `(d, 0)`, `(-d, 0)`, `(0, d)`, `(0, -d)`.
    pub fn cross(d: f64) -> Result<Self, SensingError> {
        Self::new([
            Vec2::new(d, 0.0),
            Vec2::new(-d, 0.0),
            Vec2::new(0.0, d),
            Vec2::new(0.0, -d),
        ])
    }

    /// A kite layout that is not point symmetric, so the laplacian estimate
    /// is not forced to zero. Its gradient estimate is biased.
    pub fn kite() -> Self {
        Self::new([
            Vec2::new(0.75, 0.0),
            Vec2::new(-0.25, 0.6),
            Vec2::new(-0.25, -0.6),
            Vec2::new(-0.25, 0.0),
        ])
        .expect("kite layout is valid")
    }

    pub fn offsets(&self) -> &[Vec2; SENSOR_COUNT] {
        &self.offsets
    }
}

impl Default for SensorRig {
    fn default() -> Self {
        Self::cross(0.75).expect("default cross layout is valid")
    }
}

/// Fluorometer model: additive gaussian noise, then range clamp, then a
/// detection floor below which readings report zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub floor: f64,
    pub range_max: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64, floor: f64, range_max: f64) -> Result<Self, SensingError> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(SensingError::Noise(format!("sigma must be >= 0, got {sigma}")));
        }
        if !(floor >= 0.0) || !(floor < range_max) || !range_max.is_finite() {
            return Err(SensingError::Noise(format!(
                "need 0 <= floor < range_max, got floor {floor}, range_max {range_max}"
            )));
        }
        Ok(Self { sigma, floor, range_max })
    }

    pub fn noiseless() -> Self {
        Self {
            sigma: 0.0,
            ..Self::default()
        }
    }

    fn reading(&self, truth: f64, rng: &mut impl Rng) -> f64 {
        let g: f64 = rng.sample(StandardNormal);
        let raw = (truth + self.sigma * g).clamp(0.0, self.range_max);
        if raw < self.floor {
            0.0
        } else {
            raw
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            floor: 0.01,
            range_max: 10_000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSample {
    pub positions: [Vec2; SENSOR_COUNT],
    pub readings: [f64; SENSOR_COUNT],
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilEstimate {
    pub c: f64,
    pub grad: Vec2,
    pub lap: f64,
    /// Hessian entries `[H11, H12, H21, H22]`.
    pub hessian: [f64; 4],
    /// Condition number of `B B^T`.
    pub condition: f64,
}

/// Sensor positions in the world frame.
pub fn world_positions(rig: &SensorRig, state: &VesselState) -> [Vec2; SENSOR_COUNT] {
    let (s, c) = state.heading.sin_cos();
    let rot = Matrix2::new(c, -s, s, c);
    rig.offsets.map(|o| state.position + rot * o)
}

/// Reads every sensor once, drawing one normal deviate per sensor in order.
pub fn sample(
    field: &Field,
    positions: &[Vec2; SENSOR_COUNT],
    t: f64,
    noise: &NoiseModel,
    rng: &mut impl Rng,
) -> Result<SensorSample, SensingError> {
    let mut readings = [0.0; SENSOR_COUNT];
    for (r, p) in readings.iter_mut().zip(positions) {
        let truth = field.eval(*p, t)?.c;
        *r = noise.reading(truth, rng);
    }
    Ok(SensorSample {
        positions: *positions,
        readings,
        time: t,
    })
}

/// Builds the 4x6 Taylor design matrix for offsets from the stencil centre.
pub fn design_matrix(deltas: &[Vec2; SENSOR_COUNT]) -> Design {
    let mut b = Design::zeros();
    for (i, d) in deltas.iter().enumerate() {
        b[(i, 0)] = d.x;
        b[(i, 1)] = d.y;
        b[(i, 2)] = 0.5 * d.x * d.x;
        b[(i, 3)] = 0.5 * d.x * d.y;
        b[(i, 4)] = 0.5 * d.y * d.x;
        b[(i, 5)] = 0.5 * d.y * d.y;
    }
    b
}

/// Stencil centre and offsets from it.
pub fn centered(positions: &[Vec2; SENSOR_COUNT]) -> (Vec2, [Vec2; SENSOR_COUNT]) {
    let center = positions.iter().sum::<Vec2>() * 0.25;
    (center, positions.map(|p| p - center))
}

/// Mean-referenced readings `y_i = c_i - mean(c)` and the mean.
pub fn residuals(readings: &[f64; SENSOR_COUNT]) -> (f64, [f64; SENSOR_COUNT]) {
    let mean = 0.25 * readings.iter().sum::<f64>();
    (mean, readings.map(|c| c - mean))
}

pub fn estimate(sample: &SensorSample) -> Result<StencilEstimate, SensingError> {
    let (_, deltas) = centered(&sample.positions);
    let b = design_matrix(&deltas);
    let sv = b.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(SensingError::DegenerateStencil { condition });
    }

    let (c, y) = residuals(&sample.readings);
    let y = SVector::<f64, 4>::from(y);

    // B^T = Q R  =>  B = R^T Q^T, minimum-norm gamma = Q R^-T y.
    let qr = b.transpose().qr();
    let w = qr
        .r()
        .transpose()
        .solve_lower_triangular(&y)
        .ok_or(SensingError::DegenerateStencil { condition })?;
    let gamma = qr.q() * w;

    Ok(StencilEstimate {
        c,
        grad: Vec2::new(gamma[0], gamma[1]),
        lap: gamma[2] + gamma[5],
        hessian: [gamma[2], gamma[3], gamma[4], gamma[5]],
        condition,
    })
}
