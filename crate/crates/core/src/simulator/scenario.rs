//! JSON scenario schema.
//!
//! Unknown keys are rejected everywhere so that a misspelt gain name fails
//! loudly instead of silently falling back to a default.

use super::SimError;
use crate::field::{Boundary, Field, FlowField, GridField, PuffPlume, TranslatingGaussian};
use crate::guidance::{GuidanceGains, ObserverStep, SignConvention, TrackedPoint};
use crate::sensing::{NoiseModel, SensorRig};
use crate::vessel::{VesselParams, VesselState};
use crate::Vec2;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    pub field: FieldConfig,
    #[serde(default)]
    pub rig: RigConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub vessel: VesselConfig,
    pub gains: GainsConfig,
    #[serde(default)]
    pub guidance: GuidanceConfig,
    /// Run length, s.
    pub duration: f64,
    /// Control period, s.
    #[serde(default = "default_dt_control")]
    pub dt_control: f64,
    /// Largest physics substep, s. Defaults to the control period.
    #[serde(default)]
    pub dt_physics: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_dt_control() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum FieldConfig {
    PuffPlume(PuffPlumeConfig),
    TranslatingGaussian(TranslatingConfig),
    Grid(GridConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuffPlumeConfig {
    /// Diffusion coefficient of the water, m^2/s.
    pub k: f64,
    pub flow: FlowConfig,
    #[serde(default)]
    pub source_point: [f64; 2],
    /// Continuous emission, ppb * m^2 / s.
    #[serde(default)]
    pub emission_rate: f64,
    #[serde(default = "default_puff_interval")]
    pub puff_interval: f64,
    #[serde(default)]
    pub start_time: f64,
    #[serde(default)]
    pub releases: Vec<ReleaseConfig>,
}

fn default_puff_interval() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReleaseConfig {
    pub time: f64,
    pub point: [f64; 2],
    /// ppb * m^2.
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslatingConfig {
    pub center: [f64; 2],
    pub peak: f64,
    pub sigma: f64,
    pub flow: FlowConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Lower-left corner, m.
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub k: f64,
    pub flow: FlowConfig,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryConfig,
    /// Initial condition: puffs released before `t = 0`, evaluated at `t = 0`.
    pub initial: Vec<ReleaseConfig>,
}

fn default_boundary() -> BoundaryConfig {
    BoundaryConfig::Outflow
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryConfig {
    Outflow,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FlowConfig {
    Uniform { velocity: [f64; 2] },
    Piecewise { boundaries: Vec<f64>, velocities: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigConfig {
    pub offsets: [[f64; 2]; 4],
}

impl Default for RigConfig {
    fn default() -> Self {
        let d = 0.75;
        Self {
            offsets: [[d, 0.0], [-d, 0.0], [0.0, d], [0.0, -d]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default = "default_range")]
    pub range_max: f64,
}

fn default_floor() -> f64 {
    0.01
}

fn default_range() -> f64 {
    10_000.0
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            floor: default_floor(),
            range_max: default_range(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselConfig {
    #[serde(default = "default_l0")]
    pub l0: f64,
    #[serde(default = "default_nu_max")]
    pub nu_max: f64,
    #[serde(default = "default_omega_max")]
    pub omega_max: f64,
    /// `[x, y, heading]` in m, m, rad.
    pub initial_pose: [f64; 3],
}

fn default_l0() -> f64 {
    VesselParams::default().l0
}

fn default_nu_max() -> f64 {
    VesselParams::default().nu_max
}

fn default_omega_max() -> f64 {
    VesselParams::default().omega_max
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    pub c0: f64,
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
    pub v_d: f64,
    #[serde(default = "default_grad_floor")]
    pub grad_floor: f64,
}

fn default_grad_floor() -> f64 {
    GuidanceGains::DEFAULT_GRAD_FLOOR
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConfig {
    PaperLiteral,
    #[default]
    PdeDerived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrackedPointConfig {
    #[default]
    Head,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObserverStepConfig {
    Euler,
    #[default]
    ExactHold,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidanceConfig {
    #[serde(default)]
    pub sign_convention: SignConfig,
    #[serde(default)]
    pub tracked_point: TrackedPointConfig,
    #[serde(default)]
    pub observer_step: ObserverStepConfig,
    /// Gaussian noise on the measured current, m/s per component.
    #[serde(default)]
    pub flow_sigma: f64,
}

fn v2(a: [f64; 2]) -> Vec2 {
    Vec2::new(a[0], a[1])
}

fn config_err(e: impl std::fmt::Display) -> SimError {
    SimError::Config(e.to_string())
}

impl FlowConfig {
    pub fn build(&self) -> Result<FlowField, SimError> {
        match self {
            FlowConfig::Uniform { velocity } => Ok(FlowField::uniform(v2(*velocity))),
            FlowConfig::Piecewise { boundaries, velocities } => {
                FlowField::piecewise(boundaries.clone(), velocities.iter().copied().map(v2).collect())
                    .map_err(|e| config_err(format!("field.flow: {e}")))
            }
        }
    }
}

impl FieldConfig {
    pub fn build(&self) -> Result<Field, SimError> {
        let wrap = |e: crate::field::FieldError| config_err(format!("field: {e}"));
        match self {
            FieldConfig::PuffPlume(p) => {
                let mut plume = PuffPlume::new(
                    v2(p.source_point),
                    p.emission_rate,
                    p.puff_interval,
                    p.flow.build()?,
                    p.k,
                    p.start_time,
                )
                .map_err(wrap)?;
                for r in &p.releases {
                    plume = plume.with_release(r.time, v2(r.point), r.strength).map_err(wrap)?;
                }
                Ok(Field::Puff(plume))
            }
            FieldConfig::TranslatingGaussian(g) => Ok(Field::Translating(
                TranslatingGaussian::new(v2(g.center), g.peak, g.sigma, g.flow.build()?).map_err(wrap)?,
            )),
            FieldConfig::Grid(g) => {
                let flow = g.flow.build()?;
                // initial condition uses a positive k even for pure advection grids
                let k_ic = if g.k > 0.0 { g.k } else { 1e-3 };
                let mut ic = PuffPlume::new(Vec2::zeros(), 0.0, 1.0, flow.clone(), k_ic, f64::NEG_INFINITY).map_err(wrap)?;
                for r in &g.initial {
                    if !(r.time < 0.0) {
                        return Err(config_err("field.initial: releases must happen before t = 0"));
                    }
                    ic = ic.with_release(r.time, v2(r.point), r.strength).map_err(wrap)?;
                }
                let boundary = match g.boundary {
                    BoundaryConfig::Outflow => Boundary::Outflow,
                    BoundaryConfig::Periodic => Boundary::Periodic,
                };
                let mut err = None;
                let grid = GridField::from_fn(v2(g.origin), g.h, g.nx, g.ny, g.k, flow, boundary, 0.0, |x| {
                    ic.eval(x, 0.0).map(|s| s.c).unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        0.0
                    })
                })
                .map_err(wrap)?;
                if let Some(e) = err {
                    return Err(wrap(e));
                }
                Ok(Field::Grid(grid))
            }
        }
    }
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self, SimError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| match e {
            SimError::Parse(m) => SimError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn dt_physics(&self) -> f64 {
        self.dt_physics.unwrap_or(self.dt_control)
    }

    /// Number of control steps after `t = 0`; the log holds one more record.
    pub fn step_count(&self) -> usize {
        (self.duration / self.dt_control + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.schema != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema: unsupported version {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(config_err("duration: must be > 0"));
        }
        if !(self.dt_control > 0.0) || !self.dt_control.is_finite() {
            return Err(config_err("dt_control: must be > 0"));
        }
        let dtp = self.dt_physics();
        if !(dtp > 0.0) || dtp > self.dt_control {
            return Err(config_err("dt_physics: must be > 0 and <= dt_control"));
        }
        if !(self.guidance.flow_sigma >= 0.0) {
            return Err(config_err("guidance.flow_sigma: must be >= 0"));
        }
        self.field.build()?;
        self.rig()?;
        self.noise_model()?;
        self.vessel_params()?;
        self.gains().validate().map_err(|e| config_err(format!("gains: {e}")))?;
        if self.vessel.initial_pose.iter().any(|v| !v.is_finite()) {
            return Err(config_err("vessel.initial_pose: must be finite"));
        }
        Ok(())
    }

    pub fn build_field(&self) -> Result<Field, SimError> {
        self.field.build()
    }

    pub fn rig(&self) -> Result<SensorRig, SimError> {
        SensorRig::new(self.rig.offsets.map(v2)).map_err(|e| config_err(format!("rig: {e}")))
    }

    pub fn noise_model(&self) -> Result<NoiseModel, SimError> {
        NoiseModel::new(self.noise.sigma, self.noise.floor, self.noise.range_max)
            .map_err(|e| config_err(format!("noise: {e}")))
    }

    pub fn vessel_params(&self) -> Result<VesselParams, SimError> {
        VesselParams::new(self.vessel.l0, self.vessel.nu_max, self.vessel.omega_max)
            .map_err(|e| config_err(format!("vessel: {e}")))
    }

    pub fn initial_state(&self) -> VesselState {
        let [x, y, th] = self.vessel.initial_pose;
        VesselState::new(x, y, th)
    }

    pub fn gains(&self) -> GuidanceGains {
        let g = &self.gains;
        GuidanceGains {
            c0: g.c0,
            k: g.k,
            k1: g.k1,
            k2: g.k2,
            v_d: g.v_d,
            grad_floor: g.grad_floor,
        }
    }

    pub fn sign_convention(&self) -> SignConvention {
        match self.guidance.sign_convention {
            SignConfig::PaperLiteral => SignConvention::PaperLiteral,
            SignConfig::PdeDerived => SignConvention::PdeDerived,
        }
    }

    pub fn observer_step(&self) -> ObserverStep {
        match self.guidance.observer_step {
            ObserverStepConfig::Euler => ObserverStep::Euler,
            ObserverStepConfig::ExactHold => ObserverStep::ExactHold,
        }
    }

    pub fn tracked_point(&self) -> TrackedPoint {
        match self.guidance.tracked_point {
            TrackedPointConfig::Head => TrackedPoint::Head,
            TrackedPointConfig::Center => TrackedPoint::Center,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": 1,
        "field": {"type": "puff-plume", "k": 0.5, "flow": {"type": "uniform", "velocity": [0.1, 0.0]},
                  "releases": [{"time": -100.0, "point": [0.0, 0.0], "strength": 40000.0}]},
        "vessel": {"initial_pose": [3.0, 0.0, 1.57]},
        "gains": {"c0": 50, "k": 1.2, "k1": 5, "k2": 11, "v_d": 1.5},
        "duration": 60
    }"#;

    #[test]
    fn parses_minimal_with_defaults() {
        let s = Scenario::from_json_str(MINIMAL).unwrap();
        assert_eq!(s.dt_control, 0.05);
        assert_eq!(s.dt_physics(), 0.05);
        assert_eq!(s.step_count(), 1200);
        assert_eq!(s.rig().unwrap(), SensorRig::default());
        assert_eq!(s.noise_model().unwrap(), NoiseModel::default());
        assert_eq!(s.sign_convention(), SignConvention::PdeDerived);
    }

    #[test]
    fn round_trips_through_json() {
        let s = Scenario::from_json_str(MINIMAL).unwrap();
        let again = Scenario::from_json_str(&s.to_json_pretty()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn missing_gain_is_named() {
        let text = MINIMAL.replace(r#""k1": 5, "#, "");
        let e = Scenario::from_json_str(&text).unwrap_err().to_string();
        assert!(e.contains("k1"), "{e}");
        assert!(e.contains("line"), "{e}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = MINIMAL.replace(r#""k1": 5"#, r#""k_1": 5, "k1": 5"#);
        let e = Scenario::from_json_str(&text).unwrap_err().to_string();
        assert!(e.contains("k_1"), "{e}");
        let text = MINIMAL.replace(r#""k": 0.5,"#, r#""k": 0.5, "diffusion": 1,"#);
        assert!(Scenario::from_json_str(&text).is_err());
    }

    #[test]
    fn validation_errors() {
        let bad = MINIMAL.replace(r#""schema": 1"#, r#""schema": 2"#);
        assert!(matches!(Scenario::from_json_str(&bad), Err(SimError::Config(_))));
        let bad = MINIMAL.replace(r#""duration": 60"#, r#""duration": 0"#);
        assert!(matches!(Scenario::from_json_str(&bad), Err(SimError::Config(_))));
        let bad = MINIMAL.replace(r#""duration": 60"#, r#""duration": 60, "dt_physics": 0.1"#);
        assert!(matches!(Scenario::from_json_str(&bad), Err(SimError::Config(_))));
        let bad = MINIMAL.replace(r#""k2": 11"#, r#""k2": -11"#);
        assert!(matches!(Scenario::from_json_str(&bad), Err(SimError::Config(_))));
    }
}
