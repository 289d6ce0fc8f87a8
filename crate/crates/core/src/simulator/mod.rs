//! Closed-loop runner.
//!
//! Each control step samples the sensors at the current pose, updates the
//! estimator, observer and controller, converts the planar input to
//! actuator commands and integrates the hull over the control period in
//! physics substeps. Grid fields are advanced to the step time before
//! sampling.

mod log;
mod metrics;
mod scenario;

pub use self::log::{fmt_sig9, Record, RunLog, Termination, CSV_HEADER};
pub use self::metrics::{compute as compute_metrics, metrics, RunMetrics};
pub use self::scenario::{
    BoundaryConfig, FieldConfig, FlowConfig, GainsConfig, GridConfig, GuidanceConfig, NoiseConfig, ObserverStepConfig, PuffPlumeConfig,
    ReleaseConfig, RigConfig, Scenario, SignConfig, TrackedPointConfig, TranslatingConfig, VesselConfig,
    SCHEMA_VERSION,
};

use crate::field::{FieldError, GaussianPuff};
use crate::guidance::{GuidanceState, Measurement, TrackedPoint};
use crate::sensing::{self, SensingError};
use crate::vessel::{self, head_point};
use crate::Vec2;
use ::log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    /// Malformed scenario or log text.
    #[error("parse error: {0}")]
    Parse(String),
    /// Well-formed but invalid configuration.
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Radius of the `c = c0` circle of a single puff at time `t`.
pub fn level_set_radius(puff: &GaussianPuff, c0: f64, t: f64) -> Option<f64> {
    puff.level_set_radius(c0, t)
}

/// Runs a scenario to completion or early termination.
///
/// Deterministic: the same scenario (including seed) yields an identical log.
pub fn run(scenario: &Scenario) -> Result<RunLog, SimError> {
    scenario.validate()?;
    let mut field = scenario.build_field()?;
    let rig = scenario.rig()?;
    let noise = scenario.noise_model()?;
    let params = scenario.vessel_params()?;
    let gains = scenario.gains();
    let mode = scenario.sign_convention();
    let tracked = scenario.tracked_point();
    let observer_step = scenario.observer_step();
    let flow_sigma = scenario.guidance.flow_sigma;

    let dt = scenario.dt_control;
    let n_steps = scenario.step_count();
    let substeps = (dt / scenario.dt_physics() - 1e-9).ceil().max(1.0) as usize;
    let h = dt / substeps as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut state = scenario.initial_state();
    let mut guidance = GuidanceState::init(state.position);
    let mut records = Vec::with_capacity(n_steps + 1);
    let mut termination = Termination::Completed;

    for i in 0..=n_steps {
        let t = i as f64 * dt;
        if let Err(e) = field.advance_to(t, scenario.dt_physics()) {
            termination = Termination::Aborted {
                time: t,
                reason: e.to_string(),
            };
            break;
        }

        let positions = sensing::world_positions(&rig, &state);
        let sample = match sensing::sample(&field, &positions, t, &noise, &mut rng) {
            Ok(s) => s,
            Err(SensingError::Field(FieldError::Domain { .. })) => {
                debug!("vessel left the field domain at t = {t}");
                termination = Termination::Truncated {
                    time: t,
                    reason: "sensor outside the field domain".into(),
                };
                break;
            }
            Err(e) => {
                termination = Termination::Aborted {
                    time: t,
                    reason: e.to_string(),
                };
                break;
            }
        };
        let est = match sensing::estimate(&sample) {
            Ok(e) => e,
            Err(e) => {
                termination = Termination::Aborted {
                    time: t,
                    reason: e.to_string(),
                };
                break;
            }
        };

        let x_r = sensing::centered(&sample.positions).0;
        let mut flow = field.flow().at(x_r, t);
        if flow_sigma > 0.0 {
            let gx: f64 = rng.sample(StandardNormal);
            let gy: f64 = rng.sample(StandardNormal);
            flow += Vec2::new(gx, gy) * flow_sigma;
        }
        let m = Measurement {
            x_r,
            c: est.c,
            grad: est.grad,
            lap: est.lap,
            flow,
        };

        let z = head_point(&state, params.l0);
        let p = match tracked {
            TrackedPoint::Head => z,
            TrackedPoint::Center => state.position,
        };
        let step = guidance
            .observer_update(&gains, mode, observer_step, &m, dt)
            .and_then(|g| g.control(&gains, mode, &m, p).map(|u| (g, u)));
        let (next, u) = match step {
            Ok(v) => v,
            Err(e) => {
                termination = Termination::Aborted {
                    time: t,
                    reason: e.to_string(),
                };
                break;
            }
        };
        guidance = next;
        guidance.last_u = u.0;
        guidance.update_status(est.c, gains.c0, p, dt);

        let act = match vessel::to_actuators(u, state.heading, &params) {
            Ok(a) => a,
            Err(e) => {
                termination = Termination::Aborted {
                    time: t,
                    reason: e.to_string(),
                };
                break;
            }
        };

        let c_true = if field.is_analytic() {
            Some(field.eval(z, t)?.c)
        } else {
            None
        };

        records.push(Record {
            t,
            position: state.position,
            heading: state.heading,
            head: z,
            x_hat: guidance.x_hat,
            readings: sample.readings,
            c_hat: est.c,
            grad: est.grad,
            lap: est.lap,
            u: u.0,
            nu: act.command.nu,
            omega: act.command.omega,
            saturated: act.saturated,
            status: guidance.status,
            c_true,
        });

        if i < n_steps {
            for _ in 0..substeps {
                state = vessel::step(&state, &act.command, h);
            }
        }
    }

    Ok(RunLog {
        records,
        termination,
        seed: scenario.seed,
        dt_control: dt,
    })
}
