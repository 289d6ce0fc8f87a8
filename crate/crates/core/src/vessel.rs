//! Unicycle kinematics and the offset-point input transform.
//!
//! The vessel obeys `x' = nu cos(theta)`, `y' = nu sin(theta)`,
//! `theta' = omega`. The head point `z = x_r + l0 (cos theta, sin theta)`
//! then moves as a single integrator `z' = u` with
//! `u = C(theta) [nu, omega]^T`, `C = [[cos, -l0 sin], [sin, l0 cos]]`.

use crate::Vec2;
use nalgebra::Matrix2;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VesselError {
    #[error("non-finite planar control ({0}, {1})")]
    NonFiniteControl(f64, f64),
    #[error("invalid vessel parameter: {0}")]
    Parameter(String),
}

/// Largest heading change per RK4 substep, rad.
const MAX_TURN_PER_SUBSTEP: f64 = 0.02;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselState {
    pub position: Vec2,
    /// Heading in `(-pi, pi]`.
    pub heading: f64,
}

impl VesselState {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            position: Vec2::new(x, y),
            heading: normalize_angle(heading),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselParams {
    /// Head-point offset ahead of the hull centre, m.
    pub l0: f64,
    /// Surge speed limit, m/s (symmetric).
    pub nu_max: f64,
    /// Turn-rate limit, rad/s (symmetric).
    pub omega_max: f64,
}

impl VesselParams {
    pub fn new(l0: f64, nu_max: f64, omega_max: f64) -> Result<Self, VesselError> {
        for (name, v) in [("l0", l0), ("nu_max", nu_max), ("omega_max", omega_max)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(VesselError::Parameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self { l0, nu_max, omega_max })
    }
}

impl Default for VesselParams {
    fn default() -> Self {
        Self {
            l0: 1.0,
            nu_max: 2.0,
            omega_max: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorCommand {
    pub nu: f64,
    pub omega: f64,
}

/// Single-integrator input for the head point, m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarControl(pub Vec2);

/// Actuator command after saturation, with a flag set when any limit bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Actuation {
    pub command: ActuatorCommand,
    pub saturated: bool,
}

pub fn head_point(state: &VesselState, l0: f64) -> Vec2 {
    state.position + Vec2::new(state.heading.cos(), state.heading.sin()) * l0
}

/// `C(theta)`, mapping `(nu, omega)` to the head-point velocity.
pub fn input_matrix(theta: f64, l0: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -l0 * s, s, l0 * c)
}

/// Exact inverse of [`input_matrix`]; `det C = l0`.
pub fn inverse_input_matrix(theta: f64, l0: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, s, -s / l0, c / l0)
}

/// The inverse as commonly misprinted, with `-cos(theta)/l0` in the lower
/// right. It is not an inverse of `C`; kept so the validation suite can show
/// that.
pub fn misprinted_inverse(theta: f64, l0: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, s, -s / l0, -c / l0)
}

pub fn to_actuators(u: PlanarControl, heading: f64, params: &VesselParams) -> Result<Actuation, VesselError> {
    let u = u.0;
    if !u.x.is_finite() || !u.y.is_finite() {
        return Err(VesselError::NonFiniteControl(u.x, u.y));
    }
    let raw = inverse_input_matrix(heading, params.l0) * u;
    let nu = raw.x.clamp(-params.nu_max, params.nu_max);
    let omega = raw.y.clamp(-params.omega_max, params.omega_max);
    Ok(Actuation {
        command: ActuatorCommand { nu, omega },
        saturated: nu != raw.x || omega != raw.y,
    })
}

fn derivative(heading: f64, cmd: &ActuatorCommand) -> (Vec2, f64) {
    (Vec2::new(heading.cos(), heading.sin()) * cmd.nu, cmd.omega)
}

/// Advances the pose by `dt` with the command held constant, using classical
/// RK4 on substeps that turn at most 0.02 rad each.
pub fn step(state: &VesselState, cmd: &ActuatorCommand, dt: f64) -> VesselState {
    let n = ((cmd.omega.abs() * dt) / MAX_TURN_PER_SUBSTEP).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let mut p = state.position;
    let mut th = state.heading;
    for _ in 0..n {
        let (k1p, k1t) = derivative(th, cmd);
        let (k2p, k2t) = derivative(th + 0.5 * h * k1t, cmd);
        let (k3p, k3t) = derivative(th + 0.5 * h * k2t, cmd);
        let (k4p, k4t) = derivative(th + h * k3t, cmd);
        p += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0);
        th += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
    }
    VesselState {
        position: p,
        heading: normalize_angle(th),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn head_point_examples() {
        assert!(close(head_point(&VesselState::new(0.0, 0.0, 0.0), 1.0), Vec2::new(1.0, 0.0), 1e-15));
        assert!(close(head_point(&VesselState::new(2.0, 3.0, PI / 2.0), 0.5), Vec2::new(2.0, 3.5), 1e-15));
        assert!(close(head_point(&VesselState::new(1.0, 1.0, PI), 1.0), Vec2::new(0.0, 1.0), 1e-15));
    }

    fn act(u: Vec2, th: f64, l0: f64) -> ActuatorCommand {
        let p = VesselParams::new(l0, 10.0, 10.0).unwrap();
        to_actuators(PlanarControl(u), th, &p).unwrap().command
    }

    #[test]
    fn actuator_examples() {
        let c = act(Vec2::new(1.0, 0.0), 0.0, 1.0);
        assert!((c.nu - 1.0).abs() < 1e-15 && c.omega.abs() < 1e-15);

        let c = act(Vec2::new(0.0, 1.0), 0.0, 2.0);
        assert!(c.nu.abs() < 1e-15 && (c.omega - 0.5).abs() < 1e-15);
        let back = input_matrix(0.0, 2.0) * Vec2::new(c.nu, c.omega);
        assert!(close(back, Vec2::new(0.0, 1.0), 1e-15));

        let c = act(Vec2::new(0.0, 1.0), PI / 2.0, 1.0);
        assert!((c.nu - 1.0).abs() < 1e-15 && c.omega.abs() < 1e-15);
        let back = input_matrix(PI / 2.0, 1.0) * Vec2::new(c.nu, c.omega);
        assert!(close(back, Vec2::new(0.0, 1.0), 1e-15));
    }

    #[test]
    fn saturation_flagged() {
        let p = VesselParams::default();
        let a = to_actuators(PlanarControl(Vec2::new(5.0, 0.0)), 0.0, &p).unwrap();
        assert_eq!(a.command.nu, 2.0);
        assert!(a.saturated);
        let a = to_actuators(PlanarControl(Vec2::new(0.0, 3.0)), 0.0, &p).unwrap();
        assert_eq!(a.command.omega, 1.5);
        assert!(a.saturated);
        let a = to_actuators(PlanarControl(Vec2::new(1.0, 0.5)), 0.0, &p).unwrap();
        assert!(!a.saturated);
    }

    #[test]
    fn rejects_non_finite_control() {
        let p = VesselParams::default();
        assert!(to_actuators(PlanarControl(Vec2::new(f64::NAN, 0.0)), 0.0, &p).is_err());
        assert!(VesselParams::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn misprinted_inverse_is_wrong() {
        let m = input_matrix(0.3, 1.0) * misprinted_inverse(0.3, 1.0);
        assert!((m - Matrix2::identity()).amax() > 0.5);
    }

    #[test]
    fn straight_line() {
        let s = step(&VesselState::new(0.0, 0.0, 0.0), &ActuatorCommand { nu: 1.0, omega: 0.0 }, 2.0);
        assert!(close(s.position, Vec2::new(2.0, 0.0), 1e-15));
        assert_eq!(s.heading, 0.0);
    }

    #[test]
    fn pure_rotation() {
        let s = step(&VesselState::new(0.0, 0.0, 0.0), &ActuatorCommand { nu: 0.0, omega: 1.0 }, PI);
        assert_eq!(s.position, Vec2::zeros());
        assert!(normalize_angle(s.heading - PI).abs() < 1e-12);
    }

    #[test]
    fn circle_closes() {
        let start = VesselState::new(0.0, 0.0, 0.0);
        let s = step(&start, &ActuatorCommand { nu: 1.0, omega: 1.0 }, 2.0 * PI);
        assert!(close(s.position, start.position, 1e-6), "{}", s.position);
        assert!(normalize_angle(s.heading - start.heading).abs() < 1e-6);
    }

    #[test]
    fn normalizes_into_half_open_interval() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn inverse_is_exact(theta in -10.0f64..10.0, l0 in 1e-3f64..10.0) {
            let e = input_matrix(theta, l0) * inverse_input_matrix(theta, l0) - Matrix2::identity();
            prop_assert!(e.amax() < 1e-12);
        }

        #[test]
        fn unsaturated_round_trip(theta in -4.0f64..4.0, l0 in 0.1f64..10.0, ux in -3.0f64..3.0, uy in -3.0f64..3.0) {
            let p = VesselParams::new(l0, 1e6, 1e6).unwrap();
            let a = to_actuators(PlanarControl(Vec2::new(ux, uy)), theta, &p).unwrap();
            prop_assert!(!a.saturated);
            let back = input_matrix(theta, l0) * Vec2::new(a.command.nu, a.command.omega);
            prop_assert!((back - Vec2::new(ux, uy)).amax() < 1e-12);
        }

        #[test]
        fn arc_matches_closed_form(nu in -2.0f64..2.0, omega in -1.5f64..1.5, dt in 0.01f64..1.0, th in -3.0f64..3.0) {
            let s0 = VesselState::new(0.3, -0.2, th);
            let s1 = step(&s0, &ActuatorCommand { nu, omega }, dt);
            let exact = if omega.abs() < 1e-12 {
                s0.position + Vec2::new(th.cos(), th.sin()) * nu * dt
            } else {
                let r = nu / omega;
                s0.position + Vec2::new((th + omega * dt).sin() - th.sin(), th.cos() - (th + omega * dt).cos()) * r
            };
            prop_assert!((s1.position - exact).norm() < 1e-9);
            if omega == 0.0 {
                prop_assert_eq!(s1.heading, s0.heading);
                prop_assert!(((s1.position - s0.position).norm() - nu.abs() * dt).abs() < 1e-9);
            }
        }

        #[test]
        fn head_point_velocity_matches_input_map(nu in -2.0f64..2.0, omega in -1.5f64..1.5, th in -3.0f64..3.0, l0 in 0.2f64..3.0) {
            let dt = 1e-3;
            let s0 = VesselState::new(0.0, 0.0, th);
            let cmd = ActuatorCommand { nu, omega };
            let s1 = step(&s0, &cmd, dt);
            let zdot = (head_point(&s1, l0) - head_point(&s0, l0)) / dt;
            // forward difference is first order; compare with C at the midpoint heading
            let mid = th + 0.5 * omega * dt;
            let expected = input_matrix(mid, l0) * Vec2::new(nu, omega);
            prop_assert!((zdot - expected).norm() < 1e-5);
        }
    }
}
