//! Level-curve observer and tracking controller.
//!
//! The observer keeps an estimate `x_hat` of a point on the level curve
//! `c = c0` and integrates
//!
//! ```text
//! x_hat' = n(grad, lap, v) + v_d A grad / |A grad|
//!          - k1 grad (grad . (x_hat - x_r) + c_r - c0)
//! ```
//!
//! where every field quantity is the estimate at the vessel. `n` is the
//! normal velocity of the level set (see [`SignConvention`]) and
//! `A = [[0, -1], [1, 0]]` turns the gradient by +90 degrees. The control
//! adds `-k2 (p - x_hat)` for the tracked point `p`.
//!
//! With `A` as above and the gradient pointing toward the concentration
//! maximum, the patrol goes clockwise around the maximum.

use crate::vessel::PlanarControl;
use crate::Vec2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuidanceError {
    #[error("gradient norm {norm} is below the floor {floor}")]
    DegenerateGradient { norm: f64, floor: f64 },
    #[error("non-finite guidance input: {0}")]
    NonFinite(&'static str),
    #[error("invalid gain: {0}")]
    Gain(String),
}

/// Which normal-velocity expression the feedforward term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// `-(v . grad + k lap) grad / |grad|^2`, as the control law is usually
    /// printed.
    PaperLiteral,
    /// `+(v . grad - k lap) grad / |grad|^2`, from differentiating
    /// `c(x(t), t) = c0` along the advection-diffusion equation.
    #[default]
    PdeDerived,
}

/// How the observer is advanced over one control period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObserverStep {
    /// `x_hat += dt * rate`. Unstable once `k1 |grad|^2 dt > 2`.
    Euler,
    /// Exact solution over the period with the measurement held. The
    /// `k1` term is linear in `x_hat` with rank-one matrix `k1 grad grad^T`,
    /// so the component along the gradient relaxes exponentially and the
    /// tangential component moves at constant speed.
    #[default]
    ExactHold,
}

/// Point driven onto the estimate by the `k2` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrackedPoint {
    /// The offset point, which is what the planar input actually steers.
    #[default]
    Head,
    /// The hull centre.
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Seeking,
    Tracking,
    DegenerateGradient,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Seeking => "seeking",
            Status::Tracking => "tracking",
            Status::DegenerateGradient => "degenerate-gradient",
        }
    }
}

impl std::str::FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "seeking" => Ok(Status::Seeking),
            "tracking" => Ok(Status::Tracking),
            "degenerate-gradient" => Ok(Status::DegenerateGradient),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceGains {
    /// Tracked level, ppb.
    pub c0: f64,
    /// Controller's diffusion constant, m^2/s.
    pub k: f64,
    /// Measurement feedback gain.
    pub k1: f64,
    /// Tracking gain, 1/s.
    pub k2: f64,
    /// Patrol speed, m/s.
    pub v_d: f64,
    /// Gradient norm below which the estimate is treated as unusable, ppb/m.
    pub grad_floor: f64,
}

impl GuidanceGains {
    pub const DEFAULT_GRAD_FLOOR: f64 = 0.05;

    pub fn validate(&self) -> Result<(), GuidanceError> {
        let checks = [
            ("c0", self.c0 > 0.0),
            ("k", self.k >= 0.0),
            ("k1", self.k1 > 0.0),
            ("k2", self.k2 > 0.0),
            ("v_d", self.v_d >= 0.0),
            ("grad_floor", self.grad_floor > 0.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(GuidanceError::Gain(format!("{name} out of range")));
            }
        }
        let all = [self.c0, self.k, self.k1, self.k2, self.v_d, self.grad_floor];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GuidanceError::Gain("gains must be finite".into()));
        }
        Ok(())
    }
}

/// Field estimate at the vessel plus the measured current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// Stencil centre, m.
    pub x_r: Vec2,
    pub c: f64,
    pub grad: Vec2,
    pub lap: f64,
    /// Current at the vessel, m/s.
    pub flow: Vec2,
}

impl Measurement {
    fn check(&self) -> Result<(), GuidanceError> {
        let finite = [self.x_r.x, self.x_r.y, self.c, self.grad.x, self.grad.y, self.lap, self.flow.x, self.flow.y]
            .iter()
            .all(|v| v.is_finite());
        if finite {
            Ok(())
        } else {
            Err(GuidanceError::NonFinite("measurement"))
        }
    }
}

/// Rotation by +90 degrees.
pub fn rotate_ccw(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Normal velocity of the level set through the vessel.
pub fn normal_feedforward(
    grad: Vec2,
    lap: f64,
    v: Vec2,
    k: f64,
    mode: SignConvention,
    floor: f64,
) -> Result<Vec2, GuidanceError> {
    let n2 = grad.norm_squared();
    if !(n2.sqrt() >= floor) {
        return Err(GuidanceError::DegenerateGradient { norm: n2.sqrt(), floor });
    }
    let rate = match mode {
        SignConvention::PaperLiteral => -(v.dot(&grad) + k * lap),
        SignConvention::PdeDerived => v.dot(&grad) - k * lap,
    };
    Ok(grad * (rate / n2))
}

/// Patrol term `v_d A grad / |A grad|`.
pub fn tangential(grad: Vec2, v_d: f64) -> Vec2 {
    let t = rotate_ccw(grad);
    t * (v_d / t.norm())
}

/// Right-hand side shared by the observer and the controller, or `None`
/// when the gradient is below the floor.
fn observer_rate(
    x_hat: Vec2,
    gains: &GuidanceGains,
    mode: SignConvention,
    m: &Measurement,
) -> Option<Vec2> {
    let ff = normal_feedforward(m.grad, m.lap, m.flow, gains.k, mode, gains.grad_floor).ok()?;
    let residual = m.grad.dot(&(x_hat - m.x_r)) + m.c - gains.c0;
    Some(ff + tangential(m.grad, gains.v_d) - m.grad * (gains.k1 * residual))
}

/// Observer displacement over `dt` with the measurement held, for a
/// gradient above the floor.
fn exact_hold_increment(x_hat: Vec2, gains: &GuidanceGains, mode: SignConvention, m: &Measurement, dt: f64) -> Vec2 {
    let g = m.grad.norm();
    let n = m.grad / g;
    let ff = normal_feedforward(m.grad, m.lap, m.flow, gains.k, mode, gains.grad_floor).unwrap_or_else(|_| Vec2::zeros());
    // signed distance to the estimated level line, along n
    let s0 = n.dot(&(x_hat - m.x_r)) + (m.c - gains.c0) / g;
    let a = gains.k1 * g * g;
    let drive = n.dot(&ff);
    // (1 - exp(-a dt)) / a, continuous at a = 0
    let phi = if a > 0.0 { -(-a * dt).exp_m1() / a } else { dt };
    let ds = (drive - a * s0) * phi;
    tangential(m.grad, gains.v_d) * dt + n * ds
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceState {
    pub x_hat: Vec2,
    pub last_u: Vec2,
    pub status: Status,
    /// Time the tracking condition has held continuously, s.
    pub in_band: f64,
}

/// Time the tracking condition must hold before reporting `Tracking`.
pub const TRACKING_HOLD: f64 = 2.0;
/// Relative concentration band of the tracking condition.
pub const TRACKING_BAND: f64 = 0.1;
/// Distance between tracked point and estimate for the tracking condition, m.
pub const TRACKING_RADIUS: f64 = 1.0;

impl GuidanceState {
    pub fn init(x_r: Vec2) -> Self {
        Self {
            x_hat: x_r,
            last_u: Vec2::zeros(),
            status: Status::Seeking,
            in_band: 0.0,
        }
    }

    /// Advances the observer by `dt`. Holds `x_hat` and flags
    /// [`Status::DegenerateGradient`] when the gradient is below the floor.
    pub fn observer_update(
        &self,
        gains: &GuidanceGains,
        mode: SignConvention,
        step: ObserverStep,
        m: &Measurement,
        dt: f64,
    ) -> Result<GuidanceState, GuidanceError> {
        m.check()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(GuidanceError::NonFinite("dt"));
        }
        let mut next = *self;
        match observer_rate(self.x_hat, gains, mode, m) {
            Some(rate) => {
                next.x_hat += match step {
                    ObserverStep::Euler => rate * dt,
                    ObserverStep::ExactHold => exact_hold_increment(self.x_hat, gains, mode, m, dt),
                };
                if next.status == Status::DegenerateGradient {
                    next.status = Status::Seeking;
                }
            }
            None => {
                next.status = Status::DegenerateGradient;
                next.in_band = 0.0;
            }
        }
        Ok(next)
    }

    /// Planar control for the tracked point `p`.
    pub fn control(
        &self,
        gains: &GuidanceGains,
        mode: SignConvention,
        m: &Measurement,
        p: Vec2,
    ) -> Result<PlanarControl, GuidanceError> {
        m.check()?;
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(GuidanceError::NonFinite("tracked point"));
        }
        let track = -(p - self.x_hat) * gains.k2;
        let u = match observer_rate(self.x_hat, gains, mode, m) {
            Some(rate) => rate + track,
            None => track,
        };
        Ok(PlanarControl(u))
    }

    /// Diagnostic status bookkeeping; has no effect on the control.
    pub fn update_status(&mut self, c_hat: f64, c0: f64, p: Vec2, dt: f64) {
        if self.status == Status::DegenerateGradient {
            return;
        }
        let in_band = (c_hat - c0).abs() < TRACKING_BAND * c0 && (p - self.x_hat).norm() < TRACKING_RADIUS;
        if in_band {
            self.in_band += dt;
        } else {
            self.in_band = 0.0;
        }
        self.status = if self.in_band >= TRACKING_HOLD - 1e-9 {
            Status::Tracking
        } else {
            Status::Seeking
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gains(c0: f64, k: f64, k1: f64, k2: f64, v_d: f64) -> GuidanceGains {
        GuidanceGains {
            c0,
            k,
            k1,
            k2,
            v_d,
            grad_floor: GuidanceGains::DEFAULT_GRAD_FLOOR,
        }
    }

    fn meas(x_r: Vec2, c: f64, grad: Vec2, lap: f64, flow: Vec2) -> Measurement {
        Measurement { x_r, c, grad, lap, flow }
    }

    #[test]
    fn feedforward_examples() {
        for mode in [SignConvention::PaperLiteral, SignConvention::PdeDerived] {
            let n = normal_feedforward(Vec2::new(1.0, 2.0), 0.0, Vec2::zeros(), 1.2, mode, 0.05).unwrap();
            assert_eq!(n, Vec2::zeros());
        }
        let g = Vec2::new(2.0, 0.0);
        let v = Vec2::new(1.0, 0.0);
        let pde = normal_feedforward(g, 0.0, v, 0.0, SignConvention::PdeDerived, 0.05).unwrap();
        assert_eq!(pde, Vec2::new(1.0, 0.0));
        let lit = normal_feedforward(g, 0.0, v, 0.0, SignConvention::PaperLiteral, 0.05).unwrap();
        assert_eq!(lit, Vec2::new(-1.0, 0.0));
        assert!(normal_feedforward(Vec2::new(0.01, 0.0), 0.0, v, 0.0, SignConvention::PdeDerived, 0.05).is_err());
    }

    #[test]
    fn observer_tangential_step() {
        let g = gains(50.0, 0.0, 5.0, 11.0, 1.5);
        let s = GuidanceState::init(Vec2::zeros());
        let m = meas(Vec2::zeros(), 50.0, Vec2::new(1.0, 0.0), 0.0, Vec2::zeros());
        let n = s.observer_update(&g, SignConvention::PdeDerived, ObserverStep::Euler, &m, 0.1).unwrap();
        assert!((n.x_hat - Vec2::new(0.0, 0.15)).norm() < 1e-15);
    }

    #[test]
    fn observer_residual_step() {
        let g = gains(50.0, 0.0, 5.0, 11.0, 0.0);
        let s = GuidanceState::init(Vec2::zeros());
        let m = meas(Vec2::zeros(), 51.0, Vec2::new(1.0, 0.0), 0.0, Vec2::zeros());
        let n = s.observer_update(&g, SignConvention::PdeDerived, ObserverStep::Euler, &m, 0.1).unwrap();
        assert!((n.x_hat - Vec2::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn observer_holds_on_flat_gradient() {
        let g = gains(50.0, 1.2, 5.0, 11.0, 1.5);
        let s = GuidanceState::init(Vec2::new(3.0, -2.0));
        let m = meas(Vec2::new(3.0, -2.0), 10.0, Vec2::zeros(), 0.0, Vec2::new(0.1, 0.0));
        let n = s.observer_update(&g, SignConvention::PdeDerived, ObserverStep::Euler, &m, 0.05).unwrap();
        assert_eq!(n.x_hat, s.x_hat);
        assert_eq!(n.status, Status::DegenerateGradient);
        let u = n.control(&g, SignConvention::PdeDerived, &m, Vec2::new(4.0, -2.0)).unwrap();
        assert_eq!(u.0, Vec2::new(-11.0, 0.0));
        // recovers once the gradient is usable again
        let m = meas(Vec2::new(3.0, -2.0), 10.0, Vec2::new(1.0, 0.0), 0.0, Vec2::zeros());
        let n = n.observer_update(&g, SignConvention::PdeDerived, ObserverStep::Euler, &m, 0.05).unwrap();
        assert_eq!(n.status, Status::Seeking);
    }

    #[test]
    fn exact_hold_matches_fine_euler() {
        let g = gains(50.0, 1.2, 5.0, 11.0, 1.5);
        let s = GuidanceState::init(Vec2::new(1.0, 2.0));
        let m = meas(Vec2::new(0.5, 1.5), 46.0, Vec2::new(1.2, -0.7), 0.3, Vec2::new(0.1, 0.05));
        let exact = s.observer_update(&g, SignConvention::PdeDerived, ObserverStep::ExactHold, &m, 0.05).unwrap();
        let mut fine = s;
        for _ in 0..100_000 {
            fine = fine.observer_update(&g, SignConvention::PdeDerived, ObserverStep::Euler, &m, 0.05 / 100_000.0).unwrap();
        }
        assert!((exact.x_hat - fine.x_hat).norm() < 1e-5, "{} vs {}", exact.x_hat, fine.x_hat);
    }

    #[test]
    fn exact_hold_without_feedback_is_euler() {
        let g = gains(50.0, 1.2, 0.0, 11.0, 1.5);
        let s = GuidanceState::init(Vec2::zeros());
        let m = meas(Vec2::zeros(), 40.0, Vec2::new(0.0, 2.0), 0.0, Vec2::new(0.3, 0.2));
        let a = s.observer_update(&g, SignConvention::PdeDerived, ObserverStep::ExactHold, &m, 0.05).unwrap();
        let b = s.observer_update(&g, SignConvention::PdeDerived, ObserverStep::Euler, &m, 0.05).unwrap();
        assert!((a.x_hat - b.x_hat).norm() < 1e-15);
    }

    #[test]
    fn exact_hold_is_stable_where_euler_is_not() {
        // k1 |grad|^2 dt = 5 * 16 * 0.05 = 4 > 2
        let g = gains(50.0, 0.0, 5.0, 11.0, 0.0);
        let m = meas(Vec2::zeros(), 50.0, Vec2::new(4.0, 0.0), 0.0, Vec2::zeros());
        let mut euler = GuidanceState::init(Vec2::new(1.0, 0.0));
        let mut exact = euler;
        for _ in 0..20 {
            euler = euler.observer_update(&g, SignConvention::PdeDerived, ObserverStep::Euler, &m, 0.05).unwrap();
            exact = exact.observer_update(&g, SignConvention::PdeDerived, ObserverStep::ExactHold, &m, 0.05).unwrap();
        }
        assert!(euler.x_hat.norm() > 1e5);
        assert!(exact.x_hat.norm() < 1e-6);
    }

    #[test]
    fn control_examples() {
        let g = gains(50.0, 0.0, 5.0, 11.0, 1.5);
        let s = GuidanceState::init(Vec2::zeros());
        let m = meas(Vec2::zeros(), 50.0, Vec2::new(1.0, 0.0), 0.0, Vec2::zeros());
        let u = s.control(&g, SignConvention::PdeDerived, &m, Vec2::zeros()).unwrap();
        assert!((u.0 - Vec2::new(0.0, 1.5)).norm() < 1e-15);

        let g = gains(50.0, 0.0, 5.0, 11.0, 0.0);
        let u = s.control(&g, SignConvention::PdeDerived, &m, Vec2::new(1.0, 0.0)).unwrap();
        assert!((u.0 - Vec2::new(-11.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fixed_point() {
        let g = gains(50.0, 0.0, 5.0, 11.0, 0.0);
        let s = GuidanceState::init(Vec2::new(1.0, 1.0));
        let m = meas(Vec2::new(1.0, 1.0), 50.0, Vec2::new(0.3, -2.0), 0.7, Vec2::zeros());
        for mode in [SignConvention::PaperLiteral, SignConvention::PdeDerived] {
            let n = s.observer_update(&g, mode, ObserverStep::Euler, &m, 0.05).unwrap();
            assert_eq!(n.x_hat, s.x_hat);
            let z = Vec2::new(2.0, 0.5);
            let u = s.control(&g, mode, &m, z).unwrap();
            assert_eq!(u.0, -(z - s.x_hat) * 11.0);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let g = gains(50.0, 0.0, 5.0, 11.0, 1.5);
        let s = GuidanceState::init(Vec2::zeros());
        let m = meas(Vec2::zeros(), f64::NAN, Vec2::new(1.0, 0.0), 0.0, Vec2::zeros());
        assert!(s.observer_update(&g, SignConvention::PdeDerived, ObserverStep::Euler, &m, 0.05).is_err());
        assert!(s.control(&g, SignConvention::PdeDerived, &m, Vec2::zeros()).is_err());
    }

    #[test]
    fn init_examples() {
        assert_eq!(GuidanceState::init(Vec2::zeros()).x_hat, Vec2::zeros());
        let s = GuidanceState::init(Vec2::new(3.0, -2.0));
        assert_eq!(s.x_hat, Vec2::new(3.0, -2.0));
        assert_eq!(s.status, Status::Seeking);
    }

    #[test]
    fn status_needs_two_seconds_in_band() {
        let mut s = GuidanceState::init(Vec2::zeros());
        for _ in 0..39 {
            s.update_status(52.0, 50.0, Vec2::new(0.5, 0.0), 0.05);
            assert_eq!(s.status, Status::Seeking);
        }
        s.update_status(52.0, 50.0, Vec2::new(0.5, 0.0), 0.05);
        assert_eq!(s.status, Status::Tracking);
        s.update_status(58.0, 50.0, Vec2::new(0.5, 0.0), 0.05);
        assert_eq!(s.status, Status::Seeking);
    }

    #[test]
    fn gains_validation() {
        assert!(gains(50.0, 1.2, 5.0, 11.0, 1.5).validate().is_ok());
        assert!(gains(0.0, 1.2, 5.0, 11.0, 1.5).validate().is_err());
        assert!(gains(50.0, 1.2, 0.0, 11.0, 1.5).validate().is_err());
        assert!(gains(50.0, 1.2, 5.0, -1.0, 1.5).validate().is_err());
    }

    proptest! {
        #[test]
        fn patrol_term_is_tangent(gx in -50.0f64..50.0, gy in -50.0f64..50.0, v_d in 0.0f64..3.0) {
            let g = Vec2::new(gx, gy);
            prop_assume!(g.norm() >= 0.05);
            let t = tangential(g, v_d);
            prop_assert!(t.dot(&g).abs() <= 1e-12 * g.norm() * v_d.max(1.0));
            prop_assert!((t.norm() - v_d).abs() <= 1e-12);
            prop_assert!((rotate_ccw(g).norm() - g.norm()).abs() <= 1e-12 * g.norm());
        }
    }
}
