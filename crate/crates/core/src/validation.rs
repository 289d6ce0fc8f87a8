//! Fast invariant suite.
//!
//! Every check is seeded and self-contained, so the suite gives the same
//! verdicts on every machine. Together the checks run in a few seconds.

use crate::field::{Boundary, FlowField, GaussianPuff, GridField};
use crate::sensing::{self, SensingError, SensorRig, SensorSample, SENSOR_COUNT};
use crate::vessel::{self, ActuatorCommand, VesselState};
use crate::Vec2;
use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    /// Check the misprinted input-matrix inverse instead of the exact one.
    pub use_printed_inverse: bool,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub type Check = fn(&Options) -> (bool, String);

/// The full suite in reporting order.
pub const CHECKS: &[(&str, Check)] = &[
    ("puff-pde-residual", puff_pde_residual),
    ("puff-derivatives", puff_derivatives),
    ("grid-vs-puff", grid_vs_puff),
    ("grid-mass-conservation", grid_mass_conservation),
    ("estimator-affine", estimator_affine),
    ("estimator-quadratic-cross", estimator_quadratic_cross),
    ("estimator-mean-identity", estimator_mean_identity),
    ("estimator-trace-blindness", estimator_trace_blindness),
    ("estimator-degenerate-stencil", estimator_degenerate_stencil),
    ("transform-inverse", transform_inverse),
    ("rk4-circle-closure", rk4_circle_closure),
];

pub fn run_check(name: &'static str, check: Check, opts: &Options) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = check(opts);
    CheckResult {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all(opts: &Options) -> Vec<CheckResult> {
    CHECKS.iter().map(|&(name, check)| run_check(name, check, opts)).collect()
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn random_puff(r: &mut ChaCha8Rng) -> (GaussianPuff, FlowField) {
    let k = r.random_range(0.5..2.0);
    let q = r.random_range(1.0..1e3);
    let p = Vec2::new(r.random_range(-5.0..5.0), r.random_range(-5.0..5.0));
    let v = Vec2::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
    (GaussianPuff::new(0.0, p, q, k).expect("valid puff"), FlowField::uniform(v))
}

/// A probe point and time within about two widths of the puff centre.
fn probe(r: &mut ChaCha8Rng, puff: &GaussianPuff, flow: &FlowField) -> (Vec2, f64) {
    let tau = r.random_range(0.1..10.0);
    let width = (2.0 * puff.k * tau).sqrt();
    let centre = puff.center(flow, tau).expect("after release");
    let off = Vec2::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)) * width;
    (centre + off, tau)
}

/// `c_t + v . grad c - k lap c` by central differences with step 1e-3,
/// divided by the instantaneous peak; worst case over 1000 probes.
pub fn puff_pde_residual(_: &Options) -> (bool, String) {
    let mut r = rng(1);
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (puff, flow) = random_puff(&mut r);
        let (x, t) = probe(&mut r, &puff, &flow);
        let c = |x: Vec2, t: f64| puff.concentration(&flow, x, t).expect("after release");
        let ex = Vec2::new(h, 0.0);
        let ey = Vec2::new(0.0, h);
        let ct = (c(x, t + h) - c(x, t - h)) / (2.0 * h);
        let gx = (c(x + ex, t) - c(x - ex, t)) / (2.0 * h);
        let gy = (c(x + ey, t) - c(x - ey, t)) / (2.0 * h);
        let lap = (c(x + ex, t) + c(x - ex, t) + c(x + ey, t) + c(x - ey, t) - 4.0 * c(x, t)) / (h * h);
        let v = flow.at(x, t);
        let res = (ct + v.x * gx + v.y * gy - puff.k * lap) / puff.peak(t);
        worst = worst.max(res.abs());
    }
    (worst <= 1e-4, format!("max normalized residual {worst:.3e} (limit 1e-4)"))
}

/// Analytic gradient and laplacian against central differences, relative
/// to the puff's own gradient and curvature scales.
pub fn puff_derivatives(_: &Options) -> (bool, String) {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (puff, flow) = random_puff(&mut r);
        let (x, t) = probe(&mut r, &puff, &flow);
        let kt = puff.k * t;
        let c = |x: Vec2| puff.concentration(&flow, x, t).expect("after release");
        let s = puff.eval(&flow, x, t).expect("after release");
        let peak = puff.peak(t);

        let h = 1e-4 * kt.sqrt();
        let ex = Vec2::new(h, 0.0);
        let ey = Vec2::new(0.0, h);
        let fd_grad = Vec2::new(c(x + ex) - c(x - ex), c(x + ey) - c(x - ey)) / (2.0 * h);
        let grad_err = (fd_grad - s.grad).norm() / (peak / kt.sqrt());

        let h = 3e-4 * kt.sqrt();
        let ex = Vec2::new(h, 0.0);
        let ey = Vec2::new(0.0, h);
        let fd_lap = (c(x + ex) + c(x - ex) + c(x + ey) + c(x - ey) - 4.0 * c(x)) / (h * h);
        let lap_err = (fd_lap - s.lap).abs() / (peak / kt);
        worst = worst.max(grad_err).max(lap_err);
    }
    (worst <= 1e-6, format!("max relative derivative error {worst:.3e} (limit 1e-6)"))
}

/// A 200x200 grid seeded from a puff at age 1 and advanced 0.5 under
/// uniform flow, compared with the analytic puff at age 1.5.
pub fn grid_vs_puff(_: &Options) -> (bool, String) {
    let k = 1.0;
    let flow = FlowField::uniform(Vec2::new(0.5, 0.3));
    let puff = GaussianPuff::new(-1.0, Vec2::new(4.5, 4.8), 100.0, k).expect("valid puff");
    let h = 0.06;
    let n = 200;
    let grid = GridField::from_fn(Vec2::zeros(), h, n, n, k, flow.clone(), Boundary::Outflow, 0.0, |x| {
        puff.concentration(&flow, x, 0.0).expect("after release")
    });
    let mut grid = match grid {
        Ok(g) => g,
        Err(e) => return (false, e.to_string()),
    };
    let span = 4.0 * (2.0 * k).sqrt() / h;
    if let Err(e) = grid.advance_to(0.5, f64::INFINITY) {
        return (false, e.to_string());
    }
    let peak = puff.peak(1.5);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let exact = puff.concentration(&flow, grid.cell_center(i, j), 0.5).expect("after release");
            worst = worst.max((grid.cell(i, j) - exact).abs());
        }
    }
    let rel = worst / peak;
    (
        rel <= 0.02 && span >= 30.0,
        format!("max error {:.3}% of peak over a puff spanning {span:.0} cells (limit 2%)", 100.0 * rel),
    )
}

/// Periodic grid under advection and diffusion keeps its mass.
pub fn grid_mass_conservation(_: &Options) -> (bool, String) {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for v in [Vec2::zeros(), Vec2::new(0.7, -0.4)] {
        let flow = FlowField::uniform(v);
        let grid = GridField::from_fn(Vec2::zeros(), 0.1, 64, 48, 0.3, flow, Boundary::Periodic, 0.0, |_| {
            r.random_range(0.0..10.0)
        });
        let mut grid = match grid {
            Ok(g) => g,
            Err(e) => return (false, e.to_string()),
        };
        let dt = grid.stable_dt();
        for _ in 0..200 {
            let before = grid.mass();
            if let Err(e) = grid.step(dt) {
                return (false, e.to_string());
            }
            worst = worst.max(((grid.mass() - before) / before).abs());
        }
    }
    (worst <= 1e-10, format!("max relative mass change per step {worst:.3e} (limit 1e-10)"))
}

fn sample_at(positions: [Vec2; SENSOR_COUNT], f: impl Fn(Vec2) -> f64) -> SensorSample {
    SensorSample {
        positions,
        readings: positions.map(f),
        time: 0.0,
    }
}

fn random_pose(r: &mut ChaCha8Rng) -> VesselState {
    VesselState::new(r.random_range(-20.0..20.0), r.random_range(-20.0..20.0), r.random_range(-PI..PI))
}

/// Rig `[u, -u, w, -w]` with random arm lengths and a crossing angle away
/// from collinear.
fn random_symmetric_rig(r: &mut ChaCha8Rng, equal_arms: bool) -> SensorRig {
    let a = r.random_range(0.2..1.5);
    let b = if equal_arms { a } else { r.random_range(0.2..1.5) };
    let phi = r.random_range(0.0..PI);
    let beta = r.random_range(0.3..PI - 0.3);
    let u = Vec2::new(phi.cos(), phi.sin()) * a;
    let w = Vec2::new((phi + beta).cos(), (phi + beta).sin()) * b;
    SensorRig::new([u, -u, w, -w]).expect("non-degenerate rig")
}

/// Affine fields on point-symmetric rigs give the exact gradient.
pub fn estimator_affine(_: &Options) -> (bool, String) {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let rig = if i % 4 == 0 {
            SensorRig::cross(0.75).expect("cross")
        } else {
            random_symmetric_rig(&mut r, false)
        };
        let g = Vec2::new(r.random_range(-10.0..10.0), r.random_range(-10.0..10.0));
        let a = r.random_range(-100.0..100.0);
        let pos = sensing::world_positions(&rig, &random_pose(&mut r));
        match sensing::estimate(&sample_at(pos, |p| a + g.dot(&p))) {
            Ok(e) => worst = worst.max((e.grad - g).norm() / g.norm().max(1.0)),
            Err(e) => return (false, e.to_string()),
        }
    }
    (worst <= 1e-9, format!("max relative gradient error {worst:.3e} (limit 1e-9)"))
}

/// Quadratic fields on the cross give the exact gradient at its centre.
pub fn estimator_quadratic_cross(_: &Options) -> (bool, String) {
    let mut r = rng(6);
    let rig = SensorRig::cross(0.75).expect("cross");
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q: [f64; 6] = std::array::from_fn(|_| r.random_range(-5.0..5.0));
        let f = |p: Vec2| q[0] + q[1] * p.x + q[2] * p.y + q[3] * p.x * p.x + q[4] * p.x * p.y + q[5] * p.y * p.y;
        let state = random_pose(&mut r);
        let x = state.position;
        let grad = Vec2::new(q[1] + 2.0 * q[3] * x.x + q[4] * x.y, q[2] + q[4] * x.x + 2.0 * q[5] * x.y);
        match sensing::estimate(&sample_at(sensing::world_positions(&rig, &state), f)) {
            Ok(e) => worst = worst.max((e.grad - grad).norm() / grad.norm().max(1.0)),
            Err(e) => return (false, e.to_string()),
        }
    }
    (worst <= 1e-9, format!("max relative gradient error {worst:.3e} (limit 1e-9)"))
}

/// The concentration estimate is the reading mean and the referenced
/// readings sum to zero.
pub fn estimator_mean_identity(_: &Options) -> (bool, String) {
    let mut r = rng(7);
    let rig = SensorRig::cross(0.75).expect("cross");
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let readings: [f64; SENSOR_COUNT] = std::array::from_fn(|_| r.random_range(0.0..1e3));
        let (mean, y) = sensing::residuals(&readings);
        let s = SensorSample {
            positions: sensing::world_positions(&rig, &random_pose(&mut r)),
            readings,
            time: 0.0,
        };
        let e = match sensing::estimate(&s) {
            Ok(e) => e,
            Err(e) => return (false, e.to_string()),
        };
        let plain = readings.iter().sum::<f64>() / 4.0;
        let scale = readings.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        worst = worst
            .max((e.c - plain).abs() / scale)
            .max((mean - plain).abs() / scale)
            .max(y.iter().sum::<f64>().abs() / scale);
    }
    (worst <= 1e-12, format!("max relative deviation {worst:.3e} (limit 1e-12)"))
}

/// Equal-arm point-symmetric rigs report a zero laplacian for any readings,
/// while an asymmetric rig does not.
pub fn estimator_trace_blindness(_: &Options) -> (bool, String) {
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let rig = if i % 2 == 0 {
            SensorRig::cross(r.random_range(0.2..1.5)).expect("cross")
        } else {
            random_symmetric_rig(&mut r, true)
        };
        let readings: [f64; SENSOR_COUNT] = std::array::from_fn(|_| r.random_range(0.0..1e3));
        let s = SensorSample {
            positions: sensing::world_positions(&rig, &random_pose(&mut r)),
            readings,
            time: 0.0,
        };
        match sensing::estimate(&s) {
            // the laplacian scales like readings / arm^2
            Ok(e) => worst = worst.max(e.lap.abs() / 1e3),
            Err(e) => return (false, e.to_string()),
        }
    }
    let kite = sensing::world_positions(&SensorRig::kite(), &VesselState::new(0.0, 0.0, 0.0));
    let kite_lap = sensing::estimate(&sample_at(kite, |p| p.norm_squared())).map(|e| e.lap).unwrap_or(0.0);
    (
        worst <= 1e-9 && kite_lap.abs() > 1e-3,
        format!("max |laplacian| {worst:.3e} on symmetric rigs (limit 1e-9); kite reports {kite_lap:.3}"),
    )
}

/// Collinear sensors are rejected rather than solved.
pub fn estimator_degenerate_stencil(_: &Options) -> (bool, String) {
    let line = [Vec2::new(-1.5, 0.0), Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0), Vec2::new(1.5, 0.0)];
    let rig_rejected = SensorRig::new(line).is_err();
    let sample = sample_at(line.map(|p| p + Vec2::new(3.0, 2.0)), |p| p.x * p.x);
    match sensing::estimate(&sample) {
        Err(SensingError::DegenerateStencil { condition }) => (
            rig_rejected,
            format!("collinear stencil rejected, cond(B B^T) = {condition:.3e}"),
        ),
        Err(e) => (false, format!("unexpected error {e}")),
        Ok(e) => (false, format!("collinear stencil accepted with cond {:.3e}", e.condition)),
    }
}

/// `C(theta) C^-1(theta) = I` to 1e-12 over random headings and offsets.
pub fn transform_inverse(opts: &Options) -> (bool, String) {
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let th = r.random_range(-PI..PI);
        let l0 = r.random_range(0.1..5.0);
        let inv = if opts.use_printed_inverse {
            vessel::misprinted_inverse(th, l0)
        } else {
            vessel::inverse_input_matrix(th, l0)
        };
        let err = vessel::input_matrix(th, l0) * inv - Matrix2::identity();
        // infinity norm: largest absolute row sum
        let norm = err.row_iter().map(|row| row.abs().sum()).fold(0.0f64, f64::max);
        worst = worst.max(norm);
    }
    let which = if opts.use_printed_inverse { "printed" } else { "exact" };
    (worst < 1e-12, format!("max ||C C^-1 - I||_inf {worst:.3e} with the {which} inverse (limit 1e-12)"))
}

/// A full circle at unit speed and turn rate returns to its start.
pub fn rk4_circle_closure(_: &Options) -> (bool, String) {
    let start = VesselState::new(0.0, 0.0, 0.0);
    let end = vessel::step(&start, &ActuatorCommand { nu: 1.0, omega: 1.0 }, 2.0 * PI);
    let gap = (end.position - start.position).norm();
    (gap < 1e-6, format!("closure gap {gap:.3e} m (limit 1e-6)"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_all(&Options::default()) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn printed_inverse_fails_transform_check() {
        let (ok, detail) = transform_inverse(&Options { use_printed_inverse: true });
        assert!(!ok, "{detail}");
    }
}
