use super::{FieldError, FieldSample, FlowField};
use crate::Vec2;
use std::f64::consts::PI;

/// Puffs whose peak has decayed below this (ppb) are skipped during evaluation.
pub const PRUNE_PEAK: f64 = 1e-6;

/// Instantaneous point release diffusing in a uniform current.
///
/// For `tau = t - release_time > 0` and advected centre
/// `x_c = release_point + v * tau` the concentration is
/// `Q / (4 pi k tau) * exp(-|x - x_c|^2 / (4 k tau))`, the fundamental
/// solution of the 2-D advection-diffusion equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPuff {
    pub release_time: f64,
    pub release_point: Vec2,
    /// Released mass, ppb * m^2.
    pub strength: f64,
    /// Diffusion coefficient, m^2/s.
    pub k: f64,
}

impl GaussianPuff {
    pub fn new(release_time: f64, release_point: Vec2, strength: f64, k: f64) -> Result<Self, FieldError> {
        if !(strength > 0.0) || !strength.is_finite() {
            return Err(FieldError::Parameter(format!("puff strength must be > 0, got {strength}")));
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(FieldError::Parameter(format!("diffusion k must be > 0, got {k}")));
        }
        Ok(Self {
            release_time,
            release_point,
            strength,
            k,
        })
    }

    /// Age `tau` and advected centre, checking the closed form applies.
    fn kinematics(&self, flow: &FlowField, t: f64) -> Result<(f64, Vec2), FieldError> {
        let tau = t - self.release_time;
        if !(tau > 0.0) {
            return Err(FieldError::DegenerateTime {
                t,
                release: self.release_time,
            });
        }
        let v = flow
            .uniform_over(self.release_time, t)
            .ok_or(FieldError::NonUniformFlow {
                from: self.release_time,
                to: t,
            })?;
        Ok((tau, self.release_point + v * tau))
    }

    pub fn peak(&self, tau: f64) -> f64 {
        self.strength / (4.0 * PI * self.k * tau)
    }

    pub fn center(&self, flow: &FlowField, t: f64) -> Result<Vec2, FieldError> {
        self.kinematics(flow, t).map(|(_, c)| c)
    }

    pub fn concentration(&self, flow: &FlowField, x: Vec2, t: f64) -> Result<f64, FieldError> {
        let (tau, xc) = self.kinematics(flow, t)?;
        Ok(self.value_at(tau, (x - xc).norm_squared()))
    }

    fn value_at(&self, tau: f64, r2: f64) -> f64 {
        self.peak(tau) * (-r2 / (4.0 * self.k * tau)).exp()
    }

    pub fn gradient(&self, flow: &FlowField, x: Vec2, t: f64) -> Result<Vec2, FieldError> {
        self.eval(flow, x, t).map(|s| s.grad)
    }

    pub fn laplacian(&self, flow: &FlowField, x: Vec2, t: f64) -> Result<f64, FieldError> {
        self.eval(flow, x, t).map(|s| s.lap)
    }

    /// Value, gradient and laplacian in one pass.
    pub fn eval(&self, flow: &FlowField, x: Vec2, t: f64) -> Result<FieldSample, FieldError> {
        let (tau, xc) = self.kinematics(flow, t)?;
        Ok(self.eval_at(tau, x - xc))
    }

    fn eval_at(&self, tau: f64, d: Vec2) -> FieldSample {
        let kt = self.k * tau;
        let r2 = d.norm_squared();
        let c = self.value_at(tau, r2);
        FieldSample {
            c,
            grad: -d * (c / (2.0 * kt)),
            lap: c * (r2 / (4.0 * kt * kt) - 1.0 / kt),
        }
    }

    /// Radius of the circular level set `c = c0` at time `t`, or `None` when
    /// the peak is below `c0`.
    pub fn level_set_radius(&self, c0: f64, t: f64) -> Option<f64> {
        let tau = t - self.release_time;
        if !(tau > 0.0) {
            return None;
        }
        let peak = self.peak(tau);
        if peak < c0 {
            return None;
        }
        Some((4.0 * self.k * tau * (peak / c0).ln()).max(0.0).sqrt())
    }
}

/// Plume from a continuous point source plus any number of instantaneous
/// releases, all sharing one diffusion coefficient and current.
///
/// The continuous source emits `emission_rate` ppb*m^2/s; it is discretised
/// into puffs of strength `emission_rate * puff_interval` released at
/// `start_time + i * puff_interval`.
#[derive(Debug, Clone)]
pub struct PuffPlume {
    pub source_point: Vec2,
    pub emission_rate: f64,
    pub puff_interval: f64,
    pub flow: FlowField,
    pub k: f64,
    pub start_time: f64,
    pub releases: Vec<GaussianPuff>,
}

impl PuffPlume {
    pub fn new(
        source_point: Vec2,
        emission_rate: f64,
        puff_interval: f64,
        flow: FlowField,
        k: f64,
        start_time: f64,
    ) -> Result<Self, FieldError> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(FieldError::Parameter(format!("diffusion k must be > 0, got {k}")));
        }
        if !(emission_rate >= 0.0) || !emission_rate.is_finite() {
            return Err(FieldError::Parameter(format!(
                "emission rate must be >= 0, got {emission_rate}"
            )));
        }
        if !(puff_interval > 0.0) || !puff_interval.is_finite() {
            return Err(FieldError::Parameter(format!(
                "puff interval must be > 0, got {puff_interval}"
            )));
        }
        Ok(Self {
            source_point,
            emission_rate,
            puff_interval,
            flow,
            k,
            start_time,
            releases: Vec::new(),
        })
    }

    /// Adds an instantaneous release of `strength` at `point`, time `t0`.
    pub fn with_release(mut self, t0: f64, point: Vec2, strength: f64) -> Result<Self, FieldError> {
        self.releases.push(GaussianPuff::new(t0, point, strength, self.k)?);
        Ok(self)
    }

    /// All puffs released strictly before `t`, continuous-source puffs first.
    pub fn released_puffs(&self, t: f64) -> impl Iterator<Item = GaussianPuff> + '_ {
        let q = self.emission_rate * self.puff_interval;
        let emitting = q > 0.0;
        let continuous = (0u64..)
            .map(move |i| self.start_time + i as f64 * self.puff_interval)
            .take_while(move |&t0| emitting && t0 < t)
            .map(move |t0| GaussianPuff {
                release_time: t0,
                release_point: self.source_point,
                strength: q,
                k: self.k,
            });
        continuous.chain(self.releases.iter().copied().filter(move |p| p.release_time < t))
    }

    pub fn eval(&self, x: Vec2, t: f64) -> Result<FieldSample, FieldError> {
        if t < self.start_time {
            return Err(FieldError::BeforeStart {
                t,
                start: self.start_time,
            });
        }
        let mut total = FieldSample::zero();
        for puff in self.released_puffs(t) {
            let tau = t - puff.release_time;
            if puff.peak(tau) < PRUNE_PEAK {
                continue;
            }
            total += puff.eval(&self.flow, x, t)?;
        }
        Ok(total)
    }

    /// Mass-weighted mean of the advected puff centres.
    pub fn centroid(&self, t: f64) -> Option<Vec2> {
        let mut mass = 0.0;
        let mut moment = Vec2::zeros();
        for puff in self.released_puffs(t) {
            let c = puff.release_point + self.flow.displacement(puff.release_time, t);
            mass += puff.strength;
            moment += c * puff.strength;
        }
        (mass > 0.0).then(|| moment / mass)
    }

    pub fn scaled(&self, s: f64) -> PuffPlume {
        let mut out = self.clone();
        out.emission_rate *= s;
        for r in &mut out.releases {
            r.strength *= s;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_puff() -> GaussianPuff {
        GaussianPuff::new(0.0, Vec2::zeros(), 4.0 * PI, 1.0).unwrap()
    }

    fn still() -> FlowField {
        FlowField::uniform(Vec2::zeros())
    }

    #[test]
    fn peak_at_center() {
        let c = unit_puff().concentration(&still(), Vec2::zeros(), 1.0).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn value_at_distance_two() {
        let c = unit_puff().concentration(&still(), Vec2::new(2.0, 0.0), 1.0).unwrap();
        assert!((c - (-1.0f64).exp()).abs() < 1e-15);
        assert!((c - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn advected_center() {
        let flow = FlowField::uniform(Vec2::new(1.0, 0.0));
        let c = unit_puff().concentration(&flow, Vec2::new(1.0, 0.0), 1.0).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_vanishes_at_center() {
        let g = unit_puff().gradient(&still(), Vec2::zeros(), 1.0).unwrap();
        assert_eq!(g, Vec2::zeros());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let puff = unit_puff();
        let flow = still();
        let x = Vec2::new(2.0, 0.0);
        let g = puff.gradient(&flow, x, 1.0).unwrap();
        let h = 1e-5;
        let f = |p: Vec2| puff.concentration(&flow, p, 1.0).unwrap();
        let fd = Vec2::new(
            (f(x + Vec2::new(h, 0.0)) - f(x - Vec2::new(h, 0.0))) / (2.0 * h),
            (f(x + Vec2::new(0.0, h)) - f(x - Vec2::new(0.0, h))) / (2.0 * h),
        );
        assert!((g - fd).norm() < 1e-8, "{g} vs {fd}");
        assert!((g.x + (-1.0f64).exp()).abs() < 1e-15);
        assert!(g.y.abs() < 1e-15);
    }

    #[test]
    fn laplacian_at_center() {
        let puff = unit_puff();
        let flow = still();
        let lap = puff.laplacian(&flow, Vec2::zeros(), 1.0).unwrap();
        assert!((lap + 1.0).abs() < 1e-15);
        let h = 1e-3;
        let f = |p: Vec2| puff.concentration(&flow, p, 1.0).unwrap();
        let fd = (f(Vec2::new(h, 0.0)) + f(Vec2::new(-h, 0.0)) + f(Vec2::new(0.0, h))
            + f(Vec2::new(0.0, -h))
            - 4.0 * f(Vec2::zeros()))
            / (h * h);
        assert!((fd - lap).abs() < 1e-6, "{fd}");
    }

    #[test]
    fn rejects_degenerate_time() {
        let e = unit_puff().concentration(&still(), Vec2::zeros(), 0.0);
        assert!(matches!(e, Err(FieldError::DegenerateTime { .. })));
    }

    #[test]
    fn rejects_flow_change_over_lifetime() {
        let flow = FlowField::piecewise(vec![0.5], vec![Vec2::zeros(), Vec2::new(0.1, 0.0)]).unwrap();
        let e = unit_puff().concentration(&flow, Vec2::zeros(), 1.0);
        assert!(matches!(e, Err(FieldError::NonUniformFlow { .. })));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GaussianPuff::new(0.0, Vec2::zeros(), 0.0, 1.0).is_err());
        assert!(GaussianPuff::new(0.0, Vec2::zeros(), 1.0, -1.0).is_err());
    }

    #[test]
    fn empty_plume_at_start() {
        let plume = PuffPlume::new(Vec2::zeros(), 3.0, 0.5, still(), 1.0, 0.0).unwrap();
        assert_eq!(plume.eval(Vec2::new(0.3, 0.1), 0.0).unwrap(), FieldSample::zero());
        assert!(plume.eval(Vec2::zeros(), -1.0).is_err());
    }

    #[test]
    fn single_release_equals_puff() {
        let plume = PuffPlume::new(Vec2::zeros(), 0.0, 0.5, still(), 1.0, 0.0)
            .unwrap()
            .with_release(0.0, Vec2::zeros(), 4.0 * PI)
            .unwrap();
        let x = Vec2::new(0.7, -1.2);
        let s = plume.eval(x, 1.0).unwrap();
        let p = unit_puff();
        assert_eq!(s.c, p.concentration(&still(), x, 1.0).unwrap());
        assert_eq!(s.grad, p.gradient(&still(), x, 1.0).unwrap());
        assert_eq!(s.lap, p.laplacian(&still(), x, 1.0).unwrap());
    }

    #[test]
    fn colocated_puffs_double() {
        let one = PuffPlume::new(Vec2::zeros(), 0.0, 0.5, still(), 1.0, 0.0)
            .unwrap()
            .with_release(0.0, Vec2::zeros(), 4.0 * PI)
            .unwrap();
        let two = one.clone().with_release(0.0, Vec2::zeros(), 4.0 * PI).unwrap();
        let x = Vec2::new(0.4, 0.9);
        let a = one.eval(x, 1.3).unwrap();
        let b = two.eval(x, 1.3).unwrap();
        assert_eq!(b.c, 2.0 * a.c);
        assert_eq!(b.grad, 2.0 * a.grad);
        assert_eq!(b.lap, 2.0 * a.lap);
    }

    #[test]
    fn continuous_source_puff_count() {
        let plume = PuffPlume::new(Vec2::zeros(), 2.0, 0.5, still(), 1.0, 0.0).unwrap();
        assert_eq!(plume.released_puffs(0.0).count(), 0);
        assert_eq!(plume.released_puffs(0.5).count(), 1);
        assert_eq!(plume.released_puffs(2.25).count(), 5);
        assert!(plume.released_puffs(2.0).all(|p| p.strength == 1.0));
    }

    #[test]
    fn level_radius_inverts_profile() {
        // peak Q/(4 pi k tau) = 100, c0 = 50
        let puff = GaussianPuff::new(0.0, Vec2::zeros(), 400.0 * PI, 1.0).unwrap();
        let r = puff.level_set_radius(50.0, 1.0).unwrap();
        assert!((r - (4.0 * 2f64.ln()).sqrt()).abs() < 1e-12);
        assert!((r - 1.66511).abs() < 1e-5);
        let c = puff.concentration(&still(), Vec2::new(r, 0.0), 1.0).unwrap();
        assert!((c - 50.0).abs() < 1e-9);
        assert_eq!(puff.level_set_radius(100.0, 1.0), Some(0.0));
        let weak = GaussianPuff::new(0.0, Vec2::zeros(), 160.0 * PI, 1.0).unwrap();
        assert_eq!(weak.level_set_radius(50.0, 1.0), None);
    }
}
