use super::{FieldError, FieldSample, FlowField};
use crate::Vec2;

/// Gaussian bump of fixed shape carried by the current with no diffusion.
///
/// Solves the pure advection equation (`k = 0`) exactly:
/// `c(x, t) = peak * exp(-|x - x_c(t)|^2 / (2 sigma^2))` where `x_c(t)` is
/// `center` transported from `t = 0`.
#[derive(Debug, Clone)]
pub struct TranslatingGaussian {
    pub center: Vec2,
    pub peak: f64,
    pub sigma: f64,
    pub flow: FlowField,
}

impl TranslatingGaussian {
    pub fn new(center: Vec2, peak: f64, sigma: f64, flow: FlowField) -> Result<Self, FieldError> {
        if !(peak > 0.0) || !(sigma > 0.0) || !peak.is_finite() || !sigma.is_finite() {
            return Err(FieldError::Parameter(format!(
                "translating gaussian needs peak > 0 and sigma > 0, got {peak}, {sigma}"
            )));
        }
        Ok(Self {
            center,
            peak,
            sigma,
            flow,
        })
    }

    pub fn center_at(&self, t: f64) -> Vec2 {
        self.center + self.flow.displacement(0.0, t)
    }

    pub fn eval(&self, x: Vec2, t: f64) -> FieldSample {
        let d = x - self.center_at(t);
        let s2 = self.sigma * self.sigma;
        let r2 = d.norm_squared();
        let c = self.peak * (-r2 / (2.0 * s2)).exp();
        FieldSample {
            c,
            grad: -d * (c / s2),
            lap: c * (r2 / (s2 * s2) - 2.0 / s2),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            peak: self.peak * s,
            ..self.clone()
        }
    }
}
