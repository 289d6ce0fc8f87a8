use super::FieldError;
use crate::Vec2;

/// Spatially uniform current, either constant or piecewise-constant in time.
///
/// Piecewise segments are half-open: segment `i` covers
/// `[boundaries[i-1], boundaries[i])`, so a query exactly on a boundary gets
/// the later segment's velocity. The first segment extends to `-inf` and the
/// last to `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowField {
    Uniform(Vec2),
    Piecewise {
        boundaries: Vec<f64>,
        velocities: Vec<Vec2>,
    },
}

impl FlowField {
    pub fn uniform(v: Vec2) -> Self {
        FlowField::Uniform(v)
    }

    pub fn piecewise(boundaries: Vec<f64>, velocities: Vec<Vec2>) -> Result<Self, FieldError> {
        if velocities.len() != boundaries.len() + 1 {
            return Err(FieldError::Parameter(format!(
                "piecewise flow needs {} velocities for {} boundaries, got {}",
                boundaries.len() + 1,
                boundaries.len(),
                velocities.len()
            )));
        }
        if boundaries.iter().any(|b| !b.is_finite()) {
            return Err(FieldError::Parameter("non-finite flow boundary".into()));
        }
        if boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FieldError::Parameter(
                "flow segment boundaries must be strictly increasing".into(),
            ));
        }
        Ok(FlowField::Piecewise {
            boundaries,
            velocities,
        })
    }

    fn segment(boundaries: &[f64], t: f64) -> usize {
        // number of boundaries <= t
        boundaries.partition_point(|&b| b <= t)
    }

    pub fn at(&self, _x: Vec2, t: f64) -> Vec2 {
        match self {
            FlowField::Uniform(v) => *v,
            FlowField::Piecewise {
                boundaries,
                velocities,
            } => velocities[Self::segment(boundaries, t)],
        }
    }

    /// The single velocity in effect over `[from, to]`, or `None` when it
    /// changes somewhere in that interval.
    pub fn uniform_over(&self, from: f64, to: f64) -> Option<Vec2> {
        match self {
            FlowField::Uniform(v) => Some(*v),
            FlowField::Piecewise {
                boundaries,
                velocities,
            } => {
                let first = Self::segment(boundaries, from);
                let last = Self::segment(boundaries, to);
                let v = velocities[first];
                velocities[first..=last]
                    .iter()
                    .all(|w| *w == v)
                    .then_some(v)
            }
        }
    }

    /// Exact displacement of a fluid parcel carried from `from` to `to`.
    pub fn displacement(&self, from: f64, to: f64) -> Vec2 {
        match self {
            FlowField::Uniform(v) => v * (to - from),
            FlowField::Piecewise {
                boundaries,
                velocities,
            } => {
                let (lo, hi, sign) = if to >= from {
                    (from, to, 1.0)
                } else {
                    (to, from, -1.0)
                };
                let mut d = Vec2::zeros();
                let mut t = lo;
                let mut seg = Self::segment(boundaries, lo);
                while t < hi {
                    let end = boundaries.get(seg).copied().unwrap_or(f64::INFINITY).min(hi);
                    d += velocities[seg] * (end - t);
                    t = end;
                    seg += 1;
                }
                d * sign
            }
        }
    }

    /// Largest `|vx| + |vy|` over all segments.
    pub fn max_l1_speed(&self) -> f64 {
        match self {
            FlowField::Uniform(v) => v.x.abs() + v.y.abs(),
            FlowField::Piecewise { velocities, .. } => velocities
                .iter()
                .map(|v| v.x.abs() + v.y.abs())
                .fold(0.0, f64::max),
        }
    }
}
