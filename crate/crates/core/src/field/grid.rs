use super::{FieldError, FieldSample, FlowField};
use crate::Vec2;

/// Fraction of the explicit stability limit actually used.
pub const CFL_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Zero-gradient ghost cells; material leaves freely.
    Outflow,
    Periodic,
}

/// Cell-centred concentration grid advanced with explicit Euler,
/// first-order upwind advection and 5-point diffusion.
///
/// `origin` is the lower-left corner of the domain; cell `(i, j)` is
/// centred at `origin + h * (i + 0.5, j + 0.5)`. Storage is row-major in `j`.
#[derive(Debug, Clone)]
pub struct GridField {
    pub origin: Vec2,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub k: f64,
    pub flow: FlowField,
    pub boundary: Boundary,
    pub time: f64,
}

impl GridField {
    #[allow(clippy::too_many_arguments)]
    pub fn from_fn(
        origin: Vec2,
        h: f64,
        nx: usize,
        ny: usize,
        k: f64,
        flow: FlowField,
        boundary: Boundary,
        time: f64,
        mut init: impl FnMut(Vec2) -> f64,
    ) -> Result<Self, FieldError> {
        if nx < 3 || ny < 3 {
            return Err(FieldError::Parameter(format!("grid must be at least 3x3, got {nx}x{ny}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(FieldError::Parameter(format!("cell size must be > 0, got {h}")));
        }
        if !(k >= 0.0) || !k.is_finite() {
            return Err(FieldError::Parameter(format!("diffusion k must be >= 0, got {k}")));
        }
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let c = init(origin + Vec2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
                if !(c >= 0.0) || !c.is_finite() {
                    return Err(FieldError::Parameter(format!(
                        "initial concentration must be finite and >= 0, got {c} at cell ({i}, {j})"
                    )));
                }
                values.push(c);
            }
        }
        Ok(Self {
            origin,
            h,
            nx,
            ny,
            values,
            k,
            flow,
            boundary,
            time,
        })
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    /// Total mass `sum(c) * h^2`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.h * self.h
    }

    /// Largest stable step for the current velocity, safety factor included.
    pub fn stable_dt(&self) -> f64 {
        let v = self.flow.at(Vec2::zeros(), self.time);
        let rate = (v.x.abs() + v.y.abs()) / self.h + 4.0 * self.k / (self.h * self.h);
        if rate > 0.0 {
            CFL_SAFETY / rate
        } else {
            f64::INFINITY
        }
    }

    fn neighbor(&self, i: usize, di: isize, n: usize) -> usize {
        let m = i as isize + di;
        if m >= 0 && (m as usize) < n {
            m as usize
        } else {
            match self.boundary {
                Boundary::Periodic => m.rem_euclid(n as isize) as usize,
                Boundary::Outflow => i,
            }
        }
    }

    /// One explicit step of length `dt`.
    pub fn step(&mut self, dt: f64) -> Result<(), FieldError> {
        if !(self.k >= 0.0) {
            return Err(FieldError::Parameter(format!("diffusion k must be >= 0, got {}", self.k)));
        }
        let limit = self.stable_dt();
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(FieldError::StepSize { dt, limit });
        }
        let v = self.flow.at(Vec2::zeros(), self.time);
        let (nx, ny, h) = (self.nx, self.ny, self.h);
        let ax = dt * v.x / h;
        let ay = dt * v.y / h;
        let d = dt * self.k / (h * h);
        let old = &self.values;
        let mut next = vec![0.0; old.len()];
        for j in 0..ny {
            let jm = self.neighbor(j, -1, ny);
            let jp = self.neighbor(j, 1, ny);
            for i in 0..nx {
                let im = self.neighbor(i, -1, nx);
                let ip = self.neighbor(i, 1, nx);
                let c = old[j * nx + i];
                let (w, e) = (old[j * nx + im], old[j * nx + ip]);
                let (s, n) = (old[jm * nx + i], old[jp * nx + i]);
                // upwind flux differences: F(i+1/2) - F(i-1/2)
                let adv_x = if ax >= 0.0 { ax * (c - w) } else { ax * (e - c) };
                let adv_y = if ay >= 0.0 { ay * (c - s) } else { ay * (n - c) };
                next[j * nx + i] = c - adv_x - adv_y + d * (e + w + n + s - 4.0 * c);
            }
        }
        self.values = next;
        self.time += dt;
        Ok(())
    }

    /// Steps forward to time `t` using equal substeps no longer than
    /// `max_dt` or the stability limit.
    pub fn advance_to(&mut self, t: f64, max_dt: f64) -> Result<(), FieldError> {
        let span = t - self.time;
        if span <= 0.0 {
            return Ok(());
        }
        let dt_cap = max_dt.min(self.stable_dt());
        let n = (span / dt_cap).ceil().max(1.0) as usize;
        let dt = span / n as f64;
        for _ in 0..n {
            self.step(dt)?;
        }
        self.time = t;
        Ok(())
    }

    /// Bilinear interpolation of the cell values and of their
    /// central-difference derivatives.
    pub fn sample(&self, x: Vec2) -> Result<FieldSample, FieldError> {
        let out = || FieldError::Domain { x: x.x, y: x.y };
        let locate = |coord: f64, origin: f64, n: usize| -> Option<(usize, f64)> {
            let mut f = (coord - origin) / self.h - 0.5;
            if !f.is_finite() {
                return None;
            }
            // snap round-off so cell centres interpolate with weight exactly 1
            if (f - f.round()).abs() < 1e-9 {
                f = f.round();
            }
            let mut i0 = f.floor();
            let mut w = f - i0;
            if i0 == (n - 2) as f64 && w == 0.0 {
                i0 -= 1.0;
                w = 1.0;
            }
            (i0 >= 1.0 && i0 <= (n as f64 - 3.0)).then_some((i0 as usize, w))
        };
        let (i0, wx) = locate(x.x, self.origin.x, self.nx).ok_or_else(out)?;
        let (j0, wy) = locate(x.y, self.origin.y, self.ny).ok_or_else(out)?;
        let mut acc = FieldSample::zero();
        for (di, fx) in [(0, 1.0 - wx), (1, wx)] {
            for (dj, fy) in [(0, 1.0 - wy), (1, wy)] {
                let w = fx * fy;
                if w == 0.0 {
                    continue;
                }
                let s = self.cell_derivatives(i0 + di, j0 + dj);
                acc.c += w * s.c;
                acc.grad += s.grad * w;
                acc.lap += w * s.lap;
            }
        }
        acc.c = acc.c.max(0.0);
        Ok(acc)
    }

    fn cell_derivatives(&self, i: usize, j: usize) -> FieldSample {
        let h = self.h;
        let c = self.cell(i, j);
        let (w, e) = (self.cell(i - 1, j), self.cell(i + 1, j));
        let (s, n) = (self.cell(i, j - 1), self.cell(i, j + 1));
        FieldSample {
            c,
            grad: Vec2::new((e - w) / (2.0 * h), (n - s) / (2.0 * h)),
            lap: (e + w + n + s - 4.0 * c) / (h * h),
        }
    }

    pub fn centroid(&self) -> Option<Vec2> {
        let mut mass = 0.0;
        let mut moment = Vec2::zeros();
        for j in 0..self.ny {
            for i in 0..self.nx {
                let c = self.cell(i, j);
                mass += c;
                moment += self.cell_center(i, j) * c;
            }
        }
        (mass > 0.0).then(|| moment / mass)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|c| *c *= s);
        out
    }
}
