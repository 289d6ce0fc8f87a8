use super::log::{Record, RunLog};
use super::{Scenario, SimError};
use crate::guidance::Status;
use crate::Vec2;
use serde::Serialize;
use std::f64::consts::PI;

/// Scalar summary of a run. Windowed quantities use the final half of the
/// run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub termination: String,
    pub records: usize,
    /// RMS of `|c_hat - c0|`, ppb.
    pub rms_conc_error: f64,
    /// Mean of `|z'|` by forward differences, m/s.
    pub patrol_speed_mean: f64,
    pub patrol_speed_std: f64,
    /// Sign of the net angle swept about the plume centroid.
    pub winding_sign: i32,
    /// Net revolutions about the centroid, signed.
    pub winding_turns: f64,
    /// Sign changes of the angular rate after the first `tracking` record
    /// (or over the final half when tracking is never reached).
    pub winding_reversals: usize,
    /// First-order distance `|c(z) - c0| / |grad c(z)|`, analytic fields only.
    pub level_set_error_mean: Option<f64>,
    pub saturation_fraction: f64,
    pub first_tracking_time: Option<f64>,
}

/// Computes metrics for a log of `scenario`.
pub fn metrics(log: &RunLog, scenario: &Scenario) -> Result<RunMetrics, SimError> {
    let field = scenario.build_field()?;
    let c0 = scenario.gains.c0;
    let start = field.centroid(0.0).unwrap_or_else(Vec2::zeros);
    let centroid = |t: f64| {
        if field.is_analytic() {
            field.centroid(t).unwrap_or(start)
        } else {
            start + field.flow().displacement(0.0, t)
        }
    };
    let mut m = compute(log, c0, centroid);
    if field.is_analytic() && !log.records.is_empty() {
        let half = final_half(&log.records);
        let mut total = 0.0;
        let mut n = 0usize;
        for r in half {
            let s = field.eval(r.head, r.t)?;
            let g = s.grad.norm();
            if g > 0.0 {
                total += (s.c - c0).abs() / g;
                n += 1;
            }
        }
        m.level_set_error_mean = (n > 0).then(|| total / n as f64);
    }
    Ok(m)
}

fn final_half(records: &[Record]) -> &[Record] {
    let Some(last) = records.last() else {
        return records;
    };
    let mid = records[0].t + 0.5 * (last.t - records[0].t);
    let i = records.partition_point(|r| r.t < mid - 1e-9);
    &records[i..]
}

/// Field-independent metrics with an explicit centroid trajectory.
pub fn compute(log: &RunLog, c0: f64, centroid: impl Fn(f64) -> Vec2) -> RunMetrics {
    let recs = &log.records;
    let half = final_half(recs);

    let rms_conc_error = if half.is_empty() {
        0.0
    } else {
        (half.iter().map(|r| (r.c_hat - c0).powi(2)).sum::<f64>() / half.len() as f64).sqrt()
    };

    let speeds: Vec<f64> = half
        .windows(2)
        .map(|w| (w[1].head - w[0].head).norm() / (w[1].t - w[0].t))
        .collect();
    let (patrol_speed_mean, patrol_speed_std) = mean_std(&speeds);

    let angles: Vec<f64> = recs
        .windows(2)
        .map(|w| {
            let a = w[0].head - centroid(w[0].t);
            let b = w[1].head - centroid(w[1].t);
            let cross = a.x * b.y - a.y * b.x;
            let dot = a.dot(&b);
            if cross == 0.0 && dot >= 0.0 {
                0.0
            } else {
                cross.atan2(dot)
            }
        })
        .collect();
    let total: f64 = angles.iter().sum();
    let winding_sign = if total > 0.0 {
        1
    } else if total < 0.0 {
        -1
    } else {
        0
    };

    let first_tracking_time = recs.iter().find(|r| r.status == Status::Tracking).map(|r| r.t);
    let from = first_tracking_time.unwrap_or_else(|| half.first().map(|r| r.t).unwrap_or(0.0));
    let mut reversals = 0;
    let mut last_sign = 0.0;
    for (w, a) in recs.windows(2).zip(&angles) {
        if w[0].t < from - 1e-9 || a.abs() < 1e-12 {
            continue;
        }
        let s = a.signum();
        if last_sign != 0.0 && s != last_sign {
            reversals += 1;
        }
        last_sign = s;
    }

    let saturation_fraction = if recs.is_empty() {
        0.0
    } else {
        recs.iter().filter(|r| r.saturated).count() as f64 / recs.len() as f64
    };

    RunMetrics {
        seed: log.seed,
        termination: log.termination.label().to_string(),
        records: recs.len(),
        rms_conc_error,
        patrol_speed_mean,
        patrol_speed_std,
        winding_sign,
        winding_turns: total / (2.0 * PI),
        winding_reversals: reversals,
        level_set_error_mean: None,
        saturation_fraction,
        first_tracking_time,
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
