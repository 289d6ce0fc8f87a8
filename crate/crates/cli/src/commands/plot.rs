use crate::error::{CliError, EXIT_OK};
use crate::output::write_atomic;
use crate::svg::{Chart, Frame};
use crate::PlotKind;
use plume_core::simulator::{Record, RunLog, Scenario};
use plume_core::Field;
use std::path::Path;

const SENSOR_COLOURS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd"];

pub fn execute(kind: PlotKind, log: &Path, out: &Path, c0: Option<f64>, scenario: Option<&Path>) -> Result<u8, CliError> {
    let bytes = std::fs::read(log).map_err(|e| CliError::io(log, e))?;
    let records = RunLog::records_from_csv(&bytes)?;
    if records.is_empty() {
        return Err(CliError::Input(format!("{}: log has no records", log.display())));
    }
    let scenario = scenario.map(Scenario::load).transpose()?;
    let svg = match kind {
        PlotKind::TrajectoryXy => {
            let field = scenario.as_ref().map(|s| s.build_field()).transpose()?;
            trajectory(&records, field.as_ref())
        }
        PlotKind::ConcentrationTimeseries => {
            let c0 = c0
                .or(scenario.as_ref().map(|s| s.gains.c0))
                .ok_or_else(|| CliError::Input("concentration-timeseries needs --c0 or --scenario".into()))?;
            if !c0.is_finite() {
                return Err(CliError::Input(format!("--c0 must be finite, got {c0}")));
            }
            timeseries(&records, c0)
        }
    };
    write_atomic(out, svg.as_bytes())?;
    Ok(EXIT_OK)
}

/// Head-point path with start and end markers, plus the plume centroid
/// path when the field is known.
pub fn trajectory(records: &[Record], field: Option<&Field>) -> String {
    let head: Vec<(f64, f64)> = records.iter().map(|r| (r.head.x, r.head.y)).collect();
    let source: Vec<(f64, f64)> = match field {
        Some(f) => {
            let start = f.centroid(0.0);
            records
                .iter()
                .filter_map(|r| {
                    let c = if f.is_analytic() {
                        f.centroid(r.t)
                    } else {
                        start.map(|s| s + f.flow().displacement(0.0, r.t))
                    };
                    c.map(|c| (c.x, c.y))
                })
                .collect()
        }
        None => vec![],
    };
    let frame = Frame::around(head.iter().chain(&source).copied()).equal_aspect();
    let mut chart = Chart::new(frame, "Trajectory", "x (m)", "y (m)");
    chart.polyline("head point", "#1f77b4", 1.5, &head, "");
    if !source.is_empty() {
        chart.polyline("plume centre", "#d62728", 1.5, &source, r#" stroke-dasharray="6 4""#);
    }
    chart.marker("start", "#2ca02c", head[0], false);
    chart.marker("end", "#000000", head[head.len() - 1], true);
    chart.finish()
}

/// Sensor readings, their mean and the reference level against time.
pub fn timeseries(records: &[Record], c0: f64) -> String {
    let t0 = records[0].t;
    let t1 = records[records.len() - 1].t;
    let all = records
        .iter()
        .flat_map(|r| r.readings.iter().chain([&r.c_hat]).map(move |&c| (r.t, c)))
        .chain([(t0, c0), (t1, c0)]);
    let frame = Frame::around(all);
    let mut chart = Chart::new(frame, "Concentration", "t (s)", "c (ppb)");
    for (i, colour) in SENSOR_COLOURS.iter().enumerate() {
        let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.readings[i])).collect();
        chart.polyline(&format!("c{}", i + 1), colour, 1.0, &pts, "");
    }
    let mean: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.c_hat)).collect();
    chart.polyline("mean", "#000000", 2.0, &mean, "");
    let attr = format!(r#" stroke-dasharray="8 4" data-c0="{c0}""#);
    chart.polyline("c0", "#d62728", 1.5, &[(t0, c0), (t1, c0)], &attr);
    chart.finish()
}
