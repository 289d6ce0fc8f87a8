use super::run::run_into;
use crate::error::{CliError, EXIT_OK};
use crate::output::{create_dir, write_atomic};
use log::info;
use plume_core::simulator::{fmt_sig9, RunMetrics, Scenario};
use rayon::prelude::*;
use serde_json::Value;
use std::path::Path;

/// One swept parameter: a dotted path into the scenario and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub path: String,
    pub values: Vec<String>,
}

pub fn parse_axis(arg: &str) -> Result<Axis, CliError> {
    let (path, values) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Input(format!("--set {arg:?}: expected KEY=V1,V2,...")))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
    if path.trim().is_empty() || values.iter().any(String::is_empty) {
        return Err(CliError::Input(format!("--set {arg:?}: empty key or value")));
    }
    Ok(Axis {
        path: path.trim().to_string(),
        values,
    })
}

/// Index tuples of the Cartesian product, first axis varying slowest.
pub fn product(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

fn literal(text: &str) -> Value {
    match serde_json::from_str::<Value>(text) {
        Ok(v @ (Value::Number(_) | Value::Bool(_))) => v,
        _ => Value::String(text.to_string()),
    }
}

/// Replaces the value at an existing dotted path; array elements are
/// addressed by index.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let unknown = || CliError::Input(format!("unknown parameter path {path:?}"));
    let mut cur = root;
    for key in path.split('.') {
        cur = match cur {
            Value::Object(map) => map.get_mut(key).ok_or_else(unknown)?,
            Value::Array(items) => {
                let i: usize = key.parse().map_err(|_| unknown())?;
                items.get_mut(i).ok_or_else(unknown)?
            }
            _ => return Err(unknown()),
        };
    }
    if cur.is_object() || cur.is_array() {
        return Err(CliError::Input(format!("parameter path {path:?} does not name a scalar")));
    }
    *cur = value;
    Ok(())
}

pub fn execute(scenario_path: &Path, sets: &[String], out: &Path, jobs: Option<usize>) -> Result<u8, CliError> {
    let base = Scenario::load(scenario_path)?;
    let axes = sets.iter().map(|s| parse_axis(s)).collect::<Result<Vec<_>, _>>()?;
    let base_value = serde_json::to_value(&base).expect("scenario serialises");

    let combos = product(&axes.iter().map(|a| a.values.len()).collect::<Vec<_>>());
    let mut scenarios = Vec::with_capacity(combos.len());
    for combo in &combos {
        let mut v = base_value.clone();
        for (axis, &i) in axes.iter().zip(combo) {
            set_path(&mut v, &axis.path, literal(&axis.values[i]))?;
        }
        let label = describe(&axes, combo);
        let s: Scenario =
            serde_json::from_value(v).map_err(|e| CliError::Input(format!("sweep point {label}: {e}")))?;
        s.validate().map_err(|e| CliError::Input(format!("sweep point {label}: {e}")))?;
        scenarios.push(s);
    }

    create_dir(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Input(format!("--jobs: {e}")))?;
    info!("sweeping {} runs on {} threads", scenarios.len(), pool.current_num_threads());
    let results: Vec<Result<(u8, RunMetrics), CliError>> = pool.install(|| {
        scenarios
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let dir = out.join(run_dir(i));
                create_dir(&dir)?;
                write_atomic(&dir.join("scenario.json"), s.to_json_pretty().as_bytes())?;
                run_into(s, &dir)
            })
            .collect()
    });

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["run".to_string()];
    header.extend(axes.iter().map(|a| a.path.clone()));
    header.extend(METRIC_COLUMNS.iter().map(|c| c.to_string()));
    w.write_record(&header).expect("in-memory write");
    let mut code = EXIT_OK;
    for (i, (combo, result)) in combos.iter().zip(results).enumerate() {
        let (c, m) = result?;
        code = code.max(c);
        let mut row = vec![run_dir(i)];
        row.extend(axes.iter().zip(combo).map(|(a, &j)| a.values[j].clone()));
        row.extend(metric_row(&m));
        w.write_record(&row).expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    write_atomic(&out.join("sweep_summary.csv"), &bytes)?;
    println!("{} runs written to {}", combos.len(), out.display());
    Ok(code)
}

fn run_dir(i: usize) -> String {
    format!("run_{i:03}")
}

fn describe(axes: &[Axis], combo: &[usize]) -> String {
    axes.iter()
        .zip(combo)
        .map(|(a, &i)| format!("{}={}", a.path, a.values[i]))
        .collect::<Vec<_>>()
        .join(" ")
}

const METRIC_COLUMNS: [&str; 12] = [
    "seed",
    "termination",
    "records",
    "rms_conc_error",
    "patrol_speed_mean",
    "patrol_speed_std",
    "winding_sign",
    "winding_turns",
    "winding_reversals",
    "level_set_error_mean",
    "saturation_fraction",
    "first_tracking_time",
];

fn metric_row(m: &RunMetrics) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(fmt_sig9).unwrap_or_default();
    vec![
        m.seed.to_string(),
        m.termination.clone(),
        m.records.to_string(),
        fmt_sig9(m.rms_conc_error),
        fmt_sig9(m.patrol_speed_mean),
        fmt_sig9(m.patrol_speed_std),
        m.winding_sign.to_string(),
        fmt_sig9(m.winding_turns),
        m.winding_reversals.to_string(),
        opt(m.level_set_error_mean),
        fmt_sig9(m.saturation_fraction),
        opt(m.first_tracking_time),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn parses_axes() {
        let a = parse_axis("gains.k1=2,5,10").unwrap();
        assert_eq!(a.path, "gains.k1");
        assert_eq!(a.values, ["2", "5", "10"]);
        assert!(parse_axis("gains.k1").is_err());
        assert!(parse_axis("gains.k1=2,,3").is_err());
    }

    #[test]
    fn product_order_and_size() {
        let p = product(&[3, 2]);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], [0, 0]);
        assert_eq!(p[1], [0, 1]);
        assert_eq!(p[5], [2, 1]);
        assert_eq!(product(&[]), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn sets_existing_paths_only() {
        let mut v = json!({"gains": {"k1": 5.0}, "pose": [1.0, 2.0, 0.0], "mode": "head"});
        set_path(&mut v, "gains.k1", literal("2")).unwrap();
        set_path(&mut v, "pose.1", literal("7.5")).unwrap();
        set_path(&mut v, "mode", literal("center")).unwrap();
        assert_eq!(v, json!({"gains": {"k1": 2}, "pose": [1.0, 7.5, 0.0], "mode": "center"}));
        assert!(set_path(&mut v, "gains.k9", literal("1")).is_err());
        assert!(set_path(&mut v, "pose.3", literal("1")).is_err());
        assert!(set_path(&mut v, "gains", literal("1")).is_err());
    }
}
