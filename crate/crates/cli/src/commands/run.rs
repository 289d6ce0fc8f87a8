use crate::error::{CliError, EXIT_ABORTED, EXIT_OK, EXIT_TRUNCATED};
use crate::output::{create_dir, write_atomic};
use log::info;
use plume_core::simulator::{self, RunMetrics, Scenario, Termination};
use serde_json::{json, Value};
use std::path::Path;

pub fn execute(scenario_path: &Path, out: &Path, seed: Option<u64>) -> Result<u8, CliError> {
    let mut scenario = Scenario::load(scenario_path)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let (code, m) = run_into(&scenario, out)?;
    println!(
        "{}: {} records, rms |c_hat - c0| {:.4}, patrol speed {:.3} m/s, {:+.2} turns",
        m.termination, m.records, m.rms_conc_error, m.patrol_speed_mean, m.winding_turns
    );
    Ok(code)
}

/// Runs `scenario` and writes `log.csv` and `metrics.json` into `out`.
pub fn run_into(scenario: &Scenario, out: &Path) -> Result<(u8, RunMetrics), CliError> {
    create_dir(out)?;
    info!("running {:?} with seed {}", scenario.name, scenario.seed);
    let log = simulator::run(scenario)?;
    let metrics = simulator::metrics(&log, scenario)?;
    write_atomic(&out.join("log.csv"), &log.to_csv())?;
    write_atomic(&out.join("metrics.json"), metrics_json(&metrics, &log.termination).as_bytes())?;
    let code = match &log.termination {
        Termination::Completed => EXIT_OK,
        Termination::Truncated { time, reason } => {
            info!("run truncated at t = {time}: {reason}");
            EXIT_TRUNCATED
        }
        Termination::Aborted { time, reason } => {
            eprintln!("error: run aborted at t = {time}: {reason}");
            EXIT_ABORTED
        }
    };
    Ok((code, metrics))
}

fn metrics_json(m: &RunMetrics, termination: &Termination) -> String {
    let mut v = serde_json::to_value(m).expect("metrics serialise");
    if let (Value::Object(map), Termination::Truncated { time, reason } | Termination::Aborted { time, reason }) =
        (&mut v, termination)
    {
        map.insert("termination_time".into(), json!(time));
        map.insert("termination_reason".into(), json!(reason));
    }
    let mut s = serde_json::to_string_pretty(&v).expect("metrics serialise");
    s.push('\n');
    s
}
