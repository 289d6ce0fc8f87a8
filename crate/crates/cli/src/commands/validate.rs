use crate::error::{CliError, EXIT_FAILED, EXIT_OK};
use plume_core::validation::{self, Options};

pub fn execute(use_printed_inverse: bool) -> Result<u8, CliError> {
    let opts = Options { use_printed_inverse };
    let mut failures = 0;
    for &(name, check) in validation::CHECKS {
        let r = validation::run_check(name, check, &opts);
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {:<30} {} [{:.2}s]", r.name, r.detail, r.seconds);
        failures += usize::from(!r.passed);
    }
    println!("{} of {} checks passed", validation::CHECKS.len() - failures, validation::CHECKS.len());
    Ok(if failures == 0 { EXIT_OK } else { EXIT_FAILED })
}
