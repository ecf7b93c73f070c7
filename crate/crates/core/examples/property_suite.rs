//! Runs the built-in property checks and both integrators' benchmarks.

use homography_observer::suite::{bench, run_property_suite};
use homography_observer::Integrator;

fn main() -> homography_observer::Result<()> {
    for check in run_property_suite(true) {
        println!("{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
    }
    for integrator in [Integrator::ExpEuler, Integrator::Rk4Renorm] {
        let r = bench(integrator, 5000)?;
        println!("{:?}: {:.0} steps/s, final error {:.3e}", integrator, r.steps_per_second, r.final_error);
    }
    Ok(())
}
