//! Adaptive observer that learns Γ from gyro rates alone, on the bundled drift scenario.

use homography_observer::{run_scenario, Scenario};

fn main() -> homography_observer::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/drift.json");
    let scenario = Scenario::load(path)?;
    let log = run_scenario(&scenario)?;
    for t in [0.0, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0] {
        if let Some(r) = log.at(t) {
            println!("t = {:5.1}  L0 = {:.3e}  ‖E − I‖ = {:.3e}  ‖Γ̃‖ = {:.3e}", r.t, r.l0, r.err_e, r.norm_gamma_err);
        }
    }
    Ok(())
}
