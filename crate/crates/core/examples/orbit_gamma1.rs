//! Γ₁ variant on a circular orbit where the remaining unknown is constant in the body frame.

use homography_observer::{run_scenario, Scenario};

fn main() -> homography_observer::Result<()> {
    let scenario = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/orbit.json"))?;
    let log = run_scenario(&scenario)?;
    let first = &log.records[0];
    let last = log.last().expect("non-empty log");
    println!("{}: {} steps of {} s", scenario.name, log.records.len() - 1, scenario.dt);
    println!("‖Γ̃₁‖: {:.3e} -> {:.3e}", first.norm_gamma_err, last.norm_gamma_err);
    println!("‖E − I‖: {:.3e} -> {:.3e}", first.err_e, last.err_e);
    Ok(())
}
