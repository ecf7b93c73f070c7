//! Noisy run with feature dropouts, written to CSV.

use homography_observer::sim::write_csv;
use homography_observer::{run_scenario, Scenario};

fn main() -> homography_observer::Result<()> {
    let scenario = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/dropout.json"))?;
    let log = run_scenario(&scenario)?;
    let mut last_visible = usize::MAX;
    for r in &log.records {
        if r.n_visible != last_visible {
            println!("t = {:6.3}  {} visible  ‖E − I‖ = {:.3e}", r.t, r.n_visible, r.err_e);
            last_visible = r.n_visible;
        }
    }
    let out = std::env::temp_dir().join("dropout.csv");
    write_csv(&log, std::io::BufWriter::new(std::fs::File::create(&out)?))?;
    println!("final ‖E − I‖ = {:.3e}; log in {}", log.last().unwrap().err_e, out.display());
    Ok(())
}
