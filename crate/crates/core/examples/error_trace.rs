//! Trace of the error flow against its closed form for a few random errors.

use homography_observer::observer::{error_innovation, trace_positivity_check};
use homography_observer::{random, suite::wide_square, Gains};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let reference = wide_square();
    let gains = Gains::uniform(1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let e = random::pose_error(&mut rng, 0.6, 0.3);
        let delta = error_innovation(&e, &reference, &gains);
        let raw = (delta.matrix() * e.inverse().matrix().transpose()).trace();
        println!("tr(ΔE⁻ᵀ) = {raw:+.6}   tr(−ΔE⁻ᵀ) = {:.6}", trace_positivity_check(&e, &reference));
    }
}
