//! Consistency of a few direction sets and the size of their stabilizers.

use homography_observer::consistency::DEFAULT_EPS;
use homography_observer::{check_consistent, ProjectivePoint};

fn set(dirs: &[[f64; 3]]) -> Vec<ProjectivePoint> {
    dirs.iter().map(|&[x, y, z]| ProjectivePoint::from_xyz(x, y, z).unwrap()).collect()
}

fn main() {
    let cases = [
        ("square", set(&[[-1.0, -1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, 1.0], [-1.0, 1.0, 1.0]])),
        ("collinear triple", set(&[[-1.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])),
        ("great circle", set(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [2.0, 1.0, 0.0]])),
        ("three points", set(&[[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])),
    ];
    for (name, dirs) in &cases {
        let r = check_consistent(dirs, DEFAULT_EPS);
        println!(
            "{name:<17} consistent = {:<5}  witness = {:?}  min |det| = {:.3}  stabilizer dim = {}",
            r.consistent, r.witness_subset, r.min_triplet_det, r.stabilizer_nullity
        );
    }
}
