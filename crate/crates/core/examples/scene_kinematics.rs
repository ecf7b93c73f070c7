//! True homography and its group velocity along a circular orbit.

use homography_observer::scene::{gamma_term, true_group_velocity, true_homography, PlaneParams};
use homography_observer::Trajectory;
use nalgebra::{Matrix3, Vector3};

fn main() -> homography_observer::Result<()> {
    let plane = PlaneParams::new(Vector3::new(0.0, 0.1, 1.0), 1.0)?;
    let traj = Trajectory::CircularVOverD {
        rotation: Matrix3::identity(),
        position: Vector3::new(0.3, 0.0, 0.0),
        center: Vector3::zeros(),
        rate: 1.0,
    };
    println!("{:>5} {:>10} {:>12} {:>12}", "t", "depth", "‖U‖", "‖Γ‖");
    for k in 0..=8 {
        let t = 0.5 * k as f64;
        let (cam, vel) = traj.sample(t, &plane)?;
        let h = true_homography(&cam, &plane)?;
        let u = true_group_velocity(&cam, &vel, &plane)?;
        let gamma = gamma_term(&cam, &vel, &plane)?;
        assert!((h.determinant() - 1.0).abs() < 1e-12);
        println!("{t:>5.1} {:>10.5} {:>12.6} {:>12.6}", cam.depth(&plane), u.norm(), gamma.norm());
    }
    Ok(())
}
