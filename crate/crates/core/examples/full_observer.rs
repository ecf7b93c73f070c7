//! Full-velocity observer driven by hand: four features, exact U, one step per frame.

use homography_observer::observer::{lyapunov_full, output_errors};
use homography_observer::scene::{project_features, reference_square, rigid_step, true_group_velocity, true_homography};
use homography_observer::sl3::exp_sl3;
use homography_observer::{
    step, AlgebraElement, CameraState, FeatureFrame, Gains, GroupElement, ObserverMode, ObserverState, PlaneParams,
    RigidVelocity, StepOptions,
};
use nalgebra::Vector3;

fn main() -> homography_observer::Result<()> {
    let plane = PlaneParams::default();
    let reference = reference_square(&plane, 2.0)?;
    let vel = RigidVelocity::new(Vector3::new(0.02, -0.01, 0.1), Vector3::new(0.02, 0.01, 0.0));
    let gains = Gains::default();
    let dt = 1e-3;

    let offset = AlgebraElement::from_coordinates(&[0.3, -0.2, 0.1, 0.2, 0.1, -0.1, 0.05, 0.0]);
    let mut cam = CameraState::identity();
    let mut state = ObserverState::with_estimate(exp_sl3(&offset), nalgebra::Matrix3::zeros(), ObserverMode::FullVelocity)?;

    for k in 0..=2000 {
        let h = true_homography(&cam, &plane)?;
        let u = true_group_velocity(&cam, &vel, &plane)?;
        let measured = project_features(&cam, &plane, &reference)?;
        let frame = FeatureFrame::new(&reference, measured.into_iter().enumerate().collect(), vel.omega, Some(u), k as f64 * dt)?;
        if k % 250 == 0 {
            let e = state.error(&h);
            let worst = output_errors(&state, &frame)
                .iter()
                .map(|(i, ei)| (ei.vector() - reference[*i].vector()).norm().min((ei.vector() + reference[*i].vector()).norm()))
                .fold(0.0, f64::max);
            println!(
                "t = {:.2}  L0 = {:.3e}  ‖E − I‖ = {:.3e}  worst |e − p̊| = {:.3e}",
                k as f64 * dt,
                lyapunov_full(&state, &frame, &gains),
                (e.matrix() - GroupElement::identity().matrix()).norm(),
                worst,
            );
        }
        state = step(&state, &frame, &gains, dt, &StepOptions::default())?;
        cam = rigid_step(&cam, &vel, &plane, dt)?;
    }
    Ok(())
}
