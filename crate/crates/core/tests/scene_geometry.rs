use approx::assert_relative_eq;
use nalgebra::{Matrix3, Rotation3, Vector2, Vector3};

use homography_observer::scene::{
    d_rate, direction_to_pixel, gamma1_term, pixel_to_direction, project_features, ray_plane_point, reference_square,
    rigid_step, true_group_velocity, true_homography, CameraIntrinsics, CameraState, PlaneParams, RigidVelocity,
};
use homography_observer::sl3::{measurement_map, ProjectivePoint};
use homography_observer::trajectory::{Trajectory, Waypoint};
use homography_observer::Error;

fn tilted_plane() -> PlaneParams {
    PlaneParams::new(Vector3::new(0.1, -0.2, 1.0), 1.5).unwrap()
}

fn camera() -> CameraState {
    CameraState::from_rotation_vector(Vector3::new(0.1, -0.15, 0.3), Vector3::new(0.2, 0.1, 0.3))
}

/// Measured directions agree with a plain pinhole projection of the 3D points.
#[test]
fn directions_match_pinhole_projection() {
    let plane = tilted_plane();
    let cam = camera();
    let intr = CameraIntrinsics::new(520.0, 515.0, 320.0, 240.0).unwrap();
    let refs = reference_square(&plane, 0.6).unwrap();
    let h = true_homography(&cam, &plane).unwrap();
    let measured = project_features(&cam, &plane, &refs).unwrap();
    for (p_ring, p) in refs.iter().zip(&measured) {
        let world = ray_plane_point(&plane, p_ring).unwrap();
        let local = cam.rotation().transpose() * (world - cam.position());
        let pixel = intr.matrix() * local / local.z;
        let direction = pixel_to_direction(&intr, &Vector2::new(pixel.x, pixel.y)).unwrap();
        assert_relative_eq!(*direction.vector(), *p.vector(), epsilon = 1e-12);
        assert_relative_eq!(*measurement_map(&h, p_ring).vector(), *p.vector(), epsilon = 1e-15);
        let back = direction_to_pixel(&intr, p).unwrap();
        assert_relative_eq!(back, Vector2::new(pixel.x, pixel.y), epsilon = 1e-9);
    }
}

#[test]
fn homography_determinant_scale_is_depth_ratio() {
    let plane = tilted_plane();
    let cam = camera();
    let h = true_homography(&cam, &plane).unwrap();
    assert!((h.determinant() - 1.0).abs() < 1e-13);
    let raw = cam.rotation() + cam.position() * cam.eta(&plane).transpose() / cam.depth(&plane);
    // H = γ·raw with γ³ = d/d̊, and det(raw) = d̊/d.
    assert_relative_eq!(raw.determinant(), plane.distance() / cam.depth(&plane), epsilon = 1e-13);
    let gamma = h.matrix()[(0, 0)] / raw[(0, 0)];
    assert_relative_eq!(gamma.powi(3), cam.depth(&plane) / plane.distance(), epsilon = 1e-12);
}

#[test]
fn reference_pose_gives_identity() {
    let plane = tilted_plane();
    let h = true_homography(&CameraState::identity(), &plane).unwrap();
    assert_relative_eq!(*h.matrix(), Matrix3::identity(), epsilon = 1e-15);
}

#[test]
fn kinematics_match_finite_differences_on_waypoints() {
    let plane = tilted_plane();
    let traj = Trajectory::Waypoints(vec![
        Waypoint { t: 0.0, position: Vector3::zeros(), rotation: Vector3::zeros() },
        Waypoint { t: 1.0, position: Vector3::new(0.2, -0.1, 0.1), rotation: Vector3::new(0.1, 0.0, 0.3) },
        Waypoint { t: 2.0, position: Vector3::new(0.3, 0.1, 0.2), rotation: Vector3::new(0.0, 0.2, 0.4) },
    ]);
    let h = 1e-6;
    for &t in &[0.3, 0.9, 1.4] {
        let at = |s: f64| {
            let (c, _) = traj.sample(s, &plane).unwrap();
            *true_homography(&c, &plane).unwrap().matrix()
        };
        let (c, v) = traj.sample(t, &plane).unwrap();
        let u = true_group_velocity(&c, &v, &plane).unwrap();
        let fd = (at(t + h) - at(t - h)) / (2.0 * h);
        assert!((fd - at(t) * u.matrix()).norm() <= 1e-6 * fd.norm().max(1e-3));

        let depth = |s: f64| traj.sample(s, &plane).unwrap().0.depth(&plane);
        let dd = (depth(t + h) - depth(t - h)) / (2.0 * h);
        assert!((dd - d_rate(&c, &v, &plane)).abs() < 1e-8);
    }
}

#[test]
fn rigid_step_follows_constant_velocity() {
    let plane = PlaneParams::default();
    let vel = RigidVelocity::new(Vector3::new(0.0, 0.0, 0.5), Vector3::new(0.1, 0.0, 0.0));
    let mut cam = CameraState::identity();
    for _ in 0..1000 {
        cam = rigid_step(&cam, &vel, &plane, 1e-3).unwrap();
    }
    assert_relative_eq!(*cam.rotation(), Rotation3::new(Vector3::new(0.0, 0.0, 0.5)).into_inner(), epsilon = 1e-12);
    // ξ(1) = ∫ R(s) V ds for a rotation about z: (sin 0.5, 1 − cos 0.5, 0)·0.1/0.5.
    let exact = Vector3::new(0.5f64.sin(), 1.0 - 0.5f64.cos(), 0.0) * 0.2;
    assert!((cam.position() - exact).norm() < 1e-4);
}

#[test]
fn depth_floor_is_enforced() {
    let plane = PlaneParams::default().with_min_depth(0.1).unwrap();
    let cam = CameraState::new(Matrix3::identity(), Vector3::new(0.0, 0.0, 0.95)).unwrap();
    assert!(matches!(true_homography(&cam, &plane), Err(Error::DegenerateGeometry(_))));
    let vel = RigidVelocity::new(Vector3::zeros(), Vector3::new(0.0, 0.0, 1.0));
    let near = CameraState::new(Matrix3::identity(), Vector3::new(0.0, 0.0, 0.85)).unwrap();
    assert!(rigid_step(&near, &vel, &plane, 0.1).is_err());
}

#[test]
fn features_behind_camera_are_reported() {
    let plane = PlaneParams::default();
    let refs = reference_square(&plane, 0.3).unwrap();
    // Looking away from the plane.
    let cam = CameraState::from_rotation_vector(Vector3::new(std::f64::consts::PI, 0.0, 0.0), Vector3::zeros());
    assert!(matches!(project_features(&cam, &plane, &refs), Err(Error::DegenerateGeometry(_))));
    let intr = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0).unwrap();
    let back = ProjectivePoint::new(Vector3::new(0.0, 0.0, -1.0)).unwrap();
    // Canonical form flips (0, 0, −1) to the front, so the pixel is the principal point.
    assert_relative_eq!(direction_to_pixel(&intr, &back).unwrap(), Vector2::new(320.0, 240.0));
    let sideways = ProjectivePoint::new(Vector3::new(1.0, 0.0, 0.0)).unwrap();
    assert!(matches!(direction_to_pixel(&intr, &sideways), Err(Error::BehindCamera)));
}

#[test]
fn orbit_gamma1_is_rotation_invariant() {
    let plane = PlaneParams::default();
    let traj = Trajectory::CircularVOverD {
        rotation: Matrix3::identity(),
        position: Vector3::new(0.4, 0.0, 0.1),
        center: Vector3::zeros(),
        rate: 1.0,
    };
    let (c, v) = traj.sample(2.0, &plane).unwrap();
    let g1 = gamma1_term(&c, &v, &plane).unwrap();
    // Γ̇₁ = Γ₁Ω× vanishes because Ω is along η.
    assert!((g1 * v.omega.cross_matrix()).norm() < 1e-15);
}
