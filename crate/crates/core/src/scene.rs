//! Ground truth for a calibrated camera moving over a static plane.
//!
//! Frames follow the usual convention: `R` maps the current camera frame into
//! the reference frame and `ξ` is the current camera position expressed in the
//! reference frame, so a point satisfies `P̊ = R P + ξ`.

use nalgebra::{Matrix3, Rotation3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::sl3::{measurement_map, skew, AlgebraElement, GroupElement, ProjectivePoint};

pub const DEFAULT_MIN_DEPTH: f64 = 0.05;
pub const DEFAULT_SQUARE_SIDE: f64 = 0.3;

const ORTHONORMAL_TOL: f64 = 1e-9;

/// The observed plane `{P̊ : η̊ᵀP̊ = d̊}` in reference coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneParams {
    normal: Vector3<f64>,
    distance: f64,
    min_depth: f64,
}

impl PlaneParams {
    /// `normal` is rescaled to unit length; `distance` must be positive.
    pub fn new(normal: Vector3<f64>, distance: f64) -> Result<Self> {
        let n = normal.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Config("plane normal must be a non-zero vector".into()));
        }
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::Config(format!("plane distance must be positive, got {distance}")));
        }
        Ok(Self {
            normal: normal / n,
            distance,
            min_depth: DEFAULT_MIN_DEPTH.min(distance),
        })
    }

    /// Depth floor below which the camera is considered to have reached the plane.
    pub fn with_min_depth(mut self, min_depth: f64) -> Result<Self> {
        if !(min_depth.is_finite() && min_depth > 0.0) {
            return Err(Error::Config(format!("minimum depth must be positive, got {min_depth}")));
        }
        self.min_depth = min_depth;
        Ok(self)
    }

    pub fn normal(&self) -> &Vector3<f64> {
        &self.normal
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn min_depth(&self) -> f64 {
        self.min_depth
    }
}

impl Default for PlaneParams {
    fn default() -> Self {
        Self::new(Vector3::z(), 1.0).expect("unit plane is valid")
    }
}

/// Camera pose relative to the reference camera.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraState {
    rotation: Matrix3<f64>,
    position: Vector3<f64>,
}

impl CameraState {
    pub fn new(rotation: Matrix3<f64>, position: Vector3<f64>) -> Result<Self> {
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        let det = rotation.determinant();
        if ortho > ORTHONORMAL_TOL || (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::Config("camera rotation is not in SO(3)".into()));
        }
        if !position.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("camera position must be finite".into()));
        }
        Ok(Self { rotation, position })
    }

    /// Pose from a rotation vector (axis times angle) and a position.
    pub fn from_rotation_vector(rotvec: Vector3<f64>, position: Vector3<f64>) -> Self {
        Self {
            rotation: Rotation3::new(rotvec).into_inner(),
            position,
        }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            position: Vector3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn position(&self) -> &Vector3<f64> {
        &self.position
    }

    /// `ζ = −Rᵀξ`, the reference origin seen from the current camera.
    pub fn zeta(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.position)
    }

    /// Plane normal in the current frame, `η = Rᵀη̊`.
    pub fn eta(&self, plane: &PlaneParams) -> Vector3<f64> {
        self.rotation.transpose() * plane.normal
    }

    /// Distance from the current camera to the plane, `d = d̊ − η̊ᵀξ`.
    pub fn depth(&self, plane: &PlaneParams) -> f64 {
        plane.distance - plane.normal.dot(&self.position)
    }

    /// Depth after checking it clears the plane's floor.
    pub fn checked_depth(&self, plane: &PlaneParams) -> Result<f64> {
        let d = self.depth(plane);
        if d > plane.min_depth {
            Ok(d)
        } else {
            Err(Error::DegenerateGeometry(format!(
                "camera depth {d} is at or below the floor {}",
                plane.min_depth
            )))
        }
    }
}

/// Body-frame angular and linear velocity.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RigidVelocity {
    pub omega: Vector3<f64>,
    pub linear: Vector3<f64>,
}

impl RigidVelocity {
    pub fn new(omega: Vector3<f64>, linear: Vector3<f64>) -> Self {
        Self { omega, linear }
    }

    pub fn is_finite(&self) -> bool {
        self.omega.iter().chain(self.linear.iter()).all(|v| v.is_finite())
    }
}

/// Pinhole intrinsics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(Error::Config("focal lengths must be positive".into()));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }
}

/// Unit-determinant homography `γ(R + ξηᵀ/d)` with `γ = (d/d̊)^{1/3}`.
pub fn true_homography(cam: &CameraState, plane: &PlaneParams) -> Result<GroupElement> {
    let d = cam.checked_depth(plane)?;
    let eta = cam.eta(plane);
    let gamma = (d / plane.distance).cbrt();
    let m = (cam.rotation + cam.position * eta.transpose() / d) * gamma;
    Ok(GroupElement::from_unit_det(m))
}

/// One step of `Ṙ = RΩ×`, `ξ̇ = RV`: exact rotation update, Euler position update.
pub fn rigid_step(cam: &CameraState, vel: &RigidVelocity, plane: &PlaneParams, dt: f64) -> Result<CameraState> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    let position = cam.position + cam.rotation * vel.linear * dt;
    let rotation = cam.rotation * Rotation3::new(vel.omega * dt).into_inner();
    let next = CameraState {
        rotation: orthonormalize(&rotation),
        position,
    };
    next.checked_depth(plane)?;
    Ok(next)
}

/// Nearest rotation in Frobenius norm.
pub(crate) fn orthonormalize(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    r
}

/// Group velocity `U = Ω× + Vηᵀ/d − (ηᵀV/3d) I` induced by the rigid motion.
pub fn true_group_velocity(cam: &CameraState, vel: &RigidVelocity, plane: &PlaneParams) -> Result<AlgebraElement> {
    Ok(skew(&vel.omega) + gamma_term(cam, vel, plane)?)
}

/// Translational part `Γ = Vηᵀ/d − (ηᵀV/3d) I` of the group velocity.
pub fn gamma_term(cam: &CameraState, vel: &RigidVelocity, plane: &PlaneParams) -> Result<AlgebraElement> {
    Ok(AlgebraElement::project(&gamma1_term(cam, vel, plane)?))
}

/// `Γ₁ = (V/d) ηᵀ`; not traceless in general.
pub fn gamma1_term(cam: &CameraState, vel: &RigidVelocity, plane: &PlaneParams) -> Result<Matrix3<f64>> {
    let d = cam.checked_depth(plane)?;
    Ok(vel.linear / d * cam.eta(plane).transpose())
}

/// `ḋ = −ηᵀV`.
pub fn d_rate(cam: &CameraState, vel: &RigidVelocity, plane: &PlaneParams) -> f64 {
    -cam.eta(plane).dot(&vel.linear)
}

/// Reference point hit by the ray along `p̊`, if the ray meets the plane in front.
pub fn ray_plane_point(plane: &PlaneParams, p_ring: &ProjectivePoint) -> Result<Vector3<f64>> {
    let cos = plane.normal.dot(p_ring.vector());
    if cos <= 0.0 {
        return Err(Error::DegenerateGeometry("reference ray does not reach the plane".into()));
    }
    Ok(p_ring.vector() * (plane.distance / cos))
}

/// Current-frame directions `pᵢ = H⁻¹p̊ᵢ / |H⁻¹p̊ᵢ|` of the reference features.
pub fn project_features(
    cam: &CameraState,
    plane: &PlaneParams,
    ref_points: &[ProjectivePoint],
) -> Result<Vec<ProjectivePoint>> {
    let h = true_homography(cam, plane)?;
    let rt = cam.rotation.transpose();
    ref_points
        .iter()
        .map(|p_ring| {
            let point = ray_plane_point(plane, p_ring)?;
            if (rt * (point - cam.position)).z <= 0.0 {
                return Err(Error::DegenerateGeometry("feature is behind the current camera".into()));
            }
            Ok(measurement_map(&h, p_ring))
        })
        .collect()
}

/// Four corners of a square of side `side` lying on the plane and centred on
/// the foot of the perpendicular from the reference camera.
pub fn reference_square(plane: &PlaneParams, side: f64) -> Result<Vec<ProjectivePoint>> {
    if !(side > 0.0) {
        return Err(Error::Config(format!("square side must be positive, got {side}")));
    }
    let n = plane.normal;
    let seed = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = (seed - n * n.dot(&seed)).normalize();
    let v = n.cross(&u);
    let centre = n * plane.distance;
    let h = side / 2.0;
    [(-h, -h), (h, -h), (h, h), (-h, h)]
        .iter()
        .map(|&(a, b)| ProjectivePoint::new(centre + u * a + v * b))
        .collect()
}

/// Unit direction of a pixel, `normalize(K⁻¹(u, v, 1)ᵀ)`.
pub fn pixel_to_direction(intr: &CameraIntrinsics, uv: &Vector2<f64>) -> Result<ProjectivePoint> {
    let ray = Vector3::new((uv.x - intr.cx) / intr.fx, (uv.y - intr.cy) / intr.fy, 1.0);
    ProjectivePoint::new(ray)
}

/// Pixel at which a direction is imaged.
pub fn direction_to_pixel(intr: &CameraIntrinsics, p: &ProjectivePoint) -> Result<Vector2<f64>> {
    let v = p.vector();
    if v.z <= 0.0 {
        return Err(Error::BehindCamera);
    }
    Ok(Vector2::new(intr.fx * v.x / v.z + intr.cx, intr.fy * v.y / v.z + intr.cy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl3::{group_action, normalize_to_sl3};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_pose_gives_identity_homography() {
        let h = true_homography(&CameraState::identity(), &PlaneParams::default()).unwrap();
        assert_relative_eq!(*h.matrix(), Matrix3::identity(), epsilon = 1e-15);
    }

    #[test]
    fn receding_camera_homography() {
        let cam = CameraState::new(Matrix3::identity(), Vector3::new(0.0, 0.0, -0.5)).unwrap();
        let h = true_homography(&cam, &PlaneParams::default()).unwrap();
        // d = 1.5, so γ = 1.5^{1/3} and R + ξηᵀ/d = diag(1, 1, 1 − 0.5/1.5).
        let expected = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 2.0 / 3.0)) * 1.5f64.cbrt();
        assert_relative_eq!(*h.matrix(), expected, epsilon = 1e-15);
        assert!((h.determinant() - 1.0).abs() < 1e-12);
        assert!((cam.depth(&PlaneParams::default()) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn homography_matches_determinant_normalization() {
        let plane = PlaneParams::new(Vector3::new(0.1, -0.2, 1.0), 2.0).unwrap();
        let cam = CameraState::from_rotation_vector(Vector3::new(0.2, -0.1, 0.3), Vector3::new(0.3, 0.2, -0.4));
        let d = cam.depth(&plane);
        let raw = cam.rotation() + cam.position() * cam.eta(&plane).transpose() / d;
        let oracle = normalize_to_sl3(&raw).unwrap();
        let h = true_homography(&cam, &plane).unwrap();
        assert_relative_eq!(*h.matrix(), *oracle.matrix(), epsilon = 1e-13);
        assert!((h.determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn homography_rejects_camera_at_plane() {
        let cam = CameraState::new(Matrix3::identity(), Vector3::new(0.0, 0.0, 0.96)).unwrap();
        assert!(matches!(
            true_homography(&cam, &PlaneParams::default()),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn rigid_step_cases() {
        let plane = PlaneParams::default();
        let cam = CameraState::identity();
        let still = rigid_step(&cam, &RigidVelocity::default(), &plane, 0.1).unwrap();
        assert_relative_eq!(*still.rotation(), Matrix3::identity(), epsilon = 1e-15);
        assert_eq!(*still.position(), Vector3::zeros());

        let moved = rigid_step(&cam, &RigidVelocity::new(Vector3::zeros(), Vector3::x()), &plane, 1.0).unwrap();
        assert_relative_eq!(*moved.position(), Vector3::x(), epsilon = 1e-15);

        let turned = rigid_step(&cam, &RigidVelocity::new(Vector3::new(0.0, 0.0, FRAC_PI_2), Vector3::zeros()), &plane, 1.0)
            .unwrap();
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_relative_eq!(*turned.rotation(), expected, epsilon = 1e-15);

        assert!(rigid_step(&cam, &RigidVelocity::default(), &plane, 0.0).is_err());
        let dive = RigidVelocity::new(Vector3::zeros(), Vector3::new(0.0, 0.0, 1.0));
        assert!(matches!(rigid_step(&cam, &dive, &plane, 0.97), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn velocity_terms_special_cases() {
        let plane = PlaneParams::default();
        let cam = CameraState::identity();
        let spin = RigidVelocity::new(Vector3::new(0.1, 0.2, 0.3), Vector3::zeros());
        let u = true_group_velocity(&cam, &spin, &plane).unwrap();
        assert_eq!(*u.matrix(), *skew(&spin.omega).matrix());
        assert_eq!(*gamma_term(&cam, &spin, &plane).unwrap().matrix(), Matrix3::zeros());
        assert_eq!(gamma1_term(&cam, &spin, &plane).unwrap(), Matrix3::zeros());

        let dive = RigidVelocity::new(Vector3::zeros(), Vector3::new(0.0, 0.0, 3.0));
        let u = true_group_velocity(&cam, &dive, &plane).unwrap();
        assert_relative_eq!(*u.matrix(), Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 2.0)), epsilon = 1e-15);

        let unit = RigidVelocity::new(Vector3::zeros(), Vector3::z());
        assert_eq!(gamma1_term(&cam, &unit, &plane).unwrap(), Vector3::z() * Vector3::z().transpose());
        assert_eq!(d_rate(&cam, &unit, &plane), -1.0);
        let slide = RigidVelocity::new(Vector3::zeros(), Vector3::new(1.0, -2.0, 0.0));
        assert_eq!(d_rate(&cam, &slide, &plane), 0.0);
    }

    #[test]
    fn gamma_is_traceless_part_of_gamma1() {
        let plane = PlaneParams::new(Vector3::new(0.2, 0.1, 1.0), 1.3).unwrap();
        let cam = CameraState::from_rotation_vector(Vector3::new(0.3, 0.1, -0.2), Vector3::new(0.1, 0.2, 0.1));
        let vel = RigidVelocity::new(Vector3::new(0.5, -0.1, 0.2), Vector3::new(0.3, -0.4, 0.2));
        let g = gamma_term(&cam, &vel, &plane).unwrap();
        let g1 = gamma1_term(&cam, &vel, &plane).unwrap();
        assert!(g.trace().abs() < 1e-15);
        assert_relative_eq!(*g.matrix(), g1 - Matrix3::identity() * (g1.trace() / 3.0), epsilon = 1e-15);
        let u = true_group_velocity(&cam, &vel, &plane).unwrap();
        assert_relative_eq!(*u.matrix(), skew(&vel.omega).matrix() + g.matrix(), epsilon = 1e-15);
    }

    #[test]
    fn features_at_identity_and_round_trip() {
        let plane = PlaneParams::default();
        let refs = reference_square(&plane, 0.3).unwrap();
        let at_ref = project_features(&CameraState::identity(), &plane, &refs).unwrap();
        for (p, q) in at_ref.iter().zip(&refs) {
            assert_relative_eq!(*p.vector(), *q.vector(), epsilon = 1e-15);
        }
        let cam = CameraState::from_rotation_vector(Vector3::new(0.1, 0.05, 0.4), Vector3::new(0.2, -0.1, 0.3));
        let h = true_homography(&cam, &plane).unwrap();
        for (p, q) in project_features(&cam, &plane, &refs).unwrap().iter().zip(&refs) {
            assert_relative_eq!(*group_action(&h, p).vector(), *q.vector(), epsilon = 1e-14);
        }
    }

    #[test]
    fn features_behind_camera_are_rejected() {
        let plane = PlaneParams::default();
        let refs = reference_square(&plane, 0.3).unwrap();
        let flipped = CameraState::from_rotation_vector(Vector3::new(std::f64::consts::PI, 0.0, 0.0), Vector3::zeros());
        assert!(project_features(&flipped, &plane, &refs).is_err());
    }

    #[test]
    fn reference_square_geometry() {
        let plane = PlaneParams::default();
        let refs = reference_square(&plane, 2.0).unwrap();
        let s = 3f64.sqrt().recip();
        for p in &refs {
            for c in p.vector().iter() {
                assert!((c.abs() - s).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pixel_directions() {
        let intr = CameraIntrinsics::new(450.0, 450.0, 394.30, 292.82).unwrap();
        let p = pixel_to_direction(&intr, &Vector2::new(394.30, 292.82)).unwrap();
        assert_eq!(*p.vector(), Vector3::z());

        let p = pixel_to_direction(&intr, &Vector2::new(844.30, 292.82)).unwrap();
        assert_relative_eq!(*p.vector(), Vector3::new(1.0, 0.0, 1.0).normalize(), epsilon = 1e-12);

        let uv = Vector2::new(12.5, 580.25);
        let back = direction_to_pixel(&intr, &pixel_to_direction(&intr, &uv).unwrap()).unwrap();
        assert!((back - uv).norm() < 1e-9);

        let sideways = ProjectivePoint::from_xyz(1.0, 0.0, 0.0).unwrap();
        assert!(matches!(direction_to_pixel(&intr, &sideways), Err(Error::BehindCamera)));
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0).is_err());
    }
}
