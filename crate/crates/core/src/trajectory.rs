//! Closed-form camera trajectories used as simulation ground truth.
//!
//! Each generator returns the exact pose and body velocity at any time, so the
//! simulated homography carries no integration error of its own.

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::error::{Error, Result};
use crate::scene::{CameraState, PlaneParams, RigidVelocity};

/// A keyframe of a scripted trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub position: Vector3<f64>,
    /// Axis-angle orientation of the camera in the reference frame.
    pub rotation: Vector3<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Trajectory {
    /// Camera at rest.
    Static { rotation: Matrix3<f64>, position: Vector3<f64> },
    /// Constant body rate `omega` and `ξ̇/d = xi_dot_over_d` (reference frame).
    /// With `a = η̊ᵀc` the depth evolves as `d₀e^{−at}`.
    ConstantXiOverD {
        rotation: Matrix3<f64>,
        position: Vector3<f64>,
        omega: Vector3<f64>,
        xi_dot_over_d: Vector3<f64>,
    },
    /// Circular orbit about the plane-normal axis through `center`, turning at
    /// `rate` rad/s with the camera yawing along. Body `Ω`, `V` and `d` are all
    /// constant, so `V/d` is constant.
    CircularVOverD {
        rotation: Matrix3<f64>,
        position: Vector3<f64>,
        center: Vector3<f64>,
        rate: f64,
    },
    /// Catmull-Rom position spline with piecewise geodesic orientation.
    Waypoints(Vec<Waypoint>),
}

impl Trajectory {
    pub fn validate(&self) -> Result<()> {
        if let Trajectory::Waypoints(points) = self {
            if points.len() < 2 {
                return Err(Error::Config("waypoint trajectory needs at least two waypoints".into()));
            }
            if points.windows(2).any(|w| !(w[1].t > w[0].t)) {
                return Err(Error::Config("waypoint times must be strictly increasing".into()));
            }
        }
        Ok(())
    }

    /// Pose and body velocity at time `t`.
    pub fn sample(&self, t: f64, plane: &PlaneParams) -> Result<(CameraState, RigidVelocity)> {
        let (rotation, position, vel) = match self {
            Trajectory::Static { rotation, position } => (*rotation, *position, RigidVelocity::default()),
            Trajectory::ConstantXiOverD {
                rotation,
                position,
                omega,
                xi_dot_over_d,
            } => {
                let d0 = plane.distance() - plane.normal().dot(position);
                let a = plane.normal().dot(xi_dot_over_d);
                let decay = (-a * t).exp();
                // ∫₀ᵗ e^{−as} ds, continuous through a = 0.
                let integral = if (a * t).abs() < 1e-8 { t * (1.0 - 0.5 * a * t) } else { (1.0 - decay) / a };
                let xi = position + xi_dot_over_d * (d0 * integral);
                let r = rotation * Rotation3::new(omega * t).into_inner();
                let xi_dot = xi_dot_over_d * (d0 * decay);
                (r, xi, RigidVelocity::new(*omega, r.transpose() * xi_dot))
            }
            Trajectory::CircularVOverD {
                rotation,
                position,
                center,
                rate,
            } => {
                let n = plane.normal();
                let spin = Rotation3::new(n * (rate * t)).into_inner();
                let r = spin * rotation;
                let xi = center + spin * (position - center);
                let omega = rotation.transpose() * n * *rate;
                let linear = rotation.transpose() * (n.cross(&(position - center)) * *rate);
                (r, xi, RigidVelocity::new(omega, linear))
            }
            Trajectory::Waypoints(points) => sample_waypoints(points, t),
        };
        let cam = CameraState::new(rotation, position)?;
        cam.checked_depth(plane)?;
        Ok((cam, vel))
    }
}

fn sample_waypoints(points: &[Waypoint], t: f64) -> (Matrix3<f64>, Vector3<f64>, RigidVelocity) {
    let last = points.len() - 1;
    if t <= points[0].t {
        let p = &points[0];
        return (Rotation3::new(p.rotation).into_inner(), p.position, RigidVelocity::default());
    }
    if t >= points[last].t {
        let p = &points[last];
        return (Rotation3::new(p.rotation).into_inner(), p.position, RigidVelocity::default());
    }
    let i = points.windows(2).position(|w| t < w[1].t).unwrap_or(last - 1);
    let (a, b) = (&points[i], &points[i + 1]);
    let span = b.t - a.t;
    let tangent = |k: usize| -> Vector3<f64> {
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(last);
        (points[hi].position - points[lo].position) / (points[hi].t - points[lo].t)
    };
    let (m0, m1) = (tangent(i) * span, tangent(i + 1) * span);
    let s = (t - a.t) / span;
    let (s2, s3) = (s * s, s * s * s);
    let position = a.position * (2.0 * s3 - 3.0 * s2 + 1.0)
        + m0 * (s3 - 2.0 * s2 + s)
        + b.position * (-2.0 * s3 + 3.0 * s2)
        + m1 * (s3 - s2);
    let velocity = (a.position * (6.0 * s2 - 6.0 * s)
        + m0 * (3.0 * s2 - 4.0 * s + 1.0)
        + b.position * (-6.0 * s2 + 6.0 * s)
        + m1 * (3.0 * s2 - 2.0 * s))
        / span;

    let ra = Rotation3::new(a.rotation);
    let rb = Rotation3::new(b.rotation);
    let omega = (ra.inverse() * rb).scaled_axis() / span;
    let r = ra.into_inner() * Rotation3::new(omega * (t - a.t)).into_inner();
    (r, position, RigidVelocity::new(omega, r.transpose() * velocity))
}
