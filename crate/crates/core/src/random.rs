//! Random draws of group, algebra and projective elements for tests, the
//! property suite and examples.

use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::sl3::{exp_sl3, normalize_to_sl3, AlgebraElement, GroupElement, ProjectivePoint};

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(normal(rng), normal(rng), normal(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// Uniform direction on the upper hemisphere (third component positive).
pub fn hemisphere_direction<R: Rng + ?Sized>(rng: &mut R) -> ProjectivePoint {
    loop {
        let v = unit_vector(rng);
        if v.z.abs() > 1e-9 {
            return ProjectivePoint::from_nonzero(v);
        }
    }
}

/// Algebra element with i.i.d. Gaussian coordinates of standard deviation `scale`.
pub fn algebra<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> AlgebraElement {
    let mut c = [0.0; 8];
    c.iter_mut().for_each(|x| *x = scale * normal(rng));
    AlgebraElement::from_coordinates(&c)
}

/// `exp(X)` with `X` drawn by [`algebra`].
pub fn group<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> GroupElement {
    exp_sl3(&algebra(rng, scale))
}

/// Generic 3×3 matrix rescaled onto SL(3), rejecting near-singular draws.
pub fn dense_group<R: Rng + ?Sized>(rng: &mut R) -> GroupElement {
    loop {
        let m = Matrix3::from_fn(|_, _| normal(rng));
        if m.determinant().abs() > 0.1 {
            return normalize_to_sl3(&m).expect("determinant bounded away from zero");
        }
    }
}

/// Rotation by a uniformly drawn angle in `[0, max_angle]` about a random axis.
pub fn rotation<R: Rng + ?Sized>(rng: &mut R, max_angle: f64) -> Matrix3<f64> {
    let angle = rng.random_range(0.0..=max_angle);
    Rotation3::new(unit_vector(rng) * angle).into_inner()
}

/// Homography of a camera displaced by a rotation of at most `max_angle` and a
/// translation of at most `max_translation` plane depths, seen against a plane
/// with a random normal in the viewing hemisphere.
pub fn pose_error<R: Rng + ?Sized>(rng: &mut R, max_angle: f64, max_translation: f64) -> GroupElement {
    let r = rotation(rng, max_angle);
    let t = unit_vector(rng) * rng.random_range(0.0..=max_translation);
    let n = *hemisphere_direction(rng).vector();
    normalize_to_sl3(&(r + t * n.transpose())).unwrap_or_else(|_| GroupElement::from_unit_det(r))
}
