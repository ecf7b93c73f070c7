//! Arithmetic on SL(3), its Lie algebra sl(3), and the projective action on P².
//!
//! Every value type here is immutable. [`GroupElement`] keeps a unit determinant,
//! [`AlgebraElement`] stays traceless and [`ProjectivePoint`] always holds the
//! canonical unit representative of its line.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Determinants below this magnitude are treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Canonical unit representative of `v`: third component positive, with
/// lexicographic fallback on the second and first components when it is zero.
///
/// `v` must be non-zero.
pub fn canonicalize(v: &Vector3<f64>) -> Vector3<f64> {
    let n2 = v.norm_squared();
    // Unit input passes through unchanged.
    let u = if (n2 - 1.0).abs() <= 4.0 * f64::EPSILON { *v } else { v / n2.sqrt() };
    let flip = if u.z != 0.0 {
        u.z < 0.0
    } else if u.y != 0.0 {
        u.y < 0.0
    } else {
        u.x < 0.0
    };
    if flip {
        -u
    } else {
        u
    }
}

/// An element of P² stored as its canonical unit representative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectivePoint(Vector3<f64>);

impl ProjectivePoint {
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "cannot build a projective point from {:?}",
                v.as_slice()
            )));
        }
        Ok(Self(canonicalize(&v)))
    }

    pub fn from_xyz(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(Vector3::new(x, y, z))
    }

    /// Canonical representative; caller guarantees `v` is non-zero and finite.
    pub(crate) fn from_nonzero(v: Vector3<f64>) -> Self {
        Self(canonicalize(&v))
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }
}

/// A real 3×3 matrix with unit determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement(Matrix3<f64>);

impl GroupElement {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Rescales `m` onto SL(3). Same as [`normalize_to_sl3`].
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        normalize_to_sl3(&m)
    }

    /// Wraps a matrix that is already in SL(3) up to rounding (products, exponentials).
    pub(crate) fn from_unit_det(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn inverse(&self) -> Self {
        let adj = adjugate(&self.0);
        Self(adj / self.0.determinant())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Divides out the accumulated determinant drift.
    pub fn renormalized(&self) -> Self {
        // det stays near 1, so the cube root is always well defined here.
        Self(self.0 / self.0.determinant().cbrt())
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

impl Mul<&GroupElement> for &GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A real 3×3 traceless matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraElement(Matrix3<f64>);

impl AlgebraElement {
    /// Orthogonal projection of `m` onto sl(3): removes `tr(m)/3` from the diagonal.
    pub fn project(m: &Matrix3<f64>) -> Self {
        Self(traceless(m))
    }

    pub fn zero() -> Self {
        Self(Matrix3::zeros())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Euclidean matrix inner product `tr(AᵀB)`.
    pub fn inner(&self, other: &AlgebraElement) -> f64 {
        self.0.dot(&other.0)
    }

    /// Lie bracket `[self, other] = self·other − other·self`.
    pub fn bracket(&self, other: &AlgebraElement) -> AlgebraElement {
        Self::project(&(self.0 * other.0 - other.0 * self.0))
    }

    pub fn scale(&self, s: f64) -> AlgebraElement {
        Self(self.0 * s)
    }

    /// Orthonormal basis of sl(3) under the Frobenius inner product: the six
    /// off-diagonal units followed by two diagonal generators.
    pub fn basis() -> [AlgebraElement; 8] {
        let mut out = [AlgebraElement::zero(); 8];
        let mut k = 0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let mut m = Matrix3::zeros();
                    m[(i, j)] = 1.0;
                    out[k] = AlgebraElement(m);
                    k += 1;
                }
            }
        }
        out[6] = AlgebraElement(Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 0.0)) / 2f64.sqrt());
        out[7] = AlgebraElement(Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -2.0)) / 6f64.sqrt());
        out
    }

    /// Element with the given coordinates in [`AlgebraElement::basis`].
    pub fn from_coordinates(c: &[f64; 8]) -> AlgebraElement {
        let basis = Self::basis();
        let m = basis
            .iter()
            .zip(c.iter())
            .fold(Matrix3::zeros(), |acc, (b, &ci)| acc + b.0 * ci);
        AlgebraElement(m)
    }
}

impl Add for AlgebraElement {
    type Output = AlgebraElement;

    fn add(self, rhs: AlgebraElement) -> AlgebraElement {
        AlgebraElement(self.0 + rhs.0)
    }
}

impl Sub for AlgebraElement {
    type Output = AlgebraElement;

    fn sub(self, rhs: AlgebraElement) -> AlgebraElement {
        AlgebraElement(self.0 - rhs.0)
    }
}

impl Neg for AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        AlgebraElement(-self.0)
    }
}

pub(crate) fn traceless(m: &Matrix3<f64>) -> Matrix3<f64> {
    m - Matrix3::identity() * (m.trace() / 3.0)
}

fn adjugate(m: &Matrix3<f64>) -> Matrix3<f64> {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)];
    Matrix3::new(
        c(1, 2, 1, 2),
        -c(0, 2, 1, 2),
        c(0, 1, 1, 2),
        -c(1, 2, 0, 2),
        c(0, 2, 0, 2),
        -c(0, 1, 0, 2),
        c(1, 2, 0, 1),
        -c(0, 2, 0, 1),
        c(0, 1, 0, 1),
    )
}

/// Rescales a homography representative to unit determinant using the real
/// (sign-preserving) cube root, so negative determinants also land in SL(3).
pub fn normalize_to_sl3(m: &Matrix3<f64>) -> Result<GroupElement> {
    let det = m.determinant();
    if !det.is_finite() || det.abs() < SINGULAR_DET {
        return Err(Error::SingularMatrix { det });
    }
    Ok(GroupElement(m / det.cbrt()))
}

/// `w(H, p) = Hp / |Hp|`, returned in canonical form.
pub fn group_action(h: &GroupElement, p: &ProjectivePoint) -> ProjectivePoint {
    ProjectivePoint::from_nonzero(h.apply(p.vector()))
}

/// Body-frame measurement `H⁻¹p̊ / |H⁻¹p̊|` of a reference direction.
pub fn measurement_map(h: &GroupElement, p_ring: &ProjectivePoint) -> ProjectivePoint {
    group_action(&h.inverse(), p_ring)
}

/// `Ad_Q X = Q X Q⁻¹`.
pub fn adjoint(q: &GroupElement, x: &AlgebraElement) -> AlgebraElement {
    AlgebraElement::project(&(q.0 * x.0 * q.inverse().0))
}

const PADE_ORDER: usize = 6;
const PADE_NORM_BOUND: f64 = 0.5;

/// Matrix exponential by scaling and squaring around a diagonal Padé(6, 6)
/// approximant. The scaled argument has 1-norm at most 0.5, where the
/// approximant's truncation error is below double precision.
pub(crate) fn expm(m: &Matrix3<f64>) -> Matrix3<f64> {
    let norm1 = (0..3)
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > PADE_NORM_BOUND {
        (norm1 / PADE_NORM_BOUND).log2().ceil() as i32
    } else {
        0
    };
    let a = m / 2f64.powi(squarings);

    let mut num = Matrix3::identity();
    let mut den = Matrix3::identity();
    let mut power = Matrix3::identity();
    let mut coeff = 1.0;
    let q = PADE_ORDER as f64;
    for k in 0..PADE_ORDER {
        let kf = k as f64;
        coeff *= (q - kf) / ((kf + 1.0) * (2.0 * q - kf));
        power *= a;
        num += power * coeff;
        if k % 2 == 0 {
            den -= power * coeff;
        } else {
            den += power * coeff;
        }
    }
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is well conditioned for scaled arguments");
    for _ in 0..squarings {
        r = r * r;
    }
    r
}

/// Group exponential of a traceless matrix.
pub fn exp_sl3(x: &AlgebraElement) -> GroupElement {
    GroupElement(expm(&x.0)).renormalized()
}

/// `π_x = I − x xᵀ` for a unit vector `x`.
pub fn projector(x: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::identity() - x * x.transpose()
}

/// Cross-product matrix: `skew(ω) y = ω × y`.
pub fn skew(omega: &Vector3<f64>) -> AlgebraElement {
    AlgebraElement(omega.cross_matrix())
}
