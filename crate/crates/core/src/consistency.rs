//! Consistency of reference direction sets.
//!
//! A set of at least four directions is consistent when four of them have every
//! triplet linearly independent. Consistency implies that only `U = 0` in sl(3)
//! fixes every direction to first order, which is checked independently by
//! [`stabilizer_nullity`].

use nalgebra::{DMatrix, Matrix3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sl3::{projector, AlgebraElement, ProjectivePoint};

pub const DEFAULT_EPS: f64 = 1e-6;
const RANK_RTOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// First passing 4-subset in lexicographic order.
    pub witness_subset: Option<[usize; 4]>,
    /// Smallest triplet `|det|` of the witness, or the best candidate's when
    /// there is none (0 for fewer than four directions).
    pub min_triplet_det: f64,
    pub stabilizer_nullity: usize,
}

fn triplet_det(dirs: &[ProjectivePoint], a: usize, b: usize, c: usize) -> f64 {
    Matrix3::from_columns(&[*dirs[a].vector(), *dirs[b].vector(), *dirs[c].vector()])
        .determinant()
        .abs()
}

fn min_triplet(dirs: &[ProjectivePoint], s: [usize; 4]) -> f64 {
    [
        triplet_det(dirs, s[1], s[2], s[3]),
        triplet_det(dirs, s[0], s[2], s[3]),
        triplet_det(dirs, s[0], s[1], s[3]),
        triplet_det(dirs, s[0], s[1], s[2]),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

/// Exhaustive search for a 4-subset whose triplets all have `|det| > eps`.
pub fn check_consistent(dirs: &[ProjectivePoint], eps: f64) -> ConsistencyReport {
    let n = dirs.len();
    let mut best = 0.0f64;
    let mut witness = None;
    'search: for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let m = min_triplet(dirs, [a, b, c, d]);
                    if m > eps {
                        witness = Some(([a, b, c, d], m));
                        break 'search;
                    }
                    best = best.max(m);
                }
            }
        }
    }
    let stabilizer_nullity = stabilizer_nullity(dirs);
    match witness {
        Some((subset, m)) => ConsistencyReport {
            consistent: true,
            witness_subset: Some(subset),
            min_triplet_det: m,
            stabilizer_nullity,
        },
        None => ConsistencyReport {
            consistent: false,
            witness_subset: None,
            min_triplet_det: best,
            stabilizer_nullity,
        },
    }
}

/// Dimension of `{U ∈ sl(3) : π_{p̊ᵢ} U p̊ᵢ = 0 ∀i}`, from the rank of the stacked
/// linear map over an orthonormal basis of sl(3).
pub fn stabilizer_nullity(dirs: &[ProjectivePoint]) -> usize {
    if dirs.is_empty() {
        return 8;
    }
    let basis = AlgebraElement::basis();
    let mut map = DMatrix::zeros(3 * dirs.len(), 8);
    for (i, p) in dirs.iter().enumerate() {
        let pi = projector(p.vector());
        for (j, b) in basis.iter().enumerate() {
            let col = pi * b.matrix() * p.vector();
            for r in 0..3 {
                map[(3 * i + r, j)] = col[r];
            }
        }
    }
    let sv = map.singular_values();
    let largest = sv.max();
    let rank = if largest > 0.0 {
        sv.iter().filter(|&&s| s > RANK_RTOL * largest).count()
    } else {
        0
    };
    8 - rank
}

/// Checks that a consistent set has a trivial stabilizer. Returns `Ok(true)`
/// when the two tests agree.
pub fn cross_validate(dirs: &[ProjectivePoint], eps: f64) -> Result<bool> {
    let report = check_consistent(dirs, eps);
    if report.consistent && report.stabilizer_nullity != 0 {
        log::warn!(
            "consistent set with stabilizer nullity {}: {:?}",
            report.stabilizer_nullity,
            dirs.iter().map(|p| p.to_array()).collect::<Vec<_>>()
        );
        return Err(Error::OracleDisagreement {
            directions: dirs.iter().map(|p| p.to_array()).collect(),
        });
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(x: f64, y: f64, z: f64) -> ProjectivePoint {
        ProjectivePoint::from_xyz(x, y, z).unwrap()
    }

    #[test]
    fn three_directions_are_never_consistent() {
        let dirs = [dir(1.0, 0.0, 0.0), dir(0.0, 1.0, 0.0), dir(0.0, 0.0, 1.0)];
        let report = check_consistent(&dirs, DEFAULT_EPS);
        assert!(!report.consistent);
        assert_eq!(report.witness_subset, None);
        assert_eq!(report.min_triplet_det, 0.0);
        assert!(cross_validate(&dirs, DEFAULT_EPS).unwrap());
    }

    #[test]
    fn basis_plus_diagonal_is_consistent() {
        let dirs = [dir(1.0, 0.0, 0.0), dir(0.0, 1.0, 0.0), dir(0.0, 0.0, 1.0), dir(1.0, 1.0, 1.0)];
        let report = check_consistent(&dirs, DEFAULT_EPS);
        assert!(report.consistent);
        assert_eq!(report.witness_subset, Some([0, 1, 2, 3]));
        assert!((report.min_triplet_det - 3f64.sqrt().recip()).abs() < 1e-15);
        assert_eq!(report.stabilizer_nullity, 0);
    }

    #[test]
    fn in_plane_fourth_direction_breaks_consistency() {
        let dirs = [dir(1.0, 0.0, 0.0), dir(0.0, 1.0, 0.0), dir(0.0, 0.0, 1.0), dir(1.0, 1.0, 0.0)];
        let report = check_consistent(&dirs, DEFAULT_EPS);
        assert!(!report.consistent);
        assert!(report.min_triplet_det < 1e-15);
    }

    #[test]
    fn single_direction_stabilizer() {
        // π_{e₃}Ue₃ = (U₁₃, U₂₃, 0): two constraints on an 8-dimensional algebra.
        assert_eq!(stabilizer_nullity(&[dir(0.0, 0.0, 1.0)]), 6);
        assert_eq!(stabilizer_nullity(&[]), 8);
    }

    #[test]
    fn coplanar_set_has_nontrivial_stabilizer() {
        let dirs = [dir(1.0, 0.0, 0.0), dir(0.0, 1.0, 0.0), dir(1.0, 1.0, 0.0), dir(1.0, -1.0, 0.0)];
        assert!(!check_consistent(&dirs, DEFAULT_EPS).consistent);
        assert!(stabilizer_nullity(&dirs) > 0);
    }

    #[test]
    fn witness_is_lexicographically_first() {
        let dirs = [
            dir(1.0, 0.0, 0.0),
            dir(1.0, 0.0, 0.0),
            dir(0.0, 1.0, 0.0),
            dir(0.0, 0.0, 1.0),
            dir(1.0, 1.0, 1.0),
        ];
        assert_eq!(check_consistent(&dirs, DEFAULT_EPS).witness_subset, Some([0, 2, 3, 4]));
    }
}
