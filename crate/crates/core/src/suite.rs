//! Built-in property checks and the integrator timing benchmark.

use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::consistency::{check_consistent, cross_validate, DEFAULT_EPS};
use crate::error::Result;
use crate::observer::{
    cost_for, error_innovation, innovation_for, lyapunov_from_error, step, trace_positivity_check, FeatureFrame, Gains,
    Integrator, ObserverMode, ObserverState, StepOptions,
};
use crate::random;
use crate::scene::{true_group_velocity, true_homography, PlaneParams};
use crate::sl3::{canonicalize, exp_sl3, measurement_map, AlgebraElement, GroupElement, ProjectivePoint};
use crate::trajectory::Trajectory;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= tol,
        detail: format!("worst {worst:.3e} (tolerance {tol:.1e})"),
    }
}

fn directions(rng: &mut ChaCha8Rng, n: usize) -> Vec<ProjectivePoint> {
    (0..n).map(|_| random::hemisphere_direction(rng)).collect()
}

/// The square of half-width 1 at unit depth.
pub fn wide_square() -> Vec<ProjectivePoint> {
    [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
        .iter()
        .map(|&(x, y)| ProjectivePoint::from_xyz(x, y, 1.0).expect("nonzero"))
        .collect()
}

fn drift() -> Trajectory {
    Trajectory::ConstantXiOverD {
        rotation: Matrix3::identity(),
        position: Vector3::new(0.05, -0.02, 0.0),
        omega: Vector3::new(0.1, -0.15, 0.3),
        xi_dot_over_d: Vector3::new(0.04, 0.03, 0.02),
    }
}

/// Runs every property check. `quick` trims sample counts and run lengths.
pub fn run_property_suite(quick: bool) -> Vec<CheckResult> {
    let samples = if quick { 100 } else { 1000 };
    let mut rng = ChaCha8Rng::seed_from_u64(0x513);
    vec![
        group_closure(&mut rng, samples),
        right_action(&mut rng, samples),
        commuting_exponential(&mut rng, samples),
        canonical_idempotent(&mut rng, samples),
        kinematics(),
        equivariance(&mut rng, samples),
        gradient(&mut rng, samples / 10),
        trace_positivity(&mut rng, samples),
        consistency_oracles(&mut rng, if quick { 100 } else { 500 }),
        lyapunov_decrease(if quick { 2000 } else { 10_000 }),
        error_autonomy(if quick { 1000 } else { 10_000 }),
        determinant_drift(if quick { 10_000 } else { 100_000 }),
    ]
}

fn group_closure(rng: &mut ChaCha8Rng, n: usize) -> CheckResult {
    let worst = (0..n)
        .map(|_| {
            let a = random::dense_group(rng);
            let b = random::group(rng, 0.5);
            let prod = (&a * &b).determinant() - 1.0;
            let inv = (a.inverse().matrix() * a.matrix() - Matrix3::identity()).amax();
            prod.abs().max(inv)
        })
        .fold(0.0, f64::max);
    check("group closure and inverse", worst, 1e-10)
}

fn right_action(rng: &mut ChaCha8Rng, n: usize) -> CheckResult {
    let worst = (0..n)
        .map(|_| {
            let (h1, h2) = (random::group(rng, 0.5), random::group(rng, 0.5));
            let p = random::hemisphere_direction(rng);
            let lhs = measurement_map(&h2, &measurement_map(&h1, &p));
            let rhs = measurement_map(&(&h1 * &h2), &p);
            (lhs.vector() - rhs.vector()).amax()
        })
        .fold(0.0, f64::max);
    check("measurement map is a right action", worst, 1e-12)
}

fn commuting_exponential(rng: &mut ChaCha8Rng, n: usize) -> CheckResult {
    let diag = |rng: &mut ChaCha8Rng| {
        let (a, b) = (random::normal(rng), random::normal(rng));
        AlgebraElement::project(&Matrix3::from_diagonal(&Vector3::new(a, b, -a - b)))
    };
    let worst = (0..n)
        .map(|_| {
            let (x, y) = (diag(rng), diag(rng));
            let lhs = exp_sl3(&(x + y));
            let rhs = exp_sl3(&x) * exp_sl3(&y);
            (lhs.matrix() - rhs.matrix()).amax() / lhs.matrix().amax()
        })
        .fold(0.0, f64::max);
    check("exp(X+Y) = exp(X)exp(Y) for commuting X, Y", worst, 1e-12)
}

fn canonical_idempotent(rng: &mut ChaCha8Rng, n: usize) -> CheckResult {
    let worst = (0..n)
        .map(|_| {
            let v = random::unit_vector(rng) * rng.random_range(0.1..10.0);
            let c = canonicalize(&v);
            let flipped = canonicalize(&-v);
            (canonicalize(&c) - c).amax().max((flipped - c).amax())
        })
        .fold(0.0, f64::max);
    check("canonicalization is idempotent and sign-blind", worst, 0.0)
}

fn kinematics() -> CheckResult {
    let plane = PlaneParams::default();
    let traj = drift();
    let h = 1e-6;
    let worst = [0.5, 2.0, 6.0]
        .iter()
        .map(|&t| {
            let at = |s: f64| {
                let (c, _) = traj.sample(s, &plane).expect("inside the valid region");
                *true_homography(&c, &plane).expect("positive depth").matrix()
            };
            let (c, v) = traj.sample(t, &plane).expect("inside the valid region");
            let u = true_group_velocity(&c, &v, &plane).expect("positive depth");
            let fd = (at(t + h) - at(t - h)) / (2.0 * h);
            let exact = at(t) * u.matrix();
            (fd - exact).norm() / exact.norm()
        })
        .fold(0.0, f64::max);
    check("homography kinematics Ḣ = HU", worst, 1e-6)
}

fn equivariance(rng: &mut ChaCha8Rng, n: usize) -> CheckResult {
    let gains = Gains::default();
    let worst = (0..n)
        .map(|_| {
            let reference = directions(rng, 4);
            let h = random::group(rng, 0.3);
            let h_hat = random::group(rng, 0.3);
            let q = random::dense_group(rng);
            let observed = |h: &GroupElement| reference.iter().enumerate().map(|(i, p)| (i, measurement_map(h, p))).collect();
            let frame = FeatureFrame::new(&reference, observed(&h), Vector3::zeros(), None, 0.0).expect("valid indices");
            let moved = FeatureFrame::new(&reference, observed(&(&h * &q)), Vector3::zeros(), None, 0.0).expect("valid indices");
            let a = innovation_for(&h_hat, &frame, &gains);
            let b = innovation_for(&(&h_hat * &q), &moved, &gains);
            (a - b).norm() / a.norm().max(1.0)
        })
        .fold(0.0, f64::max);
    check("innovation is invariant under right translation", worst, 1e-9)
}

fn gradient(rng: &mut ChaCha8Rng, n: usize) -> CheckResult {
    let gains = Gains::default();
    let s = 1e-6;
    let worst = (0..n.max(1))
        .map(|_| {
            let reference = directions(rng, 5);
            let observed = reference.iter().enumerate().map(|(i, p)| (i, *p)).collect();
            let frame = FeatureFrame::new(&reference, observed, Vector3::zeros(), None, 0.0).expect("valid indices");
            let h_hat = random::group(rng, 0.3);
            let x = random::algebra(rng, 1.0);
            let delta = innovation_for(&h_hat, &frame, &gains);
            let fd = (cost_for(&(exp_sl3(&x.scale(s)) * h_hat), &frame, &gains)
                - cost_for(&(exp_sl3(&x.scale(-s)) * h_hat), &frame, &gains))
                / (2.0 * s);
            (fd - delta.inner(&x)).abs() / delta.norm().max(1e-3)
        })
        .fold(0.0, f64::max);
    check("innovation is the gradient of the cost", worst, 1e-6)
}

fn trace_positivity(rng: &mut ChaCha8Rng, n: usize) -> CheckResult {
    let mut worst = 0.0f64;
    for _ in 0..n {
        let reference = directions(rng, 4);
        let e = random::pose_error(rng, 1.0, 0.5);
        let value = trace_positivity_check(&e, &reference);
        let closed: f64 = reference
            .iter()
            .map(|p| {
                let ep = e.apply(p.vector());
                (ep.norm_squared() - ep.dot(p.vector()).powi(2)) / ep.norm().powi(3)
            })
            .sum();
        worst = worst.max((value - closed).abs() / closed.max(1.0)).max(-value);
    }
    check("error-flow trace is non-negative", worst, 1e-10)
}

fn consistency_oracles(rng: &mut ChaCha8Rng, n: usize) -> CheckResult {
    let mut disagreements = 0usize;
    let mut consistent = 0usize;
    for k in 0..n {
        let size = 4 + k % 5;
        let mut dirs = directions(rng, size);
        if k % 3 == 0 {
            // Force a coplanar triple.
            let (a, b) = (*dirs[0].vector(), *dirs[1].vector());
            dirs[2] = ProjectivePoint::new(a * 0.3 + b * 0.7).expect("nonzero");
        }
        if check_consistent(&dirs, DEFAULT_EPS).consistent {
            consistent += 1;
        }
        if cross_validate(&dirs, DEFAULT_EPS).is_err() {
            disagreements += 1;
        }
    }
    CheckResult {
        name: "consistency test agrees with stabilizer rank",
        passed: disagreements == 0,
        detail: format!("{disagreements} disagreements over {n} sets ({consistent} consistent)"),
    }
}

fn lyapunov_decrease(steps: usize) -> CheckResult {
    let reference = wide_square();
    let gains = Gains::default();
    let dt = 1e-3;
    let h = GroupElement::identity();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let state0 = random::pose_error(&mut rng, 0.4, 0.2);
    let mut state = ObserverState::with_estimate(state0, Matrix3::zeros(), ObserverMode::FullVelocity).expect("valid");
    let observed = reference.iter().enumerate().map(|(i, p)| (i, *p)).collect();
    let frame = FeatureFrame::new(&reference, observed, Vector3::zeros(), Some(AlgebraElement::zero()), 0.0).expect("valid");
    let mut prev = lyapunov_from_error(&state.error(&h), &reference, &gains);
    let mut worst = 0.0f64;
    for _ in 0..steps {
        state = step(&state, &frame, &gains, dt, &StepOptions::default()).expect("valid step");
        let l = lyapunov_from_error(&state.error(&h), &reference, &gains);
        worst = worst.max(l - prev);
        prev = l;
    }
    check("cost never increases for a static camera", worst, 1e-14)
}

/// With the truth advanced by the same frozen-velocity step the observer uses,
/// the estimation error follows `E⁺ = exp(−dtΔ(E))E` whatever the motion.
fn error_autonomy(steps: usize) -> CheckResult {
    let plane = PlaneParams::default();
    let traj = drift();
    let reference = wide_square();
    let gains = Gains::default();
    let dt = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut e = random::pose_error(&mut rng, 0.3, 0.2);
    let (c0, _) = traj.sample(0.0, &plane).expect("valid");
    let mut h = true_homography(&c0, &plane).expect("valid");
    let mut state = ObserverState::with_estimate(&e * &h, Matrix3::zeros(), ObserverMode::FullVelocity).expect("valid");
    let mut worst = 0.0f64;
    for k in 0..steps {
        let t = k as f64 * dt;
        let (c, v) = traj.sample(t, &plane).expect("valid");
        let u = true_group_velocity(&c, &v, &plane).expect("valid");
        let observed = reference.iter().enumerate().map(|(i, p)| (i, measurement_map(&h, p))).collect();
        let frame = FeatureFrame::new(&reference, observed, v.omega, Some(u), t).expect("valid");
        state = step(&state, &frame, &gains, dt, &StepOptions::default()).expect("valid step");
        h = h * exp_sl3(&u.scale(dt));
        e = exp_sl3(&error_innovation(&e, &reference, &gains).scale(-dt)) * e;
        worst = worst.max((state.error(&h).matrix() - e.matrix()).norm());
    }
    check("error dynamics are independent of the trajectory", worst, 1e-8)
}

fn determinant_drift(steps: usize) -> CheckResult {
    let reference = wide_square();
    let gains = Gains::uniform(5.0, 1.0).expect("positive gains");
    let dt = 1e-3;
    let mut state = ObserverState::new(ObserverMode::AdaptiveGamma);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for k in 0..steps {
        // Slowly varying measurements keep the observer busy.
        let t = k as f64 * dt;
        let h = exp_sl3(&AlgebraElement::project(&Matrix3::new(
            0.0,
            0.2 * t.sin(),
            0.1,
            -0.2 * t.sin(),
            0.05 * (0.5 * t).cos(),
            0.0,
            0.05,
            0.0,
            -0.05 * (0.5 * t).cos(),
        )));
        let observed = reference.iter().enumerate().map(|(i, p)| (i, measurement_map(&h, p))).collect();
        let omega = Vector3::new(0.1 * random::normal(&mut rng), 0.2, -0.1);
        let frame = FeatureFrame::new(&reference, observed, omega, None, t).expect("valid");
        state = step(&state, &frame, &gains, dt, &StepOptions::default()).expect("valid step");
        worst = worst.max((state.h_hat().determinant() - 1.0).abs());
    }
    check("estimate stays in SL(3)", worst, 1e-9)
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub integrator: String,
    pub steps: usize,
    pub seconds: f64,
    pub steps_per_second: f64,
    pub final_error: f64,
}

/// Times the adaptive-Γ observer on a drifting camera with four features.
pub fn bench(integrator: Integrator, steps: usize) -> Result<BenchReport> {
    let plane = PlaneParams::default();
    let traj = drift();
    let reference = wide_square();
    let gains = Gains::default();
    let options = StepOptions {
        integrator,
        inner_iterations: 1,
    };
    let dt = 1e-3;
    let mut state = ObserverState::new(ObserverMode::AdaptiveGamma);
    let mut h = GroupElement::identity();
    let start = Instant::now();
    for k in 0..steps {
        let t = (k % 20_000) as f64 * dt;
        let (c, v) = traj.sample(t, &plane)?;
        h = true_homography(&c, &plane)?;
        let observed = reference.iter().enumerate().map(|(i, p)| (i, measurement_map(&h, p))).collect();
        let frame = FeatureFrame::new(&reference, observed, v.omega, None, t)?;
        state = step(&state, &frame, &gains, dt, &options)?;
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok(BenchReport {
        integrator: format!("{integrator:?}"),
        steps,
        seconds,
        steps_per_second: steps as f64 / seconds.max(1e-12),
        final_error: (state.error(&h).matrix() - Matrix3::identity()).norm(),
    })
}
