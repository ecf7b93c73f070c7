//! Homography observers on SL(3).
//!
//! Three variants share one innovation term:
//!
//! * [`ObserverMode::FullVelocity`]: the group velocity `U` is measured.
//! * [`ObserverMode::AdaptiveGamma`]: only the gyro rate `Ω` is measured and the
//!   translational term `Γ` (traceless) is estimated, assuming `ξ̇/d` constant.
//! * [`ObserverMode::AdaptiveGamma1`]: as above with `Γ₁ = (V/d)ηᵀ`, assuming `V/d`
//!   constant. `Γ₁` is not traceless; its trace is removed only when it enters
//!   the velocity.
//!
//! The innovation is `Δ = −Σ kᵢ π_{eᵢ} p̊ᵢ eᵢᵀ` with `eᵢ = Ĥpᵢ/|Ĥpᵢ|`. The sign of each
//! `eᵢ` is chosen so that `eᵢᵀp̊ᵢ ≥ 0`, which makes the cost and the innovation
//! independent of the representative picked for `pᵢ` and leaves them unchanged
//! wherever the natural representative already points towards `p̊ᵢ`.
//!
//! Each step applies the correction on the left and the velocity on the right,
//! `Ĥ⁺ = exp(−dt Δ) Ĥ exp(dt Û)`, so the discrete error `E = ĤH⁻¹` of the full
//! observer evolves as `E⁺ = exp(−dt Δ(E, p̊)) E` whatever the true trajectory.

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::error::{Error, Result};
use crate::sl3::{exp_sl3, projector, skew, traceless, AlgebraElement, GroupElement, ProjectivePoint};

/// Per-feature gain used in the hand-held experiment and as the simulator default.
pub const DEFAULT_FEATURE_GAIN: f64 = 60.0;
/// Adaptive gain paired with [`DEFAULT_FEATURE_GAIN`].
pub const DEFAULT_ADAPTIVE_GAIN: f64 = 1.0;
/// Adaptive gain of the image-stabilization preset.
pub const STABILIZATION_ADAPTIVE_GAIN: f64 = 0.0375;
/// Inner iterations per frame of the image-stabilization preset.
pub const STABILIZATION_INNER_ITERATIONS: u32 = 1000;

/// Steps between determinant renormalizations of the estimate.
const RENORMALIZE_EVERY: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObserverMode {
    FullVelocity,
    AdaptiveGamma,
    AdaptiveGamma1,
}

impl ObserverMode {
    pub fn is_adaptive(self) -> bool {
        !matches!(self, ObserverMode::FullVelocity)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Integrator {
    /// Split exponential update; exact on the group.
    #[default]
    ExpEuler,
    /// Classical RK4 on the ambient matrices followed by projection to SL(3).
    Rk4Renorm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    pub integrator: Integrator,
    /// Innovation-only updates of length `dt` per step, all against the same
    /// frozen measurements; the velocity terms are applied once.
    pub inner_iterations: u32,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::ExpEuler,
            inner_iterations: 1,
        }
    }
}

/// Observer gains. A single per-feature entry applies to every feature.
#[derive(Clone, Debug, PartialEq)]
pub struct Gains {
    per_feature: Vec<f64>,
    adaptive: f64,
}

impl Gains {
    pub fn new(per_feature: Vec<f64>, adaptive: f64) -> Result<Self> {
        if per_feature.is_empty() || per_feature.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::Config("per-feature gains must be positive".into()));
        }
        if !(adaptive.is_finite() && adaptive >= 0.0) {
            return Err(Error::Config("adaptive gain must be non-negative".into()));
        }
        Ok(Self { per_feature, adaptive })
    }

    pub fn uniform(k: f64, adaptive: f64) -> Result<Self> {
        Self::new(vec![k], adaptive)
    }

    pub fn feature(&self, index: usize) -> f64 {
        if self.per_feature.len() == 1 {
            self.per_feature[0]
        } else {
            self.per_feature[index]
        }
    }

    pub fn adaptive(&self) -> f64 {
        self.adaptive
    }

    /// Checks the gains fit a reference set of `n` features under `mode`.
    pub fn check(&self, n: usize, mode: ObserverMode) -> Result<()> {
        if self.per_feature.len() != 1 && self.per_feature.len() != n {
            return Err(Error::Config(format!(
                "{} per-feature gains for {n} reference features",
                self.per_feature.len()
            )));
        }
        if mode.is_adaptive() && !(self.adaptive > 0.0) {
            return Err(Error::Config("adaptive observers need a positive adaptive gain".into()));
        }
        Ok(())
    }
}

impl Default for Gains {
    fn default() -> Self {
        Self {
            per_feature: vec![DEFAULT_FEATURE_GAIN],
            adaptive: DEFAULT_ADAPTIVE_GAIN,
        }
    }
}

/// Estimate `Ĥ` together with the adaptive velocity term (`Γ̂` or `Γ̂₁`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObserverState {
    h_hat: GroupElement,
    gamma_hat: Matrix3<f64>,
    mode: ObserverMode,
    steps: u64,
}

impl ObserverState {
    /// `Ĥ = I`, zero velocity estimate.
    pub fn new(mode: ObserverMode) -> Self {
        Self {
            h_hat: GroupElement::identity(),
            gamma_hat: Matrix3::zeros(),
            mode,
            steps: 0,
        }
    }

    pub fn with_estimate(h_hat: GroupElement, gamma_hat: Matrix3<f64>, mode: ObserverMode) -> Result<Self> {
        if mode == ObserverMode::AdaptiveGamma && gamma_hat.trace().abs() > 1e-9 {
            return Err(Error::Config("Γ̂ must be traceless".into()));
        }
        Ok(Self {
            h_hat,
            gamma_hat,
            mode,
            steps: 0,
        })
    }

    pub fn h_hat(&self) -> &GroupElement {
        &self.h_hat
    }

    pub fn gamma_hat(&self) -> &Matrix3<f64> {
        &self.gamma_hat
    }

    pub fn mode(&self) -> ObserverMode {
        self.mode
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Right group error `E = ĤH⁻¹`.
    pub fn error(&self, h_true: &GroupElement) -> GroupElement {
        &self.h_hat * &h_true.inverse()
    }
}

/// Measurements available to one observer step.
#[derive(Clone, Debug)]
pub struct FeatureFrame<'a> {
    observed: Vec<(usize, ProjectivePoint)>,
    reference: &'a [ProjectivePoint],
    pub omega: Vector3<f64>,
    pub u_full: Option<AlgebraElement>,
    pub timestamp: f64,
}

impl<'a> FeatureFrame<'a> {
    pub fn new(
        reference: &'a [ProjectivePoint],
        observed: Vec<(usize, ProjectivePoint)>,
        omega: Vector3<f64>,
        u_full: Option<AlgebraElement>,
        timestamp: f64,
    ) -> Result<Self> {
        if let Some((i, _)) = observed.iter().find(|(i, _)| *i >= reference.len()) {
            return Err(Error::Config(format!(
                "observed feature {i} has no reference (only {})",
                reference.len()
            )));
        }
        Ok(Self {
            observed,
            reference,
            omega,
            u_full,
            timestamp,
        })
    }

    pub fn observed(&self) -> &[(usize, ProjectivePoint)] {
        &self.observed
    }

    pub fn reference(&self) -> &'a [ProjectivePoint] {
        self.reference
    }
}

/// `eᵢ = Ĥpᵢ/|Ĥpᵢ|` for each visible feature, in canonical form.
pub fn output_errors(state: &ObserverState, frame: &FeatureFrame) -> Vec<(usize, ProjectivePoint)> {
    frame
        .observed
        .iter()
        .map(|(i, p)| (*i, ProjectivePoint::from_nonzero(state.h_hat.apply(p.vector()))))
        .collect()
}

/// Unit representative of `Ĥp` on the same side as `p̊`.
fn aligned_error(h_hat: &GroupElement, p: &ProjectivePoint, p_ring: &ProjectivePoint) -> Vector3<f64> {
    let e = h_hat.apply(p.vector()).normalize();
    if e.dot(p_ring.vector()) < 0.0 {
        -e
    } else {
        e
    }
}

fn innovation_at(h_hat: &GroupElement, frame: &FeatureFrame, gains: &Gains) -> AlgebraElement {
    let sum = frame.observed.iter().fold(Matrix3::zeros(), |acc, (i, p)| {
        let p_ring = &frame.reference[*i];
        let e = aligned_error(h_hat, p, p_ring);
        acc + projector(&e) * p_ring.vector() * e.transpose() * gains.feature(*i)
    });
    AlgebraElement::project(&(-sum))
}

fn cost_at(h_hat: &GroupElement, frame: &FeatureFrame, gains: &Gains) -> f64 {
    frame
        .observed
        .iter()
        .map(|(i, p)| {
            let p_ring = &frame.reference[*i];
            0.5 * gains.feature(*i) * (aligned_error(h_hat, p, p_ring) - p_ring.vector()).norm_squared()
        })
        .sum()
}

/// Innovation `Δ(Ĥ, p) ∈ sl(3)`; zero when nothing is visible.
pub fn innovation(state: &ObserverState, frame: &FeatureFrame, gains: &Gains) -> AlgebraElement {
    innovation_at(&state.h_hat, frame, gains)
}

/// `Σ (kᵢ/2) |eᵢ − p̊ᵢ|²` over the visible features.
pub fn aggregate_cost(state: &ObserverState, frame: &FeatureFrame, gains: &Gains) -> f64 {
    cost_at(&state.h_hat, frame, gains)
}

/// Innovation evaluated directly at an arbitrary estimate.
pub fn innovation_for(h_hat: &GroupElement, frame: &FeatureFrame, gains: &Gains) -> AlgebraElement {
    innovation_at(h_hat, frame, gains)
}

/// Cost evaluated directly at an arbitrary estimate.
pub fn cost_for(h_hat: &GroupElement, frame: &FeatureFrame, gains: &Gains) -> f64 {
    cost_at(h_hat, frame, gains)
}

/// `L₀` measured from the observer's visible measurements (equals the
/// ground-truth `L₀` restricted to those features, by right invariance).
pub fn lyapunov_full(state: &ObserverState, frame: &FeatureFrame, gains: &Gains) -> f64 {
    aggregate_cost(state, frame, gains)
}

/// `L = L₀ + ‖Γ − Γ̂‖²/(2k_I)` with the true `Γ` (or `Γ₁`) supplied by the caller.
pub fn lyapunov_adaptive(state: &ObserverState, frame: &FeatureFrame, gains: &Gains, gamma_true: &Matrix3<f64>) -> f64 {
    lyapunov_full(state, frame, gains) + (gamma_true - state.gamma_hat).norm_squared() / (2.0 * gains.adaptive)
}

/// Ground-truth `L₀ = Σ (kᵢ/2)|Ep̊ᵢ/|Ep̊ᵢ| − p̊ᵢ|²` over every reference feature.
pub fn lyapunov_from_error(error: &GroupElement, reference: &[ProjectivePoint], gains: &Gains) -> f64 {
    reference
        .iter()
        .enumerate()
        .map(|(i, p_ring)| 0.5 * gains.feature(i) * (aligned_error(error, p_ring, p_ring) - p_ring.vector()).norm_squared())
        .sum()
}

/// Innovation of the error system, `Δ(E, p̊)`, over every reference feature.
pub fn error_innovation(error: &GroupElement, reference: &[ProjectivePoint], gains: &Gains) -> AlgebraElement {
    let sum = reference.iter().enumerate().fold(Matrix3::zeros(), |acc, (i, p_ring)| {
        let e = aligned_error(error, p_ring, p_ring);
        acc + projector(&e) * p_ring.vector() * e.transpose() * gains.feature(i)
    });
    AlgebraElement::project(&(-sum))
}

/// `tr(−Δ(E, p̊) E⁻ᵀ)` with unit gains and the natural representatives
/// `eᵢ = Ep̊ᵢ/|Ep̊ᵢ|`. `−ΔE` generates the error flow, and this trace equals
/// `Σ (|Ep̊ᵢ|²|p̊ᵢ|² − ((Ep̊ᵢ)ᵀp̊ᵢ)²)/|Ep̊ᵢ|³ ≥ 0`, vanishing only when every
/// `p̊ᵢ` is an eigenvector of `E`.
pub fn trace_positivity_check(error: &GroupElement, reference: &[ProjectivePoint]) -> f64 {
    let generator = reference.iter().fold(Matrix3::zeros(), |acc, p_ring| {
        let e = error.apply(p_ring.vector()).normalize();
        acc + projector(&e) * p_ring.vector() * e.transpose()
    });
    (generator * error.inverse().matrix().transpose()).trace()
}

/// Velocity fed forward by the observer: `U`, `Ω× + Γ̂`, or `Ω× + Γ̂₁ − tr(Γ̂₁)/3 I`.
pub fn velocity_estimate(state: &ObserverState, frame: &FeatureFrame) -> Result<AlgebraElement> {
    match state.mode {
        ObserverMode::FullVelocity => frame.u_full.ok_or(Error::MissingVelocity),
        ObserverMode::AdaptiveGamma | ObserverMode::AdaptiveGamma1 => {
            Ok(skew(&frame.omega) + AlgebraElement::project(&state.gamma_hat))
        }
    }
}

/// `Ĥᵀ Δ Ĥ⁻ᵀ`.
fn adaptive_correction(h_hat: &GroupElement, delta: &AlgebraElement) -> Matrix3<f64> {
    h_hat.matrix().transpose() * delta.matrix() * h_hat.inverse().matrix().transpose()
}

/// Γ̂ dynamics without the correction term, integrated exactly over `dt`.
fn transport_gamma(mode: ObserverMode, gamma_hat: &Matrix3<f64>, omega: &Vector3<f64>, dt: f64) -> Matrix3<f64> {
    let rot = Rotation3::new(omega * dt).into_inner();
    match mode {
        ObserverMode::FullVelocity => *gamma_hat,
        // Γ̇ = [Γ, Ω×]
        ObserverMode::AdaptiveGamma => rot.transpose() * gamma_hat * rot,
        // Γ̇₁ = Γ₁ Ω×
        ObserverMode::AdaptiveGamma1 => gamma_hat * rot,
    }
}

/// One observer step of length `dt` for whichever mode `state` is in.
pub fn step(
    state: &ObserverState,
    frame: &FeatureFrame,
    gains: &Gains,
    dt: f64,
    options: &StepOptions,
) -> Result<ObserverState> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    if options.inner_iterations == 0 {
        return Err(Error::Config("inner iterations must be at least 1".into()));
    }
    gains.check(frame.reference.len(), state.mode)?;
    let mut next = match options.integrator {
        Integrator::ExpEuler => step_exp_euler(state, frame, gains, dt, options.inner_iterations)?,
        Integrator::Rk4Renorm => step_rk4(state, frame, gains, dt, options.inner_iterations)?,
    };
    next.steps = state.steps + 1;
    if next.steps % RENORMALIZE_EVERY == 0 {
        next.h_hat = next.h_hat.renormalized();
    }
    Ok(next)
}

fn step_exp_euler(
    state: &ObserverState,
    frame: &FeatureFrame,
    gains: &Gains,
    dt: f64,
    inner: u32,
) -> Result<ObserverState> {
    let u_hat = velocity_estimate(state, frame)?;
    let mut h_hat = state.h_hat;
    let mut correction = Matrix3::zeros();
    if !frame.observed.is_empty() {
        for _ in 0..inner {
            let delta = innovation_at(&h_hat, frame, gains);
            if state.mode.is_adaptive() {
                correction -= adaptive_correction(&h_hat, &delta) * (dt * gains.adaptive);
            }
            h_hat = exp_sl3(&delta.scale(-dt)) * h_hat;
        }
    }
    h_hat = h_hat * exp_sl3(&u_hat.scale(dt));

    let mut gamma_hat = transport_gamma(state.mode, &state.gamma_hat, &frame.omega, dt) + correction;
    if state.mode == ObserverMode::AdaptiveGamma {
        gamma_hat = traceless(&gamma_hat);
    }
    Ok(ObserverState {
        h_hat,
        gamma_hat,
        mode: state.mode,
        steps: state.steps,
    })
}

fn step_rk4(state: &ObserverState, frame: &FeatureFrame, gains: &Gains, dt: f64, inner: u32) -> Result<ObserverState> {
    let mode = state.mode;
    let u_full = match mode {
        ObserverMode::FullVelocity => Some(*frame.u_full.as_ref().ok_or(Error::MissingVelocity)?.matrix()),
        _ => None,
    };
    let omega = frame.omega.cross_matrix();
    // `moving = false` gives the innovation-only dynamics used by the repeated
    // corrections.
    let derivative = |hm: &Matrix3<f64>, gm: &Matrix3<f64>, moving: bool| -> (Matrix3<f64>, Matrix3<f64>) {
        let g = GroupElement::from_unit_det(*hm);
        let delta = innovation_at(&g, frame, gains);
        let correction = adaptive_correction(&g, &delta) * gains.adaptive;
        if !moving {
            let g_dot = if mode.is_adaptive() { -correction } else { Matrix3::zeros() };
            return (-delta.matrix() * hm, g_dot);
        }
        let u = u_full.unwrap_or_else(|| omega + traceless(gm));
        let h_dot = hm * u - delta.matrix() * hm;
        let g_dot = match mode {
            ObserverMode::FullVelocity => Matrix3::zeros(),
            ObserverMode::AdaptiveGamma => gm * omega - omega * gm - correction,
            ObserverMode::AdaptiveGamma1 => gm * omega - correction,
        };
        (h_dot, g_dot)
    };

    let h = dt;
    let mut hm = *state.h_hat.matrix();
    let mut gm = state.gamma_hat;
    for k in 0..inner {
        let moving = k + 1 == inner;
        if !moving && frame.observed.is_empty() {
            continue;
        }
        let (k1h, k1g) = derivative(&hm, &gm, moving);
        let (k2h, k2g) = derivative(&(hm + k1h * (h / 2.0)), &(gm + k1g * (h / 2.0)), moving);
        let (k3h, k3g) = derivative(&(hm + k2h * (h / 2.0)), &(gm + k2g * (h / 2.0)), moving);
        let (k4h, k4g) = derivative(&(hm + k3h * h), &(gm + k3g * h), moving);
        hm += (k1h + k2h * 2.0 + k3h * 2.0 + k4h) * (h / 6.0);
        gm += (k1g + k2g * 2.0 + k3g * 2.0 + k4g) * (h / 6.0);
    }
    if mode == ObserverMode::AdaptiveGamma {
        gm = traceless(&gm);
    }
    Ok(ObserverState {
        h_hat: GroupElement::from_matrix(hm)?,
        gamma_hat: gm,
        mode,
        steps: state.steps,
    })
}

fn require_mode(state: &ObserverState, mode: ObserverMode) -> Result<()> {
    if state.mode != mode {
        return Err(Error::Config(format!("observer is in {:?} mode, expected {mode:?}", state.mode)));
    }
    Ok(())
}

/// Full-velocity observer step, `Ĥ̇ = ĤU − ΔĤ`.
pub fn step_full(state: &ObserverState, frame: &FeatureFrame, gains: &Gains, dt: f64) -> Result<ObserverState> {
    require_mode(state, ObserverMode::FullVelocity)?;
    step(state, frame, gains, dt, &StepOptions::default())
}

/// Adaptive step with `Γ̂̇ = [Γ̂, Ω×] − k_I ĤᵀΔĤ⁻ᵀ`.
pub fn step_adaptive_gamma(state: &ObserverState, frame: &FeatureFrame, gains: &Gains, dt: f64) -> Result<ObserverState> {
    require_mode(state, ObserverMode::AdaptiveGamma)?;
    step(state, frame, gains, dt, &StepOptions::default())
}

/// Adaptive step with `Γ̂̇₁ = Γ̂₁Ω× − k_I ĤᵀΔĤ⁻ᵀ`.
pub fn step_adaptive_gamma1(state: &ObserverState, frame: &FeatureFrame, gains: &Gains, dt: f64) -> Result<ObserverState> {
    require_mode(state, ObserverMode::AdaptiveGamma1)?;
    step(state, frame, gains, dt, &StepOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl3::measurement_map;
    use approx::assert_relative_eq;

    fn square() -> Vec<ProjectivePoint> {
        [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
            .iter()
            .map(|&(x, y)| ProjectivePoint::from_xyz(x, y, 1.0).unwrap())
            .collect()
    }

    fn sample_h() -> GroupElement {
        GroupElement::from_matrix(Matrix3::new(1.05, 0.1, 0.02, -0.08, 0.97, 0.05, 0.03, -0.02, 1.0)).unwrap()
    }

    fn measured<'a>(reference: &'a [ProjectivePoint], h: &GroupElement) -> FeatureFrame<'a> {
        let observed = reference.iter().enumerate().map(|(i, p)| (i, measurement_map(h, p))).collect();
        FeatureFrame::new(reference, observed, Vector3::zeros(), Some(AlgebraElement::zero()), 0.0).unwrap()
    }

    #[test]
    fn perfect_estimate_has_zero_error_terms() {
        let refs = square();
        let h = sample_h();
        let frame = measured(&refs, &h);
        let state = ObserverState::with_estimate(h, Matrix3::zeros(), ObserverMode::FullVelocity).unwrap();
        for (i, e) in output_errors(&state, &frame) {
            assert_relative_eq!(*e.vector(), *refs[i].vector(), epsilon = 1e-14);
        }
        assert!(innovation(&state, &frame, &Gains::default()).norm() < 1e-12);
        assert!(aggregate_cost(&state, &frame, &Gains::default()) < 1e-24);
    }

    #[test]
    fn identity_estimate_reports_measurements() {
        let refs = square();
        let frame = measured(&refs, &sample_h());
        let state = ObserverState::new(ObserverMode::FullVelocity);
        for ((_, e), (_, p)) in output_errors(&state, &frame).iter().zip(frame.observed()) {
            assert_relative_eq!(*e.vector(), *p.vector(), epsilon = 1e-15);
        }
    }

    #[test]
    fn single_orthogonal_feature_innovation() {
        let refs = [ProjectivePoint::from_xyz(0.0, 0.0, 1.0).unwrap()];
        let e1 = ProjectivePoint::from_xyz(1.0, 0.0, 0.0).unwrap();
        let frame = FeatureFrame::new(&refs, vec![(0, e1)], Vector3::zeros(), None, 0.0).unwrap();
        let state = ObserverState::new(ObserverMode::FullVelocity);
        let delta = innovation(&state, &frame, &Gains::uniform(1.0, 1.0).unwrap());
        let mut expected = Matrix3::zeros();
        expected[(2, 0)] = -1.0;
        assert_relative_eq!(*delta.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn no_features_means_no_innovation() {
        let refs = square();
        let frame = FeatureFrame::new(&refs, vec![], Vector3::zeros(), None, 0.0).unwrap();
        let state = ObserverState::new(ObserverMode::FullVelocity);
        assert_eq!(*innovation(&state, &frame, &Gains::default()).matrix(), Matrix3::zeros());
        assert_eq!(aggregate_cost(&state, &frame, &Gains::default()), 0.0);
    }

    #[test]
    fn frame_rejects_unknown_feature() {
        let refs = square();
        let p = refs[0];
        assert!(FeatureFrame::new(&refs, vec![(7, p)], Vector3::zeros(), None, 0.0).is_err());
    }

    #[test]
    fn idle_step_is_identity() {
        let refs = square();
        let frame = measured(&refs, &GroupElement::identity());
        let state = ObserverState::new(ObserverMode::FullVelocity);
        let next = step_full(&state, &frame, &Gains::default(), 1e-3).unwrap();
        assert_relative_eq!(*next.h_hat().matrix(), Matrix3::identity(), epsilon = 1e-15);
    }

    #[test]
    fn full_step_requires_velocity_and_mode() {
        let refs = square();
        let mut frame = measured(&refs, &GroupElement::identity());
        frame.u_full = None;
        let state = ObserverState::new(ObserverMode::FullVelocity);
        assert!(matches!(step_full(&state, &frame, &Gains::default(), 1e-3), Err(Error::MissingVelocity)));
        let adaptive = ObserverState::new(ObserverMode::AdaptiveGamma);
        assert!(step_full(&adaptive, &frame, &Gains::default(), 1e-3).is_err());
        assert!(step_full(&state, &frame, &Gains::default(), 0.0).is_err());
    }

    #[test]
    fn adaptive_terms_hold_without_rotation_or_innovation() {
        let refs = square();
        let frame = measured(&refs, &GroupElement::identity());
        let g = traceless(&Matrix3::new(0.1, 0.2, 0.0, -0.1, 0.05, 0.3, 0.0, 0.1, 0.2));
        let state = ObserverState::with_estimate(GroupElement::identity(), g, ObserverMode::AdaptiveGamma).unwrap();
        // Ĥ = H = I, so Δ = 0 and Γ̂ must not move.
        let next = step_adaptive_gamma(&state, &frame, &Gains::default(), 1e-3).unwrap();
        assert_relative_eq!(*next.gamma_hat(), g, epsilon = 1e-15);

        let g1 = Matrix3::new(0.1, 0.0, 0.3, 0.0, 0.2, 0.0, 0.1, 0.0, 0.4);
        let state = ObserverState::with_estimate(GroupElement::identity(), g1, ObserverMode::AdaptiveGamma1).unwrap();
        let next = step_adaptive_gamma1(&state, &frame, &Gains::default(), 1e-3).unwrap();
        assert_relative_eq!(*next.gamma_hat(), g1, epsilon = 1e-15);
    }

    #[test]
    fn gamma1_velocity_is_traceless() {
        let refs = square();
        let mut frame = measured(&refs, &GroupElement::identity());
        frame.omega = Vector3::new(0.2, -0.1, 0.4);
        let g1 = Matrix3::new(0.3, 0.1, 0.2, 0.0, 0.5, -0.2, 0.4, 0.1, 0.9);
        let state = ObserverState::with_estimate(GroupElement::identity(), g1, ObserverMode::AdaptiveGamma1).unwrap();
        assert!(velocity_estimate(&state, &frame).unwrap().trace().abs() < 1e-15);
    }

    #[test]
    fn gains_validation() {
        assert!(Gains::new(vec![], 1.0).is_err());
        assert!(Gains::new(vec![1.0, -2.0], 1.0).is_err());
        let g = Gains::new(vec![1.0, 2.0], 0.0).unwrap();
        assert_eq!(g.feature(1), 2.0);
        assert!(g.check(2, ObserverMode::FullVelocity).is_ok());
        assert!(g.check(2, ObserverMode::AdaptiveGamma).is_err());
        assert!(g.check(3, ObserverMode::FullVelocity).is_err());
    }

    #[test]
    fn trace_check_vanishes_on_scalar_errors() {
        let refs = square();
        assert!(trace_positivity_check(&GroupElement::identity(), &refs).abs() < 1e-14);
        let scaled = GroupElement::from_unit_det(Matrix3::identity() * 2.0);
        assert!(trace_positivity_check(&scaled, &refs).abs() < 1e-14);
    }

    #[test]
    fn trace_check_hand_value() {
        // E = diag(2, 1, 1/2), p̊ = (1, 1, 1)/√3: Ep̊ = (2, 1, 1/2)/√3, |Ep̊|² = 5.25/3,
        // (Ep̊)ᵀp̊ = 3.5/3; the single term is (5.25/3 − (3.5/3)²)/(5.25/3)^{3/2}.
        let refs = [ProjectivePoint::from_xyz(1.0, 1.0, 1.0).unwrap()];
        let e = GroupElement::from_matrix(Matrix3::from_diagonal(&Vector3::new(2.0, 1.0, 0.5))).unwrap();
        let x2: f64 = 5.25 / 3.0;
        let xy: f64 = 3.5 / 3.0;
        let expected = (x2 - xy * xy) / x2.powf(1.5);
        assert_relative_eq!(trace_positivity_check(&e, &refs), expected, epsilon = 1e-15);
    }
}
