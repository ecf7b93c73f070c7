//! Nonlinear observer for planar homographies on SL(3).
//!
//! Given image directions `pᵢ` of features on a plane, measured in the current
//! camera frame, and some velocity information, the observer maintains an
//! estimate `Ĥ` of the homography `H` with `pᵢ ≅ H⁻¹p̊ᵢ`. Three observer
//! variants are provided, depending on what velocity is measured:
//!
//! * the full group velocity `U` ([`ObserverMode::FullVelocity`]),
//! * the gyro `Ω` with `Γ = U − Ω×` estimated online ([`ObserverMode::AdaptiveGamma`]),
//! * the gyro `Ω` with `Γ₁ = Γ + Ω×` estimated online ([`ObserverMode::AdaptiveGamma1`]).
//!
//! The [`sim`] module drives an observer against closed-form camera
//! trajectories and logs the result; [`suite`] runs the built-in property
//! checks and timing benchmark.

pub mod consistency;
pub mod error;
pub mod observer;
pub mod random;
pub mod scene;
pub mod sim;
pub mod sl3;
pub mod suite;
pub mod trajectory;

pub use consistency::{check_consistent, stabilizer_nullity, ConsistencyReport};
pub use error::{Error, Result};
pub use observer::{
    innovation, step, FeatureFrame, Gains, Integrator, ObserverMode, ObserverState, StepOptions,
};
pub use scene::{CameraIntrinsics, CameraState, PlaneParams, RigidVelocity};
pub use sim::{run_scenario, RunLog, Scenario};
pub use sl3::{exp_sl3, AlgebraElement, GroupElement, ProjectivePoint};
pub use trajectory::Trajectory;
