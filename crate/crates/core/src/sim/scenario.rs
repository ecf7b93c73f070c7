//! Scenario files.
//!
//! A scenario is a JSON object with `"schema": 1`. Unknown fields are rejected.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "name": "drift",
//!   "trajectory": { "type": "constant_xi_over_d", "rotation": [0, 0, 0], "position": [0, 0, 0],
//!                   "omega": [0, 0, 0.3], "xi_dot_over_d": [0.04, 0.02, 0] },
//!   "duration": 20.0,
//!   "dt": 0.001,
//!   "plane": { "normal": [0, 0, 1], "distance": 1.0, "min_depth": 0.05 },
//!   "features": { "square": { "side": 2.0 } },
//!   "noise": { "gyro_sigma": 0.0, "direction_sigma": 0.0, "velocity_sigma": 0.0 },
//!   "dropout": [ { "start": 12.0, "end": 13.0, "visible": [] } ],
//!   "observer": { "mode": "adaptive_gamma", "feature_gain": 60, "adaptive_gain": 1.0,
//!                 "initial_estimate": "identity" },
//!   "seed": 7
//! }
//! ```
//!
//! Trajectory types are `static`, `constant_xi_over_d`, `circular_v_over_d`
//! (`center`, `rate`) and `waypoints` (`points: [{t, position, rotation}]`).
//! Rotations are axis-angle vectors. Features are either `{"square": {"side": s}}`
//! or `{"directions": [[x, y, z], ...]}`. `initial_estimate` is `"identity"`,
//! `"truth"`, `{"matrix": [[..], [..], [..]]}` or `{"pose_offset": {"rotation",
//! "translation", "normal"}}`; the last two are applied as an error `E(0)`
//! with `Ĥ(0) = E(0)H(0)`.

use std::path::Path;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::consistency::{check_consistent, ConsistencyReport, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::observer::{Gains, Integrator, ObserverMode, StepOptions, DEFAULT_ADAPTIVE_GAIN, DEFAULT_FEATURE_GAIN};
use crate::scene::{reference_square, PlaneParams, DEFAULT_MIN_DEPTH, DEFAULT_SQUARE_SIDE};
use crate::sl3::{normalize_to_sl3, traceless, GroupElement, ProjectivePoint};
use crate::trajectory::{Trajectory, Waypoint};

pub const SCHEMA_VERSION: u32 = 1;

type Vec3 = [f64; 3];
type Mat3 = [[f64; 3]; 3];

fn vec3(v: &Vec3) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

fn mat3(m: &Mat3) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    pub trajectory: TrajectorySpec,
    pub duration: f64,
    pub dt: f64,
    #[serde(default)]
    pub plane: PlaneSpec,
    #[serde(default)]
    pub features: FeatureSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub dropout: Vec<DropoutSpec>,
    pub observer: ObserverSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    Static {
        #[serde(default)]
        rotation: Vec3,
        #[serde(default)]
        position: Vec3,
    },
    ConstantXiOverD {
        #[serde(default)]
        rotation: Vec3,
        #[serde(default)]
        position: Vec3,
        #[serde(default)]
        omega: Vec3,
        xi_dot_over_d: Vec3,
    },
    CircularVOverD {
        #[serde(default)]
        rotation: Vec3,
        position: Vec3,
        #[serde(default)]
        center: Vec3,
        rate: f64,
    },
    Waypoints {
        points: Vec<WaypointSpec>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointSpec {
    pub t: f64,
    pub position: Vec3,
    #[serde(default)]
    pub rotation: Vec3,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneSpec {
    pub normal: Vec3,
    pub distance: f64,
    #[serde(default = "default_min_depth")]
    pub min_depth: f64,
}

fn default_min_depth() -> f64 {
    DEFAULT_MIN_DEPTH
}

impl Default for PlaneSpec {
    fn default() -> Self {
        Self {
            normal: [0.0, 0.0, 1.0],
            distance: 1.0,
            min_depth: DEFAULT_MIN_DEPTH,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureSpec {
    Square { side: f64 },
    Directions(Vec<Vec3>),
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec::Square {
            side: DEFAULT_SQUARE_SIDE,
        }
    }
}

/// Measurement corruption, all standard deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Additive white noise on each gyro axis (rad/s).
    #[serde(default)]
    pub gyro_sigma: f64,
    /// Tangent-plane perturbation of each direction (rad).
    #[serde(default)]
    pub direction_sigma: f64,
    /// Per-coordinate perturbation of the measured group velocity (1/s).
    #[serde(default)]
    pub velocity_sigma: f64,
}

impl NoiseSpec {
    pub fn is_off(&self) -> bool {
        self.gyro_sigma == 0.0 && self.direction_sigma == 0.0 && self.velocity_sigma == 0.0
    }
}

/// During `[start, end)` only the listed features are observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropoutSpec {
    pub start: f64,
    pub end: f64,
    #[serde(default)]
    pub visible: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Uniform(f64),
    PerFeature(Vec<f64>),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    FullVelocity,
    AdaptiveGamma,
    AdaptiveGamma1,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorSpec {
    #[default]
    ExpEuler,
    Rk4Renorm,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialEstimateSpec {
    #[default]
    Identity,
    Truth,
    Matrix(Mat3),
    PoseOffset {
        rotation: Vec3,
        translation: Vec3,
        normal: Vec3,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSpec {
    pub mode: ModeSpec,
    #[serde(default = "default_feature_gain")]
    pub feature_gain: GainSpec,
    #[serde(default = "default_adaptive_gain")]
    pub adaptive_gain: f64,
    #[serde(default = "default_inner")]
    pub inner_iterations: u32,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub initial_estimate: InitialEstimateSpec,
    #[serde(default)]
    pub initial_gamma: Option<Mat3>,
}

fn default_feature_gain() -> GainSpec {
    GainSpec::Uniform(DEFAULT_FEATURE_GAIN)
}

fn default_adaptive_gain() -> f64 {
    DEFAULT_ADAPTIVE_GAIN
}

fn default_inner() -> u32 {
    1
}

/// How the observer's first estimate is built from the true `H(0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialEstimate {
    Identity,
    Truth,
    /// Initial right error `E(0)`; the estimate is `E(0)H(0)`.
    Error(GroupElement),
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub trajectory: Trajectory,
    pub duration: f64,
    pub dt: f64,
    pub plane: PlaneParams,
    pub reference: Vec<ProjectivePoint>,
    pub noise: NoiseSpec,
    pub dropout: Vec<DropoutSpec>,
    pub mode: ObserverMode,
    pub gains: Gains,
    pub options: StepOptions,
    pub initial_estimate: InitialEstimate,
    pub initial_gamma: Matrix3<f64>,
    pub seed: u64,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        if file.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                file.schema
            )));
        }
        if !(file.dt.is_finite() && file.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", file.dt)));
        }
        if !(file.duration.is_finite() && file.duration >= file.dt) {
            return Err(Error::Config("duration must be at least one time step".into()));
        }

        let plane = PlaneParams::new(vec3(&file.plane.normal), file.plane.distance)?.with_min_depth(file.plane.min_depth)?;
        let trajectory = build_trajectory(&file.trajectory);
        trajectory.validate()?;

        let reference = match &file.features {
            FeatureSpec::Square { side } => reference_square(&plane, *side)?,
            FeatureSpec::Directions(dirs) => dirs
                .iter()
                .map(|d| ProjectivePoint::new(vec3(d)))
                .collect::<Result<Vec<_>>>()?,
        };
        if reference.is_empty() {
            return Err(Error::Config("scenario has no reference features".into()));
        }

        let n = file.noise;
        if [n.gyro_sigma, n.direction_sigma, n.velocity_sigma]
            .iter()
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return Err(Error::Config("noise levels must be non-negative".into()));
        }
        for d in &file.dropout {
            if !(d.end > d.start) {
                return Err(Error::Config(format!("dropout interval [{}, {}) is empty", d.start, d.end)));
            }
            if let Some(i) = d.visible.iter().find(|&&i| i >= reference.len()) {
                return Err(Error::Config(format!("dropout lists unknown feature {i}")));
            }
        }

        let mode = match file.observer.mode {
            ModeSpec::FullVelocity => ObserverMode::FullVelocity,
            ModeSpec::AdaptiveGamma => ObserverMode::AdaptiveGamma,
            ModeSpec::AdaptiveGamma1 => ObserverMode::AdaptiveGamma1,
        };
        let per_feature = match &file.observer.feature_gain {
            GainSpec::Uniform(k) => vec![*k],
            GainSpec::PerFeature(k) => k.clone(),
        };
        let gains = Gains::new(per_feature, file.observer.adaptive_gain)?;
        gains.check(reference.len(), mode)?;
        if file.observer.inner_iterations == 0 {
            return Err(Error::Config("inner_iterations must be at least 1".into()));
        }
        let options = StepOptions {
            integrator: match file.observer.integrator {
                IntegratorSpec::ExpEuler => Integrator::ExpEuler,
                IntegratorSpec::Rk4Renorm => Integrator::Rk4Renorm,
            },
            inner_iterations: file.observer.inner_iterations,
        };
        let initial_estimate = match &file.observer.initial_estimate {
            InitialEstimateSpec::Identity => InitialEstimate::Identity,
            InitialEstimateSpec::Truth => InitialEstimate::Truth,
            InitialEstimateSpec::Matrix(m) => InitialEstimate::Error(normalize_to_sl3(&mat3(m))?),
            InitialEstimateSpec::PoseOffset {
                rotation,
                translation,
                normal,
            } => {
                let r = Rotation3::new(vec3(rotation)).into_inner();
                InitialEstimate::Error(normalize_to_sl3(&(r + vec3(translation) * vec3(normal).transpose()))?)
            }
        };
        let mut initial_gamma = file.observer.initial_gamma.as_ref().map(mat3).unwrap_or_else(Matrix3::zeros);
        if mode == ObserverMode::AdaptiveGamma {
            initial_gamma = traceless(&initial_gamma);
        }

        Ok(Self {
            name: file.name,
            trajectory,
            duration: file.duration,
            dt: file.dt,
            plane,
            reference,
            noise: file.noise,
            dropout: file.dropout,
            mode,
            gains,
            options,
            initial_estimate,
            initial_gamma,
            seed: file.seed,
        })
    }

    /// Number of observer steps; the log holds one more row than this.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Indices of the features observed at time `t`.
    pub fn visible_at(&self, t: f64) -> Vec<usize> {
        match self.dropout.iter().find(|d| t >= d.start && t < d.end) {
            Some(d) => d.visible.clone(),
            None => (0..self.reference.len()).collect(),
        }
    }

    pub fn consistency(&self) -> ConsistencyReport {
        check_consistent(&self.reference, DEFAULT_EPS)
    }
}

fn build_trajectory(spec: &TrajectorySpec) -> Trajectory {
    let rot = |v: &Vec3| Rotation3::new(vec3(v)).into_inner();
    match spec {
        TrajectorySpec::Static { rotation, position } => Trajectory::Static {
            rotation: rot(rotation),
            position: vec3(position),
        },
        TrajectorySpec::ConstantXiOverD {
            rotation,
            position,
            omega,
            xi_dot_over_d,
        } => Trajectory::ConstantXiOverD {
            rotation: rot(rotation),
            position: vec3(position),
            omega: vec3(omega),
            xi_dot_over_d: vec3(xi_dot_over_d),
        },
        TrajectorySpec::CircularVOverD {
            rotation,
            position,
            center,
            rate,
        } => Trajectory::CircularVOverD {
            rotation: rot(rotation),
            position: vec3(position),
            center: vec3(center),
            rate: *rate,
        },
        TrajectorySpec::Waypoints { points } => Trajectory::Waypoints(
            points
                .iter()
                .map(|p| Waypoint {
                    t: p.t,
                    position: vec3(&p.position),
                    rotation: vec3(&p.rotation),
                })
                .collect(),
        ),
    }
}
