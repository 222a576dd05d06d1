//! Scenario configuration and its TOML file format.
//!
//! ```toml
//! duration = 30.0
//! dt = 5e-5            # optional
//! stride = 10          # optional
//! landmarks = [[7.0, 7.0, 0.0], [-7.0, 7.0, 0.0], [7.0, -7.0, 0.0]]
//!
//! [twist_profile]      # or [[twist_profile]] knots with a `t` field
//! omega = [0.0, 0.0, 0.3]
//! vel = [2.5, 0.0, 0.0]
//!
//! [initial_pose]
//! position = [0.0, 0.0, 6.0]   # rotation defaults to identity
//!
//! [bias]
//! b_omega = [0.09, -0.15, -0.1]
//! b_v = [0.09, 0.06, -0.07]
//!
//! [noise]              # optional, zero by default
//! sigma_y = 0.01
//! seed = 7
//!
//! [gains]
//! k_p = 1.0
//! k_w = 2.0
//! gamma = 30.0         # scalar multiple of I, or a 3×3 matrix
//! alpha = [0.1, 0.1, 0.1]
//!
//! [initial_estimates]  # optional, identity / zero by default
//! p_hat = [0.0, 0.0, 0.0]
//! ```

use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::lie::{Pose, Rotation3, Twist};
use crate::observer::{GainConfig, ObserverState};
use crate::world::{NoiseSpec, SensorBias, TrueState};

/// Name of the built-in reference scenario.
pub const REFERENCE_NAME: &str = "paper-sec5";

/// Default integration step.
///
/// The explicit observer update is stiff: with the reference gains its
/// fastest mode reaches about 3.3e4 s⁻¹ along the reference trajectory, so
/// the step has to stay below roughly 6e-5 s.
pub const DEFAULT_DT: f64 = 5e-5;

pub const DEFAULT_DURATION: f64 = 30.0;

/// Metric decimation stride.
pub const DEFAULT_STRIDE: usize = 10;

/// Upper bound on the number of integration steps in one run.
pub const MAX_STEPS: f64 = 1e8;

/// Body-frame twist as a function of time: piecewise constant between knots.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistProfile {
    knots: Vec<(f64, Twist)>,
}

impl TwistProfile {
    pub fn constant(u: Twist) -> Self {
        Self { knots: vec![(0.0, u)] }
    }

    /// Knots must start at `t = 0` and be strictly increasing in time.
    pub fn schedule(knots: Vec<(f64, Twist)>) -> Result<Self, ConfigError> {
        match knots.first() {
            None => return Err(ConfigError::Invalid("twist schedule is empty".into())),
            Some((t, _)) if *t != 0.0 => {
                return Err(ConfigError::Invalid("twist schedule must start at t = 0".into()))
            }
            _ => {}
        }
        if knots.windows(2).any(|w| w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater)) {
            return Err(ConfigError::Invalid("twist schedule times must be strictly increasing".into()));
        }
        if knots.iter().any(|(t, u)| !t.is_finite() || !u.is_finite()) {
            return Err(ConfigError::Invalid("twist schedule contains non-finite values".into()));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, Twist)] {
        &self.knots
    }

    /// Twist in effect at time `t`.
    pub fn at(&self, t: f64) -> Twist {
        let idx = self.knots.partition_point(|(tk, _)| *tk <= t);
        self.knots[idx.saturating_sub(1)].1
    }
}

/// Everything needed for one co-simulation of truth and observer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub duration: f64,
    pub dt: f64,
    pub stride: usize,
    pub twist_profile: TwistProfile,
    pub initial_pose: Pose,
    pub landmarks: Vec<Vector3<f64>>,
    pub bias: SensorBias,
    pub noise: NoiseSpec,
    pub gains: GainConfig,
    pub initial_estimates: ObserverState,
}

impl ScenarioConfig {
    /// Number of integration steps, `⌈duration/dt⌉`.
    pub fn step_count(&self) -> usize {
        let raw = self.duration / self.dt;
        let nearest = raw.round();
        if (raw - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            raw.ceil() as usize
        }
    }

    pub fn initial_truth(&self) -> TrueState {
        TrueState {
            pose: self.initial_pose,
            landmarks: self.landmarks.clone(),
        }
    }

    /// Checks every configuration invariant; the error names the one violated.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return invalid(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        if self.duration / self.dt > MAX_STEPS {
            return invalid(format!("duration/dt exceeds the {MAX_STEPS:e} step cap"));
        }
        if self.stride == 0 {
            return invalid("stride must be at least 1".into());
        }
        let n = self.landmarks.len();
        if n < 3 {
            return invalid(format!(
                "at least 3 landmarks are required for the pose corrections to be observable, got {n}"
            ));
        }
        if self.gains.alpha.len() != n {
            return invalid(format!("{} alpha weights for {n} landmarks", self.gains.alpha.len()));
        }
        if self.initial_estimates.landmark_count() != n {
            return invalid(format!(
                "{} initial landmark estimates for {n} landmarks",
                self.initial_estimates.landmark_count()
            ));
        }
        let vectors_finite = self
            .landmarks
            .iter()
            .chain(&self.bias.b_y)
            .chain([&self.bias.b_omega, &self.bias.b_v, &self.initial_pose.position])
            .all(|v| v.iter().all(|x| x.is_finite()));
        if !vectors_finite || !self.initial_estimates.is_finite() {
            return invalid("scenario contains non-finite values".into());
        }
        Rotation3::new(*self.initial_pose.rotation.matrix())
            .map_err(|e| ConfigError::Invalid(format!("initial_pose.rotation: {e}")))?;
        Rotation3::new(*self.initial_estimates.r_hat.matrix())
            .map_err(|e| ConfigError::Invalid(format!("initial_estimates.r_hat: {e}")))?;
        self.bias.validate(n).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.noise.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.gains.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }
}

/// The reference scenario: a vehicle circling at 6 m altitude above four
/// landmarks, with biased gyro and velocity readings and every estimate
/// starting at zero / identity.
pub fn reference_scenario() -> ScenarioConfig {
    let landmarks = vec![
        Vector3::new(7.0, 7.0, 0.0),
        Vector3::new(-7.0, 7.0, 0.0),
        Vector3::new(7.0, -7.0, 0.0),
        Vector3::new(-7.0, -7.0, 0.0),
    ];
    let n = landmarks.len();
    ScenarioConfig {
        duration: DEFAULT_DURATION,
        dt: DEFAULT_DT,
        stride: DEFAULT_STRIDE,
        twist_profile: TwistProfile::constant(Twist::new(Vector3::new(0.0, 0.0, 0.3), Vector3::new(2.5, 0.0, 0.0))),
        initial_pose: Pose::new(Rotation3::identity(), Vector3::new(0.0, 0.0, 6.0)),
        landmarks,
        bias: SensorBias::velocity_only(Vector3::new(0.09, -0.15, -0.1), Vector3::new(0.09, 0.06, -0.07)),
        noise: NoiseSpec::default(),
        gains: GainConfig {
            k_p: 1.0,
            k_w: 2.0,
            gamma: Matrix3::identity() * 30.0,
            alpha: vec![0.1; n],
        },
        initial_estimates: ObserverState::zeroed(n),
    }
}

/// Loads a scenario file, or the built-in scenario when `source` is [`REFERENCE_NAME`].
pub fn load_scenario(source: &str) -> Result<ScenarioConfig, ConfigError> {
    if source == REFERENCE_NAME {
        return Ok(reference_scenario());
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_scenario(&text)
}

/// Parses and validates scenario TOML.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let config = file.into_config()?;
    config.validate()?;
    Ok(config)
}

/// Renders a configuration back to scenario TOML.
pub fn to_toml(config: &ScenarioConfig) -> String {
    let file = ScenarioFile::from_config(config);
    toml::to_string(&file).expect("scenario serialization is infallible")
}

type V3 = [f64; 3];
type M3 = [[f64; 3]; 3];

fn v3(v: V3) -> Vector3<f64> {
    Vector3::from(v)
}

fn m3(m: M3) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| m[r][c])
}

fn to_v3(v: &Vector3<f64>) -> V3 {
    [v.x, v.y, v.z]
}

fn to_m3(m: &Matrix3<f64>) -> M3 {
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    duration: f64,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    stride: Option<usize>,
    twist_profile: TwistProfileFile,
    #[serde(default)]
    initial_pose: PoseFile,
    landmarks: Vec<V3>,
    /// Only zero velocities are accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    landmark_velocities: Option<Vec<V3>>,
    #[serde(default)]
    bias: BiasFile,
    #[serde(default)]
    noise: NoiseFile,
    gains: GainsFile,
    #[serde(default)]
    initial_estimates: EstimatesFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum TwistProfileFile {
    Constant(TwistFile),
    Schedule(Vec<KnotFile>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TwistFile {
    omega: V3,
    vel: V3,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KnotFile {
    t: f64,
    omega: V3,
    vel: V3,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotation: Option<M3>,
    #[serde(default)]
    position: V3,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BiasFile {
    #[serde(default)]
    b_omega: V3,
    #[serde(default)]
    b_v: V3,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    b_y: Vec<V3>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseFile {
    #[serde(default)]
    sigma_omega: f64,
    #[serde(default)]
    sigma_v: f64,
    #[serde(default)]
    sigma_y: f64,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum GammaFile {
    Scalar(f64),
    Matrix(M3),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GainsFile {
    k_p: f64,
    k_w: f64,
    gamma: GammaFile,
    alpha: Vec<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimatesFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_hat: Option<M3>,
    #[serde(default)]
    p_hat: V3,
    /// Defaults to all-zero, one per landmark.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    landmarks_hat: Option<Vec<V3>>,
    #[serde(default)]
    b_omega_hat: V3,
    #[serde(default)]
    b_v_hat: V3,
}

fn rotation_field(m: Option<M3>, what: &str) -> Result<Rotation3, ConfigError> {
    match m {
        None => Ok(Rotation3::identity()),
        Some(m) => Rotation3::new(m3(m)).map_err(|e| ConfigError::Invalid(format!("{what}: {e}"))),
    }
}

impl ScenarioFile {
    fn into_config(self) -> Result<ScenarioConfig, ConfigError> {
        if let Some(vels) = &self.landmark_velocities {
            if vels.iter().flatten().any(|x| *x != 0.0) {
                return Err(ConfigError::Invalid("landmarks must be fixed (all velocities zero)".into()));
            }
        }
        let twist_profile = match self.twist_profile {
            TwistProfileFile::Constant(u) => TwistProfile::constant(Twist::new(v3(u.omega), v3(u.vel))),
            TwistProfileFile::Schedule(knots) => TwistProfile::schedule(
                knots
                    .into_iter()
                    .map(|k| (k.t, Twist::new(v3(k.omega), v3(k.vel))))
                    .collect(),
            )?,
        };
        let n = self.landmarks.len();
        let gamma = match self.gains.gamma {
            GammaFile::Scalar(s) => Matrix3::identity() * s,
            GammaFile::Matrix(m) => m3(m),
        };
        let est = self.initial_estimates;
        Ok(ScenarioConfig {
            duration: self.duration,
            dt: self.dt.unwrap_or(DEFAULT_DT),
            stride: self.stride.unwrap_or(DEFAULT_STRIDE),
            twist_profile,
            initial_pose: Pose::new(
                rotation_field(self.initial_pose.rotation, "initial_pose.rotation")?,
                v3(self.initial_pose.position),
            ),
            landmarks: self.landmarks.into_iter().map(v3).collect(),
            bias: SensorBias {
                b_omega: v3(self.bias.b_omega),
                b_v: v3(self.bias.b_v),
                b_y: self.bias.b_y.into_iter().map(v3).collect(),
            },
            noise: NoiseSpec {
                sigma_omega: self.noise.sigma_omega,
                sigma_v: self.noise.sigma_v,
                sigma_y: self.noise.sigma_y,
                seed: self.noise.seed,
            },
            gains: GainConfig {
                k_p: self.gains.k_p,
                k_w: self.gains.k_w,
                gamma,
                alpha: self.gains.alpha,
            },
            initial_estimates: ObserverState {
                r_hat: rotation_field(est.r_hat, "initial_estimates.r_hat")?,
                p_hat: v3(est.p_hat),
                landmarks_hat: match est.landmarks_hat {
                    Some(l) => l.into_iter().map(v3).collect(),
                    None => vec![Vector3::zeros(); n],
                },
                b_omega_hat: v3(est.b_omega_hat),
                b_v_hat: v3(est.b_v_hat),
            },
        })
    }

    fn from_config(c: &ScenarioConfig) -> Self {
        let knots = c.twist_profile.knots();
        let twist_profile = if knots.len() == 1 {
            TwistProfileFile::Constant(TwistFile {
                omega: to_v3(&knots[0].1.omega),
                vel: to_v3(&knots[0].1.vel),
            })
        } else {
            TwistProfileFile::Schedule(
                knots
                    .iter()
                    .map(|(t, u)| KnotFile {
                        t: *t,
                        omega: to_v3(&u.omega),
                        vel: to_v3(&u.vel),
                    })
                    .collect(),
            )
        };
        let est = &c.initial_estimates;
        ScenarioFile {
            duration: c.duration,
            dt: Some(c.dt),
            stride: Some(c.stride),
            twist_profile,
            initial_pose: PoseFile {
                rotation: Some(to_m3(c.initial_pose.rotation.matrix())),
                position: to_v3(&c.initial_pose.position),
            },
            landmarks: c.landmarks.iter().map(to_v3).collect(),
            landmark_velocities: None,
            bias: BiasFile {
                b_omega: to_v3(&c.bias.b_omega),
                b_v: to_v3(&c.bias.b_v),
                b_y: c.bias.b_y.iter().map(to_v3).collect(),
            },
            noise: NoiseFile {
                sigma_omega: c.noise.sigma_omega,
                sigma_v: c.noise.sigma_v,
                sigma_y: c.noise.sigma_y,
                seed: c.noise.seed,
            },
            gains: GainsFile {
                k_p: c.gains.k_p,
                k_w: c.gains.k_w,
                gamma: GammaFile::Matrix(to_m3(&c.gains.gamma)),
                alpha: c.gains.alpha.clone(),
            },
            initial_estimates: EstimatesFile {
                r_hat: Some(to_m3(est.r_hat.matrix())),
                p_hat: to_v3(&est.p_hat),
                landmarks_hat: Some(est.landmarks_hat.iter().map(to_v3).collect()),
                b_omega_hat: to_v3(&est.b_omega_hat),
                b_v_hat: to_v3(&est.b_v_hat),
            },
        }
    }
}
