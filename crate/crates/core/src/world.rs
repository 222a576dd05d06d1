//! Ground-truth rigid body among fixed landmarks, plus the sensor model.
//!
//! The true pose is integrated with the exact exponential map (twist held
//! constant over each step). Measurements are
//!
//! ```text
//! Ω_m = Ω + b_Ω + n_Ω
//! V_m = V + b_V + n_V
//! y_i = Rᵀ(p_i − P) + b_i^y + n_i^y
//! ```
//!
//! with Gaussian noise drawn from a seeded ChaCha stream.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::WorldError;
use crate::lie::{project_orthonormal, se3_exp, Pose, Twist};

/// Vehicle pose and the (fixed) inertial landmark positions.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueState {
    pub pose: Pose,
    pub landmarks: Vec<Vector3<f64>>,
}

impl TrueState {
    pub fn new(pose: Pose, landmarks: Vec<Vector3<f64>>) -> Result<Self, WorldError> {
        if landmarks.len() < 3 {
            return Err(WorldError::TooFewLandmarks(landmarks.len()));
        }
        Ok(Self { pose, landmarks })
    }

    pub fn landmark_count(&self) -> usize {
        self.landmarks.len()
    }
}

/// Constant sensor biases. `b_y` may be empty, meaning no landmark bias.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SensorBias {
    pub b_omega: Vector3<f64>,
    pub b_v: Vector3<f64>,
    pub b_y: Vec<Vector3<f64>>,
}

impl SensorBias {
    pub fn velocity_only(b_omega: Vector3<f64>, b_v: Vector3<f64>) -> Self {
        Self {
            b_omega,
            b_v,
            b_y: Vec::new(),
        }
    }

    pub fn validate(&self, landmarks: usize) -> Result<(), WorldError> {
        if !self.b_y.is_empty() && self.b_y.len() != landmarks {
            return Err(WorldError::BiasCountMismatch {
                expected: landmarks,
                got: self.b_y.len(),
            });
        }
        Ok(())
    }
}

/// Per-axis Gaussian noise levels and the stream seed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSpec {
    pub sigma_omega: f64,
    pub sigma_v: f64,
    pub sigma_y: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), WorldError> {
        let ok = [self.sigma_omega, self.sigma_v, self.sigma_y]
            .iter()
            .all(|s| s.is_finite() && *s >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(WorldError::BadSigma)
        }
    }

    pub fn source(&self) -> NoiseSource {
        NoiseSource::new(self.seed)
    }
}

/// Deterministic normal-deviate stream. ChaCha is counter based, so a seed
/// fully determines the sequence on every platform.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn gaussian3(&mut self, sigma: f64) -> Vector3<f64> {
        let mut draw = || -> f64 { StandardNormal.sample(&mut self.rng) };
        let n = Vector3::new(draw(), draw(), draw());
        n * sigma
    }
}

/// One time step of measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorFrame {
    pub omega_m: Vector3<f64>,
    pub v_m: Vector3<f64>,
    pub y: Vec<Vector3<f64>>,
    pub t: f64,
}

/// Advances the true pose by `exp([u]∧ dt)`. Landmarks are carried over untouched.
pub fn true_step(mut s: TrueState, u: &Twist, dt: f64) -> TrueState {
    let next = s.pose.compose(&se3_exp(u, dt));
    let rotation = project_orthonormal(next.rotation.matrix()).unwrap_or(next.rotation);
    s.pose = Pose::new(rotation, next.position);
    s
}

/// Synthesizes a [`SensorFrame`] at time `t` for the true twist `u`.
///
/// The noise stream is always advanced by `6 + 3n` deviates, whatever the
/// sigmas, so runs that differ only in noise level share their draws.
pub fn sense(
    s: &TrueState,
    bias: &SensorBias,
    noise: &NoiseSpec,
    u: &Twist,
    t: f64,
    rng: &mut NoiseSource,
) -> SensorFrame {
    let omega_m = u.omega + bias.b_omega + rng.gaussian3(noise.sigma_omega);
    let v_m = u.vel + bias.b_v + rng.gaussian3(noise.sigma_v);
    let rt = s.pose.rotation.transpose();
    let y = s
        .landmarks
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut y = rt.matrix() * (p - s.pose.position);
            if let Some(b) = bias.b_y.get(i) {
                y += b;
            }
            y + rng.gaussian3(noise.sigma_y)
        })
        .collect();
    SensorFrame { omega_m, v_m, y, t }
}
