//! Fast-adaptation nonlinear observer on SLAM_n(3).
//!
//! The observer jointly estimates the vehicle pose `T̂ = (R̂, P̂)`, the
//! landmark positions `p̂_i` and the velocity biases `b̂_Ω`, `b̂_V` from the
//! body-frame measurements in a [`SensorFrame`]. Each landmark contributes
//! the innovation
//!
//! ```text
//! e_i = p̂_i − (R̂ y_i + P̂)
//! ```
//!
//! which drives the landmark update through the adaptive gain
//! `ψ(e_i) = k_p / (1 + Tr{R_e(i)})`, and the pose/bias updates through the
//! correction terms
//!
//! ```text
//! W_Ω = −Σ (k_w/α_i) [y_i]× R̂ᵀ e_i        W_V = −Σ (k_w/α_i) R̂ᵀ e_i
//! ```
//!
//! [`observer_step`] is the explicit discrete update: every correction is
//! evaluated at the pre-update state. The update is stiff. Its fastest mode
//! scales with `k_w/α · Σ‖y_i‖²`, so `dt` has to stay below the bound
//! reported by [`correction_stiffness`].
//!
//! The truth-aware helpers at the bottom ([`bias_error`], [`pose_error`],
//! [`lyapunov_value`], [`error_rate`]) never feed back into the estimate;
//! they exist for simulation diagnostics.

use nalgebra::{Matrix3, Matrix6, SymmetricEigen, Vector3};

use crate::error::ObserverError;
use crate::lie::{project_orthonormal, se3_exp, skew, Pose, Rotation3, Twist};
use crate::world::{SensorBias, SensorFrame, TrueState};

/// Symmetry tolerance for the adaptation gain matrix.
const GAMMA_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub r_hat: Rotation3,
    pub p_hat: Vector3<f64>,
    pub landmarks_hat: Vec<Vector3<f64>>,
    pub b_omega_hat: Vector3<f64>,
    pub b_v_hat: Vector3<f64>,
}

impl ObserverState {
    /// Identity attitude, and zero position, landmarks and biases.
    pub fn zeroed(landmarks: usize) -> Self {
        Self {
            r_hat: Rotation3::identity(),
            p_hat: Vector3::zeros(),
            landmarks_hat: vec![Vector3::zeros(); landmarks],
            b_omega_hat: Vector3::zeros(),
            b_v_hat: Vector3::zeros(),
        }
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.r_hat, self.p_hat)
    }

    pub fn landmark_count(&self) -> usize {
        self.landmarks_hat.len()
    }

    pub fn is_finite(&self) -> bool {
        self.r_hat.matrix().iter().all(|x| x.is_finite())
            && self
                .landmarks_hat
                .iter()
                .chain([&self.p_hat, &self.b_omega_hat, &self.b_v_hat])
                .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// Observer design parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GainConfig {
    /// Landmark adaptation gain.
    pub k_p: f64,
    /// Pose correction gain.
    pub k_w: f64,
    /// Bias adaptation gain, symmetric positive definite.
    pub gamma: Matrix3<f64>,
    /// Per-landmark weights.
    pub alpha: Vec<f64>,
}

impl GainConfig {
    pub fn validate(&self) -> Result<(), ObserverError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.k_p) {
            return Err(ObserverError::InvalidGain(format!("k_p must be positive, got {}", self.k_p)));
        }
        if !positive(self.k_w) {
            return Err(ObserverError::InvalidGain(format!("k_w must be positive, got {}", self.k_w)));
        }
        if let Some((i, a)) = self.alpha.iter().enumerate().find(|(_, a)| !positive(**a)) {
            return Err(ObserverError::InvalidGain(format!("alpha[{i}] must be positive, got {a}")));
        }
        self.gamma_inverse().map(|_| ())
    }

    /// `Γ⁻¹`, failing unless Γ is symmetric positive definite.
    pub fn gamma_inverse(&self) -> Result<Matrix3<f64>, ObserverError> {
        let asym = (self.gamma - self.gamma.transpose()).abs().max();
        if asym.is_nan() || asym > GAMMA_SYMMETRY_TOL {
            return Err(ObserverError::InvalidGain("gamma must be symmetric".into()));
        }
        self.gamma
            .cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| ObserverError::InvalidGain("gamma must be positive definite".into()))
    }

    /// Largest eigenvalue of Γ.
    pub fn gamma_max_eigenvalue(&self) -> f64 {
        self.gamma.symmetric_eigenvalues().max()
    }
}

/// Angle-axis geometry derived from a landmark innovation.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkError {
    pub e: Vector3<f64>,
    /// `2·atan(‖e‖)`, in `[0, π)`.
    pub theta: f64,
    /// Unit axis `e/‖e‖`; `None` at `e = 0` where it is undefined.
    pub axis: Option<Vector3<f64>>,
    pub r_e: Rotation3,
    pub psi: f64,
}

/// Bias estimation error `b − b̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasError {
    pub b_omega_tilde: Vector3<f64>,
    pub b_v_tilde: Vector3<f64>,
}

/// Pose estimation error `T̂ T⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseError {
    pub r_tilde: Rotation3,
    pub p_tilde: Vector3<f64>,
}

/// Pose correction terms `(W_Ω, W_V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corrections {
    pub w_omega: Vector3<f64>,
    pub w_v: Vector3<f64>,
}

/// `e_i = p̂_i − (R̂ y_i + P̂)`.
pub fn landmark_error(state: &ObserverState, y_i: &Vector3<f64>, i: usize) -> Result<Vector3<f64>, ObserverError> {
    let p_i = state.landmarks_hat.get(i).ok_or(ObserverError::IndexOutOfRange {
        index: i,
        count: state.landmark_count(),
    })?;
    Ok(p_i - (state.r_hat.matrix() * y_i + state.p_hat))
}

/// All innovations for a frame.
pub fn landmark_errors(state: &ObserverState, frame: &SensorFrame) -> Result<Vec<Vector3<f64>>, ObserverError> {
    check_count(state, frame)?;
    Ok(state
        .landmarks_hat
        .iter()
        .zip(&frame.y)
        .map(|(p, y)| p - (state.r_hat.matrix() * y + state.p_hat))
        .collect())
}

fn check_count(state: &ObserverState, frame: &SensorFrame) -> Result<(), ObserverError> {
    if frame.y.len() != state.landmark_count() {
        return Err(ObserverError::LandmarkCountMismatch {
            expected: state.landmark_count(),
            got: frame.y.len(),
        });
    }
    Ok(())
}

/// Builds the angle-axis rotation `R_e` from an innovation and evaluates
/// `ψ = k_p / (1 + Tr{R_e})` from it.
///
/// With `θ = 2·atan(‖e‖)` and `x = cot(θ/2)·e`, the axis is simply `e/‖e‖`.
pub fn error_geometry(e: &Vector3<f64>, k_p: f64) -> LandmarkError {
    let norm = e.norm();
    let theta = 2.0 * norm.atan();
    let (axis, r_e) = if norm > 0.0 {
        let x = e / norm;
        let k = skew(&x);
        let (s, c) = theta.sin_cos();
        let r = Matrix3::identity() + k * s + k * k * (1.0 - c);
        (Some(x), Rotation3::from_matrix_unchecked(r))
    } else {
        (None, Rotation3::identity())
    };
    let psi = k_p / (1.0 + r_e.trace());
    LandmarkError {
        e: *e,
        theta,
        axis,
        r_e,
        psi,
    }
}

/// Closed form of the adaptive gain: `k_p (1 + ‖e‖²) / 4`.
///
/// Follows from `Tr{R_e} = 1 + 2cos θ` and `cos²(θ/2) = 1/(1 + ‖e‖²)`.
#[inline]
pub fn fast_adaptation_gain(e: &Vector3<f64>, k_p: f64) -> f64 {
    k_p * (1.0 + e.norm_squared()) * 0.25
}

/// Weighted innovation sums `(Σ [y_i]× R̂ᵀ e_i / α_i, Σ R̂ᵀ e_i / α_i)`.
fn innovation_sums(
    state: &ObserverState,
    frame: &SensorFrame,
    errors: &[Vector3<f64>],
    alpha: &[f64],
) -> (Vector3<f64>, Vector3<f64>) {
    let rt = state.r_hat.matrix().transpose();
    let mut rot = Vector3::zeros();
    let mut trans = Vector3::zeros();
    for ((e, y), a) in errors.iter().zip(&frame.y).zip(alpha) {
        let body = rt * e;
        rot += y.cross(&body) / *a;
        trans += body / *a;
    }
    (rot, trans)
}

fn check_alpha(gains: &GainConfig, n: usize) -> Result<(), ObserverError> {
    if gains.alpha.len() != n {
        return Err(ObserverError::InvalidGain(format!(
            "{} alpha weights for {n} landmarks",
            gains.alpha.len()
        )));
    }
    Ok(())
}

pub fn correction_terms(
    state: &ObserverState,
    frame: &SensorFrame,
    gains: &GainConfig,
) -> Result<Corrections, ObserverError> {
    let errors = landmark_errors(state, frame)?;
    check_alpha(gains, errors.len())?;
    let (rot, trans) = innovation_sums(state, frame, &errors, &gains.alpha);
    Ok(Corrections {
        w_omega: -gains.k_w * rot,
        w_v: -gains.k_w * trans,
    })
}

/// One explicit step of the discrete observer.
///
/// ```text
/// T̂⁺  = T̂ · exp([Ω_m − b̂_Ω − W_Ω; V_m − b̂_V − W_V]∧ dt)
/// p̂ᵢ⁺ = p̂ᵢ − dt ψ(eᵢ) eᵢ
/// b̂_Ω⁺ = b̂_Ω − dt Σ (Γ/αᵢ) [yᵢ]× R̂ᵀ eᵢ
/// b̂_V⁺ = b̂_V − dt Σ (Γ/αᵢ) R̂ᵀ eᵢ
/// ```
pub fn observer_step(
    state: &ObserverState,
    frame: &SensorFrame,
    gains: &GainConfig,
    dt: f64,
) -> Result<ObserverState, ObserverError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ObserverError::BadStep(dt));
    }
    let n = state.landmark_count();
    if n < 3 {
        return Err(ObserverError::TooFewLandmarks(n));
    }
    let errors = landmark_errors(state, frame)?;
    check_alpha(gains, n)?;
    let (rot, trans) = innovation_sums(state, frame, &errors, &gains.alpha);
    let w_omega = -gains.k_w * rot;
    let w_v = -gains.k_w * trans;

    let twist = Twist::new(
        frame.omega_m - state.b_omega_hat - w_omega,
        frame.v_m - state.b_v_hat - w_v,
    );
    let pose = state.pose().compose(&se3_exp(&twist, dt));
    let r_hat = project_orthonormal(pose.rotation.matrix()).map_err(|_| ObserverError::NonFinite)?;

    let landmarks_hat = state
        .landmarks_hat
        .iter()
        .zip(&errors)
        .map(|(p, e)| p - e * (dt * fast_adaptation_gain(e, gains.k_p)))
        .collect();

    let next = ObserverState {
        r_hat,
        p_hat: pose.position,
        landmarks_hat,
        b_omega_hat: state.b_omega_hat - gains.gamma * rot * dt,
        b_v_hat: state.b_v_hat - gains.gamma * trans * dt,
    };
    if !next.is_finite() {
        return Err(ObserverError::NonFinite);
    }
    Ok(next)
}

/// Stiffness of the explicit update at the current state: the largest
/// eigenvalue of the pose correction operator plus the largest landmark gain.
///
/// Forward-Euler style propagation is only stable for `dt < 2 / stiffness`.
pub fn correction_stiffness(
    state: &ObserverState,
    frame: &SensorFrame,
    gains: &GainConfig,
) -> Result<f64, ObserverError> {
    let errors = landmark_errors(state, frame)?;
    check_alpha(gains, errors.len())?;
    let mut normal = Matrix6::<f64>::zeros();
    for (y, a) in frame.y.iter().zip(&gains.alpha) {
        // Bᵢ = [−R̂[yᵢ]×  R̂]; R̂ drops out of BᵢᵀBᵢ.
        let k = skew(y);
        let mut b = nalgebra::Matrix3x6::<f64>::zeros();
        b.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-k));
        b.fixed_view_mut::<3, 3>(0, 3).copy_from(&Matrix3::identity());
        normal += b.transpose() * b / *a;
    }
    let lambda = SymmetricEigen::new(normal * gains.k_w).eigenvalues.max();
    let psi = errors
        .iter()
        .map(|e| fast_adaptation_gain(e, gains.k_p))
        .fold(0.0, f64::max);
    Ok(lambda + psi)
}

pub fn bias_error(state: &ObserverState, truth: &SensorBias) -> BiasError {
    BiasError {
        b_omega_tilde: truth.b_omega - state.b_omega_hat,
        b_v_tilde: truth.b_v - state.b_v_hat,
    }
}

/// `R̃ = R̂Rᵀ`, `P̃ = P̂ − R̃P`.
pub fn pose_error(state: &ObserverState, truth: &TrueState) -> PoseError {
    let r_tilde = state.r_hat * truth.pose.rotation.transpose();
    PoseError {
        r_tilde,
        p_tilde: state.p_hat - r_tilde.matrix() * truth.pose.position,
    }
}

/// `V = Σ ‖eᵢ‖²/(2αᵢ) + ½ b̃_Ωᵀ Γ⁻¹ b̃_Ω + ½ b̃_Vᵀ Γ⁻¹ b̃_V`.
pub fn lyapunov_value(
    state: &ObserverState,
    errors: &[Vector3<f64>],
    true_bias: &SensorBias,
    gains: &GainConfig,
) -> Result<f64, ObserverError> {
    let gamma_inv = gains.gamma_inverse()?;
    check_alpha(gains, errors.len())?;
    let landmark: f64 = errors
        .iter()
        .zip(&gains.alpha)
        .map(|(e, a)| e.norm_squared() / (2.0 * a))
        .sum();
    let b = bias_error(state, true_bias);
    let bias = 0.5 * b.b_omega_tilde.dot(&(gamma_inv * b.b_omega_tilde))
        + 0.5 * b.b_v_tilde.dot(&(gamma_inv * b.b_v_tilde));
    Ok(landmark + bias)
}

/// Continuous-time innovation dynamics, using the true biases:
///
/// ```text
/// ėᵢ = −ψ(eᵢ) eᵢ − [−R̂[yᵢ]×  R̂] [b̃_Ω − W_Ω; b̃_V − W_V]
/// ```
pub fn error_rate(
    state: &ObserverState,
    frame: &SensorFrame,
    gains: &GainConfig,
    true_bias: &SensorBias,
) -> Result<Vec<Vector3<f64>>, ObserverError> {
    let errors = landmark_errors(state, frame)?;
    let w = correction_terms(state, frame, gains)?;
    let b = bias_error(state, true_bias);
    let rot_in = b.b_omega_tilde - w.w_omega;
    let trans_in = b.b_v_tilde - w.w_v;
    let r = state.r_hat.matrix();
    Ok(errors
        .iter()
        .zip(&frame.y)
        .map(|(e, y)| {
            let coupling = -(r * y.cross(&rot_in)) + r * trans_in;
            -fast_adaptation_gain(e, gains.k_p) * e - coupling
        })
        .collect())
}
