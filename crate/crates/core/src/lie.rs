//! Small-matrix Lie group arithmetic for SO(3) and SE(3).
//!
//! Rotations are stored as full 3×3 direction-cosine matrices and poses as a
//! rotation plus an inertial-frame position. The exponential maps are closed
//! form (Rodrigues for SO(3), Rodrigues plus the SO(3) left Jacobian for
//! SE(3)); below an angle of [`SMALL_ANGLE`] the trigonometric coefficients
//! are replaced by their second-order Taylor expansions.

use std::ops::{Mul, Neg};

use nalgebra::{Matrix3, Matrix4, Vector3};

use crate::error::LieError;

/// Angle below which Rodrigues / left-Jacobian coefficients switch to Taylor form.
pub const SMALL_ANGLE: f64 = 1e-7;

/// Frobenius tolerance used when validating rotation matrices.
pub const ROTATION_TOL: f64 = 1e-9;

/// Largest symmetric part accepted by [`vee3`].
pub const SKEW_TOL: f64 = 1e-12;

/// An element of SO(3), expressed in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

impl Rotation3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Validates orthonormality and determinant, both within [`ROTATION_TOL`].
    pub fn new(m: Matrix3<f64>) -> Result<Self, LieError> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(LieError::NonFinite);
        }
        let drift = orthonormality_error(&m);
        if drift > ROTATION_TOL {
            return Err(LieError::NotOrthonormal { drift });
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ROTATION_TOL {
            return Err(LieError::BadDeterminant { det });
        }
        Ok(Self(m))
    }

    /// Wraps a matrix without checking it. Callers are responsible for the
    /// SO(3) invariants.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    /// Rotation by `angle` radians about the inertial z axis.
    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix3<f64> {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// ‖R Rᵀ − I‖_F.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }
}

fn orthonormality_error(m: &Matrix3<f64>) -> f64 {
    (m * m.transpose() - Matrix3::identity()).norm()
}

impl Mul for Rotation3 {
    type Output = Rotation3;
    fn mul(self, rhs: Rotation3) -> Rotation3 {
        Rotation3(self.0 * rhs.0)
    }
}

impl Mul<Vector3<f64>> for Rotation3 {
    type Output = Vector3<f64>;
    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

impl Mul<&Vector3<f64>> for &Rotation3 {
    type Output = Vector3<f64>;
    fn mul(self, rhs: &Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

/// A rigid-body pose in SE(3): attitude plus inertial-frame position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Rotation3,
    pub position: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Rotation3, position: Vector3<f64>) -> Self {
        Self { rotation, position }
    }

    pub fn identity() -> Self {
        Self::new(Rotation3::identity(), Vector3::zeros())
    }

    /// The 4×4 homogeneous matrix `[R P; 0 1]`.
    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut t = Matrix4::identity();
        t.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        t.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        t
    }

    /// `self · other` as homogeneous transforms.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            position: self.rotation.matrix() * other.position + self.position,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            position: -(rt.matrix() * self.position),
        }
    }

    /// Maps a point expressed in this pose's frame into the parent frame.
    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.matrix() * p + self.position
    }
}

/// Body-frame angular and translational velocity `U = [Ω; V]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    pub omega: Vector3<f64>,
    pub vel: Vector3<f64>,
}

impl Twist {
    pub fn new(omega: Vector3<f64>, vel: Vector3<f64>) -> Self {
        Self { omega, vel }
    }

    pub fn zero() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros())
    }

    pub fn is_finite(&self) -> bool {
        self.omega.iter().chain(self.vel.iter()).all(|x| x.is_finite())
    }

    pub fn scale(&self, s: f64) -> Twist {
        Twist::new(self.omega * s, self.vel * s)
    }
}

impl Neg for Twist {
    type Output = Twist;
    fn neg(self) -> Twist {
        Twist::new(-self.omega, -self.vel)
    }
}

/// An element of so(3). Only constructible through [`hat3`], so the
/// antisymmetry holds bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewMatrix3(Matrix3<f64>);

impl SkewMatrix3 {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn vee(&self) -> Vector3<f64> {
        Vector3::new(self.0[(2, 1)], self.0[(0, 2)], self.0[(1, 0)])
    }
}

/// The skew map `[v]×`, so that `hat3(a) b = a × b`.
pub fn hat3(v: &Vector3<f64>) -> SkewMatrix3 {
    SkewMatrix3(skew(v))
}

#[inline]
pub(crate) fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat3`]. Rejects matrices whose symmetric part exceeds [`SKEW_TOL`].
pub fn vee3(m: &Matrix3<f64>) -> Result<Vector3<f64>, LieError> {
    let sym = (m + m.transpose()) * 0.5;
    let asym = sym.abs().max();
    if !asym.is_finite() || asym > SKEW_TOL {
        return Err(LieError::NotSkew { asymmetry: asym });
    }
    Ok(Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// The se(3) wedge map `[U]∧ = [[Ω]× V; 0 0]`.
pub fn wedge6(u: &Twist) -> Matrix4<f64> {
    let mut w = Matrix4::zeros();
    w.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&u.omega));
    w.fixed_view_mut::<3, 1>(0, 3).copy_from(&u.vel);
    w
}

/// Rodrigues coefficients `sinθ/θ`, `(1−cosθ)/θ²`, `(θ−sinθ)/θ³`.
fn rodrigues_coefficients(theta: f64) -> (f64, f64, f64) {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0)
    } else {
        let s = theta.sin();
        let half = (0.5 * theta).sin();
        let t2 = theta * theta;
        (s / theta, 2.0 * half * half / t2, (theta - s) / (t2 * theta))
    }
}

/// `exp([ω]×)` in Rodrigues form.
pub fn so3_exp(omega_dt: &Vector3<f64>) -> Rotation3 {
    let theta = omega_dt.norm();
    let (a, b, _) = rodrigues_coefficients(theta);
    let k = skew(omega_dt);
    Rotation3(Matrix3::identity() + k * a + k * k * b)
}

/// Left Jacobian of SO(3) at `omega_dt`.
pub fn so3_left_jacobian(omega_dt: &Vector3<f64>) -> Matrix3<f64> {
    let theta = omega_dt.norm();
    let (_, b, c) = rodrigues_coefficients(theta);
    let k = skew(omega_dt);
    Matrix3::identity() + k * b + k * k * c
}

/// `exp([u]∧ dt)` in closed form.
pub fn se3_exp(u: &Twist, dt: f64) -> Pose {
    let phi = u.omega * dt;
    let theta = phi.norm();
    let (a, b, c) = rodrigues_coefficients(theta);
    let k = skew(&phi);
    let k2 = k * k;
    let rotation = Matrix3::identity() + k * a + k2 * b;
    let jacobian = Matrix3::identity() + k * b + k2 * c;
    Pose {
        rotation: Rotation3(rotation),
        position: jacobian * (u.vel * dt),
    }
}

/// Normalized Euclidean distance `¼ Tr{I − R}`, clamped to `[0, 1]`.
pub fn rotation_distance(r: &Rotation3) -> f64 {
    ((3.0 - r.trace()) * 0.25).clamp(0.0, 1.0)
}

/// Nearest rotation in the Frobenius sense, via SVD with determinant correction.
pub fn project_orthonormal(m: &Matrix3<f64>) -> Result<Rotation3, LieError> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(LieError::NonFinite);
    }
    let svd = m.svd(true, true);
    let smallest = svd.singular_values.min();
    if smallest <= 0.0 {
        return Err(LieError::Singular { smallest });
    }
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(LieError::Singular { smallest }),
    };
    // A reflection is not within reach of any rotation we would accept.
    if m.determinant() <= 0.0 {
        return Err(LieError::Reflection);
    }
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let mut flip = Matrix3::identity();
        flip[(2, 2)] = -1.0;
        r = u * flip * v_t;
    }
    if (r.determinant() - 1.0).abs() > ROTATION_TOL {
        return Err(LieError::Reflection);
    }
    Ok(Rotation3(r))
}
