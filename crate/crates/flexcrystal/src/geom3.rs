//! 3D vectors, orthogonal transformations and spherical circles.
//!
//! Conventions used throughout the crate: column vectors with `y = M * x`,
//! right-handed rotations, unit framework edges (all lengths dimensionless).
//! Orthogonal matrices carry their determinant sign so that rotations and
//! roto-reflections live in one type.

use std::ops::{Add, Div, Mul, Neg, Sub};
use thiserror::Error;

/// Default tolerance for geometric predicates (unit checks, collinearity).
pub const GEOM_TOL: f64 = 1e-9;

/// Default tolerance for algebraic identities of freshly constructed objects.
pub const ALGEBRA_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("expected a unit vector, got norm {norm}")]
    NonUnitVector { norm: f64 },
    #[error("zero vector where a direction is required")]
    ZeroVector,
    #[error("input norms must agree: {left} vs {right}")]
    NormMismatch { left: f64, right: f64 },
    #[error("antipodal directions leave the rotation axis ambiguous")]
    AntipodalInputs,
    #[error("opposite endpoints give a great circle with no chord midpoint")]
    DegenerateGreatCircle,
    #[error("collinear or vanishing inputs do not span a geodesic plane")]
    DegenerateGeodesic,
    #[error("matrix is not orthogonal within {tol}: residual {residual}")]
    NotOrthogonal { residual: f64, tol: f64 },
}

// ---------------------------------------------------------------------------
// Vec3
// ---------------------------------------------------------------------------

/// Cartesian 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const EX: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const EY: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const EZ: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, rhs: Vec3) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn cross(self, rhs: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * rhs.z - self.z * rhs.y,
            y: self.z * rhs.x - self.x * rhs.z,
            z: self.x * rhs.y - self.y * rhs.x,
        }
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalized(self) -> Result<Vec3, GeomError> {
        let n = self.norm();
        if n < GEOM_TOL {
            return Err(GeomError::ZeroVector);
        }
        Ok(self / n)
    }

    pub fn is_unit(self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() < tol
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component by index 0..3; used when bridging to matrix layouts.
    pub fn component(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("Vec3 component index {i} out of range"),
        }
    }

    /// Distance to another point.
    pub fn distance(self, rhs: Vec3) -> f64 {
        (self - rhs).norm()
    }

    /// A deterministic unit vector orthogonal to `self` (which must be
    /// nonzero): crosses with the coordinate axis least aligned with `self`.
    pub fn any_orthonormal(self) -> Result<Vec3, GeomError> {
        let a = [self.x.abs(), self.y.abs(), self.z.abs()];
        let pick = if a[0] <= a[1] && a[0] <= a[2] {
            Vec3::EX
        } else if a[1] <= a[2] {
            Vec3::EY
        } else {
            Vec3::EZ
        };
        self.cross(pick).normalized()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Scalar triple product `a . (b x c)`, the determinant of the column matrix
/// `[a b c]`.
pub fn det3(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    a.dot(b.cross(c))
}

// ---------------------------------------------------------------------------
// Orthogonal3
// ---------------------------------------------------------------------------

/// A real orthogonal 3x3 matrix with its determinant sign cached.
///
/// `det_sign = +1` marks a rotation, `-1` a roto-reflection. Products,
/// transposes and negations track the sign without re-factorizing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orthogonal3 {
    m: [[f64; 3]; 3],
    det_sign: i8,
}

impl Orthogonal3 {
    pub const IDENTITY: Orthogonal3 = Orthogonal3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        det_sign: 1,
    };

    /// Wraps a row-major matrix, verifying orthogonality at the default
    /// geometric tolerance.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self, GeomError> {
        Self::from_matrix_with_tol(m, GEOM_TOL)
    }

    pub fn from_matrix_with_tol(m: [[f64; 3]; 3], tol: f64) -> Result<Self, GeomError> {
        let candidate = Orthogonal3 { m, det_sign: 1 };
        let residual = candidate.orthogonality_error();
        if residual > tol {
            return Err(GeomError::NotOrthogonal { residual, tol });
        }
        let det = candidate.determinant();
        if (det.abs() - 1.0).abs() > tol {
            return Err(GeomError::NotOrthogonal { residual: (det.abs() - 1.0).abs(), tol });
        }
        Ok(Orthogonal3 { m, det_sign: if det > 0.0 { 1 } else { -1 } })
    }

    /// Internal constructor for matrices orthogonal by construction.
    pub(crate) fn new_unchecked(m: [[f64; 3]; 3], det_sign: i8) -> Self {
        debug_assert!({
            let c = Orthogonal3 { m, det_sign };
            c.orthogonality_error() < 1e-10 && (c.determinant() - det_sign as f64).abs() < 1e-10
        });
        Orthogonal3 { m, det_sign }
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Orthogonal3 {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
            det_sign: self.det_sign,
        }
    }

    /// Inverse of an orthogonal matrix is its transpose.
    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    pub fn det_sign(&self) -> i8 {
        self.det_sign
    }

    pub fn is_rotation(&self) -> bool {
        self.det_sign == 1
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    /// Max-norm of `M^T M - I`.
    pub fn orthogonality_error(&self) -> f64 {
        let t = self.transpose();
        let mut err: f64 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += t.m[r][k] * self.m[k][c];
                }
                let target = if r == c { 1.0 } else { 0.0 };
                err = err.max((s - target).abs());
            }
        }
        err
    }

    /// Entrywise max-norm distance to another matrix.
    pub fn max_abs_diff(&self, other: &Orthogonal3) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                d = d.max((self.m[r][c] - other.m[r][c]).abs());
            }
        }
        d
    }
}

impl Mul for Orthogonal3 {
    type Output = Orthogonal3;

    /// Composition: `(a * b)(x) = a(b(x))`.
    #[allow(clippy::needless_range_loop)]
    fn mul(self, rhs: Orthogonal3) -> Orthogonal3 {
        let mut m = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += self.m[r][k] * rhs.m[k][c];
                }
                m[r][c] = s;
            }
        }
        Orthogonal3 { m, det_sign: self.det_sign * rhs.det_sign }
    }
}

impl Mul<Vec3> for Orthogonal3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.apply(v)
    }
}

impl Neg for Orthogonal3 {
    type Output = Orthogonal3;

    /// Entrywise negation; for 3x3 matrices this flips the determinant sign.
    fn neg(self) -> Orthogonal3 {
        let mut m = self.m;
        for row in &mut m {
            for entry in row {
                *entry = -*entry;
            }
        }
        Orthogonal3 { m, det_sign: -self.det_sign }
    }
}

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

/// Rotation about a unit axis by `angle` radians (Rodrigues formula,
/// right-hand rule). `det_sign = +1` and the axis is fixed.
pub fn rotation_from_axis_angle(axis: Vec3, angle: f64) -> Result<Orthogonal3, GeomError> {
    if !axis.is_unit(GEOM_TOL) {
        return Err(GeomError::NonUnitVector { norm: axis.norm() });
    }
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    let (x, y, z) = (axis.x, axis.y, axis.z);
    Ok(Orthogonal3::new_unchecked(
        [
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [x * y * t + z * s, c + y * y * t, y * z * t - x * s],
            [x * z * t - y * s, y * z * t + x * s, c + z * z * t],
        ],
        1,
    ))
}

/// Rotation vector exponential: rotation about `omega/|omega|` by `|omega|`
/// radians, the identity for negligibly small `omega`.
pub fn rotation_from_rotvec(omega: Vec3) -> Orthogonal3 {
    let angle = omega.norm();
    if angle < 1e-12 {
        return Orthogonal3::IDENTITY;
    }
    rotation_from_axis_angle(omega / angle, angle).expect("normalized axis")
}

/// The rotation with axis along `a x b` carrying unit vector `a` to unit
/// vector `b`; the identity when `a = b`. Antipodal inputs are rejected
/// because no canonical axis exists.
#[allow(clippy::needless_range_loop)]
pub fn minimal_rotation(a: Vec3, b: Vec3) -> Result<Orthogonal3, GeomError> {
    for v in [a, b] {
        if !v.is_unit(GEOM_TOL) {
            return Err(GeomError::NonUnitVector { norm: v.norm() });
        }
    }
    let c = a.dot(b);
    if c < -1.0 + GEOM_TOL {
        return Err(GeomError::AntipodalInputs);
    }
    let w = a.cross(b);
    // R = I + [w]x + [w]x^2 / (1 + c)
    let k = [[0.0, -w.z, w.y], [w.z, 0.0, -w.x], [-w.y, w.x, 0.0]];
    let mut k2 = [[0.0; 3]; 3];
    for r in 0..3 {
        for cc in 0..3 {
            let mut s = 0.0;
            for j in 0..3 {
                s += k[r][j] * k[j][cc];
            }
            k2[r][cc] = s;
        }
    }
    let mut m = [[0.0; 3]; 3];
    let inv = 1.0 / (1.0 + c);
    for r in 0..3 {
        for cc in 0..3 {
            let id = if r == cc { 1.0 } else { 0.0 };
            m[r][cc] = id + k[r][cc] + k2[r][cc] * inv;
        }
    }
    Ok(Orthogonal3::new_unchecked(m, 1))
}

/// Reflection across the plane through the origin with the given unit
/// normal: `I - 2 n n^T`, `det_sign = -1`, fixes the plane pointwise.
pub fn reflection_across_plane(normal: Vec3) -> Result<Orthogonal3, GeomError> {
    if !normal.is_unit(GEOM_TOL) {
        return Err(GeomError::NonUnitVector { norm: normal.norm() });
    }
    let (x, y, z) = (normal.x, normal.y, normal.z);
    Ok(Orthogonal3::new_unchecked(
        [
            [1.0 - 2.0 * x * x, -2.0 * x * y, -2.0 * x * z],
            [-2.0 * x * y, 1.0 - 2.0 * y * y, -2.0 * y * z],
            [-2.0 * x * z, -2.0 * y * z, 1.0 - 2.0 * z * z],
        ],
        -1,
    ))
}

/// The circle of rotations sending `v` to `w` (equal nonzero norms),
/// parametrized by `phi`: post-rotation about `w` composed with the minimal
/// rotation from `v` to `w`. For fixed `(v, w)` the map `phi -> R` is
/// injective on `[0, 2pi)` and exhausts all rotations with `R v = w`.
pub fn rotation_circle(v: Vec3, w: Vec3, phi: f64) -> Result<Orthogonal3, GeomError> {
    let nv = v.norm();
    let nw = w.norm();
    if nv < GEOM_TOL || nw < GEOM_TOL {
        return Err(GeomError::ZeroVector);
    }
    if (nv - nw).abs() > GEOM_TOL {
        return Err(GeomError::NormMismatch { left: nv, right: nw });
    }
    let vh = v / nv;
    let wh = w / nw;
    let carry = minimal_rotation(vh, wh)?;
    let spin = rotation_from_axis_angle(wh, phi)?;
    Ok(spin * carry)
}

/// Recovers the `phi` with `t = rotation_circle(v, w, phi)` from the action
/// of `t`; the inverse of `rotation_circle` in its last argument. `t` must
/// actually send `v` to `w`.
pub fn extract_circle_angle(t: &Orthogonal3, v: Vec3, w: Vec3) -> Result<f64, GeomError> {
    let vh = v.normalized()?;
    let wh = w.normalized()?;
    let carry = minimal_rotation(vh, wh)?;
    let spin = *t * carry.transpose();
    let x = wh.any_orthonormal()?;
    let y = spin.apply(x);
    let angle = wh.cross(x).dot(y).atan2(x.dot(y));
    Ok(angle.rem_euclid(std::f64::consts::TAU))
}

// ---------------------------------------------------------------------------
// SphericalCircle
// ---------------------------------------------------------------------------

/// The circle `{p on S^2 : p . m = |m|^2}` cut out by a chord midpoint `m`.
///
/// For unit `e` and `Qe` with midpoint `m = (e + Qe)/2`, a point `p` lies on
/// the circle exactly when its chord complement `2m - p` is again unit, so
/// the circle pairs up the admissible diameter endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCircle {
    /// Chord midpoint; the spherical center is `m/|m|`.
    pub m: Vec3,
    /// In-plane radius, recorded as the distance from a member point to `m`.
    pub radius_chord: f64,
    /// Set when the circle collapses to the single point `e = Qe`.
    pub degenerate: bool,
}

impl SphericalCircle {
    /// Membership test at tolerance `tol`.
    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        p.is_unit(tol) && (p.dot(self.m) - self.m.norm_squared()).abs() < tol
    }

    /// The partner point sharing the chord midpoint.
    pub fn chord_complement(&self, p: Vec3) -> Vec3 {
        self.m * 2.0 - p
    }

    /// Spherical center (the midpoint direction on the sphere).
    pub fn spherical_midpoint(&self) -> Result<Vec3, GeomError> {
        self.m.normalized()
    }

    /// Deterministic orthonormal basis of the circle plane, `None` when the
    /// circle is a point.
    pub fn basis(&self) -> Option<(Vec3, Vec3)> {
        if self.degenerate {
            return None;
        }
        let mh = self.m.normalized().ok()?;
        let a = mh.any_orthonormal().ok()?;
        let b = mh.cross(a);
        Some((a, b))
    }

    /// Point at angle `alpha` along the circle (the midpoint itself when
    /// degenerate).
    pub fn point_at(&self, alpha: f64) -> Vec3 {
        match self.basis() {
            Some((a, b)) => self.m + (a * alpha.cos() + b * alpha.sin()) * self.radius_chord,
            None => self.m,
        }
    }
}

/// Circle of unit vectors sharing the chord midpoint of `[e, qe]`.
/// Errors when `e = -qe` (midpoint vanishes: a great circle without a
/// distinguished diameter pairing).
pub fn chord_midpoint_circle(e: Vec3, qe: Vec3) -> Result<SphericalCircle, GeomError> {
    for v in [e, qe] {
        if !v.is_unit(GEOM_TOL) {
            return Err(GeomError::NonUnitVector { norm: v.norm() });
        }
    }
    let m = (e + qe) * 0.5;
    if m.norm() < GEOM_TOL {
        return Err(GeomError::DegenerateGreatCircle);
    }
    let radius_chord = (e - m).norm();
    Ok(SphericalCircle { m, radius_chord, degenerate: radius_chord < GEOM_TOL })
}

/// Reflection across the plane through the origin spanned by `m1` and `m2`
/// (the plane of the geodesic through their directions). Fixes both inputs;
/// `det_sign = -1`.
pub fn geodesic_reflection(m1: Vec3, m2: Vec3) -> Result<Orthogonal3, GeomError> {
    let n = m1.cross(m2);
    if n.norm() < GEOM_TOL * m1.norm().max(1e-300) * m2.norm().max(1e-300)
        || n.norm() < GEOM_TOL * GEOM_TOL
    {
        return Err(GeomError::DegenerateGeodesic);
    }
    let nh = n.normalized().map_err(|_| GeomError::DegenerateGeodesic)?;
    let refl = reflection_across_plane(nh)?;
    Ok(refl)
}
