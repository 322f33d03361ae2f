use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::angles::{circle_distance, wrap, JointAngles};
use super::TOLERANCES;
use crate::error::{Error, Result};

/// Which workspace a mechanism maps into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkKind {
    Planar,
    Sphere,
    Rotation,
    Pose,
    Circle,
    /// The configuration torus itself, for identity maps `T^n -> T^n`.
    Torus,
}

/// A point of a workspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WorkPointRepr", into = "WorkPointRepr")]
pub enum WorkPoint {
    Planar { x: f64, y: f64 },
    Sphere(Vector3<f64>),
    Rotation(Matrix3<f64>),
    Pose { p: Vector3<f64>, r: Matrix3<f64> },
    Circle(f64),
    Torus(JointAngles),
}

impl WorkPoint {
    pub fn planar(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::InvalidInput("non-finite planar point".into()));
        }
        Ok(Self::Planar { x, y })
    }

    pub fn sphere(v: Vector3<f64>) -> Result<Self> {
        if (v.norm() - 1.0).abs() > TOLERANCES.unit_norm || !v.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput(format!("sphere point has norm {}", v.norm())));
        }
        Ok(Self::Sphere(v))
    }

    /// Normalizes `v` onto the unit sphere.
    pub fn sphere_normalized(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidInput("cannot normalize zero vector".into()));
        }
        Self::sphere(v / n)
    }

    pub fn rotation(r: Matrix3<f64>) -> Result<Self> {
        check_rotation(&r)?;
        Ok(Self::Rotation(r))
    }

    pub fn pose(p: Vector3<f64>, r: Matrix3<f64>) -> Result<Self> {
        check_rotation(&r)?;
        if !p.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("non-finite position".into()));
        }
        Ok(Self::Pose { p, r })
    }

    pub fn circle(theta: f64) -> Result<Self> {
        Ok(Self::Circle(super::angle_normalize(theta)?))
    }

    pub fn kind(&self) -> WorkKind {
        match self {
            Self::Planar { .. } => WorkKind::Planar,
            Self::Sphere(_) => WorkKind::Sphere,
            Self::Rotation(_) => WorkKind::Rotation,
            Self::Pose { .. } => WorkKind::Pose,
            Self::Circle(_) => WorkKind::Circle,
            Self::Torus(_) => WorkKind::Torus,
        }
    }

    /// Angles of a circle or torus point.
    pub fn angles(&self) -> Option<Vec<f64>> {
        match self {
            Self::Circle(a) => Some(vec![*a]),
            Self::Torus(c) => Some(c.as_slice().to_vec()),
            _ => None,
        }
    }

    /// The identity-map target for a configuration: a circle point in
    /// dimension one, a torus point otherwise.
    pub fn from_config(c: &JointAngles) -> Self {
        if c.dim() == 1 {
            Self::Circle(c.get(0))
        } else {
            Self::Torus(c.clone())
        }
    }
}

fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    let tol = TOLERANCES.orthonormality;
    if !r.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("non-finite rotation".into()));
    }
    let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
    let det = (r.determinant() - 1.0).abs();
    if ortho > tol || det > tol {
        return Err(Error::InvalidInput(format!(
            "not a rotation (orthogonality defect {ortho:e}, det defect {det:e})"
        )));
    }
    Ok(())
}

pub fn rx(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn ry(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rz(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn vee_skew(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)])
}

/// Angle of a rotation matrix, accurate near both 0 and π.
pub fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    let cos = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let sin = (vee_skew(r).norm() / 2.0).clamp(0.0, 1.0);
    sin.atan2(cos)
}

/// Rotation vector (axis times angle) of `r`.
pub fn rotation_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let theta = rotation_angle(r);
    let w = vee_skew(r);
    if theta < 1e-6 {
        // θ/(2 sin θ) = 1/2 + θ²/12 + O(θ⁴)
        return w * (0.5 + theta * theta / 12.0);
    }
    if theta < PI - 1e-4 {
        return w * (theta / (2.0 * theta.sin()));
    }
    // Near π the skew part vanishes; recover the axis from the symmetric part.
    let b = ((r + r.transpose()) / 2.0 + Matrix3::identity()) / 2.0;
    let i = (0..3).max_by(|&a, &c| b[(a, a)].total_cmp(&b[(c, c)])).unwrap_or(0);
    let mut n: Vector3<f64> = b.column(i).into();
    n /= b[(i, i)].max(0.0).sqrt().max(f64::MIN_POSITIVE);
    n.normalize_mut();
    if n.dot(&w) < 0.0 {
        n = -n;
    }
    n * theta
}

pub fn so3_exp(w: &Vector3<f64>) -> Matrix3<f64> {
    Rotation3::new(*w).into_inner()
}

/// Distance between two workspace points of the same variant.
///
/// Planar: Euclidean. Sphere: great-circle angle. Rotation: angle of the
/// relative rotation. Pose: the larger of position distance and relative
/// rotation angle. Circle/Torus: geodesic (max over coordinates).
pub fn work_distance(w1: &WorkPoint, w2: &WorkPoint) -> Result<f64> {
    use WorkPoint::*;
    match (w1, w2) {
        (Planar { x: x1, y: y1 }, Planar { x: x2, y: y2 }) => Ok((x1 - x2).hypot(y1 - y2)),
        (Sphere(a), Sphere(b)) => Ok(a.cross(b).norm().atan2(a.dot(b))),
        (Rotation(a), Rotation(b)) => Ok(rotation_angle(&(a.transpose() * b))),
        (Pose { p: p1, r: r1 }, Pose { p: p2, r: r2 }) => {
            Ok((p1 - p2).norm().max(rotation_angle(&(r1.transpose() * r2))))
        }
        (Circle(a), Circle(b)) => Ok(circle_distance(*a, *b)),
        (Torus(a), Torus(b)) => super::torus_distance(a, b),
        _ => Err(Error::TypeError(format!("{:?} vs {:?}", w1.kind(), w2.kind()))),
    }
}

/// JSON shape of a [`WorkPoint`].
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum WorkPointRepr {
    Planar { x: f64, y: f64 },
    Sphere { v: [f64; 3] },
    Rotation { r: [[f64; 3]; 3] },
    Pose { p: [f64; 3], r: [[f64; 3]; 3] },
    Circle { theta: f64 },
    Torus { angles: Vec<f64> },
}

fn rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn from_rows(r: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| r[i][j])
}

impl From<WorkPoint> for WorkPointRepr {
    fn from(w: WorkPoint) -> Self {
        match w {
            WorkPoint::Planar { x, y } => Self::Planar { x, y },
            WorkPoint::Sphere(v) => Self::Sphere { v: v.into() },
            WorkPoint::Rotation(r) => Self::Rotation { r: rows(&r) },
            WorkPoint::Pose { p, r } => Self::Pose { p: p.into(), r: rows(&r) },
            WorkPoint::Circle(theta) => Self::Circle { theta },
            WorkPoint::Torus(c) => Self::Torus { angles: c.into() },
        }
    }
}

impl TryFrom<WorkPointRepr> for WorkPoint {
    type Error = Error;

    fn try_from(r: WorkPointRepr) -> Result<Self> {
        match r {
            WorkPointRepr::Planar { x, y } => Self::planar(x, y),
            WorkPointRepr::Sphere { v } => Self::sphere(Vector3::from(v)),
            WorkPointRepr::Rotation { r } => Self::rotation(from_rows(&r)),
            WorkPointRepr::Pose { p, r } => Self::pose(Vector3::from(p), from_rows(&r)),
            WorkPointRepr::Circle { theta } => Self::circle(theta),
            WorkPointRepr::Torus { angles } => Ok(Self::Torus(JointAngles::new(angles)?)),
        }
    }
}

impl WorkPoint {
    pub(crate) fn circle_unchecked(theta: f64) -> Self {
        Self::Circle(wrap(theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let i = WorkPoint::rotation(Matrix3::identity()).unwrap();
        assert_eq!(work_distance(&i, &i).unwrap(), 0.0);
        let n = WorkPoint::sphere(Vector3::z()).unwrap();
        let s = WorkPoint::sphere(-Vector3::z()).unwrap();
        assert!((work_distance(&n, &s).unwrap() - PI).abs() < 1e-15);
        // arccos((tr(Rz(π/3)) - 1)/2) = arccos((1 + 2cos(π/3) - 1)/2) = π/3
        let r = WorkPoint::rotation(rz(PI / 3.0)).unwrap();
        let oracle = ((rz(PI / 3.0).trace() - 1.0) / 2.0).acos();
        assert!((work_distance(&r, &i).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - PI / 3.0).abs() < 1e-12);
        assert!(matches!(work_distance(&n, &i), Err(Error::TypeError(_))));
    }

    #[test]
    fn rotation_angle_is_accurate_near_identity() {
        let r = rz(1e-13);
        assert!((rotation_angle(&r) - 1e-13).abs() < 1e-20);
    }

    #[test]
    fn log_exp_roundtrip_near_pi() {
        for angle in [0.0, 1e-9, 0.3, 2.0, PI - 1e-6, PI] {
            let w = Vector3::new(0.3, -0.5, 0.8).normalize() * angle;
            let r = so3_exp(&w);
            let back = so3_exp(&rotation_log(&r));
            assert!(rotation_angle(&(r.transpose() * back)) < 1e-9, "angle {angle}");
        }
    }

    #[test]
    fn rejects_non_rotation() {
        assert!(WorkPoint::rotation(Matrix3::identity() * 2.0).is_err());
        assert!(WorkPoint::rotation(-Matrix3::<f64>::identity()).is_err());
        assert!(WorkPoint::sphere(Vector3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn json_shape() {
        let w = WorkPoint::sphere(Vector3::z()).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"kind":"sphere","v":[0.0,0.0,1.0]}"#);
        let back: WorkPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<WorkPoint>(r#"{"kind":"sphere","v":[1,1,0]}"#).is_err());
    }
}
