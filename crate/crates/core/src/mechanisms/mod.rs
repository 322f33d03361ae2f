//! Forward kinematic maps, their Jacobians, and branch-selected inverses for
//! the supported mechanisms.

mod inverse;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

pub use inverse::{inverse, BranchTag};

use crate::error::{Error, Result};
use crate::manifold::{rotation_log, rx, rz, shortest_diff, JointAngles, WorkKind, WorkPoint, TOLERANCES};

/// One Denavit-Hartenberg row: link length `a`, twist `alpha`, offset `d`,
/// joint angle offset `theta0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub theta0: f64,
}

impl From<[f64; 4]> for DhRow {
    fn from([a, alpha, d, theta0]: [f64; 4]) -> Self {
        Self { a, alpha, d, theta0 }
    }
}

impl From<DhRow> for [f64; 4] {
    fn from(r: DhRow) -> Self {
        [r.a, r.alpha, r.d, r.theta0]
    }
}

/// A forward kinematic map `F: T^n -> W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MechanismRepr", into = "MechanismRepr")]
pub enum Mechanism {
    /// One joint driving the end effector through a transmission: `F(θ) = kθ`.
    SingleRevolute { ratio: u32 },
    /// Planar chain of revolute joints with the given link lengths.
    PlanarArm { lengths: Vec<f64> },
    /// Two orthogonal revolute axes; the tip moves on a sphere of radius `radius`.
    Universal { radius: f64 },
    /// Three intersecting roll axes, `R = Rz(θ1)·Rx(θ2)·Rz(θ3)`.
    TripleRollWrist,
    /// General six-joint serial arm from DH rows.
    Serial6Dof { dh: Vec<DhRow> },
    /// Identity map of `T^n`; motion planning inside the configuration space.
    TorusIdentity { dim: usize },
}

impl Mechanism {
    pub fn single_revolute(ratio: u32) -> Result<Self> {
        if ratio < 1 {
            return Err(Error::InvalidInput("transmission ratio must be at least 1".into()));
        }
        Ok(Self::SingleRevolute { ratio })
    }

    pub fn planar_arm(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() || lengths.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidInput("link lengths must be positive".into()));
        }
        Ok(Self::PlanarArm { lengths })
    }

    pub fn universal(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput("radius must be positive".into()));
        }
        Ok(Self::Universal { radius })
    }

    pub fn serial_6dof(dh: Vec<DhRow>) -> Result<Self> {
        if dh.len() != 6 {
            return Err(Error::DimensionError { expected: 6, got: dh.len() });
        }
        if dh.iter().any(|r| ![r.a, r.alpha, r.d, r.theta0].iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidInput("non-finite DH parameter".into()));
        }
        Ok(Self::Serial6Dof { dh })
    }

    pub fn torus_identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("torus dimension must be at least 1".into()));
        }
        Ok(Self::TorusIdentity { dim })
    }

    pub fn config_dim(&self) -> usize {
        match self {
            Self::SingleRevolute { .. } => 1,
            Self::PlanarArm { lengths } => lengths.len(),
            Self::Universal { .. } => 2,
            Self::TripleRollWrist => 3,
            Self::Serial6Dof { .. } => 6,
            Self::TorusIdentity { dim } => *dim,
        }
    }

    pub fn work_kind(&self) -> WorkKind {
        match self {
            Self::SingleRevolute { .. } => WorkKind::Circle,
            Self::PlanarArm { .. } => WorkKind::Planar,
            Self::Universal { .. } => WorkKind::Sphere,
            Self::TripleRollWrist => WorkKind::Rotation,
            Self::Serial6Dof { .. } => WorkKind::Pose,
            Self::TorusIdentity { dim: 1 } => WorkKind::Circle,
            Self::TorusIdentity { .. } => WorkKind::Torus,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SingleRevolute { .. } => "single_revolute",
            Self::PlanarArm { .. } => "planar_arm",
            Self::Universal { .. } => "universal",
            Self::TripleRollWrist => "triple_roll_wrist",
            Self::Serial6Dof { .. } => "serial_6dof",
            Self::TorusIdentity { .. } => "torus_identity",
        }
    }

    /// Planar arm whose first link is longer than the rest combined; its
    /// workspace is an annulus rather than a disk.
    pub fn has_annulus_workspace(&self) -> bool {
        match self {
            Self::PlanarArm { lengths } => lengths[0] > lengths[1..].iter().sum::<f64>(),
            _ => false,
        }
    }

    /// Inner and outer workspace radius of a planar arm.
    pub fn reach(&self) -> Option<(f64, f64)> {
        match self {
            Self::PlanarArm { lengths } => {
                let total: f64 = lengths.iter().sum();
                let longest = lengths.iter().copied().fold(0.0, f64::max);
                Some(((2.0 * longest - total).max(0.0), total))
            }
            _ => None,
        }
    }

    pub fn check_config(&self, c: &JointAngles) -> Result<()> {
        if c.dim() != self.config_dim() {
            return Err(Error::DimensionError { expected: self.config_dim(), got: c.dim() });
        }
        Ok(())
    }

    pub fn check_target(&self, w: &WorkPoint) -> Result<()> {
        if w.kind() != self.work_kind() {
            return Err(Error::TypeError(format!(
                "{} expects {:?} targets, got {:?}",
                self.name(),
                self.work_kind(),
                w.kind()
            )));
        }
        if let WorkPoint::Torus(c) = w {
            self.check_config(c)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MechanismRepr {
    SingleRevolute { ratio: u32 },
    PlanarArm { lengths: Vec<f64> },
    Universal { radius: f64 },
    TripleRollWrist,
    #[serde(rename = "serial_6dof")]
    Serial6Dof { dh: Vec<DhRow> },
    TorusIdentity { dim: usize },
}

impl TryFrom<MechanismRepr> for Mechanism {
    type Error = Error;

    fn try_from(r: MechanismRepr) -> Result<Self> {
        match r {
            MechanismRepr::SingleRevolute { ratio } => Self::single_revolute(ratio),
            MechanismRepr::PlanarArm { lengths } => Self::planar_arm(lengths),
            MechanismRepr::Universal { radius } => Self::universal(radius),
            MechanismRepr::TripleRollWrist => Ok(Self::TripleRollWrist),
            MechanismRepr::Serial6Dof { dh } => Self::serial_6dof(dh),
            MechanismRepr::TorusIdentity { dim } => Self::torus_identity(dim),
        }
    }
}

impl From<Mechanism> for MechanismRepr {
    fn from(m: Mechanism) -> Self {
        match m {
            Mechanism::SingleRevolute { ratio } => Self::SingleRevolute { ratio },
            Mechanism::PlanarArm { lengths } => Self::PlanarArm { lengths },
            Mechanism::Universal { radius } => Self::Universal { radius },
            Mechanism::TripleRollWrist => Self::TripleRollWrist,
            Mechanism::Serial6Dof { dh } => Self::Serial6Dof { dh },
            Mechanism::TorusIdentity { dim } => Self::TorusIdentity { dim },
        }
    }
}

pub(crate) fn euler_zxz(t1: f64, t2: f64, t3: f64) -> Matrix3<f64> {
    rz(t1) * rx(t2) * rz(t3)
}

fn dh_chain(dh: &[DhRow], angles: &[f64]) -> (Vector3<f64>, Matrix3<f64>) {
    let mut r = Matrix3::identity();
    let mut p = Vector3::zeros();
    for (row, &theta) in dh.iter().zip(angles) {
        let th = theta + row.theta0;
        let local = Vector3::new(row.a * th.cos(), row.a * th.sin(), row.d);
        p += r * local;
        r = r * rz(th) * rx(row.alpha);
    }
    (p, r)
}

/// Evaluates `F(c)`.
pub fn forward(mech: &Mechanism, c: &JointAngles) -> Result<WorkPoint> {
    mech.check_config(c)?;
    let a = c.as_slice();
    Ok(match mech {
        Mechanism::SingleRevolute { ratio } => WorkPoint::circle_unchecked(*ratio as f64 * a[0]),
        Mechanism::PlanarArm { lengths } => {
            let (mut x, mut y, mut phi) = (0.0, 0.0, 0.0);
            for (l, th) in lengths.iter().zip(a) {
                phi += th;
                x += l * phi.cos();
                y += l * phi.sin();
            }
            WorkPoint::Planar { x, y }
        }
        Mechanism::Universal { .. } => {
            let (s1, c1) = a[0].sin_cos();
            let (s2, c2) = a[1].sin_cos();
            WorkPoint::Sphere(Vector3::new(c1 * c2, s1 * c2, s2))
        }
        Mechanism::TripleRollWrist => WorkPoint::Rotation(euler_zxz(a[0], a[1], a[2])),
        Mechanism::Serial6Dof { dh } => {
            let (p, r) = dh_chain(dh, a);
            WorkPoint::Pose { p, r }
        }
        Mechanism::TorusIdentity { .. } => WorkPoint::from_config(c),
    })
}

/// Jacobian of `F` at a configuration.
///
/// Rows are the workspace tangent coordinates used by [`tangent_difference`]:
/// the angle for circles, `(x, y)` for the plane, ambient `R·(x, y, z)` for the
/// sphere, body-frame angular velocity for rotations, and world position
/// followed by body angular velocity for poses.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub matrix: DMatrix<f64>,
    pub evaluated_at: JointAngles,
}

impl Jacobian {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.matrix.clone().svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }
}

pub fn jacobian(mech: &Mechanism, c: &JointAngles) -> Result<Jacobian> {
    mech.check_config(c)?;
    let a = c.as_slice();
    let matrix = match mech {
        Mechanism::SingleRevolute { ratio } => DMatrix::from_element(1, 1, *ratio as f64),
        Mechanism::TorusIdentity { dim } => DMatrix::identity(*dim, *dim),
        Mechanism::PlanarArm { lengths } => {
            let n = lengths.len();
            let mut phi = 0.0;
            let terms: Vec<(f64, f64)> = lengths
                .iter()
                .zip(a)
                .map(|(l, th)| {
                    phi += th;
                    (-l * phi.sin(), l * phi.cos())
                })
                .collect();
            DMatrix::from_fn(2, n, |r, i| terms[i..].iter().map(|t| if r == 0 { t.0 } else { t.1 }).sum())
        }
        Mechanism::Universal { radius } => {
            let (s1, c1) = a[0].sin_cos();
            let (s2, c2) = a[1].sin_cos();
            DMatrix::from_row_slice(3, 2, &[-s1 * c2, -c1 * s2, c1 * c2, -s1 * s2, 0.0, c2]) * *radius
        }
        Mechanism::TripleRollWrist => {
            let j1 = rz(-a[2]) * rx(-a[1]) * Vector3::z();
            let j2 = rz(-a[2]) * Vector3::x();
            let j3 = Vector3::z();
            DMatrix::from_columns(&[j1, j2, j3].map(|v| DVector::from_column_slice(v.as_slice())))
        }
        Mechanism::Serial6Dof { .. } => return finite_difference_jacobian(mech, c, TOLERANCES.fd_step),
    };
    Ok(Jacobian { matrix, evaluated_at: c.clone() })
}

/// Central-difference Jacobian in the same tangent coordinates as [`jacobian`].
pub fn finite_difference_jacobian(mech: &Mechanism, c: &JointAngles, step: f64) -> Result<Jacobian> {
    let base = forward(mech, c)?;
    let n = mech.config_dim();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let mut plus = c.as_slice().to_vec();
        let mut minus = plus.clone();
        plus[i] += step;
        minus[i] -= step;
        let fp = forward(mech, &JointAngles::new(plus)?)?;
        let fm = forward(mech, &JointAngles::new(minus)?)?;
        let dp = tangent_difference(mech, &base, &fp)?;
        let dm = tangent_difference(mech, &base, &fm)?;
        cols.push((dp - dm) / (2.0 * step));
    }
    Ok(Jacobian { matrix: DMatrix::from_columns(&cols), evaluated_at: c.clone() })
}

/// Tangent vector at `from` pointing to `to`, in Jacobian row coordinates.
pub fn tangent_difference(mech: &Mechanism, from: &WorkPoint, to: &WorkPoint) -> Result<DVector<f64>> {
    use WorkPoint::*;
    Ok(match (from, to) {
        (Circle(a), Circle(b)) => DVector::from_element(1, shortest_diff(*a, *b)),
        (Torus(a), Torus(b)) => {
            DVector::from_iterator(a.dim(), a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| shortest_diff(*x, *y)))
        }
        (Planar { x: x1, y: y1 }, Planar { x: x2, y: y2 }) => DVector::from_column_slice(&[x2 - x1, y2 - y1]),
        (Sphere(a), Sphere(b)) => {
            let radius = match mech {
                Mechanism::Universal { radius } => *radius,
                _ => 1.0,
            };
            DVector::from_column_slice((radius * (b - a)).as_slice())
        }
        (Rotation(a), Rotation(b)) => DVector::from_column_slice(rotation_log(&(a.transpose() * b)).as_slice()),
        (Pose { p: p1, r: r1 }, Pose { p: p2, r: r2 }) => {
            let w = rotation_log(&(r1.transpose() * r2));
            let dp = p2 - p1;
            DVector::from_column_slice(&[dp.x, dp.y, dp.z, w.x, w.y, w.z])
        }
        _ => return Err(Error::TypeError(format!("{:?} vs {:?}", from.kind(), to.kind()))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::work_distance;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ja(v: &[f64]) -> JointAngles {
        JointAngles::new(v.to_vec()).unwrap()
    }

    #[test]
    fn forward_examples() {
        let arm = Mechanism::planar_arm(vec![2.0, 1.0]).unwrap();
        assert_eq!(forward(&arm, &ja(&[0.0, 0.0])).unwrap(), WorkPoint::Planar { x: 3.0, y: 0.0 });

        let u = Mechanism::universal(1.0).unwrap();
        let n = WorkPoint::sphere(Vector3::z()).unwrap();
        assert!(work_distance(&forward(&u, &ja(&[0.0, FRAC_PI_2])).unwrap(), &n).unwrap() < 1e-15);

        let k2 = Mechanism::single_revolute(2).unwrap();
        assert_eq!(forward(&k2, &ja(&[FRAC_PI_2])).unwrap(), WorkPoint::Circle(PI));

        let phi = 0.83;
        let r = forward(&Mechanism::TripleRollWrist, &ja(&[phi, 0.0, 0.0])).unwrap();
        let expected = WorkPoint::rotation(rz(phi)).unwrap();
        assert!(work_distance(&r, &expected).unwrap() < 1e-15);

        assert!(matches!(forward(&arm, &ja(&[0.0])), Err(Error::DimensionError { .. })));
    }

    #[test]
    fn jacobian_examples() {
        let u = Mechanism::universal(1.0).unwrap();
        let j = jacobian(&u, &ja(&[0.0, 0.0])).unwrap();
        assert_eq!(j.matrix, DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]));
        let u2 = Mechanism::universal(2.5).unwrap();
        assert_eq!(jacobian(&u2, &ja(&[0.0, 0.0])).unwrap().matrix, j.matrix * 2.5);

        let sv = jacobian(&u, &ja(&[0.0, FRAC_PI_2])).unwrap().singular_values();
        assert!(sv[0] > 0.5 && sv[1] < 1e-15);

        let arm = Mechanism::planar_arm(vec![2.0, 1.0]).unwrap();
        let j = jacobian(&arm, &ja(&[0.0, 0.0])).unwrap();
        assert_eq!(j.matrix, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 3.0, 1.0]));
    }

    #[test]
    fn serial_pose_is_orthonormal() {
        let dh = [[0.0, FRAC_PI_2, 0.4, 0.0], [0.5, 0.0, 0.0, 0.0], [0.1, FRAC_PI_2, 0.0, 0.0], [0.0, -FRAC_PI_2, 0.45, 0.0], [0.0, FRAC_PI_2, 0.0, 0.0], [0.0, 0.0, 0.1, 0.0]];
        let m = Mechanism::serial_6dof(dh.iter().map(|r| DhRow::from(*r)).collect()).unwrap();
        let w = forward(&m, &ja(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6])).unwrap();
        let WorkPoint::Pose { p, r } = w else { panic!() };
        WorkPoint::pose(p, r).unwrap();
        assert_eq!(jacobian(&m, &ja(&[0.1; 6])).unwrap().matrix.shape(), (6, 6));
    }

    #[test]
    fn json_forms() {
        let m: Mechanism = serde_json::from_str(r#"{"kind": "planar_arm", "lengths": [2.0, 1.0]}"#).unwrap();
        assert_eq!(m, Mechanism::PlanarArm { lengths: vec![2.0, 1.0] });
        let m: Mechanism = serde_json::from_str(r#"{"kind":"universal","radius":1.0}"#).unwrap();
        assert_eq!(m.config_dim(), 2);
        let m: Mechanism = serde_json::from_str(r#"{"kind":"single_revolute","ratio":2}"#).unwrap();
        assert_eq!(m.work_kind(), WorkKind::Circle);
        let m: Mechanism = serde_json::from_str(r#"{"kind":"triple_roll_wrist"}"#).unwrap();
        assert_eq!(m.config_dim(), 3);
        let m: Mechanism = serde_json::from_str(
            r#"{"kind":"serial_6dof","dh":[[0,1.57,0.4,0],[0.5,0,0,0],[0.1,1.57,0,0],[0,-1.57,0.45,0],[0,1.57,0,0],[0,0,0.1,0]]}"#,
        )
        .unwrap();
        assert_eq!(m.config_dim(), 6);
        assert!(serde_json::from_str::<Mechanism>(r#"{"kind":"planar_arm","lengths":[-1.0]}"#).is_err());
        assert!(serde_json::from_str::<Mechanism>(r#"{"kind":"single_revolute","ratio":0}"#).is_err());
        assert!(serde_json::from_str::<Mechanism>(r#"{"kind":"serial_6dof","dh":[[0,0,0,0]]}"#).is_err());
    }

    #[test]
    fn annulus_flag() {
        assert!(Mechanism::planar_arm(vec![2.0, 1.0]).unwrap().has_annulus_workspace());
        assert!(Mechanism::planar_arm(vec![3.0, 1.0, 0.5]).unwrap().has_annulus_workspace());
        assert!(!Mechanism::planar_arm(vec![1.0, 1.0, 1.0]).unwrap().has_annulus_workspace());
        assert_eq!(Mechanism::planar_arm(vec![1.0, 3.0]).unwrap().reach(), Some((2.0, 4.0)));
    }
}
