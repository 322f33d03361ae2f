use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Mechanism;
use crate::error::{Error, Result};
use crate::manifold::{JointAngles, WorkPoint, TOLERANCES};

/// Which continuous inverse branch to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchTag {
    /// Identity map, or a unit-ratio transmission.
    Identity,
    /// Planar arm with the elbow angle in `[0, π]`; longer chains fold the
    /// distal links straight (`θ3 = … = θn = 0`).
    ElbowDown,
    /// Universal joint latitude in `(-π/2, π/2)`.
    Latitude,
    /// Universal joint latitude in `(π/2, 3π/2)`.
    LatitudeFlipped,
    /// Z-X-Z Euler angles with the middle angle in `(0, π)`.
    EulerUpper,
    /// Z-X-Z Euler angles with the middle angle in `(π, 2π)`.
    EulerLower,
}

impl BranchTag {
    pub fn default_for(mech: &Mechanism) -> Option<Self> {
        match mech {
            Mechanism::SingleRevolute { ratio: 1 } | Mechanism::TorusIdentity { .. } => Some(Self::Identity),
            Mechanism::PlanarArm { .. } => Some(Self::ElbowDown),
            Mechanism::Universal { .. } => Some(Self::Latitude),
            Mechanism::TripleRollWrist => Some(Self::EulerUpper),
            _ => None,
        }
    }
}

fn wrong_branch(mech: &Mechanism, branch: BranchTag) -> Error {
    Error::Unsupported(format!("branch {branch:?} does not apply to {}", mech.name()))
}

/// Evaluates the inverse branch `I` with `F(I(w)) = w`.
pub fn inverse(mech: &Mechanism, w: &WorkPoint, branch: BranchTag) -> Result<JointAngles> {
    mech.check_target(w)?;
    match mech {
        Mechanism::SingleRevolute { ratio } => {
            if *ratio != 1 {
                return Err(Error::NoGlobalInverse);
            }
            if branch != BranchTag::Identity {
                return Err(wrong_branch(mech, branch));
            }
            JointAngles::new(w.angles().unwrap_or_default())
        }
        Mechanism::TorusIdentity { .. } => {
            if branch != BranchTag::Identity {
                return Err(wrong_branch(mech, branch));
            }
            JointAngles::new(w.angles().unwrap_or_default())
        }
        Mechanism::PlanarArm { lengths } => {
            if branch != BranchTag::ElbowDown {
                return Err(wrong_branch(mech, branch));
            }
            let WorkPoint::Planar { x, y } = *w else { unreachable!() };
            planar_elbow_down(lengths, x, y)
        }
        Mechanism::Universal { .. } => {
            let WorkPoint::Sphere(v) = w else { unreachable!() };
            let h = v.x.hypot(v.y);
            if h <= TOLERANCES.regular_value.sin() {
                return Err(Error::BranchDomainError(format!("{branch:?} excludes the poles")));
            }
            let lon = v.y.atan2(v.x);
            let lat = v.z.atan2(h);
            match branch {
                BranchTag::Latitude => JointAngles::new(vec![lon, lat]),
                BranchTag::LatitudeFlipped => JointAngles::new(vec![lon + PI, PI - lat]),
                _ => Err(wrong_branch(mech, branch)),
            }
        }
        Mechanism::TripleRollWrist => {
            let WorkPoint::Rotation(r) = w else { unreachable!() };
            // R = Rz(a)Rx(b)Rz(c):  R02 = sa·sb, R12 = -ca·sb, R20 = sb·sc, R21 = sb·cc, R22 = cb
            let sb = r[(2, 0)].hypot(r[(2, 1)]).max(r[(0, 2)].hypot(r[(1, 2)]));
            if sb <= TOLERANCES.regular_value.sin() {
                return Err(Error::BranchDomainError(format!("{branch:?} excludes the singular circles")));
            }
            let b = sb.atan2(r[(2, 2)]);
            match branch {
                BranchTag::EulerUpper => JointAngles::new(vec![
                    r[(0, 2)].atan2(-r[(1, 2)]),
                    b,
                    r[(2, 0)].atan2(r[(2, 1)]),
                ]),
                BranchTag::EulerLower => JointAngles::new(vec![
                    (-r[(0, 2)]).atan2(r[(1, 2)]),
                    -b,
                    (-r[(2, 0)]).atan2(-r[(2, 1)]),
                ]),
                _ => Err(wrong_branch(mech, branch)),
            }
        }
        Mechanism::Serial6Dof { .. } => Err(Error::Unsupported("serial_6dof carries no inverse".into())),
    }
}

fn planar_elbow_down(lengths: &[f64], x: f64, y: f64) -> Result<JointAngles> {
    let n = lengths.len();
    let r1 = lengths[0];
    let r2: f64 = lengths[1..].iter().sum();
    if n == 1 {
        let r = x.hypot(y);
        if (r - r1).abs() > TOLERANCES.regular_value {
            return Err(Error::Unreachable);
        }
        return JointAngles::new(vec![y.atan2(x)]);
    }
    if n > 2 && r1 <= r2 {
        return Err(Error::Unsupported(
            "folded inverse needs the first link longer than the rest combined".into(),
        ));
    }
    let rho = x.hypot(y);
    let tol = TOLERANCES.regular_value;
    if rho > r1 + r2 + tol || rho < (r1 - r2).abs() - tol {
        return Err(Error::Unreachable);
    }
    if rho <= tol {
        // Only possible when r1 == r2: every shoulder angle reaches the origin.
        return Err(Error::BranchDomainError("origin of an equal-link arm".into()));
    }
    let cos2 = ((rho * rho - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)).clamp(-1.0, 1.0);
    let t2 = cos2.acos();
    let t1 = y.atan2(x) - (r2 * t2.sin()).atan2(r1 + r2 * cos2);
    let mut angles = vec![0.0; n];
    angles[0] = t1;
    angles[1] = t2;
    JointAngles::new(angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{rx, work_distance};
    use crate::mechanisms::forward;
    use nalgebra::Vector3;

    #[test]
    fn planar_examples() {
        let arm = Mechanism::planar_arm(vec![2.0, 1.0]).unwrap();
        let c = inverse(&arm, &WorkPoint::Planar { x: 3.0, y: 0.0 }, BranchTag::ElbowDown).unwrap();
        assert!(c.get(0).abs() < 1e-12 && c.get(1).abs() < 1e-7);

        // law of cosines: cos θ2 = (x²+y² − R1² − R2²)/(2 R1 R2) = (5 − 4 − 1)/4 = 0
        let w = WorkPoint::Planar { x: 2.0, y: 1.0 };
        let c = inverse(&arm, &w, BranchTag::ElbowDown).unwrap();
        assert!((c.get(1) - (0.0f64).acos()).abs() < 1e-12);
        assert!(work_distance(&forward(&arm, &c).unwrap(), &w).unwrap() < 1e-9);

        assert_eq!(inverse(&arm, &WorkPoint::Planar { x: 3.5, y: 0.0 }, BranchTag::ElbowDown), Err(Error::Unreachable));
        assert_eq!(inverse(&arm, &WorkPoint::Planar { x: 0.5, y: 0.0 }, BranchTag::ElbowDown), Err(Error::Unreachable));

        let disk = Mechanism::planar_arm(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            inverse(&disk, &WorkPoint::Planar { x: 1.0, y: 0.0 }, BranchTag::ElbowDown),
            Err(Error::Unsupported(_))
        ));
        let folded = Mechanism::planar_arm(vec![3.0, 1.0, 0.5]).unwrap();
        let w = WorkPoint::Planar { x: 2.0, y: 1.5 };
        let c = inverse(&folded, &w, BranchTag::ElbowDown).unwrap();
        assert_eq!(c.get(2), 0.0);
        assert!(work_distance(&forward(&folded, &c).unwrap(), &w).unwrap() < 1e-9);
    }

    #[test]
    fn universal_examples() {
        let u = Mechanism::universal(1.0).unwrap();
        let c = inverse(&u, &WorkPoint::sphere(Vector3::x()).unwrap(), BranchTag::Latitude).unwrap();
        assert_eq!(c.as_slice(), &[0.0, 0.0]);
        let n = WorkPoint::sphere(Vector3::z()).unwrap();
        assert!(matches!(inverse(&u, &n, BranchTag::Latitude), Err(Error::BranchDomainError(_))));
        let w = WorkPoint::sphere_normalized(Vector3::new(0.2, -0.4, 0.7)).unwrap();
        let c = inverse(&u, &w, BranchTag::LatitudeFlipped).unwrap();
        assert!(c.get(1) > PI / 2.0 && c.get(1) < 1.5 * PI);
        assert!(work_distance(&forward(&u, &c).unwrap(), &w).unwrap() < 1e-12);
    }

    #[test]
    fn wrist_examples() {
        let w = WorkPoint::rotation(rx(PI / 2.0)).unwrap();
        for branch in [BranchTag::EulerUpper, BranchTag::EulerLower] {
            let c = inverse(&Mechanism::TripleRollWrist, &w, branch).unwrap();
            let mid = c.get(1);
            if branch == BranchTag::EulerUpper {
                assert!(mid > 0.0 && mid < PI);
            } else {
                assert!(mid > PI && mid < 2.0 * PI);
            }
            assert!(work_distance(&forward(&Mechanism::TripleRollWrist, &c).unwrap(), &w).unwrap() < 1e-9);
        }
        let singular = WorkPoint::rotation(crate::manifold::rz(0.7)).unwrap();
        assert!(matches!(
            inverse(&Mechanism::TripleRollWrist, &singular, BranchTag::EulerUpper),
            Err(Error::BranchDomainError(_))
        ));
    }

    #[test]
    fn transmission_has_no_inverse() {
        let k2 = Mechanism::single_revolute(2).unwrap();
        assert_eq!(inverse(&k2, &WorkPoint::Circle(1.0), BranchTag::Identity), Err(Error::NoGlobalInverse));
        let k1 = Mechanism::single_revolute(1).unwrap();
        assert_eq!(inverse(&k1, &WorkPoint::Circle(1.0), BranchTag::Identity).unwrap().get(0), 1.0);
    }
}
