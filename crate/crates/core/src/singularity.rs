//! Regular and singular configurations, and regular values.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use nalgebra::Vector3;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{angles_circle_distance, JointAngles, WorkPoint, TOLERANCES};
use crate::mechanisms::{jacobian, Mechanism};
use crate::verification::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub config: Vec<f64>,
    pub rank: usize,
    pub full_rank: bool,
    /// Smallest singular value of the Jacobian.
    pub margin: f64,
}

/// Numerical rank of the Jacobian, counting singular values above
/// `tol × σ_max`.
pub fn rank_at(mech: &Mechanism, c: &JointAngles, tol: f64) -> Result<RegularityReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("rank tolerance must be positive".into()));
    }
    let j = jacobian(mech, c)?;
    let sv = j.singular_values();
    let largest = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > tol * largest).count();
    let full = j.rows().min(j.cols());
    Ok(RegularityReport {
        config: c.as_slice().to_vec(),
        rank,
        full_rank: rank == full,
        margin: sv.last().copied().unwrap_or(0.0).max(0.0),
    })
}

/// Whether every preimage of `w` is a regular configuration.
pub fn is_regular_value(mech: &Mechanism, w: &WorkPoint) -> Result<bool> {
    mech.check_target(w)?;
    let tol = TOLERANCES.regular_value;
    match (mech, w) {
        (Mechanism::SingleRevolute { .. } | Mechanism::TorusIdentity { .. }, _) => Ok(true),
        (Mechanism::Universal { .. }, WorkPoint::Sphere(v)) => Ok(v.x.hypot(v.y) > tol.sin()),
        (Mechanism::TripleRollWrist, WorkPoint::Rotation(r)) => Ok(wrist_singular_distance(r) > tol),
        (Mechanism::PlanarArm { lengths }, WorkPoint::Planar { x, y }) => {
            let rho = x.hypot(*y);
            let (inner, outer) = mech.reach().unwrap_or((0.0, 0.0));
            if rho > outer + tol || rho < inner - tol {
                return Err(Error::Unreachable);
            }
            Ok(critical_radii(lengths).iter().all(|r| (rho - r).abs() > tol))
        }
        (Mechanism::Serial6Dof { .. }, _) => {
            Err(Error::Unsupported("no analytic regular-value rule for serial_6dof".into()))
        }
        _ => unreachable!("target kind checked above"),
    }
}

/// Jacobian margins over uniformly random configurations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginStats {
    pub samples: usize,
    /// Configurations with `rank_at(…, tol).full_rank == false`.
    pub rank_deficient: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// Samples `samples` configurations from the seeded stream and summarises the
/// smallest singular value of the Jacobian.
pub fn margin_statistics(mech: &Mechanism, seed: u64, samples: usize, tol: f64) -> Result<MarginStats> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let n = mech.config_dim();
    let reports = (0..samples)
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let c = JointAngles::from_unwrapped(&(0..n).map(|_| rng.gen_range(0.0..TAU)).collect::<Vec<_>>());
            rank_at(mech, &c, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut margins: Vec<f64> = reports.iter().map(|r| r.margin).collect();
    margins.sort_by(f64::total_cmp);
    Ok(MarginStats {
        samples,
        rank_deficient: reports.iter().filter(|r| !r.full_rank).count(),
        min: margins[0],
        median: margins[samples / 2],
        max: margins[samples - 1],
    })
}

/// Angle from a rotation to the nearer of the two singular circles
/// `{Rz(φ)}` and `{Rz(ψ)·Rx(π)}`: the angle between the rotated and the
/// reference z axes, folded at π/2.
pub fn wrist_singular_distance(r: &nalgebra::Matrix3<f64>) -> f64 {
    let z: Vector3<f64> = r.column(2).into();
    let tilt = z.cross(&Vector3::z()).norm().atan2(z.z);
    tilt.min(PI - tilt)
}

/// All radii `|R1 ± R2 ± … ± Rn|`, where a planar chain is fully folded or
/// stretched.
pub fn critical_radii(lengths: &[f64]) -> Vec<f64> {
    let n = lengths.len();
    let mut radii: Vec<f64> = (0..1usize << (n - 1))
        .map(|mask| {
            let s: f64 = lengths[0]
                + lengths[1..]
                    .iter()
                    .enumerate()
                    .map(|(i, l)| if mask >> i & 1 == 1 { -l } else { *l })
                    .sum::<f64>();
            s.abs()
        })
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    radii
}

type DistanceFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Analytic singular set of a mechanism.
#[derive(Clone)]
pub struct SingularLocus {
    pub description: String,
    distance: DistanceFn,
}

impl std::fmt::Debug for SingularLocus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SingularLocus").field("description", &self.description).finish()
    }
}

impl SingularLocus {
    /// Distance (max over the constrained coordinates) from `c` to the
    /// locus; `f64::INFINITY` for an empty locus.
    pub fn distance(&self, c: &JointAngles) -> f64 {
        (self.distance)(c.as_slice())
    }

    pub fn contains(&self, c: &JointAngles) -> bool {
        self.distance(c) <= TOLERANCES.locus
    }
}

fn distance_to_set(a: f64, set: &[f64]) -> f64 {
    set.iter().map(|&s| angles_circle_distance(a, s)).fold(f64::INFINITY, f64::min)
}

pub fn singular_locus(mech: &Mechanism) -> Result<SingularLocus> {
    let (description, distance): (String, DistanceFn) = match mech {
        Mechanism::SingleRevolute { .. } => ("empty: F is a covering map".into(), Arc::new(|_| f64::INFINITY)),
        Mechanism::TorusIdentity { .. } => ("empty: identity map".into(), Arc::new(|_| f64::INFINITY)),
        Mechanism::Universal { .. } => (
            "gimbal lock: theta_2 in {pi/2, 3pi/2} (end effector at a pole)".into(),
            Arc::new(|a| distance_to_set(a[1], &[FRAC_PI_2, 3.0 * FRAC_PI_2])),
        ),
        Mechanism::TripleRollWrist => (
            "theta_2 in {0, pi}: T x {0, pi} x T, two disjoint tori".into(),
            Arc::new(|a| distance_to_set(a[1], &[0.0, PI])),
        ),
        Mechanism::PlanarArm { lengths } => {
            let n = lengths.len();
            let description = if n == 1 {
                "empty: a single link is a covering of its circle".to_string()
            } else {
                format!("all links collinear: theta_2..theta_{n} in {{0, pi}}")
            };
            let d: DistanceFn = if n == 1 {
                Arc::new(|_| f64::INFINITY)
            } else {
                Arc::new(|a| a[1..].iter().map(|&x| distance_to_set(x, &[0.0, PI])).fold(0.0, f64::max))
            };
            (description, d)
        }
        Mechanism::Serial6Dof { .. } => {
            return Err(Error::Unsupported("no analytic singular locus for serial_6dof".into()))
        }
    };
    Ok(SingularLocus { description, distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::rz;

    fn ja(v: &[f64]) -> JointAngles {
        JointAngles::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rank_examples() {
        let u = Mechanism::universal(1.0).unwrap();
        assert!(rank_at(&u, &ja(&[1.3, 0.0]), 1e-8).unwrap().full_rank);
        let r = rank_at(&u, &ja(&[0.4, FRAC_PI_2]), 1e-8).unwrap();
        assert_eq!(r.rank, 1);
        assert!(!r.full_rank);
        assert!(!rank_at(&Mechanism::TripleRollWrist, &ja(&[0.2, PI, 1.1]), 1e-8).unwrap().full_rank);
        assert!(rank_at(&u, &ja(&[0.0, 0.0]), 0.0).is_err());
    }

    #[test]
    fn regular_value_examples() {
        let u = Mechanism::universal(1.0).unwrap();
        assert!(!is_regular_value(&u, &WorkPoint::sphere(Vector3::z()).unwrap()).unwrap());
        assert!(is_regular_value(&u, &WorkPoint::sphere(Vector3::x()).unwrap()).unwrap());
        let r = WorkPoint::rotation(rz(0.7)).unwrap();
        assert!(!is_regular_value(&Mechanism::TripleRollWrist, &r).unwrap());
        let flipped = WorkPoint::rotation(rz(0.7) * crate::manifold::rx(PI)).unwrap();
        assert!(!is_regular_value(&Mechanism::TripleRollWrist, &flipped).unwrap());
        // √5 lies strictly between the critical radii 1 and 3.
        let arm = Mechanism::planar_arm(vec![2.0, 1.0]).unwrap();
        assert_eq!(critical_radii(&[2.0, 1.0]), vec![1.0, 3.0]);
        assert!(is_regular_value(&arm, &WorkPoint::Planar { x: 2.0, y: 1.0 }).unwrap());
        assert!(!is_regular_value(&arm, &WorkPoint::Planar { x: 3.0, y: 0.0 }).unwrap());
        let s6 = Mechanism::serial_6dof(vec![[0.0; 4].into(); 6]).unwrap();
        let pose = WorkPoint::pose(Vector3::zeros(), nalgebra::Matrix3::identity()).unwrap();
        assert!(matches!(is_regular_value(&s6, &pose), Err(Error::Unsupported(_))));
    }

    #[test]
    fn locus_examples() {
        let u = singular_locus(&Mechanism::universal(1.0).unwrap()).unwrap();
        assert!(u.contains(&ja(&[0.3, FRAC_PI_2])));
        assert!(u.contains(&ja(&[0.3, -FRAC_PI_2])));
        assert!(!u.contains(&ja(&[0.3, 0.2])));
        let arm = singular_locus(&Mechanism::planar_arm(vec![2.0, 1.0]).unwrap()).unwrap();
        assert!(arm.contains(&ja(&[1.0, 0.0])) && arm.contains(&ja(&[1.0, PI])));
        assert!(!arm.contains(&ja(&[1.0, 1.0])));
        let k = singular_locus(&Mechanism::single_revolute(3).unwrap()).unwrap();
        assert!(!k.contains(&ja(&[0.0])));
        assert!(singular_locus(&Mechanism::serial_6dof(vec![[0.0; 4].into(); 6]).unwrap()).is_err());
    }
}
