use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::Rng;

use super::rng_for;
use crate::error::Result;
use crate::manifold::{rx, rz, JointAngles, WorkPoint};
use crate::mechanisms::{euler_zxz, forward, inverse, BranchTag, Mechanism};
use crate::roadmaps::Query;

type Builder = Box<dyn Fn(&[f64]) -> Option<Query> + Send + Sync>;

/// A family of queries parametrised by the unit cube `[0,1)^dim`.
///
/// Perturbing parameters moves a query within its family, so families that
/// pin down a measure-zero relation (antipodal coordinates, pole targets)
/// keep that relation under perturbation.
pub struct QueryFamily {
    pub name: String,
    pub dim: usize,
    pub measure_zero: bool,
    build: Builder,
}

impl QueryFamily {
    fn new(name: impl Into<String>, dim: usize, measure_zero: bool, build: impl Fn(&[f64]) -> Option<Query> + Send + Sync + 'static) -> Self {
        Self { name: name.into(), dim, measure_zero, build: Box::new(build) }
    }

    pub fn build(&self, params: &[f64]) -> Option<Query> {
        (self.build)(params)
    }

    pub fn random_params(&self, rng: &mut impl Rng) -> Vec<f64> {
        (0..self.dim).map(|_| rng.gen::<f64>()).collect()
    }
}

fn target_dim(mech: &Mechanism) -> usize {
    match mech {
        Mechanism::SingleRevolute { .. } => 1,
        Mechanism::TorusIdentity { dim } => *dim,
        Mechanism::PlanarArm { .. } | Mechanism::Universal { .. } => 2,
        Mechanism::TripleRollWrist => 3,
        Mechanism::Serial6Dof { .. } => 6,
    }
}

fn angles(p: &[f64]) -> JointAngles {
    JointAngles::from_unwrapped(&p.iter().map(|u| TAU * u).collect::<Vec<_>>())
}

/// Uniform target from unit-cube parameters: per-coordinate on tori,
/// area-uniform on the annulus and sphere, Shoemake quaternions on SO(3).
fn target_from_params(mech: &Mechanism, p: &[f64]) -> WorkPoint {
    match mech {
        Mechanism::SingleRevolute { .. } => WorkPoint::from_config(&angles(&p[..1])),
        Mechanism::TorusIdentity { dim } => WorkPoint::from_config(&angles(&p[..*dim])),
        Mechanism::PlanarArm { .. } => {
            let (inner, outer) = mech.reach().unwrap_or((0.0, 1.0));
            let r = (inner * inner + p[0] * (outer * outer - inner * inner)).sqrt();
            let a = TAU * p[1];
            WorkPoint::Planar { x: r * a.cos(), y: r * a.sin() }
        }
        Mechanism::Universal { .. } => {
            let z = 2.0 * p[0] - 1.0;
            let h = (1.0 - z * z).max(0.0).sqrt();
            let a = TAU * p[1];
            WorkPoint::Sphere(Vector3::new(h * a.cos(), h * a.sin(), z))
        }
        Mechanism::TripleRollWrist => {
            let (s1, s2) = ((1.0 - p[0]).sqrt(), p[0].sqrt());
            let (a, b) = (TAU * p[1], TAU * p[2]);
            let q = UnitQuaternion::from_quaternion(Quaternion::new(s2 * b.cos(), s1 * a.sin(), s1 * a.cos(), s2 * b.sin()));
            WorkPoint::Rotation(q.to_rotation_matrix().into_inner())
        }
        Mechanism::Serial6Dof { .. } => forward(mech, &angles(&p[..6])).expect("valid configuration"),
    }
}

/// The uniform family over all configurations and reachable targets.
pub fn uniform_family(mech: &Mechanism) -> QueryFamily {
    let n = mech.config_dim();
    let m = mech.clone();
    QueryFamily::new("uniform", n + target_dim(mech), false, move |p| {
        Some(Query::new(angles(&p[..n]), target_from_params(&m, &p[n..])))
    })
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}

/// Queries whose configuration is antipodal to `I(w)` in exactly the
/// coordinates of `subset`.
fn antipodal_section_family(mech: &Mechanism, tag: BranchTag, subset: Vec<usize>) -> QueryFamily {
    let n = mech.config_dim();
    let m = mech.clone();
    QueryFamily::new(format!("antipodal {subset:?}"), n + target_dim(mech), true, move |p| {
        let w = target_from_params(&m, &p[n..]);
        let s = inverse(&m, &w, tag).ok()?;
        let mut c: Vec<f64> = p[..n].iter().map(|u| TAU * u).collect();
        for &i in &subset {
            c[i] = s.get(i) + PI;
        }
        Some(Query::new(JointAngles::from_unwrapped(&c), w))
    })
}

fn fixed_target_family(
    name: &str,
    config_dim: usize,
    extra: usize,
    build: impl Fn(&[f64], &[f64]) -> Option<(Vec<f64>, WorkPoint)> + Send + Sync + 'static,
) -> QueryFamily {
    QueryFamily::new(name, config_dim + extra, true, move |p| {
        let c: Vec<f64> = p[..config_dim].iter().map(|u| TAU * u).collect();
        let (c, w) = build(&c, &p[config_dim..])?;
        Some(Query::new(JointAngles::from_unwrapped(&c), w))
    })
}

/// All query families of a mechanism: the uniform one followed by
/// constructed measure-zero families.
pub fn query_families(mech: &Mechanism) -> Vec<QueryFamily> {
    let mut out = vec![uniform_family(mech)];
    match mech {
        Mechanism::TorusIdentity { dim } => {
            out.extend(subsets(*dim).map(|s| antipodal_section_family(mech, BranchTag::Identity, s)));
        }
        Mechanism::SingleRevolute { ratio } => {
            let k = *ratio as f64;
            out.push(fixed_target_family("antipodal image", 1, 0, move |c, _| {
                Some((c.to_vec(), WorkPoint::from_config(&JointAngles::from_unwrapped(&[k * c[0] + PI]))))
            }));
        }
        Mechanism::PlanarArm { lengths } => {
            out.extend(subsets(lengths.len()).map(|s| antipodal_section_family(mech, BranchTag::ElbowDown, s)));
            let (inner, outer) = mech.reach().unwrap_or((0.0, 1.0));
            for (name, r) in [("outer boundary", outer), ("inner boundary", inner)] {
                out.push(fixed_target_family(name, lengths.len(), 1, move |c, e| {
                    let a = TAU * e[0];
                    Some((c.to_vec(), WorkPoint::Planar { x: r * a.cos(), y: r * a.sin() }))
                }));
            }
        }
        Mechanism::Universal { .. } => {
            out.extend(subsets(2).map(|s| antipodal_section_family(mech, BranchTag::Latitude, s)));
            for (north, name) in [(true, "north pole"), (false, "south pole")] {
                let w = WorkPoint::Sphere(if north { Vector3::z() } else { -Vector3::z() });
                let w2 = w.clone();
                out.push(fixed_target_family(name, 2, 0, move |c, _| Some((c.to_vec(), w.clone()))));
                // configuration on the opposite pole latitude
                let opposite = if north { 3.0 * FRAC_PI_2 } else { FRAC_PI_2 };
                out.push(fixed_target_family(&format!("{name}, opposite latitude"), 2, 0, move |c, _| {
                    Some((vec![c[0], opposite], w2.clone()))
                }));
            }
        }
        Mechanism::TripleRollWrist => {
            out.extend(subsets(3).map(|s| antipodal_section_family(mech, BranchTag::EulerUpper, s)));
            for lower in [false, true] {
                for mask in 0..4u32 {
                    let name = format!("singular circle {} antipodal mask {mask}", if lower { 2 } else { 1 });
                    out.push(fixed_target_family(&name, 3, 1, move |c, e| {
                        let phi = TAU * e[0];
                        let (t1, mut t2, mut t3) = (c[0], c[1], c[2]);
                        let base = if lower { PI } else { 0.0 };
                        if mask & 1 != 0 {
                            t2 = base + PI;
                        }
                        if mask & 2 != 0 {
                            t3 = if lower { t1 - phi } else { phi - t1 } + PI;
                        }
                        let r = if lower { rz(phi) * rx(PI) } else { rz(phi) };
                        Some((vec![t1, t2, t3], WorkPoint::Rotation(r)))
                    }));
                }
            }
        }
        Mechanism::Serial6Dof { .. } => {}
    }
    out
}

/// Targets that generic sampling never hits: poles, singular circles and
/// workspace boundaries.
pub fn special_targets(mech: &Mechanism) -> Vec<WorkPoint> {
    let ring = |k: usize| (0..k).map(move |i| TAU * i as f64 / k as f64);
    match mech {
        Mechanism::Universal { .. } => vec![WorkPoint::Sphere(Vector3::z()), WorkPoint::Sphere(-Vector3::z())],
        Mechanism::TripleRollWrist => ring(16)
            .flat_map(|a| [WorkPoint::Rotation(rz(a)), WorkPoint::Rotation(euler_zxz(a, PI, 0.0))])
            .collect(),
        Mechanism::PlanarArm { .. } => {
            let (inner, outer) = mech.reach().unwrap_or((0.0, 1.0));
            ring(16)
                .flat_map(|a| [inner, outer].map(|r| WorkPoint::Planar { x: r * a.cos(), y: r * a.sin() }))
                .collect()
        }
        _ => Vec::new(),
    }
}

/// Special targets followed by `n` uniform ones drawn from `seed`.
pub fn target_probes(mech: &Mechanism, seed: u64, n: usize) -> Result<Vec<WorkPoint>> {
    let mut out = special_targets(mech);
    let d = target_dim(mech);
    for i in 0..n {
        let mut rng = rng_for(seed, i as u64);
        let p: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        out.push(target_from_params(mech, &p));
    }
    Ok(out)
}
