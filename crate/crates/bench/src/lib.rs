//! Benchmark fixtures shared by the criterion targets.

use kinecx::lifting::WorkPath;
use kinecx::{JointAngles, Mechanism, Query, WorkPoint};

/// Deterministic spread of universal-joint queries, including the poles.
pub fn universal_queries(n: usize) -> Vec<Query> {
    (0..n)
        .map(|i| {
            let s = i as f64 / n as f64;
            let c = JointAngles::new(vec![6.0 * s, (13.0 * s) % 6.0]).expect("finite");
            let target = match i % 8 {
                0 => WorkPoint::Sphere(nalgebra::Vector3::z()),
                4 => WorkPoint::Sphere(-nalgebra::Vector3::z()),
                _ => {
                    let (phi, z) = (37.0 * s, 1.8 * s - 0.9);
                    let r = (1.0 - z * z).sqrt();
                    WorkPoint::Sphere(nalgebra::Vector3::new(r * phi.cos(), r * phi.sin(), z))
                }
            };
            Query::new(c, target)
        })
        .collect()
}

/// A redundant three-link arm and a straight workspace segment inside its
/// regular region.
pub fn lifting_fixture() -> (Mechanism, JointAngles, WorkPath) {
    let mech = Mechanism::PlanarArm { lengths: vec![1.0, 0.8, 0.5] };
    let c0 = JointAngles::new(vec![0.2, 0.7, 0.9]).expect("finite");
    let w0 = kinecx::forward(&mech, &c0).expect("valid config");
    let WorkPoint::Planar { x, y } = w0 else { unreachable!() };
    let path = WorkPath::from_fn(32, |t| WorkPoint::Planar { x: x - 0.6 * t, y: y + 0.3 * t }).expect("planar path");
    (mech, c0, path)
}
