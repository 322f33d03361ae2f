use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::{
    lift_pullback, path_from, retarget_to_section, section_pullback, Atlas, CoverRegion, Deformation, InverseBranch,
    PartialRoadmap, Query,
};
use crate::error::{Error, Result};
use crate::manifold::{angles_circle_distance, shortest_diff, JointAngles, MotionPath, WorkPoint, TOLERANCES};
use crate::mechanisms::{BranchTag, Mechanism};

fn antipodal(a: f64, b: f64) -> bool {
    (angles_circle_distance(a, b) - PI).abs() < TOLERANCES.domain
}

fn near(a: f64, b: f64) -> bool {
    angles_circle_distance(a, b) < TOLERANCES.domain
}

/// Per-coordinate displacement of the identity-atlas plan: the short arc,
/// or the counterclockwise semicircle for antipodal coordinates.
fn torus_step(c: &[f64], w: &[f64]) -> Vec<f64> {
    c.iter()
        .zip(w)
        .map(|(a, b)| if antipodal(*a, *b) { (b - a).rem_euclid(TAU) } else { shortest_diff(*a, *b) })
        .collect()
}

fn antipodal_count(c: &[f64], w: &[f64]) -> usize {
    c.iter().zip(w).filter(|(a, b)| antipodal(**a, **b)).count()
}

fn linear(c: &JointAngles, step: &[f64]) -> Result<MotionPath> {
    let start = c.as_slice().to_vec();
    let step = step.to_vec();
    path_from(c, move |t| start.iter().zip(&step).map(|(a, d)| a + t * d).collect())
}

/// Identity-map atlas on `T^n` with `n + 1` charts; chart `j` holds the
/// queries with exactly `j` antipodal coordinates.
pub fn identity_torus_atlas(n: usize) -> Result<Atlas> {
    let mechanism = Mechanism::torus_identity(n)?;
    let charts = (0..=n)
        .map(|j| {
            PartialRoadmap::new(
                format!("T^{n} chart {j}"),
                true,
                move |q: &Query| {
                    q.config.dim() == n
                        && q.target.angles().is_some_and(|w| w.len() == n && antipodal_count(q.config.as_slice(), &w) == j)
                },
                move |q: &Query| {
                    let w = q.target.angles().ok_or_else(|| Error::TypeError("torus target expected".into()))?;
                    if w.len() != n || q.config.dim() != n {
                        return Err(Error::DimensionError { expected: n, got: w.len().min(q.config.dim()) });
                    }
                    linear(&q.config, &torus_step(q.config.as_slice(), &w))
                },
            )
        })
        .collect();
    Ok(Atlas { name: format!("identity T^{n}"), mechanism, charts, cover: CoverRegion::Full })
}

/// Two-chart identity atlas on the circle.
pub fn circle_atlas() -> Atlas {
    identity_torus_atlas(1).expect("n = 1 is valid")
}

/// Transmission `θ ↦ kθ`: the circle atlas lifted in closed form.
pub fn single_revolute_atlas(ratio: u32) -> Result<Atlas> {
    let mut atlas = lift_pullback(&circle_atlas(), &Mechanism::single_revolute(ratio)?)?;
    atlas.name = format!("transmission k={ratio}");
    Ok(atlas)
}

/// Planar arm: the elbow-down section pulled back from `T^n`, `n + 1` charts.
pub fn planar_arm_atlas(lengths: Vec<f64>) -> Result<Atlas> {
    let n = lengths.len();
    let mech = Mechanism::planar_arm(lengths)?;
    let Mechanism::PlanarArm { lengths } = &mech else { unreachable!() };
    let rest: f64 = lengths[1..].iter().sum();
    if n >= 2 && (lengths[0] == rest || (n > 2 && lengths[0] < rest)) {
        return Err(Error::Unsupported(
            "the elbow-down section is global only when the first link differs from (n = 2) or exceeds (n > 2) the rest".into(),
        ));
    }
    let branch = InverseBranch::from_mechanism(&mech, BranchTag::ElbowDown);
    let mut atlas = section_pullback(&identity_torus_atlas(n)?, &branch, &mech);
    atlas.name = format!("planar arm {n}-link");
    Ok(atlas)
}

/// Horizontal deformation carrying the flipped latitude branch
/// (`θ2 ∈ (π/2, 3π/2)`) onto the latitude branch via
/// `(θ1, θ2) ↦ (θ1 + π, π − θ2)`; constant on the latitude branch.
pub fn universal_flip_deformation() -> Deformation {
    Deformation::horizontal(
        "latitude flip",
        true,
        |q: &Query| q.config.dim() == 2 && !near(q.config.get(1), FRAC_PI_2) && !near(q.config.get(1), 3.0 * FRAC_PI_2),
        |q: &Query| {
            let t2 = q.config.get(1);
            if t2.cos() > 0.0 {
                return Ok(MotionPath::constant(q.config.clone()));
            }
            linear(&q.config, &[PI, PI - 2.0 * t2])
        },
    )
}

/// Horizontal deformation carrying `θ2 ∈ (π, 2π)` onto the upper Euler
/// branch via `(θ1, θ2, θ3) ↦ (θ1 + π, −θ2, θ3 + π)`.
pub fn wrist_flip_deformation() -> Deformation {
    Deformation::horizontal(
        "euler flip",
        true,
        |q: &Query| q.config.dim() == 3 && !near(q.config.get(1), 0.0) && !near(q.config.get(1), PI),
        |q: &Query| {
            let t2 = q.config.get(1);
            if t2 < PI {
                return Ok(MotionPath::constant(q.config.clone()));
            }
            linear(&q.config, &[PI, TAU - 2.0 * t2, PI])
        },
    )
}

fn pole(w: &WorkPoint) -> Option<bool> {
    match w {
        WorkPoint::Sphere(v) if v.x.hypot(v.y) <= TOLERANCES.regular_value.sin() => Some(v.z > 0.0),
        _ => None,
    }
}

/// Universal joint: three regular charts from the latitude section plus the
/// two pole charts, five in all.
pub fn universal_atlas(radius: f64) -> Result<Atlas> {
    let mech = Mechanism::universal(radius)?;
    let branch = InverseBranch::from_mechanism(&mech, BranchTag::Latitude);
    let flip = universal_flip_deformation();
    let mut charts = section_pullback(&identity_torus_atlas(2)?, &branch, &mech)
        .charts
        .iter()
        .map(|r| retarget_to_section(r, &flip))
        .collect::<Result<Vec<_>>>()?;

    // P1: slide θ2 linearly to the pole latitude along the arc that avoids
    // the opposite pole latitude.
    charts.push(PartialRoadmap::new(
        "pole P1",
        true,
        |q: &Query| match pole(&q.target) {
            Some(true) => q.config.dim() == 2 && !near(q.config.get(1), 3.0 * FRAC_PI_2),
            Some(false) => q.config.dim() == 2 && !near(q.config.get(1), FRAC_PI_2),
            None => false,
        },
        |q: &Query| {
            let north = pole(&q.target).ok_or_else(|| Error::BranchDomainError("pole target expected".into()))?;
            let (t1, t2) = (q.config.get(0), q.config.get(1));
            let (from, to) = if north {
                (if t2 > 3.0 * FRAC_PI_2 { t2 - TAU } else { t2 }, FRAC_PI_2)
            } else {
                (if t2 < FRAC_PI_2 { t2 + TAU } else { t2 }, 3.0 * FRAC_PI_2)
            };
            path_from(&q.config, move |t| vec![t1, from + t * (to - from)])
        },
    ));
    // P2: from the opposite pole latitude, the fixed semicircle upward.
    charts.push(PartialRoadmap::new(
        "pole P2",
        true,
        |q: &Query| match pole(&q.target) {
            Some(true) => q.config.dim() == 2 && near(q.config.get(1), 3.0 * FRAC_PI_2),
            Some(false) => q.config.dim() == 2 && near(q.config.get(1), FRAC_PI_2),
            None => false,
        },
        |q: &Query| {
            let north = pole(&q.target).ok_or_else(|| Error::BranchDomainError("pole target expected".into()))?;
            let (t1, t2) = (q.config.get(0), q.config.get(1));
            let to = if north { 5.0 * FRAC_PI_2 } else { 3.0 * FRAC_PI_2 };
            path_from(&q.config, move |t| vec![t1, t2 + t * (to - t2)])
        },
    ));
    Ok(Atlas { name: "universal joint".into(), mechanism: mech, charts, cover: CoverRegion::Full })
}

/// Coordinates `(θ2', δ)` that vanish exactly on the fibre over a singular
/// wrist target, or `None` for a regular target.
fn wrist_singular_coords(c: &JointAngles, w: &WorkPoint, regular: &InverseBranch) -> Option<[f64; 2]> {
    let WorkPoint::Rotation(r) = w else { return None };
    if c.dim() != 3 || regular.contains(w) {
        return None;
    }
    let (t1, t2, t3) = (c.get(0), c.get(1), c.get(2));
    let phi = r[(1, 0)].atan2(r[(0, 0)]);
    Some(if r[(2, 2)] > 0.0 {
        // R = Rz(φ): fibre θ2 = 0, θ1 + θ3 = φ.
        [t2, t3 - (phi - t1)]
    } else {
        // R = Rz(ψ)Rx(π): fibre θ2 = π, θ1 − θ3 = ψ.
        [t2 - PI, t3 - (t1 - phi)]
    })
}

/// Triple-roll wrist: four regular charts from the upper Euler section and
/// three charts for the two singular circles, seven in all.
pub fn wrist_atlas() -> Result<Atlas> {
    let mech = Mechanism::TripleRollWrist;
    let branch = InverseBranch::from_mechanism(&mech, BranchTag::EulerUpper);
    let flip = wrist_flip_deformation();
    let mut charts = section_pullback(&identity_torus_atlas(3)?, &branch, &mech)
        .charts
        .iter()
        .map(|r| retarget_to_section(r, &flip))
        .collect::<Result<Vec<_>>>()?;
    for j in 0..3 {
        let (b1, b2) = (branch.clone(), branch.clone());
        charts.push(PartialRoadmap::new(
            format!("singular circle chart {j}"),
            true,
            move |q: &Query| {
                wrist_singular_coords(&q.config, &q.target, &b1).is_some_and(|s| antipodal_count(&s, &[0.0, 0.0]) == j)
            },
            move |q: &Query| {
                let s = wrist_singular_coords(&q.config, &q.target, &b2)
                    .ok_or_else(|| Error::BranchDomainError("singular wrist target expected".into()))?;
                let step = torus_step(&s, &[0.0, 0.0]);
                linear(&q.config, &[0.0, step[0], step[1]])
            },
        ));
    }
    Ok(Atlas { name: "triple-roll wrist".into(), mechanism: mech, charts, cover: CoverRegion::Full })
}

/// The atlas the command line uses for each mechanism.
pub fn default_atlas(mech: &Mechanism) -> Result<Atlas> {
    match mech {
        Mechanism::SingleRevolute { ratio } => single_revolute_atlas(*ratio),
        Mechanism::PlanarArm { lengths } => planar_arm_atlas(lengths.clone()),
        Mechanism::Universal { radius } => universal_atlas(*radius),
        Mechanism::TripleRollWrist => wrist_atlas(),
        Mechanism::TorusIdentity { dim } => identity_torus_atlas(*dim),
        Mechanism::Serial6Dof { .. } => Err(Error::Unsupported("no atlas for serial_6dof".into())),
    }
}
