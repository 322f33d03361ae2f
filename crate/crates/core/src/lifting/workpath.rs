use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};
use crate::manifold::{rotation_log, shortest_diff, so3_exp, work_distance, JointAngles, MotionPath, WorkPoint};
use crate::mechanisms::Mechanism;

/// A workspace path stored as samples joined by geodesics.
///
/// Consecutive samples are less than π/2 apart, so every geodesic segment is
/// unique.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkPath {
    times: Vec<f64>,
    points: Vec<WorkPoint>,
}

impl WorkPath {
    pub fn constant(w: WorkPoint) -> Self {
        Self { times: vec![0.0, 1.0], points: vec![w.clone(), w] }
    }

    /// Builds from samples, inserting geodesic midpoints where two samples
    /// are π/2 or more apart. Antipodal neighbours are rejected.
    pub fn from_samples(samples: Vec<(f64, WorkPoint)>) -> Result<Self> {
        if samples.len() < 2 || samples[0].0 != 0.0 || samples[samples.len() - 1].0 != 1.0 {
            return Err(Error::InvalidInput("work path needs samples at t=0 and t=1".into()));
        }
        let kind = samples[0].1.kind();
        let mut times = vec![0.0];
        let mut points = vec![samples[0].1.clone()];
        for pair in samples.windows(2) {
            let (t0, a) = &pair[0];
            let (t1, b) = &pair[1];
            if !(t1 > t0) {
                return Err(Error::InvalidInput("work path times must increase strictly".into()));
            }
            if b.kind() != kind {
                return Err(Error::TypeError("work path mixes workspace kinds".into()));
            }
            let d = work_distance(a, b)?;
            if d >= PI - 1e-9 {
                return Err(Error::InvalidInput("antipodal work path samples; geodesic is ambiguous".into()));
            }
            let pieces = (d / FRAC_PI_2).floor() as usize + 1;
            for j in 1..pieces {
                let s = j as f64 / pieces as f64;
                times.push(t0 + s * (t1 - t0));
                points.push(geodesic(a, b, s));
            }
            times.push(*t1);
            points.push(b.clone());
        }
        Ok(Self { times, points })
    }

    /// Samples `f` at `segments + 1` evenly spaced times, bisecting wherever
    /// neighbouring samples are π/2 or more apart.
    pub fn from_fn(segments: usize, f: impl Fn(f64) -> WorkPoint) -> Result<Self> {
        let segments = segments.max(1);
        let mut samples = vec![(0.0, f(0.0))];
        for i in 1..=segments {
            let t = i as f64 / segments as f64;
            push_refined(&f, &mut samples, t, 0)?;
        }
        Self::from_samples(samples)
    }

    /// Views a circle/torus configuration path as a workspace path.
    pub fn from_motion_path(p: &MotionPath) -> Result<Self> {
        let mut samples: Vec<(f64, WorkPoint)> = p.samples().map(|(t, c)| (t, WorkPoint::from_config(c))).collect();
        samples.dedup_by(|b, a| a.0 == b.0);
        Self::from_samples(samples)
    }

    pub fn start(&self) -> &WorkPoint {
        &self.points[0]
    }

    pub fn end(&self) -> &WorkPoint {
        &self.points[self.points.len() - 1]
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, &WorkPoint)> {
        self.times.iter().copied().zip(&self.points)
    }

    pub fn reverse(&self) -> Self {
        Self {
            times: self.times.iter().rev().map(|t| 1.0 - t).collect(),
            points: self.points.iter().rev().cloned().collect(),
        }
    }

    fn segment(&self, t: f64) -> Result<(usize, f64)> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::RangeError(t));
        }
        let i = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len() - 1) - 1;
        let s = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        Ok((i, s))
    }

    pub fn eval(&self, t: f64) -> Result<WorkPoint> {
        let (i, s) = self.segment(t)?;
        if s == 0.0 {
            return Ok(self.points[i].clone());
        }
        if s == 1.0 {
            return Ok(self.points[i + 1].clone());
        }
        Ok(geodesic(&self.points[i], &self.points[i + 1], s))
    }

    /// Velocity at `t` in the mechanism's Jacobian row coordinates.
    pub fn velocity(&self, mech: &Mechanism, t: f64) -> Result<DVector<f64>> {
        let (i, s) = self.segment(t)?;
        let dt = self.times[i + 1] - self.times[i];
        let (a, b) = (&self.points[i], &self.points[i + 1]);
        use WorkPoint::*;
        Ok(match (a, b) {
            (Circle(x), Circle(y)) => DVector::from_element(1, shortest_diff(*x, *y) / dt),
            (Torus(x), Torus(y)) => DVector::from_iterator(
                x.dim(),
                x.as_slice().iter().zip(y.as_slice()).map(|(p, q)| shortest_diff(*p, *q) / dt),
            ),
            (Planar { x: x1, y: y1 }, Planar { x: x2, y: y2 }) => {
                DVector::from_column_slice(&[(x2 - x1) / dt, (y2 - y1) / dt])
            }
            (Sphere(x), Sphere(y)) => {
                let radius = match mech {
                    Mechanism::Universal { radius } => *radius,
                    _ => 1.0,
                };
                let v = slerp_derivative(x, y, s) * (radius / dt);
                DVector::from_column_slice(v.as_slice())
            }
            (Rotation(x), Rotation(y)) => {
                DVector::from_column_slice((rotation_log(&(x.transpose() * y)) / dt).as_slice())
            }
            (Pose { p: p1, r: r1 }, Pose { p: p2, r: r2 }) => {
                let dp = (p2 - p1) / dt;
                let w = rotation_log(&(r1.transpose() * r2)) / dt;
                DVector::from_column_slice(&[dp.x, dp.y, dp.z, w.x, w.y, w.z])
            }
            _ => return Err(Error::TypeError("work path mixes workspace kinds".into())),
        })
    }
}

fn push_refined(f: &impl Fn(f64) -> WorkPoint, samples: &mut Vec<(f64, WorkPoint)>, t: f64, depth: u32) -> Result<()> {
    let (t0, prev) = samples.last().cloned().expect("seeded with t=0");
    let next = f(t);
    if work_distance(&prev, &next)? >= FRAC_PI_2 {
        if depth > 40 {
            return Err(Error::InvalidInput("work path function is discontinuous".into()));
        }
        push_refined(f, samples, (t0 + t) / 2.0, depth + 1)?;
        return push_refined(f, samples, t, depth + 1);
    }
    samples.push((t, next));
    Ok(())
}

fn slerp(a: &Vector3<f64>, b: &Vector3<f64>, s: f64) -> Vector3<f64> {
    let omega = a.cross(b).norm().atan2(a.dot(b));
    if omega < 1e-12 {
        return (a + (b - a) * s).normalize();
    }
    let so = omega.sin();
    (a * ((1.0 - s) * omega).sin() + b * (s * omega).sin()) / so
}

fn slerp_derivative(a: &Vector3<f64>, b: &Vector3<f64>, s: f64) -> Vector3<f64> {
    let omega = a.cross(b).norm().atan2(a.dot(b));
    if omega < 1e-12 {
        return b - a;
    }
    let so = omega.sin();
    (-a * ((1.0 - s) * omega).cos() + b * (s * omega).cos()) * (omega / so)
}

/// Point at fraction `s` along the geodesic from `a` to `b`.
pub(crate) fn geodesic(a: &WorkPoint, b: &WorkPoint, s: f64) -> WorkPoint {
    use WorkPoint::*;
    match (a, b) {
        (Circle(x), Circle(y)) => WorkPoint::circle_unchecked(x + s * shortest_diff(*x, *y)),
        (Torus(x), Torus(y)) => {
            let v: Vec<f64> = x.as_slice().iter().zip(y.as_slice()).map(|(p, q)| p + s * shortest_diff(*p, *q)).collect();
            Torus(JointAngles::from_unwrapped(&v))
        }
        (Planar { x: x1, y: y1 }, Planar { x: x2, y: y2 }) => Planar { x: x1 + s * (x2 - x1), y: y1 + s * (y2 - y1) },
        (Sphere(x), Sphere(y)) => Sphere(slerp(x, y, s)),
        (Rotation(x), Rotation(y)) => Rotation(x * so3_exp(&(rotation_log(&(x.transpose() * y)) * s))),
        (Pose { p: p1, r: r1 }, Pose { p: p2, r: r2 }) => Pose {
            p: p1 + (p2 - p1) * s,
            r: r1 * so3_exp(&(rotation_log(&(r1.transpose() * r2)) * s)),
        },
        _ => a.clone(),
    }
}
