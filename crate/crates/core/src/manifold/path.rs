use std::f64::consts::PI;
use std::fmt::Write as _;

use super::angles::{shortest_diff, torus_distance, wrap, JointAngles};
use super::TOLERANCES;
use crate::error::{Error, Result};

/// A continuous path `[0,1] -> T^n` stored as samples.
///
/// Between samples each coordinate moves along the short arc; construction
/// guarantees every per-coordinate gap is below π so that arc is unambiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPath {
    times: Vec<f64>,
    points: Vec<JointAngles>,
}

impl MotionPath {
    pub fn constant(c: JointAngles) -> Self {
        Self { times: vec![0.0, 1.0], points: vec![c.clone(), c] }
    }

    /// Builds a path from samples of a continuous real-valued lift of the
    /// angles. Midpoints are inserted wherever a coordinate moves by π/2 or
    /// more between samples.
    pub fn from_unwrapped(samples: &[(f64, Vec<f64>)]) -> Result<Self> {
        check_times(samples.iter().map(|s| s.0))?;
        let dim = samples[0].1.len();
        if dim == 0 {
            return Err(Error::InvalidInput("zero-dimensional path".into()));
        }
        let mut times = Vec::with_capacity(samples.len());
        let mut points = Vec::with_capacity(samples.len());
        for (k, (t, v)) in samples.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionError { expected: dim, got: v.len() });
            }
            if !v.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidInput("non-finite path sample".into()));
            }
            if k > 0 {
                let (t0, prev) = &samples[k - 1];
                let gap = prev.iter().zip(v).map(|(a, b)| (b - a).abs()).fold(0.0, f64::max);
                let pieces = (gap / (PI / 2.0)).floor() as usize + 1;
                for j in 1..pieces {
                    let s = j as f64 / pieces as f64;
                    let mid: Vec<f64> = prev.iter().zip(v).map(|(a, b)| a + s * (b - a)).collect();
                    times.push(t0 + s * (t - t0));
                    points.push(JointAngles::from_unwrapped(&mid));
                }
            }
            times.push(*t);
            points.push(JointAngles::from_unwrapped(v));
        }
        Ok(Self { times, points })
    }

    /// Samples `f` (a continuous lift of the angles) at `segments + 1` evenly
    /// spaced times.
    pub fn from_fn(segments: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let segments = segments.max(1);
        let samples: Vec<_> = (0..=segments)
            .map(|i| {
                let t = i as f64 / segments as f64;
                (t, f(t))
            })
            .collect();
        Self::from_unwrapped(&samples)
    }

    /// Builds a path from normalized samples, reading each gap as the short
    /// arc. Gaps of exactly π are ambiguous and rejected.
    pub fn from_samples(samples: Vec<(f64, JointAngles)>) -> Result<Self> {
        check_times(samples.iter().map(|s| s.0))?;
        let dim = samples[0].1.dim();
        let mut unwrapped: Vec<(f64, Vec<f64>)> = Vec::with_capacity(samples.len());
        for (t, c) in &samples {
            if c.dim() != dim {
                return Err(Error::DimensionError { expected: dim, got: c.dim() });
            }
            let next = match unwrapped.last() {
                None => c.as_slice().to_vec(),
                Some((_, prev)) => {
                    let mut v = Vec::with_capacity(dim);
                    for (p, &a) in prev.iter().zip(c.as_slice()) {
                        let d = shortest_diff(*p, a);
                        if d.abs() >= PI - 1e-12 {
                            return Err(Error::InvalidInput(
                                "consecutive samples are antipodal; arc is ambiguous".into(),
                            ));
                        }
                        v.push(p + d);
                    }
                    v
                }
            };
            unwrapped.push((*t, next));
        }
        let mut path = Self::from_unwrapped(&unwrapped)?;
        // Keep the caller's representatives bit-for-bit at the ends.
        path.points[0] = samples[0].1.clone();
        let last = path.points.len() - 1;
        path.points[last] = samples[samples.len() - 1].1.clone();
        Ok(path)
    }

    /// Replaces the first sample with an equivalent representative.
    pub(crate) fn set_start(&mut self, c: JointAngles) {
        debug_assert!(torus_distance(&c, &self.points[0]).is_ok_and(|d| d < 1e-12));
        self.points[0] = c;
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn start(&self) -> &JointAngles {
        &self.points[0]
    }

    pub fn end(&self) -> &JointAngles {
        &self.points[self.points.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, &JointAngles)> {
        self.times.iter().copied().zip(&self.points)
    }

    /// Evaluates the path; exact at the stored sample times.
    pub fn eval(&self, t: f64) -> Result<JointAngles> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::RangeError(t));
        }
        let i = self.times.partition_point(|&s| s <= t);
        if i == 0 {
            return Ok(self.points[0].clone());
        }
        let i = i - 1;
        if self.times[i] == t || i + 1 == self.times.len() {
            return Ok(self.points[i].clone());
        }
        let s = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        let a = self.points[i].as_slice();
        let b = self.points[i + 1].as_slice();
        let v: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| wrap(x + s * shortest_diff(x, y))).collect();
        Ok(JointAngles::from_unwrapped(&v))
    }

    /// Real-valued lift of the samples, starting at the stored start.
    pub fn unwrapped(&self) -> Vec<(f64, Vec<f64>)> {
        let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(self.points.len());
        for (t, c) in self.samples() {
            let v = match out.last() {
                None => c.as_slice().to_vec(),
                Some((_, prev)) => prev.iter().zip(c.as_slice()).map(|(p, &a)| p + shortest_diff(*p, a)).collect(),
            };
            out.push((t, v));
        }
        out
    }

    /// `self` then `next`, each at double speed.
    pub fn concat(&self, next: &MotionPath) -> Result<MotionPath> {
        let gap = torus_distance(self.end(), next.start())?;
        if gap > TOLERANCES.glue {
            return Err(Error::GlueError { gap });
        }
        let mut times: Vec<f64> = self.times.iter().map(|t| t / 2.0).collect();
        let mut points = self.points.clone();
        times.extend(next.times[1..].iter().map(|t| (t + 1.0) / 2.0));
        points.extend(next.points[1..].iter().cloned());
        Ok(MotionPath { times, points })
    }

    pub fn reverse(&self) -> MotionPath {
        MotionPath {
            times: self.times.iter().rev().map(|t| 1.0 - t).collect(),
            points: self.points.iter().rev().cloned().collect(),
        }
    }

    /// Largest per-segment speed in the torus max-metric.
    pub fn lipschitz_bound(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.points.windows(2))
            .map(|(t, p)| torus_distance(&p[0], &p[1]).unwrap_or(f64::INFINITY) / (t[1] - t[0]))
            .fold(0.0, f64::max)
    }

    /// Sup over `t` of the torus distance to `other`, on a grid plus both
    /// sample sets.
    pub fn sup_distance(&self, other: &MotionPath, grid: usize) -> Result<f64> {
        let mut ts: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
        ts.extend(self.times.iter().chain(&other.times));
        let mut best: f64 = 0.0;
        for t in ts {
            best = best.max(torus_distance(&self.eval(t)?, &other.eval(t)?)?);
        }
        Ok(best)
    }

    /// CSV with header `t,theta_1,...,theta_n`, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 1..=self.dim() {
            let _ = write!(out, ",theta_{i}");
        }
        out.push('\n');
        for (t, c) in self.samples() {
            out.push_str(&format_sig(t));
            for a in c.as_slice() {
                out.push(',');
                out.push_str(&format_sig(*a));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<MotionPath> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty path file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "t" {
            return Err(Error::Parse(format!("bad path header `{header}`")));
        }
        let mut samples = Vec::new();
        for line in lines {
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("`{v}`: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if vals.len() != cols.len() {
                return Err(Error::Parse(format!("row has {} fields, header {}", vals.len(), cols.len())));
            }
            samples.push((vals[0], JointAngles::new(vals[1..].to_vec())?));
        }
        if samples.is_empty() {
            return Err(Error::Parse("path file has no samples".into()));
        }
        MotionPath::from_samples(samples)
    }
}

fn check_times(times: impl Iterator<Item = f64>) -> Result<()> {
    let times: Vec<f64> = times.collect();
    if times.len() < 2 {
        return Err(Error::InvalidInput("a path needs at least two samples".into()));
    }
    if times[0] != 0.0 || times[times.len() - 1] != 1.0 {
        return Err(Error::InvalidInput("path samples must start at t=0 and end at t=1".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("path sample times must increase strictly".into()));
    }
    Ok(())
}

/// `%.12g`-style formatting.
pub(crate) fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let mut s = format!("{x:.decimals$}");
        if s.contains('.') {
            s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        }
        s
    } else {
        let s = format!("{x:.11e}");
        let (mant, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{e}")
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn ja(v: &[f64]) -> JointAngles {
        JointAngles::new(v.to_vec()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let c = ja(&[0.4, 1.2]);
        let p = MotionPath::constant(c.clone());
        assert_eq!(p.eval(0.37).unwrap(), c);

        let p = MotionPath::from_samples(vec![(0.0, ja(&[0.0])), (1.0, ja(&[FRAC_PI_2]))]).unwrap();
        assert!((p.eval(0.5).unwrap().get(0) - PI / 4.0).abs() < 1e-15);

        // Short arc from 3π/2 forward by 3π/4; midpoint 3π/2 + 3π/8 = 15π/8.
        let p = MotionPath::from_samples(vec![(0.0, ja(&[1.5 * PI])), (1.0, ja(&[PI / 4.0]))]).unwrap();
        assert!((p.eval(0.5).unwrap().get(0) - 15.0 * PI / 8.0).abs() < 1e-12);
        assert!(matches!(p.eval(1.5), Err(Error::RangeError(_))));
        assert!(p.eval(-0.1).is_err());
    }

    #[test]
    fn endpoints_are_exact() {
        let a = ja(&[0.123456789, 6.0]);
        let b = ja(&[1.0, 0.5]);
        let p = MotionPath::from_samples(vec![(0.0, a.clone()), (1.0, b.clone())]).unwrap();
        assert_eq!(p.eval(0.0).unwrap(), a);
        assert_eq!(p.eval(1.0).unwrap(), b);
    }

    #[test]
    fn refinement_keeps_gaps_small() {
        let p = MotionPath::from_unwrapped(&[(0.0, vec![0.0]), (1.0, vec![3.0 * PI])]).unwrap();
        assert!(p.len() > 2);
        for w in p.points.windows(2) {
            assert!(torus_distance(&w[0], &w[1]).unwrap() < PI);
        }
        assert!((p.eval(1.0).unwrap().get(0) - PI).abs() < 1e-12);
        assert!((p.eval(0.5).unwrap().get(0) - 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn concat_examples() {
        let c = ja(&[0.7]);
        let k = MotionPath::constant(c.clone());
        let kk = k.concat(&k).unwrap();
        assert_eq!(kk.eval(0.3).unwrap(), c);

        let p = MotionPath::from_fn(4, |t| vec![t * FRAC_PI_2]).unwrap();
        let q = MotionPath::from_fn(4, |t| vec![FRAC_PI_2 + t * FRAC_PI_2]).unwrap();
        let pq = p.concat(&q).unwrap();
        assert!((pq.eval(0.5).unwrap().get(0) - FRAC_PI_2).abs() < 1e-15);
        assert!((pq.eval(1.0).unwrap().get(0) - PI).abs() < 1e-15);
        assert_eq!(pq.eval(0.0).unwrap().get(0), 0.0);

        let bad = MotionPath::constant(ja(&[0.1]));
        assert!(matches!(
            MotionPath::constant(ja(&[0.0])).concat(&bad),
            Err(Error::GlueError { .. })
        ));
    }

    #[test]
    fn reverse_examples() {
        let p = MotionPath::from_fn(8, |t| vec![t * FRAC_PI_2]).unwrap();
        let r = p.reverse();
        assert_eq!(r.start(), p.end());
        assert!((r.eval(0.25).unwrap().get(0) - p.eval(0.75).unwrap().get(0)).abs() < 1e-15);
        assert_eq!(r.reverse(), p);
    }

    #[test]
    fn bad_times_rejected() {
        assert!(MotionPath::from_unwrapped(&[(0.0, vec![0.0])]).is_err());
        assert!(MotionPath::from_unwrapped(&[(0.0, vec![0.0]), (0.5, vec![0.0])]).is_err());
        assert!(MotionPath::from_unwrapped(&[(0.0, vec![0.0]), (0.0, vec![0.0]), (1.0, vec![0.0])]).is_err());
        assert!(MotionPath::from_samples(vec![(0.0, ja(&[0.0])), (1.0, ja(&[PI]))]).is_err());
    }

    #[test]
    fn csv_roundtrip_and_format() {
        let p = MotionPath::from_fn(2, |t| vec![t, 2.0 * t]).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("t,theta_1,theta_2\n0,0,0\n0.5,0.5,1\n1,1,2\n"));
        let back = MotionPath::from_csv(&csv).unwrap();
        assert!(p.sup_distance(&back, 16).unwrap() < 1e-11);
        assert_eq!(format_sig(PI), "3.14159265359");
        assert_eq!(format_sig(1e-7), "1e-7");
        assert!(MotionPath::from_csv("").is_err());
        assert!(MotionPath::from_csv("t,theta_1\n").is_err());
    }
}
