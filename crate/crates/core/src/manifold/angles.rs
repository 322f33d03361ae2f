use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduces an angle to its representative in `[0, 2π)`.
pub fn angle_normalize(a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite angle {a}")));
    }
    Ok(wrap(a))
}

// rem_euclid can round up to exactly TAU for tiny negative inputs.
pub(crate) fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference `to - from` reduced to `(-π, π]`.
pub fn shortest_diff(from: f64, to: f64) -> f64 {
    let d = wrap(to - from);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Geodesic distance on the circle; exactly symmetric in its arguments.
pub(crate) fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % TAU;
    d.min(TAU - d)
}

/// A point of the torus `T^n`; every coordinate is stored in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct JointAngles(Vec<f64>);

impl JointAngles {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidInput("configuration needs at least one angle".into()));
        }
        let angles = angles
            .into_iter()
            .map(angle_normalize)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(angles))
    }

    /// Builds from coordinates that are already known to be finite.
    pub(crate) fn from_unwrapped(angles: &[f64]) -> Self {
        Self(angles.iter().map(|&a| wrap(a)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }
}

impl TryFrom<Vec<f64>> for JointAngles {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<JointAngles> for Vec<f64> {
    fn from(c: JointAngles) -> Self {
        c.0
    }
}

/// Max over coordinates of the geodesic circle distance.
pub fn torus_distance(c1: &JointAngles, c2: &JointAngles) -> Result<f64> {
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionError { expected: c1.dim(), got: c2.dim() });
    }
    Ok(c1
        .0
        .iter()
        .zip(&c2.0)
        .map(|(&a, &b)| circle_distance(a, b))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(angle_normalize(0.0).unwrap(), 0.0);
        assert!((angle_normalize(-PI / 2.0).unwrap() - 3.0 * PI / 2.0).abs() < 1e-15);
        assert!((angle_normalize(7.0 * PI).unwrap() - PI).abs() < 1e-14);
        assert!(angle_normalize(f64::NAN).is_err());
        assert!(angle_normalize(f64::INFINITY).is_err());
        let r = angle_normalize(-1e-18).unwrap();
        assert!((0.0..TAU).contains(&r));
    }

    #[test]
    fn torus_distance_examples() {
        let z = JointAngles::zeros(2);
        assert_eq!(torus_distance(&z, &z).unwrap(), 0.0);
        let a = JointAngles::new(vec![0.0]).unwrap();
        let b = JointAngles::new(vec![PI]).unwrap();
        assert!((torus_distance(&a, &b).unwrap() - PI).abs() < 1e-15);
        // min(6.1, 2π − 6.1) = 0.18318...
        let a = JointAngles::new(vec![0.1, 6.2]).unwrap();
        let b = JointAngles::new(vec![6.2, 0.1]).unwrap();
        let expected = TAU - 6.1;
        assert!((torus_distance(&a, &b).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.183).abs() < 1e-3);
        assert!(matches!(
            torus_distance(&a, &JointAngles::zeros(3)),
            Err(Error::DimensionError { .. })
        ));
    }

    #[test]
    fn shortest_diff_range() {
        assert!((shortest_diff(3.0 * PI / 2.0, PI / 4.0) - 3.0 * PI / 4.0).abs() < 1e-14);
        assert!((shortest_diff(0.0, PI) - PI).abs() < 1e-15);
        assert!((shortest_diff(0.1, 6.2) - (6.1 - TAU)).abs() < 1e-12);
    }
}
