//! Numerical path lifting: given a start configuration and a workspace path
//! through regular values, track a configuration path whose image follows it.
//!
//! Each step integrates `ċ = J⁺(c)·α̇(t)` with a classical Runge-Kutta step,
//! then Newton-corrects onto `F(c) = α(t)` with the same pseudoinverse. The
//! pseudoinverse is taken from a full SVD, so redundant arms move along the
//! minimum-norm joint velocity.

mod workpath;

use nalgebra::{DMatrix, DVector};

pub use workpath::WorkPath;

use crate::error::{Error, Result};
use crate::manifold::{work_distance, JointAngles, MotionPath, TOLERANCES};
use crate::mechanisms::{forward, jacobian, tangent_difference, Mechanism};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftOptions {
    pub step_count: usize,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// Abort threshold for the smallest Jacobian singular value.
    pub min_singular_value: f64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self { step_count: 256, newton_tol: 1e-10, newton_max_iters: 20, min_singular_value: 1e-6 }
    }
}

impl LiftOptions {
    pub fn validate(&self) -> Result<()> {
        if self.step_count < 16
            || !(self.newton_tol > 0.0)
            || self.newton_max_iters == 0
            || !(self.min_singular_value > 0.0)
        {
            return Err(Error::InvalidInput(format!("invalid lift options {self:?}")));
        }
        Ok(())
    }
}

struct Tracker<'a> {
    mech: &'a Mechanism,
    alpha: &'a WorkPath,
    opts: LiftOptions,
}

impl Tracker<'_> {
    fn config(v: &DVector<f64>) -> JointAngles {
        JointAngles::from_unwrapped(v.as_slice())
    }

    /// Least-squares minimum-norm solve of `J(c)·x = rhs`, also returning the
    /// smallest singular value of `J(c)`.
    fn solve(&self, c: &DVector<f64>, rhs: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let j: DMatrix<f64> = jacobian(self.mech, &Self::config(c))?.matrix;
        let svd = j.svd(true, true);
        let sigma = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let x = svd
            .solve(rhs, 1e-12 * largest)
            .map_err(|e| Error::ConstructionError(format!("pseudoinverse solve: {e}")))?;
        Ok((x, sigma))
    }

    fn rate(&self, t: f64, c: &DVector<f64>) -> Result<DVector<f64>> {
        let v = self.alpha.velocity(self.mech, t.clamp(0.0, 1.0))?;
        Ok(self.solve(c, &v)?.0)
    }

    fn check_sigma(&self, t: f64, c: &DVector<f64>) -> Result<()> {
        let j = jacobian(self.mech, &Self::config(c))?;
        let sigma = j.singular_values().last().copied().unwrap_or(0.0);
        if sigma < self.opts.min_singular_value {
            return Err(Error::SingularEncounter { t, sigma });
        }
        Ok(())
    }

    fn correct(&self, t: f64, c: &mut DVector<f64>) -> Result<()> {
        let target = self.alpha.eval(t)?;
        let mut residual = f64::INFINITY;
        for _ in 0..=self.opts.newton_max_iters {
            let e = tangent_difference(self.mech, &forward(self.mech, &Self::config(c))?, &target)?;
            residual = e.norm();
            if residual < self.opts.newton_tol {
                return Ok(());
            }
            let (dx, sigma) = self.solve(c, &e)?;
            if sigma < self.opts.min_singular_value {
                return Err(Error::SingularEncounter { t, sigma });
            }
            *c += dx;
        }
        Err(Error::NewtonDivergence { t, residual })
    }
}

/// Lifts `alpha` to a configuration path starting at `c0`.
pub fn lift(mech: &Mechanism, c0: &JointAngles, alpha: &WorkPath, opts: &LiftOptions) -> Result<MotionPath> {
    opts.validate()?;
    mech.check_config(c0)?;
    mech.check_target(alpha.start())?;
    let gap = work_distance(&forward(mech, c0)?, alpha.start())?;
    if gap >= TOLERANCES.glue {
        return Err(Error::StartMismatch { gap });
    }
    let tracker = Tracker { mech, alpha, opts: *opts };
    let mut c = DVector::from_column_slice(c0.as_slice());
    tracker.check_sigma(0.0, &c)?;
    let n = opts.step_count;
    let h = 1.0 / n as f64;
    let mut samples = Vec::with_capacity(n + 1);
    samples.push((0.0, c.as_slice().to_vec()));
    for i in 0..n {
        let t0 = i as f64 * h;
        let t1 = if i + 1 == n { 1.0 } else { (i + 1) as f64 * h };
        // Stage times are nudged inside the step so each stage reads the
        // velocity of the segment the step actually crosses.
        let k1 = tracker.rate(t0, &c)?;
        let k2 = tracker.rate(t0 + h / 2.0, &(&c + &k1 * (h / 2.0)))?;
        let k3 = tracker.rate(t0 + h / 2.0, &(&c + &k2 * (h / 2.0)))?;
        let k4 = tracker.rate(t1 - h * 1e-9, &(&c + &k3 * h))?;
        c += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        tracker.correct(t1, &mut c)?;
        tracker.check_sigma(t1, &c)?;
        samples.push((t1, c.as_slice().to_vec()));
    }
    let mut path = MotionPath::from_unwrapped(&samples)?;
    path.set_start(c0.clone());
    Ok(path)
}
