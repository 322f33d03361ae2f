//! Angle arithmetic, workspace values and their metrics, and the sampled
//! [`MotionPath`] representation consumed by every planner.

mod angles;
mod path;
mod work;

pub(crate) use angles::circle_distance as angles_circle_distance;
pub use angles::{angle_normalize, shortest_diff, torus_distance, JointAngles};
pub use path::MotionPath;
pub use work::{rotation_angle, rotation_log, rx, ry, rz, so3_exp, work_distance, WorkKind, WorkPoint};

/// Numerical tolerances shared across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceProfile {
    /// Endpoint agreement required to glue two paths.
    pub glue: f64,
    /// Orthonormality and determinant slack for rotation matrices.
    pub orthonormality: f64,
    /// Norm slack for unit sphere vectors.
    pub unit_norm: f64,
    /// Band used by decidable domain predicates (antipodal tests, poles).
    pub domain: f64,
    /// Distance to a singular value below which a workspace point counts as singular.
    pub regular_value: f64,
    /// Membership tolerance of analytic singular loci.
    pub locus: f64,
    /// Central finite-difference step.
    pub fd_step: f64,
}

pub const TOLERANCES: ToleranceProfile = ToleranceProfile {
    glue: 1e-9,
    orthonormality: 1e-10,
    unit_norm: 1e-12,
    domain: 1e-9,
    regular_value: 1e-9,
    locus: 1e-9,
    fd_step: 1e-6,
};
