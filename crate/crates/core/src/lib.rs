//! Robust motion planning for robot-arm forward kinematic maps.
//!
//! A planner here is an [`Atlas`]: an ordered list of charts, each a domain
//! of queries `(c, w)` (start configuration, goal workspace point) with a
//! planner that is continuous on that domain and returns a joint-space path
//! from `c` to some configuration over `w`. The crate builds atlases for
//! several classical mechanisms, checks their contracts with a seeded
//! harness, and computes a cohomological lower bound on how many charts any
//! such atlas needs.
//!
//! ```
//! use kinecx::roadmaps::{universal_atlas, Query};
//! use kinecx::{JointAngles, WorkPoint};
//! use nalgebra::Vector3;
//!
//! let atlas = universal_atlas(1.0).unwrap();
//! let q = Query::new(JointAngles::new(vec![0.3, 0.2]).unwrap(), WorkPoint::Sphere(Vector3::z()));
//! let (chart, path) = atlas.plan(&q).unwrap();
//! assert_eq!(atlas.charts[chart].label, "pole P1");
//! assert!((path.end().get(1) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cohomology;
pub mod error;
pub mod lifting;
pub mod manifold;
pub mod mechanisms;
pub mod roadmaps;
pub mod singularity;
pub mod verification;

pub use error::{Error, Result};
pub use manifold::{JointAngles, MotionPath, WorkKind, WorkPoint};
pub use mechanisms::{forward, jacobian, Mechanism};
pub use roadmaps::{Atlas, PartialRoadmap, Query};
