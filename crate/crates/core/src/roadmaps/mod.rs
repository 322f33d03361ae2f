//! Partial roadmaps, atlases, the combinators that build atlases from
//! sections, lifts and deformations, and the concrete per-mechanism atlases.

mod atlases;
mod combinators;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use atlases::{
    circle_atlas, default_atlas, identity_torus_atlas, planar_arm_atlas, single_revolute_atlas, universal_atlas,
    universal_flip_deformation, wrist_atlas, wrist_flip_deformation,
};
pub use combinators::{
    atlas_from_sections, categorical_roadmap, deformation_to_roadmap, horizontal_pullback, lift_pullback,
    retarget_to_section, roadmap_to_deformation, section_pullback, straight_line_contraction, Deformation,
    DeformationTrack, InverseBranch, WorkTrack,
};

use crate::error::{Error, Result};
use crate::manifold::{JointAngles, MotionPath, WorkPoint};
use crate::mechanisms::Mechanism;
use crate::singularity::is_regular_value;

/// A planning request: move from `config` to some configuration over `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub config: JointAngles,
    pub target: WorkPoint,
}

impl Query {
    pub fn new(config: JointAngles, target: WorkPoint) -> Self {
        Self { config, target }
    }
}

pub type DomainFn = Arc<dyn Fn(&Query) -> bool + Send + Sync>;
pub type PlanFn = Arc<dyn Fn(&Query) -> Result<MotionPath> + Send + Sync>;

/// One chart of an atlas: a domain of queries and a planner continuous on it.
#[derive(Clone)]
pub struct PartialRoadmap {
    pub label: String,
    /// Plans are exact formulas (no numerical lifting), so endpoints are
    /// held to the tight tolerance.
    pub closed_form: bool,
    domain: DomainFn,
    planner: PlanFn,
}

impl fmt::Debug for PartialRoadmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialRoadmap")
            .field("label", &self.label)
            .field("closed_form", &self.closed_form)
            .finish_non_exhaustive()
    }
}

impl PartialRoadmap {
    pub fn new(
        label: impl Into<String>,
        closed_form: bool,
        domain: impl Fn(&Query) -> bool + Send + Sync + 'static,
        planner: impl Fn(&Query) -> Result<MotionPath> + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), closed_form, domain: Arc::new(domain), planner: Arc::new(planner) }
    }

    pub fn contains(&self, q: &Query) -> bool {
        (self.domain)(q)
    }

    /// Runs the planner without consulting the domain.
    pub fn plan(&self, q: &Query) -> Result<MotionPath> {
        (self.planner)(q)
    }

    /// Same planner on a different domain.
    pub fn with_domain(&self, label: impl Into<String>, domain: impl Fn(&Query) -> bool + Send + Sync + 'static) -> Self {
        Self { label: label.into(), closed_form: self.closed_form, domain: Arc::new(domain), planner: self.planner.clone() }
    }

    pub(crate) fn planner(&self) -> PlanFn {
        self.planner.clone()
    }

    pub(crate) fn domain_fn(&self) -> DomainFn {
        self.domain.clone()
    }
}

/// Region of the query space an atlas claims to cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverRegion {
    /// Every configuration and every reachable target.
    Full,
    /// Targets that are regular values.
    RegularTargets,
    /// Targets that are singular values.
    SingularTargets,
}

impl CoverRegion {
    pub fn contains(&self, mech: &Mechanism, q: &Query) -> bool {
        if mech.check_config(&q.config).is_err() || mech.check_target(&q.target).is_err() {
            return false;
        }
        match self {
            Self::Full => true,
            Self::RegularTargets => is_regular_value(mech, &q.target).unwrap_or(false),
            Self::SingularTargets => matches!(is_regular_value(mech, &q.target), Ok(false)),
        }
    }
}

/// An ordered family of partial roadmaps covering `cover`.
#[derive(Debug, Clone)]
pub struct Atlas {
    pub name: String,
    pub mechanism: Mechanism,
    pub charts: Vec<PartialRoadmap>,
    pub cover: CoverRegion,
}

impl Atlas {
    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    /// Index of the first chart whose domain contains `q`.
    pub fn chart_of(&self, q: &Query) -> Option<usize> {
        self.charts.iter().position(|c| c.contains(q))
    }

    pub fn plan(&self, q: &Query) -> Result<(usize, MotionPath)> {
        plan(self, q)
    }

    /// The atlas with one chart deleted.
    pub fn without_chart(&self, index: usize) -> Atlas {
        let mut out = self.clone();
        if index < out.charts.len() {
            out.charts.remove(index);
        }
        out.name = format!("{} without chart {index}", self.name);
        out
    }

    /// Whether every chart's plans are closed-form.
    pub fn closed_form(&self) -> bool {
        self.charts.iter().all(|c| c.closed_form)
    }
}

/// Plans `q` with the first chart whose domain contains it.
pub fn plan(atlas: &Atlas, q: &Query) -> Result<(usize, MotionPath)> {
    atlas.mechanism.check_config(&q.config)?;
    atlas.mechanism.check_target(&q.target)?;
    let index = atlas.chart_of(q).ok_or(Error::NoChart)?;
    let path = atlas.charts[index].plan(q)?;
    Ok((index, path))
}

/// Path `t ↦ f(t)` over unwrapped coordinates whose first sample is `c`
/// bit for bit.
pub(crate) fn path_from(c: &JointAngles, f: impl Fn(f64) -> Vec<f64>) -> Result<MotionPath> {
    let mut p = MotionPath::from_fn(PATH_SEGMENTS, f)?;
    p.set_start(c.clone());
    Ok(p)
}

/// Minimum number of segments in a chart's path.
pub const PATH_SEGMENTS: usize = 64;
