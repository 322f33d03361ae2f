use std::fmt;
use std::sync::Arc;

use super::{path_from, Atlas, CoverRegion, DomainFn, PartialRoadmap, Query};
use crate::error::{Error, Result};
use crate::lifting::{lift, LiftOptions, WorkPath};
use crate::manifold::{shortest_diff, torus_distance, work_distance, JointAngles, MotionPath, WorkPoint, TOLERANCES};
use crate::mechanisms::{forward, inverse, BranchTag, Mechanism};

type TargetPredicate = Arc<dyn Fn(&WorkPoint) -> bool + Send + Sync>;
type SectionMap = Arc<dyn Fn(&WorkPoint) -> Result<JointAngles> + Send + Sync>;
type TrackFn = Arc<dyn Fn(&Query) -> Result<DeformationTrack> + Send + Sync>;

/// A continuous partial section `I` of the forward map: `F(I(w)) = w` on its
/// domain.
#[derive(Clone)]
pub struct InverseBranch {
    pub label: String,
    domain: TargetPredicate,
    map: SectionMap,
}

impl fmt::Debug for InverseBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InverseBranch").field("label", &self.label).finish_non_exhaustive()
    }
}

impl InverseBranch {
    pub fn new(
        label: impl Into<String>,
        domain: impl Fn(&WorkPoint) -> bool + Send + Sync + 'static,
        map: impl Fn(&WorkPoint) -> Result<JointAngles> + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), domain: Arc::new(domain), map: Arc::new(map) }
    }

    /// The analytic inverse branch `tag` of `mech`; its domain is wherever
    /// the branch evaluates.
    pub fn from_mechanism(mech: &Mechanism, tag: BranchTag) -> Self {
        let (m1, m2) = (mech.clone(), mech.clone());
        Self::new(
            format!("{tag:?}"),
            move |w| inverse(&m1, w, tag).is_ok(),
            move |w| inverse(&m2, w, tag),
        )
    }

    /// A section sending every target in `domain` to the configuration `c`.
    pub fn constant(
        label: impl Into<String>,
        domain: impl Fn(&WorkPoint) -> bool + Send + Sync + 'static,
        c: JointAngles,
    ) -> Self {
        Self::new(label, domain, move |_| Ok(c.clone()))
    }

    pub fn contains(&self, w: &WorkPoint) -> bool {
        (self.domain)(w)
    }

    pub fn eval(&self, w: &WorkPoint) -> Result<JointAngles> {
        if !self.contains(w) {
            return Err(Error::BranchDomainError(format!("target outside the domain of {}", self.label)));
        }
        (self.map)(w)
    }
}

fn inner_query(c: &JointAngles, section_value: &JointAngles) -> Query {
    Query::new(c.clone(), WorkPoint::from_config(section_value))
}

/// Pulls an identity-map atlas on the configuration torus back along a
/// section: `ρ̄(c, w) = ρ(c, I(w))`.
pub fn section_pullback(atlas_on_c: &Atlas, branch: &InverseBranch, mech: &Mechanism) -> Atlas {
    let charts = atlas_on_c
        .charts
        .iter()
        .map(|chart| {
            let (b1, b2) = (branch.clone(), branch.clone());
            let (inner_dom, inner_plan) = (chart.domain_fn(), chart.planner());
            PartialRoadmap::new(
                format!("{} via {}", chart.label, branch.label),
                chart.closed_form,
                move |q| b1.contains(&q.target) && b1.eval(&q.target).is_ok_and(|s| inner_dom(&inner_query(&q.config, &s))),
                move |q| inner_plan(&inner_query(&q.config, &b2.eval(&q.target)?)),
            )
        })
        .collect();
    Atlas { name: format!("{} via {}", atlas_on_c.name, branch.label), mechanism: mech.clone(), charts, cover: CoverRegion::Full }
}

/// Pulls a workspace atlas back along the forward map by lifting each
/// workspace plan from `F(c)`: `ρ̄(c, w) = Γ(c, ρ(F(c), w))`.
///
/// The workspace atlas must be an identity atlas on the circle or torus
/// the mechanism maps to. Transmissions lift in closed form.
pub fn lift_pullback(atlas_on_w: &Atlas, mech: &Mechanism) -> Result<Atlas> {
    let wdim = match mech {
        Mechanism::SingleRevolute { .. } => 1,
        Mechanism::TorusIdentity { dim } => *dim,
        _ => return Err(Error::Unsupported(format!("lift_pullback needs a circle or torus workspace, not {}", mech.name()))),
    };
    if atlas_on_w.mechanism != (Mechanism::TorusIdentity { dim: wdim }) {
        return Err(Error::TypeError("workspace atlas does not match the mechanism's workspace".into()));
    }
    let charts = atlas_on_w
        .charts
        .iter()
        .map(|chart| {
            let (m1, m2) = (mech.clone(), mech.clone());
            let (inner_dom, inner_plan) = (chart.domain_fn(), chart.planner());
            let image = move |m: &Mechanism, q: &Query| -> Result<Query> {
                let fc = forward(m, &q.config)?;
                Ok(Query::new(JointAngles::new(fc.angles().unwrap_or_default())?, q.target.clone()))
            };
            let closed = chart.closed_form && matches!(mech, Mechanism::SingleRevolute { .. } | Mechanism::TorusIdentity { .. });
            PartialRoadmap::new(
                format!("lift of {}", chart.label),
                closed,
                move |q| image(&m1, q).is_ok_and(|iq| inner_dom(&iq)),
                move |q| {
                    let rho = inner_plan(&image(&m2, q)?)?;
                    match &m2 {
                        Mechanism::SingleRevolute { ratio } => {
                            let k = *ratio as f64;
                            let u = rho.unwrapped();
                            let (u0, c0) = (u[0].1[0], q.config.get(0));
                            let samples: Vec<(f64, Vec<f64>)> =
                                u.iter().map(|(t, v)| (*t, vec![c0 + (v[0] - u0) / k])).collect();
                            let mut p = MotionPath::from_unwrapped(&samples)?;
                            p.set_start(q.config.clone());
                            Ok(p)
                        }
                        Mechanism::TorusIdentity { .. } => Ok(rho),
                        _ => lift(&m2, &q.config, &WorkPath::from_motion_path(&rho)?, &LiftOptions::default()),
                    }
                },
            )
        })
        .collect();
    Ok(Atlas {
        name: format!("lift of {} along {}", atlas_on_w.name, mech.name()),
        mechanism: mech.clone(),
        charts,
        cover: atlas_on_w.cover.clone(),
    })
}

/// Workspace component of a deformation track.
#[derive(Debug, Clone, PartialEq)]
pub enum WorkTrack {
    Fixed(WorkPoint),
    Moving(WorkPath),
}

/// The curve `t ↦ D(q, t)` in `C × W`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationTrack {
    pub config: MotionPath,
    pub work: WorkTrack,
}

impl DeformationTrack {
    pub fn at(&self, t: f64) -> Result<Query> {
        let w = match &self.work {
            WorkTrack::Fixed(w) => w.clone(),
            WorkTrack::Moving(p) => p.eval(t)?,
        };
        Ok(Query::new(self.config.eval(t)?, w))
    }

    pub fn end(&self) -> Query {
        let w = match &self.work {
            WorkTrack::Fixed(w) => w.clone(),
            WorkTrack::Moving(p) => p.end().clone(),
        };
        Query::new(self.config.end().clone(), w)
    }
}

/// A deformation `D: A × [0,1] → C × W` of a query region with `D(q,0) = q`.
#[derive(Clone)]
pub struct Deformation {
    pub label: String,
    /// The workspace component stays fixed along every track.
    pub horizontal: bool,
    pub closed_form: bool,
    domain: DomainFn,
    track: TrackFn,
}

impl fmt::Debug for Deformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Deformation")
            .field("label", &self.label)
            .field("horizontal", &self.horizontal)
            .finish_non_exhaustive()
    }
}

impl Deformation {
    /// A deformation that moves only the configuration.
    pub fn horizontal(
        label: impl Into<String>,
        closed_form: bool,
        domain: impl Fn(&Query) -> bool + Send + Sync + 'static,
        config_track: impl Fn(&Query) -> Result<MotionPath> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            horizontal: true,
            closed_form,
            domain: Arc::new(domain),
            track: Arc::new(move |q| Ok(DeformationTrack { config: config_track(q)?, work: WorkTrack::Fixed(q.target.clone()) })),
        }
    }

    /// A general deformation; the workspace may move.
    pub fn new(
        label: impl Into<String>,
        closed_form: bool,
        domain: impl Fn(&Query) -> bool + Send + Sync + 'static,
        track: impl Fn(&Query) -> Result<DeformationTrack> + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), horizontal: false, closed_form, domain: Arc::new(domain), track: Arc::new(track) }
    }

    /// The constant deformation on `domain`.
    pub fn identity(domain: impl Fn(&Query) -> bool + Send + Sync + 'static) -> Self {
        Self::horizontal("identity", true, domain, |q| Ok(MotionPath::constant(q.config.clone())))
    }

    pub fn contains(&self, q: &Query) -> bool {
        (self.domain)(q)
    }

    pub fn track(&self, q: &Query) -> Result<DeformationTrack> {
        (self.track)(q)
    }

    /// `D(q, t)`.
    pub fn map(&self, q: &Query, t: f64) -> Result<Query> {
        self.track(q)?.at(t)
    }
}

fn is_constant(p: &MotionPath) -> bool {
    p.samples().all(|(_, c)| c == p.start())
}

/// `D(c, w, t) = (ρ(c, w)(t), w)`: a horizontal deformation into the graph.
pub fn roadmap_to_deformation(r: &PartialRoadmap) -> Deformation {
    let (dom, plan) = (r.domain_fn(), r.planner());
    Deformation::horizontal(format!("deformation of {}", r.label), r.closed_form, move |q| dom(q), move |q| plan(q))
}

/// Configuration track of `D` followed by the reversed lift of its
/// workspace track, which starts on the graph of `F`.
pub fn deformation_to_roadmap(d: &Deformation, mech: &Mechanism) -> PartialRoadmap {
    let (d1, d2, m) = (d.clone(), d.clone(), mech.clone());
    PartialRoadmap::new(
        format!("roadmap of {}", d.label),
        d.closed_form && d.horizontal,
        move |q| d1.contains(q),
        move |q| {
            let tr = d2.track(q)?;
            match &tr.work {
                WorkTrack::Fixed(_) => Ok(tr.config),
                WorkTrack::Moving(wp) => {
                    let back = lift(&m, tr.config.end(), &wp.reverse(), &LiftOptions::default())?;
                    tr.config.concat(&back)
                }
            }
        },
    )
}

/// `ρ′(q) = D(q, ·)` followed by `ρ(D(q, 1))`, on the queries `D` carries
/// into `r`'s domain.
pub fn horizontal_pullback(r: &PartialRoadmap, d: &Deformation) -> Result<PartialRoadmap> {
    if !d.horizontal {
        return Err(Error::InvalidInput(format!("{} is not horizontal", d.label)));
    }
    let (d1, d2) = (d.clone(), d.clone());
    let (r1, r2) = (r.clone(), r.clone());
    Ok(PartialRoadmap::new(
        format!("{} after {}", r.label, d.label),
        r.closed_form && d.closed_form,
        move |q| d1.contains(q) && d1.track(q).is_ok_and(|tr| r1.contains(&tr.end())),
        move |q| {
            let tr = d2.track(q)?;
            let next = r2.plan(&tr.end())?;
            if is_constant(&tr.config) {
                Ok(next)
            } else {
                tr.config.concat(&next)
            }
        },
    ))
}

/// Roadmap on a region that `d` contracts to the graph point
/// `(c0, F(c0))`: follow the configuration track, then lift the reversed
/// workspace track from `c0`.
pub fn categorical_roadmap(d: &Deformation, c0: &JointAngles, mech: &Mechanism) -> Result<PartialRoadmap> {
    let w0 = forward(mech, c0)?;
    let (d1, d2, m, c0) = (d.clone(), d.clone(), mech.clone(), c0.clone());
    Ok(PartialRoadmap::new(
        format!("categorical roadmap of {}", d.label),
        d.horizontal && d.closed_form,
        move |q| d1.contains(q),
        move |q| {
            let tr = d2.track(q)?;
            let end = tr.end();
            let gap = torus_distance(&end.config, &c0)?.max(work_distance(&end.target, &w0)?);
            if gap > TOLERANCES.glue {
                return Err(Error::GlueError { gap });
            }
            match &tr.work {
                WorkTrack::Fixed(_) => Ok(tr.config),
                WorkTrack::Moving(wp) => {
                    let back = lift(&m, tr.config.end(), &wp.reverse(), &LiftOptions::default())?;
                    tr.config.concat(&back)
                }
            }
        },
    ))
}

/// Contraction of the product ball of radius `radius` around
/// `(c0, F(c0))` along shortest arcs in `C` and geodesics in `W`.
pub fn straight_line_contraction(mech: &Mechanism, c0: &JointAngles, radius: f64) -> Result<Deformation> {
    mech.check_config(c0)?;
    let w0 = forward(mech, c0)?;
    let (m, c0a, w0a) = (mech.clone(), c0.clone(), w0.clone());
    let within = move |q: &Query| -> bool {
        m.check_config(&q.config).is_ok()
            && torus_distance(&q.config, &c0a).is_ok_and(|d| d < radius)
            && work_distance(&q.target, &w0a).is_ok_and(|d| d < radius)
    };
    let c0 = c0.clone();
    Ok(Deformation::new(format!("contraction to {:?}", c0.as_slice()), true, within, move |q| {
        let start = q.config.as_slice().to_vec();
        let step: Vec<f64> = start.iter().zip(c0.as_slice()).map(|(a, b)| shortest_diff(*a, *b)).collect();
        let mut config = path_from(&q.config, |t| start.iter().zip(&step).map(|(a, d)| a + t * d).collect())?;
        if step.iter().all(|d| *d == 0.0) {
            config = MotionPath::constant(q.config.clone());
        }
        let work = WorkPath::from_samples(vec![(0.0, q.target.clone()), (1.0, w0.clone())])?;
        Ok(DeformationTrack { config, work: WorkTrack::Moving(work) })
    }))
}

/// Appends the horizontal deformation `d` (which carries configurations
/// onto a section image) to the end of every plan of `r`. Where `d` is
/// constant the plans are unchanged.
pub fn retarget_to_section(r: &PartialRoadmap, d: &Deformation) -> Result<PartialRoadmap> {
    if !d.horizontal {
        return Err(Error::InvalidInput(format!("{} is not horizontal", d.label)));
    }
    let (d1, r1) = (d.clone(), r.clone());
    let dom = r.domain_fn();
    Ok(PartialRoadmap::new(
        format!("{} onto section", r.label),
        r.closed_form && d.closed_form,
        move |q| dom(q),
        move |q| {
            let p = r1.plan(q)?;
            let end = Query::new(p.end().clone(), q.target.clone());
            if !d1.contains(&end) {
                return Err(Error::BranchDomainError(format!("plan endpoint outside {}", d1.label)));
            }
            let tr = d1.track(&end)?;
            if is_constant(&tr.config) {
                Ok(p)
            } else {
                p.concat(&tr.config)
            }
        },
    ))
}

/// Union of section pullbacks, one per branch. Fails with `CoverageGap`
/// when sampled targets (including the constructed singular ones) escape
/// every branch domain.
pub fn atlas_from_sections(sections: &[(InverseBranch, Atlas)], mech: &Mechanism) -> Result<Atlas> {
    if sections.is_empty() {
        return Err(Error::InvalidInput("no sections".into()));
    }
    let probes = crate::verification::target_probes(mech, 0, 10_000)?;
    let witnesses = probes.iter().filter(|w| !sections.iter().any(|(b, _)| b.contains(w))).count();
    if witnesses > 0 {
        return Err(Error::CoverageGap { witnesses });
    }
    let mut charts = Vec::new();
    for (branch, atlas) in sections {
        charts.extend(section_pullback(atlas, branch, mech).charts);
    }
    let names: Vec<&str> = sections.iter().map(|(b, _)| b.label.as_str()).collect();
    Ok(Atlas { name: format!("sections {}", names.join("+")), mechanism: mech.clone(), charts, cover: CoverRegion::Full })
}
