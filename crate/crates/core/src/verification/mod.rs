//! Seeded property harness for atlases: endpoint contract, coverage,
//! per-chart continuity, and loop discontinuity witnesses.
//!
//! Every sample index gets its own ChaCha stream, so reports are identical
//! for identical configurations regardless of thread scheduling.

mod families;

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use families::{query_families, special_targets, target_probes, uniform_family, QueryFamily};

use crate::error::{Error, Result};
use crate::manifold::{torus_distance, work_distance, MotionPath};
use crate::mechanisms::forward;
use crate::roadmaps::{Atlas, PartialRoadmap, Query};

pub(crate) fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub seed: u64,
    pub samples: usize,
    /// Probe radius for continuity pairs.
    pub delta: f64,
    pub endpoint_tol: f64,
    pub closed_form_tol: f64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self { seed: 0, samples: 10_000, delta: 1e-4, endpoint_tol: 1e-6, closed_form_tol: 1e-12 }
    }
}

impl HarnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || !(self.delta > 0.0) || !(self.endpoint_tol > 0.0) || !(self.closed_form_tol > 0.0) {
            return Err(Error::InvalidInput(format!("invalid harness config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartStats {
    pub index: usize,
    pub label: String,
    pub queries: usize,
    pub max_endpoint_error: Option<f64>,
    pub k_estimate: Option<f64>,
    pub k_refined: Option<f64>,
    pub pairs: usize,
    /// Probe pairs whose partner fell in another chart.
    pub straddling: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub chart: Option<usize>,
    pub family: String,
    pub query: Query,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub check: String,
    pub atlas: String,
    pub seed: u64,
    pub queries: usize,
    pub uncovered: usize,
    pub charts: Vec<ChartStats>,
    pub violations: usize,
    pub witnesses: Vec<Witness>,
    pub pass: bool,
}

const MAX_WITNESSES: usize = 16;
const MIN_PAIRS: usize = 20;
const K_STABILITY: f64 = 4.0;
const PROBE_GRID: usize = 64;

impl Report {
    fn new(check: &str, atlas: &Atlas, cfg: &HarnessConfig) -> Self {
        Self {
            check: check.into(),
            atlas: atlas.name.clone(),
            seed: cfg.seed,
            queries: 0,
            uncovered: 0,
            charts: atlas
                .charts
                .iter()
                .enumerate()
                .map(|(index, c)| ChartStats {
                    index,
                    label: c.label.clone(),
                    queries: 0,
                    max_endpoint_error: None,
                    k_estimate: None,
                    k_refined: None,
                    pairs: 0,
                    straddling: 0,
                })
                .collect(),
            violations: 0,
            witnesses: Vec::new(),
            pass: true,
        }
    }

    fn violation(&mut self, w: Witness) {
        self.violations += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }

    fn finish(mut self) -> Self {
        self.pass = self.violations == 0;
        self
    }
}

/// Which checks `run_suite` performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Endpoints,
    Coverage,
    Continuity,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "endpoints" => Ok(Self::Endpoints),
            "coverage" => Ok(Self::Coverage),
            "continuity" => Ok(Self::Continuity),
            _ => Err(Error::InvalidInput(format!("unknown suite {s:?}"))),
        }
    }
}

pub fn run_suite(atlas: &Atlas, suite: Suite, cfg: &HarnessConfig) -> Result<Report> {
    match suite {
        Suite::Endpoints => check_endpoints(atlas, cfg),
        Suite::Coverage => check_coverage(atlas, cfg),
        Suite::Continuity => continuity_probe(atlas, cfg),
    }
}

/// Queries from every family: `cfg.samples` uniform ones plus a fifth as
/// many again spread over the measure-zero families.
fn sampled_queries(atlas: &Atlas, cfg: &HarnessConfig) -> Vec<(usize, Vec<f64>)> {
    let families = query_families(&atlas.mechanism);
    let special = families.len().saturating_sub(1).max(1);
    let per_special = (cfg.samples / (5 * special)).max(16);
    let mut out = Vec::new();
    for (f, fam) in families.iter().enumerate() {
        let count = if fam.measure_zero { per_special } else { cfg.samples };
        for i in 0..count {
            let mut rng = rng_for(cfg.seed, ((f as u64) << 40) | i as u64);
            out.push((f, fam.random_params(&mut rng)));
        }
    }
    out
}

enum Outcome {
    Skipped,
    NoChart(Query),
    Failed(usize, Query, String),
    Planned { chart: usize, query: Query, start_exact: bool, error: f64 },
}

fn evaluate(atlas: &Atlas, query: Query) -> Outcome {
    if !atlas.cover.contains(&atlas.mechanism, &query) {
        return Outcome::Skipped;
    }
    let Some(chart) = atlas.chart_of(&query) else { return Outcome::NoChart(query) };
    match atlas.charts[chart].plan(&query) {
        Err(e) => Outcome::Failed(chart, query, e.to_string()),
        Ok(p) => {
            let error = forward(&atlas.mechanism, p.end())
                .and_then(|w| work_distance(&w, &query.target))
                .unwrap_or(f64::INFINITY);
            Outcome::Planned { chart, start_exact: p.start() == &query.config, error, query }
        }
    }
}

fn run_queries(atlas: &Atlas, cfg: &HarnessConfig) -> (Vec<String>, Vec<(usize, Outcome)>) {
    let families = query_families(&atlas.mechanism);
    let names = families.iter().map(|f| f.name.clone()).collect();
    let outcomes = sampled_queries(atlas, cfg)
        .into_par_iter()
        .map(|(f, p)| (f, families[f].build(&p).map_or(Outcome::Skipped, |q| evaluate(atlas, q))))
        .collect();
    (names, outcomes)
}

/// Plans sampled queries and checks `ρ(q)(0) = c` exactly and
/// `F(ρ(q)(1)) ≈ w` within the chart's tolerance.
pub fn check_endpoints(atlas: &Atlas, cfg: &HarnessConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new("endpoints", atlas, cfg);
    let (names, outcomes) = run_queries(atlas, cfg);
    for (f, outcome) in outcomes {
        let family = names[f].clone();
        match outcome {
            Outcome::Skipped => continue,
            Outcome::NoChart(query) => {
                report.uncovered += 1;
                report.violation(Witness { chart: None, family, query, detail: "no chart".into() });
            }
            Outcome::Failed(chart, query, msg) => {
                report.charts[chart].queries += 1;
                report.violation(Witness { chart: Some(chart), family, query, detail: msg });
            }
            Outcome::Planned { chart, query, start_exact, error } => {
                let stats = &mut report.charts[chart];
                stats.queries += 1;
                stats.max_endpoint_error = Some(stats.max_endpoint_error.map_or(error, |m| m.max(error)));
                let tol = if atlas.charts[chart].closed_form { cfg.closed_form_tol } else { cfg.endpoint_tol };
                if !start_exact {
                    report.violation(Witness { chart: Some(chart), family, query, detail: "path does not start at c".into() });
                } else if !(error < tol) {
                    report.violation(Witness { chart: Some(chart), family, query, detail: format!("endpoint error {error:e} >= {tol:e}") });
                }
            }
        }
        report.queries += 1;
    }
    Ok(report.finish())
}

/// Checks that every sampled query in the claimed cover has a chart.
pub fn check_coverage(atlas: &Atlas, cfg: &HarnessConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new("coverage", atlas, cfg);
    let families = query_families(&atlas.mechanism);
    let hits: Vec<(usize, Option<Query>, Option<usize>)> = sampled_queries(atlas, cfg)
        .into_par_iter()
        .map(|(f, p)| match families[f].build(&p) {
            Some(q) if atlas.cover.contains(&atlas.mechanism, &q) => {
                let c = atlas.chart_of(&q);
                (f, Some(q), c)
            }
            _ => (f, None, None),
        })
        .collect();
    for (f, q, chart) in hits {
        let Some(query) = q else { continue };
        report.queries += 1;
        match chart {
            Some(c) => report.charts[c].queries += 1,
            None => {
                report.uncovered += 1;
                report.violation(Witness { chart: None, family: families[f].name.clone(), query, detail: "no chart".into() });
            }
        }
    }
    Ok(report.finish())
}

fn query_distance(a: &Query, b: &Query) -> Result<f64> {
    Ok(torus_distance(&a.config, &b.config)?.max(work_distance(&a.target, &b.target)?))
}

/// Parameters displaced by `scale · dir`, reflecting components that would
/// leave the unit cube at the coarser scale.
fn displaced(p: &[f64], dir: &[f64], scale: f64, coarse: f64) -> Vec<f64> {
    p.iter()
        .zip(dir)
        .map(|(x, d)| {
            let sign = if (0.0..1.0).contains(&(x + coarse * d)) { 1.0 } else { -1.0 };
            x + sign * scale * d
        })
        .collect()
}

enum Pair {
    Skipped,
    Straddling(usize),
    Ratios(usize, Query, f64, f64),
}

fn percentile99(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = ((0.99 * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    Some(v[k])
}

fn sup_ratio(chart: &PartialRoadmap, base: &Query, base_path: &MotionPath, other: &Query) -> Option<f64> {
    let d = query_distance(base, other).ok()?;
    if d == 0.0 {
        return None;
    }
    let p = chart.plan(other).ok()?;
    Some(base_path.sup_distance(&p, PROBE_GRID).ok()? / d)
}

/// Estimates a per-chart Lipschitz constant `K` (99th percentile of
/// `sup_t d(ρ(q)(t), ρ(q′)(t)) / d(q, q′)`) at `δ` and at `δ/10`, and flags
/// charts whose estimate is not finite or moves by more than a factor 4.
pub fn continuity_probe(atlas: &Atlas, cfg: &HarnessConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new("continuity", atlas, cfg);
    let families = query_families(&atlas.mechanism);
    let coarse = cfg.delta / std::f64::consts::TAU;
    let pairs: Vec<(usize, Pair)> = sampled_queries(atlas, cfg)
        .into_par_iter()
        .enumerate()
        .map(|(i, (f, p))| {
            let fam = &families[f];
            let Some(q) = fam.build(&p).filter(|q| atlas.cover.contains(&atlas.mechanism, q)) else {
                return (f, Pair::Skipped);
            };
            let Some(chart) = atlas.chart_of(&q) else { return (f, Pair::Skipped) };
            let mut rng = rng_for(cfg.seed ^ 0x5eed, i as u64);
            // Unit sup-norm direction: angle-parametrised queries land at
            // query distance exactly δ.
            let mut dir: Vec<f64> = fam.random_params(&mut rng).iter().map(|u| 2.0 * u - 1.0).collect();
            let scale = dir.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            if scale == 0.0 {
                return (f, Pair::Skipped);
            }
            dir.iter_mut().for_each(|d| *d /= scale);
            let near = [coarse, coarse / 10.0].map(|s| fam.build(&displaced(&p, &dir, s, coarse)));
            let [Some(q1), Some(q2)] = near else { return (f, Pair::Skipped) };
            if atlas.chart_of(&q1) != Some(chart) || atlas.chart_of(&q2) != Some(chart) {
                return (f, Pair::Straddling(chart));
            }
            let r = &atlas.charts[chart];
            let Ok(base) = r.plan(&q) else { return (f, Pair::Skipped) };
            match (sup_ratio(r, &q, &base, &q1), sup_ratio(r, &q, &base, &q2)) {
                (Some(a), Some(b)) => (f, Pair::Ratios(chart, q, a, b)),
                _ => (f, Pair::Skipped),
            }
        })
        .collect();

    let n = atlas.len();
    let mut coarse_ratios = vec![Vec::new(); n];
    let mut fine_ratios = vec![Vec::new(); n];
    let mut first = vec![None; n];
    for (f, pair) in pairs {
        match pair {
            Pair::Skipped => {}
            Pair::Straddling(c) => {
                report.queries += 1;
                report.charts[c].straddling += 1;
            }
            Pair::Ratios(c, q, a, b) => {
                report.queries += 1;
                report.charts[c].pairs += 1;
                coarse_ratios[c].push(a);
                fine_ratios[c].push(b);
                first[c].get_or_insert((f, q));
            }
        }
    }
    for c in 0..n {
        let stats = &mut report.charts[c];
        stats.queries = stats.pairs + stats.straddling;
        if stats.pairs < MIN_PAIRS {
            continue;
        }
        let k = percentile99(std::mem::take(&mut coarse_ratios[c])).unwrap_or(f64::INFINITY);
        let kr = percentile99(std::mem::take(&mut fine_ratios[c])).unwrap_or(f64::INFINITY);
        stats.k_estimate = Some(k);
        stats.k_refined = Some(kr);
        let stable = k.is_finite()
            && kr.is_finite()
            && ((k < 1e-9 && kr < 1e-9) || (kr <= K_STABILITY * k && k <= K_STABILITY * kr));
        if !stable {
            let (f, query) = first[c].clone().expect("pairs recorded");
            report.violation(Witness {
                chart: Some(c),
                family: families[f].name.clone(),
                query,
                detail: format!("K {k:e} at delta, {kr:e} at delta/10"),
            });
        }
    }
    Ok(report.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopReport {
    pub samples: usize,
    /// Largest query distance between neighbouring loop samples.
    pub mesh: f64,
    pub max_jump: f64,
    /// Loop parameters `(s, s′)` and path jump of the largest jump, when it
    /// is at least 100 times the mesh.
    pub witness: Option<(f64, f64, f64)>,
}

impl LoopReport {
    pub fn discontinuous(&self) -> bool {
        self.witness.is_some()
    }
}

/// Samples the closed query loop `s ↦ loop_fn(s)`, `s ∈ [0,1]`, at
/// `cfg.samples + 1` points and measures path jumps between neighbours.
/// In piecewise mode only neighbours planned by the same chart are compared.
pub fn loop_discontinuity_test(
    planner: impl Fn(&Query) -> Result<(usize, MotionPath)> + Sync,
    loop_fn: impl Fn(f64) -> Query + Sync,
    cfg: &HarnessConfig,
    piecewise: bool,
) -> Result<LoopReport> {
    cfg.validate()?;
    let n = cfg.samples;
    let planned: Vec<(Query, usize, MotionPath)> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let q = loop_fn(i as f64 / n as f64);
            let (c, p) = planner(&q)?;
            Ok((q, c, p))
        })
        .collect::<Result<_>>()?;
    let mut mesh: f64 = 0.0;
    let mut best = (0.0, 0.0, 0.0);
    for (i, w) in planned.windows(2).enumerate() {
        mesh = mesh.max(query_distance(&w[0].0, &w[1].0)?);
        if piecewise && w[0].1 != w[1].1 {
            continue;
        }
        let jump = w[0].2.sup_distance(&w[1].2, PROBE_GRID)?;
        if jump > best.2 {
            best = (i as f64 / n as f64, (i + 1) as f64 / n as f64, jump);
        }
    }
    Ok(LoopReport { samples: n + 1, mesh, max_jump: best.2, witness: (best.2 >= 100.0 * mesh && best.2 > 0.0).then_some(best) })
}

/// Deliberate defects used to confirm each check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Every plan's first coordinate overshoots by 1e-3.
    EndpointOffset,
    /// Chart 1 is deleted.
    RemovedChart,
    /// Chart 0 adds a full extra turn on alternating 1e-7-wide bands of the
    /// first start coordinate.
    Seam,
}

impl FromStr for Fault {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "endpoint_offset" | "endpoint-offset" => Ok(Self::EndpointOffset),
            "removed_chart" | "removed-chart" => Ok(Self::RemovedChart),
            "seam" => Ok(Self::Seam),
            _ => Err(Error::InvalidInput(format!("unknown fault {s:?}"))),
        }
    }
}

fn warp(p: &MotionPath, start: &crate::manifold::JointAngles, g: impl Fn(f64) -> f64) -> Result<MotionPath> {
    let samples: Vec<(f64, Vec<f64>)> = p
        .unwrapped()
        .into_iter()
        .map(|(t, mut v)| {
            v[0] += g(t);
            (t, v)
        })
        .collect();
    let mut out = MotionPath::from_unwrapped(&samples)?;
    out.set_start(start.clone());
    Ok(out)
}

pub fn inject_fault(atlas: &Atlas, fault: Fault) -> Atlas {
    let mut out = atlas.clone();
    out.name = format!("{} with fault {fault:?}", atlas.name);
    match fault {
        Fault::RemovedChart => {
            if out.charts.len() > 1 {
                out.charts.remove(1);
            }
        }
        Fault::EndpointOffset => {
            out.charts = atlas
                .charts
                .iter()
                .map(|r| {
                    let r2 = r.clone();
                    PartialRoadmap::new(r.label.clone(), r.closed_form, move_domain(r), move |q: &Query| {
                        warp(&r2.plan(q)?, &q.config, |t| 1e-3 * t)
                    })
                })
                .collect();
        }
        Fault::Seam => {
            if let Some(r) = atlas.charts.first() {
                let r2 = r.clone();
                out.charts[0] = PartialRoadmap::new(r.label.clone(), r.closed_form, move_domain(r), move |q: &Query| {
                    let p = r2.plan(q)?;
                    if (q.config.get(0) / 1e-7).floor() as i64 % 2 == 0 {
                        Ok(p)
                    } else {
                        warp(&p, &q.config, |t| std::f64::consts::TAU * t)
                    }
                });
            }
        }
    }
    out
}

fn move_domain(r: &PartialRoadmap) -> impl Fn(&Query) -> bool + Send + Sync + 'static {
    let r = r.clone();
    move |q| r.contains(q)
}
