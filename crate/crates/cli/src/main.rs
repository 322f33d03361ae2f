//! `kinecx`: plan, verify, classify singularities, bound complexity, and
//! draw planar paths.
//!
//! Exit codes: 0 success, 1 verification violations, 2 input error,
//! 3 planning failure.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kinecx::cohomology::{cx_lower_bound, CohomologyModel};
use kinecx::manifold::work_distance;
use kinecx::roadmaps::default_atlas;
use kinecx::singularity::{is_regular_value, margin_statistics, rank_at, singular_locus};
use kinecx::verification::{inject_fault, run_suite, Fault, HarnessConfig, Suite};
use kinecx::{forward, Error, JointAngles, Mechanism, MotionPath, Query, WorkPoint};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "kinecx", version, about = "Robust motion planning atlases for robot-arm kinematics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one query with the mechanism's default atlas.
    Plan {
        mechanism: PathBuf,
        query: PathBuf,
        /// Write the plan JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the path as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run harness suites on the mechanism's default atlas.
    Verify {
        mechanism: PathBuf,
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        /// Corrupt the atlas first, to check the harness catches it.
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Singular locus, and the rank at a configuration or regularity of a target.
    Singular {
        mechanism: PathBuf,
        /// Comma-separated joint angles.
        #[arg(long, allow_hyphen_values = true)]
        config: Option<String>,
        /// Workspace target JSON file.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random configurations for the margin statistics.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Cohomological lower bound on the number of charts.
    TcBound { model: PathBuf },
    /// Draw a planar path as SVG.
    ExportSvg {
        mechanism: PathBuf,
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Endpoints,
    Coverage,
    Continuity,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    EndpointOffset,
    RemovedChart,
    Seam,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

fn input(e: Error) -> Failure {
    Failure::input(e.to_string())
}

fn planning(e: Error) -> Failure {
    match e {
        Error::Parse(_)
        | Error::InvalidInput(_)
        | Error::TypeError(_)
        | Error::DimensionError { .. }
        | Error::SizeError(_)
        | Error::Unsupported(_) => input(e),
        _ => Failure { code: 3, message: e.to_string() },
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                // A closed pipe (`| head`) is the reader's choice, not an error.
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::input(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn cmd_plan(mech: &Path, query: &Path, out: Option<&Path>, csv: Option<&Path>) -> Result<u8, Failure> {
    let mech: Mechanism = read_json(mech)?;
    let q: Query = read_json(query)?;
    let atlas = default_atlas(&mech).map_err(input)?;
    let (chart, path) = atlas.plan(&q).map_err(planning)?;
    let residual = work_distance(&forward(&mech, path.end()).map_err(planning)?, &q.target).map_err(planning)?;
    let csv_text = path.to_csv();
    write(out, &pretty(&json!({ "chart": chart, "label": atlas.charts[chart].label, "path_csv": csv_text })))?;
    if let Some(p) = csv {
        write(Some(p), &csv_text)?;
    }
    eprintln!("endpoint residual: {residual:e}");
    Ok(0)
}

fn cmd_verify(mech: &Path, suite: SuiteArg, cfg: HarnessConfig, fault: Option<FaultArg>, out: Option<&Path>) -> Result<u8, Failure> {
    let mech: Mechanism = read_json(mech)?;
    cfg.validate().map_err(input)?;
    let mut atlas = default_atlas(&mech).map_err(input)?;
    if let Some(f) = fault {
        atlas = inject_fault(
            &atlas,
            match f {
                FaultArg::EndpointOffset => Fault::EndpointOffset,
                FaultArg::RemovedChart => Fault::RemovedChart,
                FaultArg::Seam => Fault::Seam,
            },
        );
    }
    let suites = match suite {
        SuiteArg::Endpoints => vec![Suite::Endpoints],
        SuiteArg::Coverage => vec![Suite::Coverage],
        SuiteArg::Continuity => vec![Suite::Continuity],
        SuiteArg::All => vec![Suite::Endpoints, Suite::Coverage, Suite::Continuity],
    };
    let reports = suites.into_iter().map(|s| run_suite(&atlas, s, &cfg)).collect::<Result<Vec<_>, _>>().map_err(input)?;
    let pass = reports.iter().all(|r| r.pass);
    write(out, &pretty(&json!({ "charts": atlas.len(), "pass": pass, "reports": reports })))?;
    Ok(if pass { 0 } else { 1 })
}

const RANK_TOL: f64 = 1e-8;

fn cmd_singular(mech: &Path, config: Option<&str>, target: Option<&Path>, seed: u64, samples: usize) -> Result<u8, Failure> {
    let mech: Mechanism = read_json(mech)?;
    // The general 6-DOF arm has no analytic locus; margins still apply.
    let locus = match singular_locus(&mech) {
        Ok(l) => Some(l),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(input(e)),
    };
    let margins = margin_statistics(&mech, seed, samples, RANK_TOL).map_err(input)?;
    let mut out = json!({
        "mechanism": mech.name(),
        "locus": locus.as_ref().map(|l| l.description.clone()),
        "margins": margins,
    });
    if let Some(text) = config {
        let angles = text
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| Failure::input(format!("bad angle {s:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let c = JointAngles::new(angles).map_err(input)?;
        let report = rank_at(&mech, &c, RANK_TOL).map_err(input)?;
        out["config"] = json!({ "report": report, "on_locus": locus.as_ref().map(|l| l.contains(&c)) });
    }
    if let Some(p) = target {
        let w: WorkPoint = read_json(p)?;
        out["target"] = json!({ "regular_value": is_regular_value(&mech, &w).map_err(planning)? });
    }
    write(None, &pretty(&out))?;
    Ok(0)
}

fn cmd_tc_bound(model: &Path) -> Result<u8, Failure> {
    let model: CohomologyModel = read_json(model)?;
    let n = cx_lower_bound(&model).map_err(input)?;
    write(None, &pretty(&json!({ "bound": n.nilpotency, "dims": n.dims, "certificate": n.certificate })))?;
    Ok(0)
}

fn cmd_export_svg(mech: &Path, path: &Path, out: &Path) -> Result<u8, Failure> {
    let mech: Mechanism = read_json(mech)?;
    let path = MotionPath::from_csv(&read(path)?).map_err(input)?;
    let doc = svg::render(&mech, &path).map_err(input)?;
    write(Some(out), &doc)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Plan { mechanism, query, out, csv } => cmd_plan(&mechanism, &query, out.as_deref(), csv.as_deref()),
        Command::Verify { mechanism, suite, seed, samples, delta, inject_fault, out } => {
            let cfg = HarnessConfig { seed, samples, delta, ..Default::default() };
            cmd_verify(&mechanism, suite, cfg, inject_fault, out.as_deref())
        }
        Command::Singular { mechanism, config, target, seed, samples } => {
            cmd_singular(&mechanism, config.as_deref(), target.as_deref(), seed, samples)
        }
        Command::TcBound { model } => cmd_tc_bound(&model),
        Command::ExportSvg { mechanism, path, out } => cmd_export_svg(&mechanism, &path, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
