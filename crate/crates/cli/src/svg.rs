//! Planar arm drawings. Coordinates: 100 units per metre, y up, viewBox
//! fitted to the drawing with a fixed margin, three decimals throughout so
//! output is byte-stable.

use std::fmt::Write as _;

use kinecx::{Error, Mechanism, MotionPath, Result};

const SCALE: f64 = 100.0;
const MARGIN: f64 = 10.0;
const POSES: usize = 16;
const TRACE_POINTS: usize = 129;

/// Joint positions from the base to the end effector, in metres.
fn chain(mech: &Mechanism, angles: &[f64]) -> Vec<(f64, f64)> {
    let lengths: Vec<f64> = match mech {
        Mechanism::PlanarArm { lengths } => lengths.clone(),
        _ => vec![1.0],
    };
    let mut pts = vec![(0.0, 0.0)];
    let (mut x, mut y, mut phi) = (0.0, 0.0, 0.0);
    for (l, a) in lengths.iter().zip(angles) {
        phi += a;
        x += l * phi.cos();
        y += l * phi.sin();
        pts.push((x, y));
    }
    pts
}

fn to_svg((x, y): (f64, f64)) -> (f64, f64) {
    // y up; `+ 0.0` folds -0 so it prints as 0.000
    (x * SCALE + 0.0, -y * SCALE + 0.0)
}

fn points(pts: &[(f64, f64)]) -> String {
    pts.iter().map(|p| {
        let (x, y) = to_svg(*p);
        format!("{x:.3},{y:.3}")
    })
    .collect::<Vec<_>>()
    .join(" ")
}

pub fn render(mech: &Mechanism, path: &MotionPath) -> Result<String> {
    if !matches!(mech, Mechanism::PlanarArm { .. } | Mechanism::SingleRevolute { .. }) {
        return Err(Error::Unsupported(format!("cannot draw a {} mechanism in the plane", mech.name())));
    }
    if path.dim() != mech.config_dim() {
        return Err(Error::DimensionError { expected: mech.config_dim(), got: path.dim() });
    }
    let poses = (0..POSES)
        .map(|i| Ok(chain(mech, path.eval(i as f64 / (POSES - 1) as f64)?.as_slice())))
        .collect::<Result<Vec<_>>>()?;
    let trace = (0..TRACE_POINTS)
        .map(|i| {
            let c = path.eval(i as f64 / (TRACE_POINTS - 1) as f64)?;
            Ok(*chain(mech, c.as_slice()).last().expect("non-empty chain"))
        })
        .collect::<Result<Vec<_>>>()?;

    let all = poses.iter().flatten().chain(&trace).map(|p| to_svg(*p));
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let (vx, vy) = (x0 - MARGIN, y0 - MARGIN);
    let (w, h) = (x1 - x0 + 2.0 * MARGIN, y1 - y0 + 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx:.3} {vy:.3} {w:.3} {h:.3}" width="{w:.3}" height="{h:.3}">"#);
    let _ = writeln!(out, r#"<g fill="none" stroke-linecap="round" stroke-linejoin="round">"#);
    for (i, pose) in poses.iter().enumerate() {
        let _ = writeln!(out, r##"<polyline class="pose" data-t="{:.3}" points="{}" stroke="#4a6fa5" stroke-width="2"/>"##, i as f64 / (POSES - 1) as f64, points(pose));
    }
    let _ = writeln!(out, r##"<polyline class="trace" points="{}" stroke="#c0392b" stroke-width="1"/>"##, points(&trace));
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}
