use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn kinecx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinecx")).args(args).output().expect("binary runs")
}

fn fx(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn plan_pole_query_uses_the_pole_chart() {
    let o = kinecx(&["plan", &fx("universal.json"), &fx("pole_query.json")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["chart"], 3);
    assert_eq!(v["label"], "pole P1");
    let csv = v["path_csv"].as_str().unwrap();
    assert_eq!(csv.lines().next(), Some("t,theta_1,theta_2"));
    assert_eq!(csv.lines().nth(1), Some("0,0.3,0.2"));
    assert_eq!(csv.lines().last(), Some("1,0.3,1.57079632679"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("endpoint residual"));
}

#[test]
fn plan_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    let csv = dir.path().join("path.csv");
    let o = kinecx(&[
        "plan",
        &fx("planar.json"),
        &fx("planar_query.json"),
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["path_csv"].as_str().unwrap(), std::fs::read_to_string(&csv).unwrap());
}

#[test]
fn exit_codes() {
    let unreachable = kinecx(&["plan", &fx("planar.json"), &fx("unreachable.json")]);
    assert_eq!(code(&unreachable), 3);
    let wrong_kind = kinecx(&["plan", &fx("universal.json"), &fx("planar_query.json")]);
    assert_eq!(code(&wrong_kind), 2);
    assert_eq!(code(&kinecx(&["plan", &fx("missing.json"), &fx("pole_query.json")])), 2);
    assert_eq!(code(&kinecx(&["verify", &fx("bad_serial.json")])), 2);
    assert_eq!(code(&kinecx(&["no-such-command"])), 2);
    assert_eq!(code(&kinecx(&["verify", &fx("universal.json"), "--samples", "0"])), 2);
}

#[test]
fn verify_passes_and_catches_faults() {
    let ok = kinecx(&["verify", &fx("universal.json"), "--samples", "500"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);

    for fault in ["endpoint-offset", "removed-chart"] {
        let o = kinecx(&["verify", &fx("universal.json"), "--samples", "500", "--inject-fault", fault]);
        assert_eq!(code(&o), 1, "fault {fault} not caught");
    }
    let seam = kinecx(&["verify", &fx("transmission.json"), "--suite", "continuity", "--samples", "500", "--inject-fault", "seam"]);
    assert_eq!(code(&seam), 1);
}

#[test]
fn verify_is_deterministic() {
    let run = || kinecx(&["verify", &fx("universal.json"), "--suite", "all", "--seed", "7", "--samples", "1000"]);
    let (a, b) = (run(), run());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn singular_reports() {
    let o = kinecx(&["singular", &fx("universal.json"), "--config", "0.4,1.5707963267948966"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["report"]["rank"], 1);
    assert_eq!(v["config"]["on_locus"], true);
    assert_eq!(v["margins"]["samples"], 1000);
    assert_eq!(code(&kinecx(&["singular", &fx("universal.json"), "--config", "0.4,x"])), 2);
}

#[test]
fn singular_margins_without_a_locus() {
    let o = kinecx(&["singular", &fx("puma.json"), "--samples", "200", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["locus"].is_null());
    let m = &v["margins"];
    assert!(m["min"].as_f64().unwrap() <= m["median"].as_f64().unwrap());
    assert!(m["median"].as_f64().unwrap() <= m["max"].as_f64().unwrap());
    assert_eq!(o.stdout, kinecx(&["singular", &fx("puma.json"), "--samples", "200", "--seed", "3"]).stdout);
}

#[test]
fn tc_bound_six_dof() {
    let o = kinecx(&["tc-bound", &fx("six_dof.json")]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["bound"], 4);
    assert_eq!(v["certificate"]["product"], "1⊗u^3 + x1⊗u^2");
}

#[test]
fn export_svg_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("arm.svg");
    let o = kinecx(&["export-svg", &fx("planar.json"), &fx("quarter_turn.csv"), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(&out).unwrap();
    // Lengths 2 and 1, shoulder swinging from 0 to pi/2: fully stretched
    // along +x, then along +y (drawn upward, so negative svg y).
    assert!(svg.contains(r#"data-t="0.000" points="0.000,0.000 200.000,0.000 300.000,0.000""#));
    assert!(svg.contains(r#"data-t="1.000" points="0.000,0.000 0.000,-200.000 0.000,-300.000""#));
    assert_eq!(svg.matches("class=\"pose\"").count(), 16);
    assert_eq!(svg, std::fs::read_to_string(fixture("quarter_turn.svg")).unwrap());
}

#[test]
fn export_svg_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.svg");
    let out = out.to_str().unwrap();
    assert_eq!(code(&kinecx(&["export-svg", &fx("universal.json"), &fx("quarter_turn.csv"), "--out", out])), 2);
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&kinecx(&["export-svg", &fx("planar.json"), empty.to_str().unwrap(), "--out", out])), 2);
}
