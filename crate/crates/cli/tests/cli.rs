use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ballcover(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ballcover")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn counterexample_prints_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let o = ballcover(&["counterexample"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("lhs=5.039684"), "{out}");
    assert!(out.trim_end().ends_with("rhs=4"), "{out}");
}

#[test]
fn slab_center_is_mixed() {
    let dir = tempfile::tempdir().unwrap();
    let o = ballcover(&["construct", "--kind", "slab", "--n", "3", "--dim", "3", "--out", "s.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let o = ballcover(&["classify-center", "s.json", "--json", "c.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "mixed [2]");
    let c = read_json(&dir.path().join("c.json"));
    assert_eq!(c["classification"]["class"], "mixed");
    assert_eq!(c["classification"]["interior"], serde_json::json!([2]));
    assert_eq!(c["statuses"][1]["status"], "interior");
}

#[test]
fn verify_fails_on_missing_slab() {
    let dir = tempfile::tempdir().unwrap();
    ballcover(&["construct", "--kind", "slab", "--n", "3", "--dim", "3", "--out", "s.json"], dir.path());
    let mut cov = read_json(&dir.path().join("s.json"));
    cov["sets"].as_array_mut().unwrap().remove(1);
    cov["witnesses"].as_array_mut().unwrap().remove(1);
    std::fs::write(dir.path().join("holed.json"), cov.to_string()).unwrap();

    let args = ["verify", "holed.json", "--samples", "10000", "--seed", "3", "--json", "r.json"];
    let o = ballcover(&args, dir.path());
    assert_eq!(o.status.code(), Some(1));
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["coverage"]["verdict"], "fail");
    let ws = r["coverage"]["witnesses"].as_array().unwrap();
    assert!(!ws.is_empty() && ws.len() <= 16);
    for w in ws {
        assert!(w[0].as_f64().unwrap().abs() < 1.0 / 3.0);
    }
}

#[test]
fn verify_round_trips_in_memory_report() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["construct", "--kind", "ommatidium", "--dim", "3", "--beta", "0.7", "--seed", "5", "--out", "o.json"];
    assert_eq!(ballcover(&args, dir.path()).status.code(), Some(0));
    let args = ["verify", "o.json", "--samples", "5000", "--seed", "9", "--json", "r.json"];
    assert_eq!(ballcover(&args, dir.path()).status.code(), Some(0));
    let from_cli = read_json(&dir.path().join("r.json"));

    let cov = ballcover::ommatidium_covering(3, 0.7, 5).unwrap();
    let opts = ballcover::AuditOptions::new(5000, 9);
    let mem = ballcover::check_coverage(&cov, &opts).unwrap();
    assert_eq!(from_cli["coverage"], serde_json::to_value(&mem).unwrap());
    let mem = ballcover::check_congruence(&cov, &ballcover::AuditOptions { samples: 1000, ..opts }).unwrap();
    assert_eq!(from_cli["congruence"], serde_json::to_value(&mem).unwrap());
}

#[test]
fn workers_do_not_change_reports() {
    let dir = tempfile::tempdir().unwrap();
    ballcover(&["construct", "--kind", "halfball", "--dim", "3", "--out", "h.json"], dir.path());
    for w in ["1", "3"] {
        let out = format!("r{w}.json");
        let args = ["verify", "h.json", "--samples", "5000", "--seed", "2", "--workers", w, "--json", &out];
        assert_eq!(ballcover(&args, dir.path()).status.code(), Some(0));
    }
    let a = std::fs::read(dir.path().join("r1.json")).unwrap();
    let b = std::fs::read(dir.path().join("r3.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let o = ballcover(&["ncs", "--p", "2", "--dim", "2", "--samples", "100", "--seed", "1", "--json", "-"], dir.path());
    let r: Value = serde_json::from_slice(&o.stdout[o.stdout.iter().position(|&c| c == b'{').unwrap()..]).unwrap();
    assert!(r["runtime_ms"].is_null());
    let o = ballcover(
        &["ncs", "--p", "2", "--dim", "2", "--samples", "100", "--seed", "1", "--timing", "--json", "t.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(read_json(&dir.path().join("t.json"))["runtime_ms"].is_u64());
}

#[test]
fn ncs_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |p: &str| ballcover(&["ncs", "--p", p, "--dim", "3", "--samples", "1000", "--seed", "1"], dir.path());
    assert_eq!(run("3").status.code(), Some(0));
    assert_eq!(run("1").status.code(), Some(1));
    assert_eq!(run("inf").status.code(), Some(1));
    assert_eq!(run("0.5").status.code(), Some(2));
    assert_eq!(run("abc").status.code(), Some(2));
}

#[test]
fn dichotomy_command() {
    let dir = tempfile::tempdir().unwrap();
    ballcover(&["construct", "--kind", "halfball", "--dim", "3", "--out", "h.json"], dir.path());
    let o = ballcover(&["dichotomy", "h.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("pass"));
    assert!(stdout(&o).contains("in_no_interior"));

    ballcover(&["construct", "--kind", "slab", "--n", "3", "--dim", "3", "--out", "s.json"], dir.path());
    let o = ballcover(&["dichotomy", "s.json", "--json", "d.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let d = read_json(&dir.path().join("d.json"));
    assert_eq!(d["verdict"], "not_applicable");
    assert_eq!(d["detail"], "not applicable (non-NCS): mixed [2]");
}

#[test]
fn antipodal_command() {
    let dir = tempfile::tempdir().unwrap();
    // two closed arcs of the unit circle, [0°, 200°] and [180°, 360°]
    let arc = |mid: f64, half: f64| {
        let m = mid.to_radians();
        serde_json::json!({"kind": "ommatidium", "origin": [0.0, 0.0], "end": [m.cos(), m.sin()],
            "gamma": half.to_radians()})
    };
    let cov = serde_json::json!({
        "space": {"dim": 2, "norm": {"kind": "lp", "p": 2.0}},
        "sets": [arc(100.0, 100.0), arc(270.0, 90.0)],
        "meta": {"first_label": 1}
    });
    std::fs::write(dir.path().join("arcs.json"), cov.to_string()).unwrap();
    let o = ballcover(&["antipodal", "arcs.json", "--grid", "360", "--refine", "40", "--json", "a.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let a = read_json(&dir.path().join("a.json"));
    assert_eq!(a["label"], 1);
    assert!(a["residual"].as_f64().unwrap() <= 1e-6);

    let gap = serde_json::json!({
        "space": {"dim": 2, "norm": {"kind": "lp", "p": 2.0}},
        "sets": [arc(45.0, 45.0)],
        "meta": {}
    });
    std::fs::write(dir.path().join("gap.json"), gap.to_string()).unwrap();
    let o = ballcover(&["antipodal", "gap.json", "--grid", "64", "--refine", "4"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let codes = [
        ballcover(&["construct", "--kind", "cube", "--dim", "3", "--out", "x.json"], dir.path()),
        ballcover(&["construct", "--kind", "slab", "--n", "4", "--dim", "5", "--out", "x.json"], dir.path()),
        ballcover(&["construct", "--kind", "ommatidium", "--dim", "3", "--beta", "0.5", "--out", "x.json"], dir.path()),
        ballcover(&["verify", "missing.json", "--samples", "10", "--seed", "1"], dir.path()),
        ballcover(&["frobnicate"], dir.path()),
    ];
    for o in codes {
        assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    }
    std::fs::write(dir.path().join("bad.json"), "{\"space\": 3}").unwrap();
    let o = ballcover(&["classify-center", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plot_emits_one_group_per_set() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["construct", "--kind", "ommatidium", "--dim", "2", "--beta", "0.785", "--seed", "1", "--out", "o.json"];
    ballcover(&args, dir.path());
    let o = ballcover(&["plot", "o.json", "--out", "o.svg"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("o.svg")).unwrap();
    let sets = read_json(&dir.path().join("o.json"))["sets"].as_array().unwrap().len();
    assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<g class=\"set\"").count(), sets);
    assert_eq!(svg.matches("<g ").count(), svg.matches("</g>").count());
    assert_eq!(svg.matches("class=\"center\"").count(), 1);

    ballcover(&["construct", "--kind", "halfball", "--dim", "3", "--out", "h.json"], dir.path());
    let o = ballcover(&["plot", "h.json", "--out", "h.svg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("h.svg").exists());
}
