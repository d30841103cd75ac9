mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_asv-apf"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn simulate(name: &str, out: &Path, extra: &[&str]) -> Output {
    let sc = scenario(name);
    let mut args = vec!["simulate", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn help_is_available_everywhere() {
    for sub in [None, Some("simulate"), Some("batch"), Some("compare"), Some("plot"), Some("validate")] {
        let mut args: Vec<&str> = sub.into_iter().collect();
        args.push("--help");
        let o = run(&args);
        assert_eq!(code(&o), 0, "{sub:?}");
        assert!(String::from_utf8_lossy(&o.stdout).contains("Usage"), "{sub:?}");
    }
}

#[test]
fn simulate_head_on_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate("head_on", dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "t_prime,agent_id,x_L,y_L,psi_rad,u_nd,v_nd,r_nd,delta_rad,delta_c_rad,psi_d_rad,mode,y_e_L"
    );

    let doc = read_json(&dir.path().join("result.json"));
    assert_eq!(doc["outcome"], "success");
    let schema: Value = serde_json::from_str(asv_apf::io::RESULT_SCHEMA).unwrap();
    let errors = common::validate(&schema, &doc);
    assert!(errors.is_empty(), "{errors:?}");

    let timing = read_json(&dir.path().join("timing.json"));
    assert!(timing["guidance_calls"].as_u64().unwrap() > 0);
}

#[test]
fn simulate_exit_codes_follow_the_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate("head_on", &dir.path().join("collide"), &["--method", "inverse"]);
    assert_eq!(code(&o), 2);
    let doc = read_json(&dir.path().join("collide/result.json"));
    assert_eq!(doc["outcome"], "collision");

    let o = simulate("head_on", &dir.path().join("short"), &["--max-time", "5"]);
    assert_eq!(code(&o), 3);

    let o = run(&["simulate", "--scenario", "/nonexistent/scene.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());

    let o = simulate("head_on", &dir.path().join("bad"), &["--dt", "-1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn batch_is_reproducible_across_runs_and_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (tag, jobs) in [("a", "1"), ("b", "1"), ("c", "8")] {
        let out = dir.path().join(tag);
        let o = run(&[
            "batch", "--env", "1", "--method", "mvortex", "--runs", "50", "--seed", "7", "--jobs", jobs, "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(out.join("summary.json")).unwrap());
        assert!(out.join("timing.json").exists());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    let o = run(&["batch", "--env", "9", "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn compare_reports_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "compare", "--env", "2", "--methods", "mvortex,vo", "--runs", "8", "--seed", "3", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("comparison.json"));
    let methods: Vec<&str> = doc["methods"].as_array().unwrap().iter().map(|m| m["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["mvortex", "vo"]);
    assert!(dir.path().join("timing.json").exists());
}

#[test]
fn plots_render_from_simulation_output() {
    let dir = tempfile::tempdir().unwrap();
    let sq = dir.path().join("square");
    assert_eq!(code(&simulate("square", &sq, &[])), 0);
    let traj = sq.join("trajectory.csv");
    let svg_path = dir.path().join("path.svg");
    let sc = scenario("square");
    let o = run(&[
        "plot", "--traj", traj.to_str().unwrap(), "--kind", "path", "--scenario", sc.to_str().unwrap(), "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches(r#"class="waypoint""#).count(), 4);

    let ho = dir.path().join("head_on");
    assert_eq!(code(&simulate("head_on", &ho, &[])), 0);
    let dist = dir.path().join("distance.svg");
    let o = run(&[
        "plot", "--traj", ho.join("trajectory.csv").to_str().unwrap(), "--kind", "distance", "--out",
        dist.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let svg = std::fs::read_to_string(&dist).unwrap();
    let start = svg.find(r#"<desc class="min-distance">"#).expect("min-distance marker");
    let rest = &svg[start + r#"<desc class="min-distance">"#.len()..];
    let shown: f64 = rest[..rest.find('<').unwrap()].parse().unwrap();
    let expected = read_json(&ho.join("result.json"))["min_separation"].as_f64().unwrap();
    assert!((shown - expected).abs() < 1e-9, "{shown} vs {expected}");

    for kind in ["rudder", "heading", "crosstrack"] {
        let out = dir.path().join(format!("{kind}.svg"));
        let o = run(&["plot", "--traj", traj.to_str().unwrap(), "--kind", kind, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{kind}");
    }

    let field = dir.path().join("field.svg");
    let o = run(&["plot", "--field", "mvortex", "--out", field.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(&field).unwrap().contains("<svg"));

    let o = run(&["plot", "--traj", traj.to_str().unwrap(), "--kind", "spiral", "--out", field.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn validate_accepts_shipped_scenarios_and_rejects_bad_ones() {
    let mut files: Vec<PathBuf> = std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(files.len() >= 9);
    let mut args = vec!["validate".to_string()];
    args.extend(files.iter().map(|p| p.display().to_string()));
    let o = bin().args(&args).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout).matches(": ok").count(), files.len());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let mut doc = read_json(&scenario("head_on"));
    doc["agents"][0]["speed"] = Value::from(-1.0);
    std::fs::write(&bad, doc.to_string()).unwrap();
    let o = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());
}
