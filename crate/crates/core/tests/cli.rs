use std::io::Write;
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_corridor-nav");

fn nav(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("NAV_LLM_URL").env_remove("NAV_LLM_MODEL").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn text(out: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
}

fn repl(env: &str, script: &str) -> String {
    let mut child = Command::new(BIN)
        .args(["repl", "--env", env])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(script.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn builtin_scenario_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = nav(&["run", "--scenario", "env_a_tour", "--out-dir", out_dir]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    for k in 1..=5 {
        assert!(dir.path().join(format!("trajectory_{k}.csv")).exists());
    }
    for f in ["events.jsonl", "metrics.csv", "aggregate.txt", "aggregate.csv", "path_plot.svg"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("# generated_unix="));
    assert_eq!(metrics.lines().count(), 1 + 1 + 5);
    let header = std::fs::read_to_string(dir.path().join("trajectory_1.csv")).unwrap();
    assert!(header.starts_with("sim_time,x,y,theta,state,v_linear,v_angular\n"));
    assert!(text(&out).contains("Completed"));
}

#[test]
fn plot_is_well_formed_svg_with_one_trajectory_per_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = nav(&["run", "--scenario", "env_b_tour", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    let svg = std::fs::read_to_string(dir.path().join("path_plot.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let count = |class: &str, tag: &str| {
        doc.descendants()
            .filter(|n| n.tag_name().name() == tag && n.attribute("class") == Some(class))
            .count()
    };
    assert_eq!(count("trajectory", "polyline"), 5);
    assert_eq!(count("plan", "path"), 5);
}

#[test]
fn report_rebuilds_identical_tables_from_events() {
    let run_dir = tempfile::tempdir().unwrap();
    let out = nav(&["run", "--scenario", "env_c_tour", "--out-dir", run_dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    let report_dir = tempfile::tempdir().unwrap();
    let events = run_dir.path().join("events.jsonl");
    let out = nav(&[
        "report",
        "--events",
        events.to_str().unwrap(),
        "--out-dir",
        report_dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", text(&out));
    for f in ["metrics.csv", "aggregate.txt", "aggregate.csv"] {
        let read = |d: &Path| std::fs::read_to_string(d.join(f)).unwrap();
        assert_eq!(read(run_dir.path()), read(report_dir.path()), "{f}");
    }
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&nav(&["run", "--scenario", "no_such_scenario", "--out-dir", d])), 2);
    let out = nav(&["run", "--env", "env_a", "--command", "go to Room Number 999", "--out-dir", d]);
    assert_eq!(code(&out), 2, "{}", text(&out));
    assert!(text(&out).contains("999"));
    assert_eq!(code(&nav(&["run", "--env", "env_q", "--command", "go to the window", "--out-dir", d])), 2);
    let out = nav(&["run", "--env", "env_a", "--command", "go to the window", "--provider", "llm", "--out-dir", d]);
    assert_eq!(code(&out), 2, "llm without url: {}", text(&out));
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"safety": {"d_emergency": 0.6, "d_slowstop": 0.5}}"#).unwrap();
    let out = nav(&[
        "run",
        "--env",
        "env_a",
        "--command",
        "go to the window",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        d,
    ]);
    assert_eq!(code(&out), 2, "{}", text(&out));
}

#[test]
fn failed_command_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("stub.json");
    std::fs::write(&script, r#"["no waypoints here"]"#).unwrap();
    let out = nav(&[
        "run",
        "--env",
        "env_a",
        "--command",
        "go to the window",
        "--provider",
        "stub",
        "--stub-script",
        script.to_str().unwrap(),
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "{}", text(&out));
    assert!(text(&out).contains("Failed(planning_failed)"), "{}", text(&out));
}

#[test]
fn unreachable_endpoint_exits_3() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let dir = tempfile::tempdir().unwrap();
    let out = nav(&[
        "run",
        "--env",
        "env_a",
        "--command",
        "go to the window",
        "--provider",
        "llm",
        "--llm-url",
        &format!("http://127.0.0.1:{port}"),
        "--model",
        "m",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", text(&out));
}

#[test]
fn repl_reports_completed_and_unknown_targets() {
    let out = repl("env_a", "go to Room Number 101\ngo to Room Number 999\nquit\n");
    assert!(out.lines().any(|l| l.contains("Completed")), "{out}");
    assert!(out.contains("UnknownTarget"), "{out}");
}

#[test]
fn repl_injected_obstacle_forces_a_replan() {
    let out = repl("env_a", "inject 5 0 0.3\ngo to the window\n");
    assert!(out.contains("obstacle at (5, 0) radius 0.3"), "{out}");
    let summary = out.lines().find(|l| l.contains("replan_attempts=")).unwrap();
    let n: u32 = summary
        .split("replan_attempts=")
        .nth(1)
        .unwrap()
        .split(|c: char| !c.is_ascii_digit())
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(n >= 1, "{summary}");
    assert!(summary.contains("Completed"), "{summary}");
}

#[test]
fn repl_rejects_malformed_inject() {
    let out = repl("env_a", "inject 5 zero\nclear\n");
    assert!(out.contains("usage: inject"), "{out}");
    assert!(out.contains("obstacles cleared"), "{out}");
}
