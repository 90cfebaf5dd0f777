use std::process::{Command, Output};

fn holoptics(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holoptics"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn swap_demo_passes() {
    let o = holoptics(&["--suite", "swap-demo"]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("quantity,value\n"));
    assert!(csv.contains("distance_to_swap,"));
}

#[test]
fn kick_table_has_target_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("kick.csv");
    let o = holoptics(&[
        "--suite",
        "kick-convergence",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "entry,m=5,m=10,m=20,m=26,reference_abs_m=100");
    assert_eq!(lines.len(), 5);
    for (line, label) in lines[1..].iter().zip(["00", "01", "10", "11"]) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], label);
        assert_eq!(cells.len(), 6);
        for c in &cells[1..5] {
            assert_eq!(c.split('.').nth(1).unwrap().len(), 4, "{c}");
        }
    }
    // the exit status reports whether every check held
    let status = code(&o);
    let summary = String::from_utf8(o.stdout).unwrap();
    let any_fail = summary.lines().any(|l| l.starts_with("FAIL"));
    assert_eq!(status, if any_fail { 1 } else { 0 });
}

#[test]
fn json_output_is_deterministic() {
    let run = || {
        let o = holoptics(&[
            "--suite",
            "check-field-strength",
            "--seed",
            "7",
            "--format",
            "json",
        ]);
        assert_eq!(code(&o), 0);
        o.stdout
    };
    let a = run();
    assert_eq!(a, run());
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["suite"], "check-field-strength");
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["conventions"]["charts"].as_array().unwrap().len(), 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"suite": "check-connection", "chart": "su2", "points": 3, "seed": 1}"#,
    )
    .unwrap();
    let o = holoptics(&["--config", cfg.to_str().unwrap(), "--seed", "2"]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("su2,")));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"suite": "stokes", "bogus": 1}"#).unwrap();
    assert_eq!(code(&holoptics(&["--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&holoptics(&[])), 2);
    assert_eq!(code(&holoptics(&["--suite", "nonsense"])), 2);
    std::fs::write(&cfg, r#"{"suite": "check-connection", "chart": "nope"}"#).unwrap();
    assert_eq!(code(&holoptics(&["--config", cfg.to_str().unwrap()])), 2);
}
