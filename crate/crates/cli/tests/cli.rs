use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use psop_cli::{run, CliError, JobConfig, RunOptions, TaskResult};
use psop_core::classify::{Property, Status};
use psop_core::Exec;

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn load(name: &str) -> JobConfig {
    psop_cli::load_config(&config_path(name)).unwrap()
}

fn psop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psop"))
        .args(args)
        .env_remove("PSOP_THREADS")
        .output()
        .unwrap()
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> String {
    let p = dir.path().join("job.json");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn geometric_symbol_is_power_bounded_with_l1_certificate() {
    let out = run(&load("classify_geometric.json"), RunOptions::default()).unwrap();
    let TaskResult::Classify { verdicts } = &out.report.result else {
        panic!()
    };
    let pb = verdicts
        .iter()
        .find(|v| v.property == Property::PowerBounded)
        .unwrap();
    assert_eq!(pb.status, Status::Holds);
    assert_eq!(pb.certificate, "ℓ¹=1≤1");
    assert!(verdicts.iter().all(|v| v.status == Status::Holds));
    let csv = &out.artifact("verdicts.csv").unwrap().contents;
    assert!(csv.lines().any(|l| l == "power_bounded,holds,ℓ¹=1≤1"));
}

#[test]
fn delta_orbit_on_infinite_type_is_constant() {
    let out = run(&load("orbit_shift.json"), RunOptions::default()).unwrap();
    let TaskResult::Orbit { record } = &out.report.result else {
        panic!()
    };
    assert_eq!(record.rows.len(), 10 * 3);
    for r in &record.rows {
        let want = (r.p as f64).exp();
        assert!((r.norm.value() - want).abs() <= 1e-14 * want, "{r:?}");
        assert!((r.cesaro.value() - want).abs() <= 1e-14 * want, "{r:?}");
    }
    assert!(record.triangle_ok);
}

#[test]
fn laurent_csv_has_geometric_coefficients() {
    let out = run(&load("laurent_pole.json"), RunOptions::default()).unwrap();
    let csv = &out.artifact("laurent.csv").unwrap().contents;
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,re,im,err"));
    let mut count = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let n: i32 = f[0].parse().unwrap();
        let re: f64 = f[1].parse().unwrap();
        let want = if n >= 0 { 0.5f64.powi(n + 1) } else { 0.0 };
        assert!((re - want).abs() < 1e-12, "n = {n}: {re}");
        // 17 significant digits: d.dddddddddddddddde±x
        assert_eq!(
            f[1].split('e')
                .next()
                .unwrap()
                .trim_start_matches('-')
                .len(),
            18
        );
        count += 1;
    }
    assert_eq!(count, 17);
}

#[test]
fn exp_inverse_function_gives_m_topologizable_toeplitz() {
    let out = run(&load("exp_inverse.json"), RunOptions::default()).unwrap();
    let f = out.report.function.as_ref().unwrap();
    assert!((f.split_sum - (std::f64::consts::E - 1.0)).abs() < 1e-8);
    assert!((f.literal_sum - std::f64::consts::E).abs() < 1e-8);
    let TaskResult::Classify { verdicts } = &out.report.result else {
        panic!()
    };
    assert_eq!(verdicts[0].status, Status::Holds);
    assert!(out.artifact("function_coeffs.csv").is_some());
}

#[test]
fn cesaro_probe_writes_three_tables() {
    let out = run(&load("cesaro_geometric.json"), RunOptions::default()).unwrap();
    let TaskResult::Cesaro { probe } = &out.report.result else {
        panic!()
    };
    assert!(probe.triangle_ok);
    assert_eq!(probe.cesaro_bound.len(), 4);
    // Power bounded with ℓ¹ = 1, so every Cesàro mean stays within the
    // starting grade.
    assert!(probe
        .cesaro_bound
        .iter()
        .all(|r| r.q == Some(r.p) && r.ratio <= 1.0));
    let names: Vec<&str> = out.report.files.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["cesaro_bound.csv", "trend.csv", "differences.csv"]);
}

#[test]
fn reports_are_deterministic_and_schedule_independent() {
    for name in [
        "classify_geometric.json",
        "orbit_shift.json",
        "laurent_pole.json",
        "cesaro_geometric.json",
    ] {
        let cfg = load(name);
        let a = run(&cfg, RunOptions::default()).unwrap();
        let b = run(&cfg, RunOptions::default()).unwrap();
        let c = run(
            &cfg,
            RunOptions {
                exec: Exec::Sequential,
                timing: false,
            },
        )
        .unwrap();
        assert_eq!(a.report_json(), b.report_json(), "{name}");
        assert_eq!(a.report_json(), c.report_json(), "{name}");
        assert_eq!(a.artifacts, c.artifacts, "{name}");
        assert!(!a.report_json().contains("timing"));
    }
}

#[test]
fn echoed_config_round_trips() {
    for name in [
        "classify_geometric.json",
        "orbit_shift.json",
        "laurent_pole.json",
        "exp_inverse.json",
    ] {
        let cfg = load(name);
        let out = run(&cfg, RunOptions::default()).unwrap();
        let echoed = serde_json::to_string(&out.report.config).unwrap();
        let reparsed = JobConfig::from_json(&echoed).unwrap();
        assert_eq!(serde_json::to_string(&reparsed).unwrap(), echoed, "{name}");
        let again = run(&reparsed, RunOptions::default()).unwrap();
        assert_eq!(again.report_json(), out.report_json(), "{name}");
    }
}

#[test]
fn config_errors_are_rejected_before_running() {
    let base = fs::read_to_string(config_path("orbit_shift.json")).unwrap();
    let cases = [
        base.replace("\"schema_version\": 1", "\"schema_version\": 7"),
        base.replace("\"grades\"", "\"grade\""),
        base.replace("\"k\": 10", "\"k\": 0"),
        base.replace("\"alpha\": \"linear\"", "\"alpha\": \"quadratic\""),
        base.replace("\"finite\": [1]", "\"geometric\": { \"c\": 1, \"r\": 2 }"),
        r#"{"schema_version": 1, "task": {"classify": {"modes": ["power_bounded"]}}}"#.to_string(),
    ];
    for text in &cases {
        let err =
            JobConfig::from_json(text).and_then(|c| run(&c, RunOptions::default()).map(|_| ()));
        assert!(matches!(err, Err(CliError::Config(_))), "{text}\n{err:?}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(CliError::Config(String::new()).exit_code(), 2);
    assert_eq!(CliError::Io(String::new()).exit_code(), 3);
    assert_eq!(CliError::Verification(String::new()).exit_code(), 4);

    let out = psop(&["verify", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown verification suite `bogus`"));

    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        &dir,
        r#"{"schema_version": 1, "task": {"verify": {"suite": "laurent"}}, "extra": 1}"#,
    );
    assert_eq!(psop(&["run", &path]).status.code(), Some(2));

    // Contour through the pole at z = 2.
    let path = write_config(
        &dir,
        r#"{"schema_version": 1, "task": {"laurent": {
            "symbol": {"source": {"rational": {"num": [1.0], "den": [2.0, -1.0]}}, "r_outer": 3.0, "intended": "disc"},
            "r": 2.0, "window": [0, 4]}}}"#,
    );
    assert_eq!(psop(&["laurent", &path]).status.code(), Some(3));

    let orbit = config_path("orbit_shift.json");
    assert_eq!(
        psop(&["laurent", orbit.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let bad_threads = Command::new(env!("CARGO_BIN_EXE_psop"))
        .args(["run", orbit.to_str().unwrap()])
        .env("PSOP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn out_dir_holds_report_and_manifested_tables() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("run");
    let cfg = config_path("classify_geometric.json");
    let out = psop(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(target.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["library_version"], env!("CARGO_PKG_VERSION"));
    assert!(report.get("timing").is_none());
    let files = report["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    for f in files {
        let text = fs::read_to_string(target.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(
            text.lines().count() - 1,
            f["rows"].as_u64().unwrap() as usize
        );
    }

    let timed = psop(&["--timing", "run", cfg.to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_slice(&timed.stdout).unwrap();
    assert!(report["timing"]["seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn laurent_subcommand_prints_csv_and_verify_suite_passes() {
    let out = psop(&[
        "laurent",
        config_path("laurent_pole.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,re,im,err\n"));
    assert!(text.contains("\n0,5.0000000000000000e-1,"));

    let out = Command::new(env!("CARGO_BIN_EXE_psop"))
        .args(["verify", "laurent"])
        .env("PSOP_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("suite laurent: PASS"));
}
