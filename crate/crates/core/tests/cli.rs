use std::path::Path;
use std::process::{Command, Output};

use drbandit::harness::parse_csv;
use drbandit::policy::PolicyKind;

fn drbandit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drbandit"))
        .args(args)
        .env_remove("DRBANDIT_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_run(out: &Path, seed: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--arms",
        "bern:0.4,bern:0.9",
        "--policy",
        "etc,uniform",
        "--horizon",
        "2000,4000",
        "--trials",
        "8",
        "--seed",
        seed,
        "--etc-exploration",
        "100",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    drbandit(&args)
}

#[test]
fn oracle_reports_two_arm_gini_mixture() {
    let o = drbandit(&["oracle", "--riskmetric", "gini", "--arms", "bern:0.4,bern:0.9"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("[0.800000, 0.200000]"), "{text}");
    assert!(text.contains("value      0.250000"), "{text}");
}

#[test]
fn verify_passes() {
    let o = drbandit(&["verify"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn gap_reports_grid_size() {
    let o = drbandit(&["gap", "--eps", "0.25", "--horizon", "1e5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("grid points 5"), "{text}");
    assert!(text.contains("N(eps)"), "{text}");
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(small_run(&a, "5", &["--threads", "1"]).status.success());
    assert!(small_run(&b, "5", &["--threads", "3"]).status.success());
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
    let rows = parse_csv(&ta).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.seed == 5));
    let uniform: Vec<_> = rows.iter().filter(|r| r.policy == PolicyKind::Uniform).collect();
    assert!(uniform.iter().all(|r| (r.mean - 0.0225).abs() < 1e-9));
}

#[test]
fn different_seed_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(small_run(&a, "5", &[]).status.success());
    assert!(small_run(&b, "6", &[]).status.success());
    assert_ne!(std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg,
        "# two arms\nriskmetric = gini\narms = bern:0.4,bern:0.9\npolicy = uniform\nhorizon = 1000\ntrials = 3\nseed = 1\n",
    )
    .unwrap();
    let out = dir.path().join("r.csv");
    let o = drbandit(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--horizon",
        "500",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].seed, 9);
    assert_eq!(rows[0].checkpoint, 500);
}

#[test]
fn fit_reads_exported_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let o = drbandit(&[
        "run",
        "--policy",
        "etc",
        "--horizon",
        "1000,2000,4000,8000",
        "--trials",
        "4",
        "--etc-exploration",
        "50",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = drbandit(&["fit", "--input", csv.to_str().unwrap(), "--policy", "etc"]);
    assert!(f.status.success(), "{}", String::from_utf8_lossy(&f.stderr));
    assert!(stdout(&f).starts_with("nu"));
}

#[test]
fn json_and_svg_exports() {
    let dir = tempfile::tempdir().unwrap();
    for fmt in ["json", "svg"] {
        let out = dir.path().join(format!("r.{fmt}"));
        let o = small_run(&out, "5", &["--format", fmt]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        match fmt {
            "json" => assert!(serde_json_like(&text)),
            _ => assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>")),
        }
    }
}

fn serde_json_like(text: &str) -> bool {
    let t = text.trim();
    t.starts_with('{') && t.ends_with('}') && t.contains("\"rows\"")
}

#[test]
fn bad_input_exits_with_code_two() {
    for args in [
        vec!["oracle", "--riskmetric", "nope"],
        vec!["oracle", "--arms", "bern:1.5"],
        vec!["run", "--trials", "0"],
        vec!["run", "--horizon", "abc"],
    ] {
        let o = drbandit(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"), "{args:?}");
    }
}

#[test]
fn sweep_writes_sweep_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = drbandit(&[
        "sweep",
        "--kind",
        "gap",
        "--values",
        "0.75,0.95",
        "--policy",
        "uniform",
        "--trials",
        "2",
        "--horizon",
        "1000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let params: Vec<f64> = rows.iter().map(|r| r.sweep_param).collect();
    assert_eq!(params, vec![0.75, 0.95]);
}
