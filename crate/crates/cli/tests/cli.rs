use std::path::{Path, PathBuf};
use std::process::Command;

const ACCEPT: &str = r#"{
  "spectrum": {"eigenphases": [-0.2, -0.05, 0.15], "overlaps_sq": [0.5, 0.3, 0.2]},
  "inputs": {"delta_fail": 0.1, "eta": 0.5, "delta_true": 0.1, "epsilon": 0.01, "alpha": 0.0}
}"#;

fn gsee(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gsee")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run_mode(cfg: &Path, out: &Path, mode: &str, extra: &[&str]) -> i32 {
    let mut args = vec![
        "--config",
        cfg.to_str().unwrap(),
        "--mode",
        mode,
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let (code, err) = gsee(&args);
    assert!(code == 0 || code == 3, "{mode}: exit {code}: {err}");
    code
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "config-echo.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn plan_infeasible_exits_2() {
    let t = tempfile::tempdir().unwrap();
    let bad = ACCEPT.replace("\"epsilon\": 0.01", "\"epsilon\": 0.5");
    let cfg = write_config(t.path(), "c.json", &bad);
    let (code, err) = gsee(&[
        "--config",
        cfg.to_str().unwrap(),
        "--mode",
        "plan",
        "--out",
        t.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn missing_config_exits_1() {
    let t = tempfile::tempdir().unwrap();
    let (code, _) = gsee(&[
        "--config",
        t.path().join("none.json").to_str().unwrap(),
        "--mode",
        "plan",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn unknown_key_exits_1() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(t.path(), "c.json", r#"{"mode": "plan", "bogus": 1}"#);
    let (code, _) = gsee(&["--config", cfg.to_str().unwrap(), "--out", t.path().to_str().unwrap()]);
    assert_eq!(code, 1);
}

#[test]
fn gap_mismatch_exits_2() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(t.path(), "c.json", &ACCEPT.replace("-0.05", "-0.15"));
    let (code, err) = gsee(&[
        "--config",
        cfg.to_str().unwrap(),
        "--mode",
        "spectrum",
        "--out",
        t.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn one_plan_row_per_alpha() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(t.path(), "c.json", ACCEPT);
    let out = t.path().join("o");
    run_mode(&cfg, &out, "plan", &["--alpha-list", "0,0.25,0.5,0.75,1"]);
    let csv = std::fs::read_to_string(out.join("plans.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().next().unwrap().starts_with("alpha,policy,"));
    assert!(std::fs::read_to_string(out.join("plan.kv")).unwrap().contains("q = 13"));
}

#[test]
fn every_mode_is_byte_identical_on_rerun() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(t.path(), "c.json", ACCEPT);
    let qpe = write_config(
        t.path(),
        "q.json",
        r#"{"spectrum": {"eigenphases": [0.1234], "overlaps_sq": [1.0]},
            "inputs": {"delta_fail": 0.01, "eta": 1.0, "delta_true": 0.1, "epsilon": 0.01}}"#,
    );
    let bounds = write_config(
        t.path(),
        "b.json",
        r#"{"bounds": {"etas": [0.5], "deltas": [0.01], "gaps": [0.1], "ms": [1],
            "policies": ["report"], "stress": false, "seed": 5}}"#,
    );
    let cases: [(&Path, &str, &[&str]); 6] = [
        (&cfg, "plan", &[]),
        (&cfg, "spectrum", &[]),
        (&cfg, "gsee", &["--runs", "2", "--seed", "9"]),
        (&cfg, "sweep", &["--runs", "1", "--alpha-list", "0.5,1"]),
        (&qpe, "qpe", &["--runs", "20"]),
        (&bounds, "bounds", &[]),
    ];
    for (c, mode, extra) in cases {
        let a = t.path().join(format!("{mode}-a"));
        let b = t.path().join(format!("{mode}-b"));
        let single = t.path().join(format!("{mode}-1"));
        run_mode(c, &a, mode, extra);
        run_mode(c, &b, mode, extra);
        let mut one = extra.to_vec();
        one.extend_from_slice(&["--threads", "1"]);
        run_mode(c, &single, mode, &one);
        let (da, db, d1) = (dir_bytes(&a), dir_bytes(&b), dir_bytes(&single));
        assert!(!da.is_empty());
        assert_eq!(da, db, "{mode} differs between reruns");
        assert_eq!(da, d1, "{mode} differs with one thread");
    }
}
