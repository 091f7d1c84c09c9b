use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use cbmkit::fixtures::{emit_fixtures, scenario, SCENARIOS};
use cbmkit::{run_text, Overrides, Report};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cbmkit"))
}

fn scenarios_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios"))
}

fn fixtures_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

fn verify(path: &Path, extra: &[&str]) -> (Output, Option<Report>) {
    let out = bin().arg("verify").arg(path).args(extra).output().expect("runs");
    let report = serde_json::from_slice(&out.stdout).ok();
    (out, report)
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn e1_sharpness_passes_all_twelve() {
    let (out, report) = verify(&scenarios_dir().join("e1_sharpness.json"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report.unwrap();
    assert_eq!(r.reports.len(), 12);
    assert_eq!((r.summary.passed, r.summary.failed, r.summary.diagnostics), (12, 0, 0));
}

#[test]
fn beta_diagnostic_never_fails_the_run() {
    let (out, report) = verify(&scenarios_dir().join("sobolev_beta_diagnostic.json"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report.unwrap();
    assert_eq!(r.summary.failed, 0);
    assert_eq!((r.summary.diagnostics, r.summary.diagnostic_failures), (1, 1));
    let d = r.reports.iter().find(|e| e.report.diagnostic).unwrap();
    assert_eq!(d.report.name, "sobolev_l_beta");
    assert!(!d.report.pass);
}

#[test]
fn zero_exponent_is_a_config_error_at_the_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"dimension": 2, "measure": {"kind": "homogeneous", "p": 0.0},
        "bodies": {"K": {"kind": "disc", "r": 1.0}},
        "checks": [{"checker": "homogeneity", "inputs": {"q": -1.0}}]}"#;
    let (out, _) = verify(&write_temp(&dir, "q0.json", text), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/measure/p"), "{}", stderr(&out));
}

#[test]
fn failed_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"dimension": 2, "grid": 512, "measure": {"kind": "homogeneous", "p": -0.3333333333333333},
        "bodies": {"K": {"kind": "disc", "r": 1.0}, "S": {"kind": "box", "lo": [-1, -1], "hi": [1, 1]}},
        "checks": [
          {"checker": "equality", "inputs": {"a": "K", "b": "S"}},
          {"checker": "equality", "inputs": {"a": "K", "b": "S"}, "mode": "diagnostic"}
        ]}"#;
    let (out, report) = verify(&write_temp(&dir, "fail.json", text), &[]);
    assert_eq!(out.status.code(), Some(1));
    let s = report.unwrap().summary;
    assert_eq!((s.passed, s.failed, s.diagnostics, s.diagnostic_failures), (0, 1, 1, 1));
}

#[test]
fn schema_errors_carry_json_pointers() {
    let cases = [
        (r#"{"dimension": 2, "measure": {"kind": "lebesgue"}, "checks": [], "extra": 1}"#, ""),
        (r#"{"dimension": 2, "measure": {"kind": "lebesgue"}, "checks": [{"checker": "bm", "mode": "loud"}]}"#, "/checks/0/mode"),
        (r#"{"dimension": 2, "measure": {"kind": "lebesgue"}, "checks": [{"checker": "bm", "tolerance": -1}]}"#, "/checks/0/tolerance"),
        (r#"{"dimension": 4, "measure": {"kind": "lebesgue"}, "checks": [{"checker": "bm"}]}"#, "/dimension"),
        (r#"{"dimension": 2, "measure": {"kind": "lebesgue"}, "bodies": {"K": {"kind": "disc", "r": "one"}}, "checks": [{"checker": "bm"}]}"#, "/bodies/K"),
        (
            r#"{"dimension": 2, "grid": 64, "measure": {"kind": "lebesgue"}, "bodies": {"K": {"kind": "disc", "r": 1}},
               "checks": [{"checker": "bm", "inputs": {"a": "K", "b": "L", "lambda": 0.5, "q": 0.5}}]}"#,
            "/checks/0/inputs/b",
        ),
        (
            r#"{"dimension": 2, "grid": 64, "measure": {"kind": "lebesgue"}, "bodies": {"K": {"kind": "disc", "r": 1}},
               "checks": [{"checker": "bm", "inputs": {"a": "K", "b": "K", "lambda": "half", "q": 0.5}}]}"#,
            "/checks/0/inputs/lambda",
        ),
        (
            r#"{"dimension": 2, "grid": 64, "measure": {"kind": "lebesgue"}, "checks": [{"checker": "nope"}]}"#,
            "/checks/0/checker",
        ),
    ];
    for (text, pointer) in cases {
        let e = run_text(text, &Overrides::default()).unwrap_err();
        assert!(e.pointer.starts_with(pointer), "{text}: got {e}");
        if !pointer.is_empty() {
            assert!(!e.pointer.is_empty(), "{text}: got {e}");
        }
    }
}

#[test]
fn reports_are_deterministic_modulo_timing() {
    let text = scenario("warped_e5.json").unwrap();
    let a = run_text(text, &Overrides::default()).unwrap();
    let b = run_text(text, &Overrides::default()).unwrap();
    assert_eq!(a.to_json_without_timing(), b.to_json_without_timing());
    assert_eq!(a.scenario_digest.len(), 64);
}

#[test]
fn summary_matches_tallies_on_every_bundled_scenario() {
    for (name, text) in SCENARIOS {
        let r = run_text(text, &Overrides::default()).unwrap();
        let passed = r.reports.iter().filter(|e| !e.report.diagnostic && e.report.pass).count();
        let failed = r.reports.iter().filter(|e| !e.report.diagnostic && !e.report.pass).count();
        let diag = r.reports.iter().filter(|e| e.report.diagnostic).count();
        assert_eq!((r.summary.passed, r.summary.failed, r.summary.diagnostics), (passed, failed, diag), "{name}");
        assert_eq!(r.summary.failed, 0, "{name}: {:?}", r.reports.iter().filter(|e| !e.report.pass).collect::<Vec<_>>());
    }
}

type Rows = BTreeMap<(String, String, usize), (f64, f64)>;

fn read_csv(text: &str) -> Rows {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("check,name,lhs,rhs,slack,pass"));
    let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut out = Rows::new();
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 6, "{l}");
        let k = seen.entry((f[0].to_string(), f[1].to_string())).or_default();
        out.insert((f[0].to_string(), f[1].to_string(), *k), (f[2].parse().unwrap(), f[3].parse().unwrap()));
        *k += 1;
    }
    out
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

#[test]
fn rerunning_reproduces_the_expected_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let written = emit_fixtures(dir.path()).unwrap();
    let scenarios: Vec<_> = written.iter().filter(|w| w.ends_with(".json") && !w.contains("schema")).collect();
    assert!(scenarios.len() >= 6);
    for (name, text) in SCENARIOS {
        assert_eq!(std::fs::read_to_string(dir.path().join(name)).unwrap(), *text);
        let stem = name.trim_end_matches(".json");
        let fresh = read_csv(&std::fs::read_to_string(dir.path().join(format!("{stem}.expected.csv"))).unwrap());
        let stored = read_csv(&std::fs::read_to_string(fixtures_dir().join(format!("{stem}.expected.csv"))).unwrap());
        assert_eq!(fresh.len(), stored.len(), "{name}");
        for (k, (l, r)) in &stored {
            let (fl, fr) = fresh[k];
            assert!(same(*l, fl) && same(*r, fr), "{name} {k:?}: stored {l} {r}, fresh {fl} {fr}");
        }
    }
}

#[test]
fn csv_and_out_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let o = bin()
        .args(["verify"])
        .arg(scenarios_dir().join("onedim.json"))
        .arg("--out")
        .arg(&out)
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let r: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = read_csv(&std::fs::read_to_string(&csv).unwrap());
    assert_eq!(rows.len(), r.reports.len());
    let (l, rr) = rows[&("interval".to_string(), "ocbm_1d".to_string(), 0)];
    assert!((l - 0.2).abs() < 1e-12 && (rr - 0.2).abs() < 1e-12);
}

#[test]
fn overrides_are_recorded_and_applied() {
    let text = scenario("e1_sharpness.json").unwrap();
    let o = Overrides { grid: Some(512), oracle_h: Some(1.0 / 64.0), ..Overrides::default() };
    let r = run_text(text, &o).unwrap();
    assert_eq!(r.overrides["grid"], 512);
    assert_eq!(r.overrides["oracle_h"], 1.0 / 64.0);
    assert_eq!(r.summary.failed, 0);
    let bad = Overrides { oracle_h: Some(10.0), ..Overrides::default() };
    assert_eq!(run_text(text, &bad).unwrap_err().pointer, "/oracle/h");
}

#[test]
fn mask_dump_writes_pgm_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"dimension": 2, "grid": 256, "measure": {"kind": "homogeneous", "p": -0.3333333333333333},
        "bodies": {"K": {"kind": "disc", "r": 1.0}, "S": {"kind": "box", "lo": [-2.5, -0.5], "hi": [2.5, 0.5]}},
        "oracle": {"window": 4.0, "h": 0.03125, "refine_depth": 3},
        "checks": [{"checker": "cbm", "inputs": {"a": "K", "b": "S", "lambda": 0.5, "q": -1.0, "path": "voxel"}}]}"#;
    let p = write_temp(&dir, "vox.json", text);
    let masks = dir.path().join("masks");
    let (out, report) = verify(&p, &[&format!("--dump-masks={}", masks.display())]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(report.unwrap().reports[0].report.witness.contains("voxel"));
    for tag in ["a", "b", "sum"] {
        let bytes = std::fs::read(masks.join(format!("00_cbm_{tag}.pgm"))).unwrap();
        assert!(bytes.starts_with(b"P5"));
    }
}

#[test]
fn profile_subcommand_runs_only_profile_checks() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"dimension": 2, "grid": 512, "measure": {"kind": "homogeneous", "p": -0.3333333333333333},
        "bodies": {"K": {"kind": "disc", "r": 1.0}},
        "checks": [
          {"checker": "homogeneity", "inputs": {"q": -1.0}},
          {"checker": "profile", "inputs": {"k": "K", "v": 6.283185307179586, "degree": 1, "max_evals": 300}}
        ]}"#;
    let p = write_temp(&dir, "prof.json", text);
    let o = bin().arg("profile").arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: Report = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.reports.len(), 1);
    assert_eq!(r.reports[0].checker, "profile");
}

#[test]
fn missing_file_exits_two() {
    let o = bin().arg("verify").arg("/nonexistent/scenario.json").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
