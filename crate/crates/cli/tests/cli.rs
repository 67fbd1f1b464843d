use std::path::Path;
use std::process::{Command, Output};

use hfv_core::csr_model::{generate_synthetic, SyntheticSpec};
use hfv_core::csr_parser::{parse_full, BenchReport};
use hfv_core::render::DiagramSpec;

fn hfv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfv"))
        .args(args)
        .env_remove("HFV_PORT")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = hfv(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn gen(dir: &Path) {
    ok(&[
        "gen", "--submodels", "3", "--nodes-per", "4", "--timesteps", "2", "--seed", "42", "--out",
        dir.to_str().unwrap(),
    ]);
}

#[test]
fn gen_matches_library_generator() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    gen(&d);
    let expected = generate_synthetic(&SyntheticSpec::new(3, 4, 2, 42)).unwrap();
    assert_eq!(parse_full(&d).unwrap(), expected);
}

#[test]
fn gen_then_diagram_svg_and_json() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    gen(&d);
    let svg_path = tmp.path().join("x.svg");
    ok(&["diagram", d.to_str().unwrap(), "--timestep", "0", "--layout", "circular", "--out", svg_path.to_str().unwrap()]);
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<rect").count(), 3);

    let json_path = tmp.path().join("out/x.json");
    ok(&["diagram", d.to_str().unwrap(), "--timestep", "1", "--layout", "layered", "--group", "G=SUB01,SUB02",
        "--temp-unit", "C", "--out", json_path.to_str().unwrap()]);
    let spec: DiagramSpec = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(spec.boxes.len(), 2);
    assert_eq!(spec.timestep, 1);
    assert!(spec.boxes[0].label_lines[1].ends_with("°C"));
}

#[test]
fn diagram_with_project_caches_and_reuses() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    let p = tmp.path().join("proj");
    gen(&d);
    let run = |out: &str| {
        ok(&["diagram", d.to_str().unwrap(), "--timestep", "1", "--project", p.to_str().unwrap(), "--out",
            tmp.path().join(out).to_str().unwrap()]);
        std::fs::read(tmp.path().join(out)).unwrap()
    };
    let first = run("a.svg");
    assert!(p.join("temps_1.bin").exists());
    assert_eq!(run("b.svg"), first);

    ok(&["cache", "clear", p.to_str().unwrap()]);
    assert!(!p.join("manifest.json").exists());
}

#[test]
fn bench_reports_requested_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    gen(&d);
    let r = tmp.path().join("r.json");
    ok(&["bench", d.to_str().unwrap(), "--runs", "5", "--out", r.to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r).unwrap()).unwrap();
    assert_eq!(report["runs"], 5);
    let records = report["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["n"], 24);
    let _: BenchReport = serde_json::from_value(report).unwrap();
}

#[test]
fn inspect_prints_table() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    gen(&d);
    let out = ok(&["inspect", d.to_str().unwrap(), "--validate"]);
    assert!(out.contains("submodels  3"));
    assert!(out.contains("SUB03"));
    assert!(out.trim_end().ends_with("valid"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [&["frobnicate"][..], &["gen", "--bogus"][..], &["diagram"][..]] {
        let out = hfv(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert_eq!(hfv(&["--help"]).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_1_with_one_line() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    gen(&d);
    let cases: Vec<Vec<String>> = vec![
        vec!["inspect".into(), tmp.path().join("missing").display().to_string()],
        vec!["cache".into(), "clear".into(), tmp.path().display().to_string()],
        vec!["diagram".into(), d.display().to_string(), "--timestep".into(), "9".into(), "--out".into(), "x.svg".into()],
        vec!["diagram".into(), d.display().to_string(), "--include".into(), "NOPE".into(), "--out".into(), "x.svg".into()],
        vec!["bench".into(), d.display().to_string(), "--runs".into(), "0".into()],
    ];
    for args in cases {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = hfv(&argv);
        assert_eq!(out.status.code(), Some(1), "{argv:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error: "), "{err}");
    }
}
