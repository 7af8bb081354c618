use std::fs;
use std::path::Path;
use std::process::Command;

use qbatt::cli::{csv, run_with, svg};
use qbatt::scenarios::{Axis, Grid, SweepResult};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with(std::iter::once("qbatt").chain(args.iter().copied()), None, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(String::from)
        .collect()
}

#[test]
fn fig1_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run(&["fig1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("fig1: 404 rows"));
    let rows = data_rows(&dir.path().join("fig1.csv"));
    assert_eq!(rows.len(), 101 * 4);
    let svg = fs::read_to_string(dir.path().join("fig1.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains(r#"viewBox="0 0 800 600""#));
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert_eq!(svg.matches("legend-entry").count(), 4);
    for fam in ["povm[bit-flip]", "povm[amplitude-damping]", "povm[dephasing]", "npovm1"] {
        assert!(svg.contains(&format!(">{fam}</text>")), "{fam}");
    }
    assert!(svg.contains("class=\"xtick\"") && svg.contains("class=\"ytick\""));
    assert!(svg.contains("class=\"title\""));
}

#[test]
fn fig2_heatmap_on_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"axes": [{"axis": "k", "start": 0, "stop": 1, "points": 6},
                     {"axis": "l", "start": -1, "stop": 1, "points": 5}]}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let (code, _, err) = run(&["fig2", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(data_rows(&out.join("fig2.csv")).len(), 6 * 5 * 2);
    let svg = fs::read_to_string(out.join("fig2.svg")).unwrap();
    assert!(svg.contains("class=\"heatmap\""));
    assert!(svg.contains("gap of povm"));
    assert_eq!(svg.matches("class=\"colorbar\"").count(), 20);
    // white sits in the middle of the bar: the scale is centred on zero
    assert!(svg.contains("#ffffff\"/>") || svg.contains("fill=\"#ffffff\""));
}

#[test]
fn custom_config_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(
        &cfg,
        r#"{"noise": {"kind": "bit-flip"}, "axes": [{"axis": "k", "start": 0, "stop": 1, "points": 101}]}"#,
    )
    .unwrap();
    let (code, _, err) = run(&["custom", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, 0, "{err}");
    let rows = data_rows(&dir.path().join("custom.csv"));
    assert_eq!(rows.len(), 101 * 2);
    assert!(!dir.path().join("custom.svg").exists());
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let (code, _, _) = run(&["accessible", "--k", "0.3", "--restarts", "8", "--workers", "2", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    for f in ["accessible.csv", "accessible.svg"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn csv_round_trip_from_cli() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&["fig3", "--format", "csv", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    let (meta, rows) = csv::parse(&text).unwrap();
    assert!(meta.iter().any(|(k, v)| k == "seed" && v == "7"));
    assert!(meta.iter().any(|(k, _)| k == "grids"));
    assert!(meta.iter().any(|(k, _)| k == "params"));
    assert!(meta.iter().any(|(k, _)| k == "version"));
    assert_eq!(rows.len(), 602);
    let again = SweepResult {
        name: "fig3".into(),
        axes: vec![],
        series: vec![],
        rows: rows.clone(),
        metadata: meta,
    };
    assert_eq!(csv::render(&again).unwrap(), text);
}

#[test]
fn config_errors_exit_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = out.to_str().unwrap();
    let bad_json = dir.path().join("bad.json");
    fs::write(&bad_json, r#"{"nope": 1}"#).unwrap();
    let bad_family = dir.path().join("fam.json");
    fs::write(&bad_family, r#"{"families": ["npovm2"]}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["fig9", "--out", o],
        vec!["fig1", "--bogus", "--out", o],
        vec!["fig1", "--k", "1.5", "--out", o],
        vec!["fig1", "--format", "png", "--out", o],
        vec!["custom", "--config", bad_json.to_str().unwrap(), "--out", o],
        vec!["custom", "--config", bad_family.to_str().unwrap(), "--out", o],
        vec!["custom", "--config", "/does/not/exist.json", "--out", o],
        vec!["fig1", "--workers", "0", "--out", o],
    ];
    for c in cases {
        let (code, _, err) = run(&c);
        assert_eq!(code, 2, "{c:?}: {err}");
        assert!(!err.is_empty());
        assert!(!out.exists(), "{c:?} wrote output");
    }
}

#[test]
fn unwritable_output_path_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    fs::write(&file, "x").unwrap();
    let (code, _, err) = run(&["fig3", "--out", file.join("sub").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("plain-file"));
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let mut out = Vec::new();
    let code = run_with(
        ["qbatt", "fig3", "--format", "csv", "--out", dir.path().to_str().unwrap()],
        Some("41"),
        &mut out,
        &mut Vec::new(),
    );
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    assert!(text.contains("# seed: 41\n"));
}

#[test]
fn empty_plot_request_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.svg");
    let empty = SweepResult {
        name: "empty".into(),
        axes: vec![Grid { axis: Axis::K, values: vec![0.0] }],
        series: vec![],
        rows: vec![],
        metadata: vec![],
    };
    assert!(svg::emit_svg(&empty, &path, svg::PlotKind::Lines).is_err());
    assert!(svg::emit_svg(&empty, &path, svg::PlotKind::Heatmap).is_err());
    assert!(!path.exists());
    let one_axis = qbatt::scenarios::run_fig3_appendix().unwrap();
    assert!(svg::emit_svg(&one_axis, &path, svg::PlotKind::Heatmap).is_err());
    assert!(!path.exists());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_qbatt");
    let dir = tempfile::tempdir().unwrap();
    let ok = Command::new(bin)
        .args(["appendixD", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("spectra[ae-vs-ax] gap: min 0"));
    assert!(dir.path().join("appendixD.csv").exists());
    assert!(dir.path().join("appendixD.svg").exists());
    let bad = Command::new(bin).args(["nonsense"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("--restarts"));
}
