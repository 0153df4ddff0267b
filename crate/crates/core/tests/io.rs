use complete_minimal::config::{parse_config, PrescriptionConfig, RunConfig};
use complete_minimal::domain::{sample_grid, Region, TowerKind};
use complete_minimal::driver::StageReport;
use complete_minimal::export::{export_mesh, export_reports, export_scalar_csv, fmt_sig, parse_reports, REPORT_COLUMNS};
use complete_minimal::weierstrass::{integrate_immersion, WeierstrassTriple};
use complete_minimal::laurent::Laurent;
use complete_minimal::{Complex64, Error};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn config_error(text: &str) -> (String, String) {
    match parse_config(text) {
        Err(Error::Config { path, message }) => (path, message),
        other => panic!("expected a config error, got {other:?}"),
    }
}

const MINIMAL: &str = r#"{"spec_version": 1, "domain": {"tower": "disk-tower"}, "prescription": {"h": "re-z"}, "flux": [0, 0, 0]}"#;

#[test]
fn minimal_config_fills_defaults() {
    let cfg = parse_config(MINIMAL).unwrap();
    assert_eq!(cfg.domain.tower, TowerKind::DiskTower);
    assert_eq!(cfg.domain.stages, 3);
    assert_eq!(cfg.prescription, PrescriptionConfig::ReZ);
    assert_eq!(cfg.output.dir, "out");
    assert_eq!(cfg.tower().unwrap().len(), 3);
}

#[test]
fn malformed_text_reports_line_and_column() {
    let (_, message) = config_error("{\n  \"spec_version\": 1,\n  \"domain\": \n}");
    assert!(message.contains("line 4"), "{message}");
    assert!(message.contains("column"), "{message}");
}

#[test]
fn type_errors_name_the_field() {
    let text = MINIMAL.replace(r#""flux""#, r#""solver": {"degree": "many"}, "flux""#);
    let (path, _) = config_error(&text);
    assert_eq!(path, "solver.degree");
}

#[test]
fn unknown_fields_are_rejected() {
    let (path, message) = config_error(&MINIMAL.replace(r#""flux""#, r#""colour": 1, "flux""#));
    assert!(message.contains("colour"), "{path}: {message}");
    let tagged = MINIMAL.replace(r#"{"h": "re-z"}"#, r#"{"h": "custom", "laurent": {"min_power": 0, "coeffs": [[1, 0]]}, "extra": 2}"#);
    let (_, message) = config_error(&tagged);
    assert!(message.contains("extra"), "{message}");
}

#[test]
fn flux_must_match_the_prescribed_height() {
    let annulus = |flux: &str| {
        format!(r#"{{"spec_version": 1, "domain": {{"tower": "annulus-tower"}}, "prescription": {{"h": "log-abs"}}, "flux": {flux}}}"#)
    };
    let (path, message) = config_error(&annulus("[1, 0, 0]"));
    assert_eq!(path, "flux");
    assert!(message.contains("6.28"), "{message}");
    let ok = parse_config(&annulus(&format!("[0.5, -1, {}]", 2.0 * std::f64::consts::PI))).unwrap();
    assert_eq!(ok.flux[0], 0.5);
    let (path, _) = config_error(&MINIMAL.replace("[0, 0, 0]", "[0, 1, 0]"));
    assert_eq!(path, "flux");
}

#[test]
fn semantic_checks_point_at_their_fields() {
    let cases = [
        (MINIMAL.replace(r#""spec_version": 1"#, r#""spec_version": 7"#), "spec_version"),
        (MINIMAL.replace(r#""disk-tower"}"#, r#""disk-tower", "stages": 0}"#), "domain.stages"),
        (MINIMAL.replace(r#""re-z""#, r#""log-abs""#).replace("[0, 0, 0]", "[0, 0, 6.283185307179586]"), "flux"),
        (MINIMAL.replace(r#""flux""#, r#""solver": {"epsilon": 0}, "flux""#), "solver.epsilon"),
        (MINIMAL.replace(r#""flux""#, r#""grid": {"u": [1, 8]}, "flux""#), "grid.u"),
    ];
    for (text, expected) in cases {
        assert_eq!(config_error(&text).0, expected, "{text}");
    }
    let (path, _) = config_error(&MINIMAL.replace(r#""re-z""#, r#""log-abs""#));
    assert!(path == "prescription.h" || path == "flux", "{path}");
}

#[test]
fn config_round_trips_through_json() {
    let mut cfg = parse_config(MINIMAL).unwrap();
    cfg.solver.degree = 48;
    cfg.grid.v = [96, 384];
    let back = parse_config(&cfg.to_json().unwrap()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.stage_settings().degree, 48);
    let _: RunConfig = back;
}

fn flat_field(region: Region, nr: usize, na: usize) -> complete_minimal::weierstrass::ImmersionField {
    let grid = sample_grid(&region, nr, na).unwrap();
    let t = WeierstrassTriple::from_laurent(
        region,
        [Laurent::constant(c(1.0, 0.0)), Laurent::constant(c(0.0, -1.0)), Laurent::constant(c(0.5, 0.0))],
    );
    let base = if region.is_disk() { c(0.0, 0.0) } else { c(region.inner_radius(), 0.0) };
    integrate_immersion(&t, base, &grid, None).unwrap()
}

#[test]
fn annulus_mesh_counts() {
    let mesh = export_mesh(&flat_field(Region::annulus(0.5, 1.0).unwrap(), 4, 8)).unwrap();
    assert_eq!(mesh.lines().filter(|l| l.starts_with("v ")).count(), 32);
    let faces: Vec<&str> = mesh.lines().filter(|l| l.starts_with("f ")).collect();
    assert_eq!(faces.len(), 24);
    assert!(faces.iter().all(|f| f.split_whitespace().count() == 5));
}

#[test]
fn disk_mesh_has_a_center_fan() {
    let field = flat_field(Region::disk(1.0).unwrap(), 4, 8);
    let mesh = export_mesh(&field).unwrap();
    let faces: Vec<&str> = mesh.lines().filter(|l| l.starts_with("f ")).collect();
    let tris = faces.iter().filter(|f| f.split_whitespace().count() == 4).count();
    assert_eq!(tris, 8);
    assert_eq!(faces.len() - tris, 2 * 8);
    // every face index refers to an existing vertex
    let nv = field.grid.len();
    for f in faces {
        for k in f.split_whitespace().skip(1) {
            let k: usize = k.parse().unwrap();
            assert!((1..=nv).contains(&k));
        }
    }
}

#[test]
fn flat_mesh_is_planar_at_the_prescribed_height() {
    let field = flat_field(Region::disk(1.0).unwrap(), 6, 16);
    let mesh = export_mesh(&field).unwrap();
    for (line, node) in mesh.lines().filter(|l| l.starts_with("v ")).zip(field.grid.nodes()) {
        let v: Vec<f64> = line.split_whitespace().skip(1).map(|s| s.parse().unwrap()).collect();
        assert!((v[2] - 0.5 * node.z.re).abs() < 1e-8);
    }
}

#[test]
fn non_finite_coordinates_name_the_node() {
    let mut field = flat_field(Region::disk(1.0).unwrap(), 4, 8);
    field.values[7][1] = f64::NAN;
    match export_mesh(&field) {
        Err(Error::Export(msg)) => assert!(msg.contains("node 7"), "{msg}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn scalar_csv_has_one_row_per_node() {
    let field = flat_field(Region::annulus(0.5, 1.0).unwrap(), 4, 8);
    let h = field.third();
    let text = export_scalar_csv(&field, &h, "h").unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("node,re,im,h"));
    assert_eq!(lines.count(), 32);
    assert!(export_scalar_csv(&field, &h[..3], "h").is_err());
}

#[test]
fn report_tables() {
    let (csv, jsonl) = export_reports(&[]).unwrap();
    assert_eq!(csv.trim_end(), REPORT_COLUMNS.join(","));
    assert!(jsonl.is_empty());
    let reports: Vec<StageReport> = (1..=3)
        .map(|n| StageReport {
            stage: n,
            sup_change_target: 1.0 / (n * n) as f64,
            distance_target: (n * n) as f64,
            distance: 1.5 * (n * n) as f64,
            ..Default::default()
        })
        .collect();
    let (csv, jsonl) = export_reports(&reports).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][2], "0.25");
    assert_eq!(rows[2][4], "9");
    assert_eq!(rows[2][2], fmt_sig(1.0 / 9.0));
    assert_eq!(parse_reports(&jsonl).unwrap(), reports);
}

#[test]
fn significant_digit_formatting() {
    assert_eq!(fmt_sig(0.0), "0");
    assert_eq!(fmt_sig(0.25), "0.25");
    assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333");
    assert_eq!(fmt_sig(-2.5e-7), "-2.5e-7");
    assert_eq!(fmt_sig(82944.0), "82944");
}
