use std::path::Path;
use std::process::Command;

use serde_json::Value;
use whh_cli::config::ParamValues;
use whh_cli::plots::{emit_plot_data, point_dir, DISTANCE_VS_N, ESSENTIAL_RANGE, SINGULAR_VALUES};
use whh_cli::{run, AnalysisConfig};
use whh_core::classify::{Property, Tri};

const WHH: &str = env!("CARGO_BIN_EXE_whh");

fn small(symbol: &str) -> AnalysisConfig {
    let mut c = AnalysisConfig::new(symbol);
    c.grid_size = 512;
    c.max_grid_size = 1 << 14;
    c.schedule = vec![16, 32, 64];
    c
}

fn phi_p(values: Vec<f64>) -> AnalysisConfig {
    let mut c = small("(2+sin(x))*exp(i*a*x)");
    c.params.insert("a".into(), ParamValues::Sweep(values));
    c
}

fn without_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("total_ms");
    for p in v["points"].as_array_mut().unwrap() {
        p.as_object_mut().unwrap().remove("timings");
    }
    v
}

fn report_json(cfg: &AnalysisConfig) -> Value {
    without_timings(serde_json::from_str(&run(cfg).unwrap().to_json().unwrap()).unwrap())
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn invalid_grid_size_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"symbol": "1", "grid_size": 100}"#).unwrap();
    let out = Command::new(WHH).arg("analyze").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid_size"));
}

#[test]
fn unknown_parameter_exits_with_validation_code() {
    let out = Command::new(WHH)
        .args(["classify", "--symbol", "exp(i*a*x)", "--param", "b=1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn all_points_failing_exits_with_pipeline_code() {
    let out = Command::new(WHH)
        .args(["classify", "--symbol", "1/(x-x)", "--grid-size", "256", "--schedule", "8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("error"));
}

#[test]
fn constant_symbol_is_regular_with_zero_distances() {
    let report = run(&small("1")).unwrap();
    let r = report.points[0].result.as_ref().unwrap();
    for p in Property::ALL {
        assert_eq!(r.verdict.value(p), Tri::Yes, "{p}");
    }
    for e in &r.estimates {
        assert!(e.lower_bounds.iter().all(|b| b.value.abs() < 1e-12), "{:?}", e.class);
    }
    assert!(r.certificates.iter().all(|c| c.verified));
    assert_eq!(r.certified_by[&Property::Invertible], vec![0]);
}

#[test]
fn reports_are_deterministic() {
    let cfg = phi_p(vec![-0.5, 0.0, 0.5]);
    assert_eq!(report_json(&cfg), report_json(&cfg));
}

#[test]
fn cache_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = phi_p(vec![0.0, 0.5]);
    let uncached = report_json(&cfg);
    cfg.cache_dir = Some(dir.path().to_path_buf());
    let cold = report_json(&cfg);
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
    let warm = report_json(&cfg);
    let strip = |mut v: Value| {
        v["config"].as_object_mut().unwrap().remove("cache_dir");
        v
    };
    assert_eq!(cold, warm);
    assert_eq!(strip(cold), uncached);
}

#[test]
fn sweep_preserves_point_order_and_bindings() {
    let report = run(&phi_p(vec![0.5, -0.5, 0.0])).unwrap();
    let alphas: Vec<f64> = report.points.iter().map(|p| p.bindings["a"]).collect();
    assert_eq!(alphas, vec![0.5, -0.5, 0.0]);
    assert_eq!(report.failed_points(), 0);
    let zero = report.points[2].result.as_ref().unwrap();
    assert_eq!(zero.verdict.value(Property::Invertible), Tri::Yes);
    let plus = report.points[0].result.as_ref().unwrap();
    let minus = report.points[1].result.as_ref().unwrap();
    assert_ne!(plus.verdict.value(Property::RightInvertible), Tri::Yes);
    assert_ne!(minus.verdict.value(Property::LeftInvertible), Tri::Yes);
}

#[test]
fn plot_data_has_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&phi_p(vec![0.5])).unwrap();
    let dirs = emit_plot_data(&report, dir.path()).unwrap();
    assert_eq!(dirs, vec![point_dir(dir.path(), 0)]);

    let (header, rows) = csv_rows(&dirs[0].join(ESSENTIAL_RANGE));
    assert_eq!(header, ["re", "im"]);
    assert!(!rows.is_empty());
    for row in &rows {
        let (re, im): (f64, f64) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        let modulus = re.hypot(im);
        assert!((1.0 - 1e-9..=3.0 + 1e-9).contains(&modulus), "{modulus}");
    }

    let (header, rows) = csv_rows(&dirs[0].join(DISTANCE_VS_N));
    assert_eq!(header, ["class", "N", "lower_bound"]);
    for class in ["hinf_plus", "hinf_minus"] {
        let values: Vec<f64> = rows.iter().filter(|r| r[0] == class).map(|r| r[2].parse().unwrap()).collect();
        assert!(!values.is_empty(), "{class}");
        assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{class}: {values:?}");
    }

    let (header, rows) = csv_rows(&dirs[0].join(SINGULAR_VALUES));
    assert_eq!(header, ["kind", "N", "index", "sigma"]);
    assert!(rows.iter().any(|r| r[0] == "toeplitz_plus_hankel"));
    assert!(rows.iter().any(|r| r[0] == "toeplitz_psi"));
}

#[test]
fn disabled_lab_and_failed_points_give_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small("1");
    cfg.operator_lab = false;
    let dirs = emit_plot_data(&run(&cfg).unwrap(), dir.path()).unwrap();
    let (header, rows) = csv_rows(&dirs[0].join(SINGULAR_VALUES));
    assert_eq!(header.len(), 4);
    assert!(rows.is_empty());

    let failed = run(&small("1/(x-x)")).unwrap();
    assert_eq!(failed.failed_points(), 1);
    let dirs = emit_plot_data(&failed, &dir.path().join("failed")).unwrap();
    for name in [ESSENTIAL_RANGE, DISTANCE_VS_N, SINGULAR_VALUES] {
        let (header, rows) = csv_rows(&dirs[0].join(name));
        assert!(!header.is_empty() && rows.is_empty(), "{name}");
    }
}

#[test]
fn analyze_then_plots_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small("(x-i)/(x+i)");
    cfg.out_dir = dir.path().join("out");
    let path = dir.path().join("c.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = Command::new(WHH).arg("analyze").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = cfg.out_dir.join("report.json");
    let first = std::fs::read_to_string(point_dir(&cfg.out_dir, 0).join(DISTANCE_VS_N)).unwrap();

    let again = dir.path().join("again");
    let out = Command::new(WHH).arg("plots").arg(&report).arg("--out").arg(&again).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(point_dir(&again, 0).join(DISTANCE_VS_N)).unwrap(), first);

    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let verdict = &v["points"][0]["result"]["verdict"];
    assert_eq!(verdict["left_invertible"]["value"], "YES");
    assert_eq!(verdict["right_invertible"]["value"], "NO");
}
