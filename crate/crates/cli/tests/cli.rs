use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use uhlmann::analytic::{discrete_holonomy, PathSpec};
use uhlmann_cli::{
    run, run_fig2, run_oracle_check, run_unitary_compare, Format, Mode, SweepRequest,
};

const GOLDEN_FIG2: &str = include_str!("golden/fig2_default.csv");
const SCHEMA: &str = include_str!("../schema/report.schema.json");

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uhlmann"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("uhlmann-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn fig2_matches_golden_file() {
    let csv = run_fig2(&SweepRequest::defaults(Mode::Fig2))
        .unwrap()
        .to_csv()
        .unwrap();
    assert_eq!(csv, GOLDEN_FIG2);
}

#[test]
fn golden_rows_agree_with_transport() {
    let rows: Vec<(f64, f64)> = GOLDEN_FIG2
        .lines()
        .skip(1)
        .map(|l| {
            let (g, p) = l.split_once(',').unwrap();
            (g.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 201);
    for &k in &[0, 10, 50, 100, 200] {
        let (g, p) = rows[k];
        let spec = PathSpec::new(std::f64::consts::FRAC_PI_2, g, 1.0).unwrap();
        let oracle = discrete_holonomy(&spec, 100_000).unwrap().phase;
        assert!((oracle - p).abs() < 1e-3, "row {k}: {oracle} vs {p}");
    }
}

#[test]
fn fig2_properties() {
    let report = run_fig2(&SweepRequest::defaults(Mode::Fig2)).unwrap();
    assert!(report.pass);
    let phases: Vec<f64> = report
        .rows
        .iter()
        .map(|r| match r[1] {
            uhlmann_cli::Cell::Num(x) => x,
            _ => unreachable!(),
        })
        .collect();
    assert!((phases[0] + std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    assert!(phases[195..].iter().all(|p| p.abs() < 1e-2));
}

#[test]
fn fig2_two_hundred_points_is_fast() {
    let mut req = SweepRequest::defaults(Mode::Fig2);
    req.points = 200;
    let start = Instant::now();
    run_fig2(&req).unwrap();
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn compare_gap_nonnegative() {
    let report = run_unitary_compare(&SweepRequest::defaults(Mode::UnitaryCompare)).unwrap();
    assert_eq!(report.rows.len(), 81);
    assert!(report.pass);
    for row in &report.rows {
        let uhlmann_cli::Cell::Num(gap) = row[4] else {
            panic!()
        };
        assert!(gap >= -1e-12);
    }
}

#[test]
fn oracle_unitary_grid() {
    let mut req = SweepRequest::defaults(Mode::OracleCheck);
    req.gamma_max = 0.0;
    req.steps = 20_000;
    let report = run_oracle_check(&req).unwrap();
    assert!(report.pass);
    let col = report.column("unitary_error_rad").unwrap();
    for row in &report.rows {
        let uhlmann_cli::Cell::Num(e) = row[col] else {
            panic!()
        };
        assert!(e < 1e-12);
    }
}

#[test]
fn oracle_flags_coarse_sampling() {
    let mut req = SweepRequest::defaults(Mode::OracleCheck);
    req.steps = 100;
    let report = run_oracle_check(&req).unwrap();
    assert!(!report.pass);
}

#[test]
fn reports_are_deterministic() {
    for mode in [Mode::Fig2, Mode::UnitaryCompare, Mode::Slopes] {
        let req = SweepRequest::defaults(mode);
        let a = run(&req).unwrap().render(Format::Csv).unwrap();
        let b = run(&req).unwrap().render(Format::Csv).unwrap();
        assert_eq!(a, b);
    }
}

fn check_type(value: &Value, ty: &str) -> bool {
    match ty {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "number" => value.is_number(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        _ => false,
    }
}

fn conforms(value: &Value, schema: &Value) -> bool {
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            Value::String(t) => check_type(value, t),
            Value::Array(ts) => ts.iter().any(|t| check_type(value, t.as_str().unwrap())),
            _ => false,
        };
        if !ok {
            return false;
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            return false;
        }
    }
    if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
        if value.as_array().map_or(0, Vec::len) < min as usize {
            return false;
        }
    }
    if let Some(items) = schema.get("items") {
        if !value.as_array().unwrap().iter().all(|v| conforms(v, items)) {
            return false;
        }
    }
    if let Some(obj) = value.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            if !required
                .iter()
                .all(|k| obj.contains_key(k.as_str().unwrap()))
            {
                return false;
            }
        }
        for (key, v) in obj {
            let sub = props.and_then(|p| p.get(key));
            let ok = match (sub, schema.get("additionalProperties")) {
                (Some(s), _) => conforms(v, s),
                (None, Some(Value::Bool(false))) => false,
                (None, Some(extra)) => conforms(v, extra),
                (None, None) => true,
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

#[test]
fn json_reports_follow_schema() {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    for mode in [
        Mode::Fig2,
        Mode::UnitaryCompare,
        Mode::OracleCheck,
        Mode::Experiment,
        Mode::Slopes,
    ] {
        let mut req = SweepRequest::defaults(mode);
        if mode == Mode::OracleCheck {
            req.points = 2;
            req.steps = 5_000;
        }
        let text = run(&req).unwrap().render(Format::Json).unwrap();
        let value: Value = serde_json::from_str(&text).unwrap();
        assert!(conforms(&value, &schema), "{mode:?}");
    }
    let broken: Value = serde_json::json!({"mode": "fig2", "params": {}, "rows": []});
    assert!(!conforms(&broken, &schema));
}

#[test]
fn binary_writes_csv_and_plot_script() {
    let out = scratch("fig2.csv");
    let script = scratch("fig2.gp");
    let status = bin()
        .args(["fig2", "--points", "11", "--out"])
        .arg(&out)
        .arg("--plot-script")
        .arg(&script)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(std::fs::read_to_string(&script).unwrap().contains("plot '"));
}

#[test]
fn binary_output_is_byte_stable() {
    let run_once = || {
        bin()
            .args(["compare", "--format", "json"])
            .output()
            .unwrap()
            .stdout
    };
    let a = run_once();
    assert!(!a.is_empty());
    assert_eq!(a, run_once());
}

#[test]
fn binary_degrees_flag() {
    let out = bin()
        .args(["fig2", "--points", "2", "--degrees"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma_over_omega,phi_g_deg"));
    assert_eq!(
        lines.next(),
        Some("0.0000000000000000e0,-4.5000000000000000e1")
    );
}

#[test]
fn binary_exit_codes() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["fig2", "--points", "3"]), Some(0));
    assert_eq!(code(&["fig2", "--bogus"]), Some(3));
    assert_eq!(code(&["fig2", "--points", "1"]), Some(3));
    assert_eq!(code(&["fig2", "--phi", "4"]), Some(3));
    assert_eq!(
        code(&["fig2", "--gamma-min", "2", "--gamma-max", "1"]),
        Some(3)
    );
    assert_eq!(
        code(&["experiment", "--gamma", "0.5", "--r0", "0.7"]),
        Some(0)
    );
    // A coarse transport grid fails validation.
    assert_eq!(
        code(&["oracle", "--steps", "100", "--points", "3"]),
        Some(2)
    );
}
