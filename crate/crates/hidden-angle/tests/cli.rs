use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_hidden-angle");

fn run_with(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("HIDDEN_ANGLE_HBAR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_with(args, &[])
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn assert_schema(name: &str, instance: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let result = compiled.validate(instance).map_err(|errors| {
        errors
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect::<Vec<_>>()
    });
    if let Err(msgs) = result {
        panic!("{name} output violates schema: {msgs:?}");
    }
}

fn f(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("{key} missing in {v}"))
}

fn write(dir: &TempDir, name: &str, contents: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, contents).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn state_report_oscillator() {
    let out = run(&["state-report", "--family", "ho", "--n", "1,1,1"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("state-report", &v);
    assert!((f(&v, "cos_saturation") - 1.0 / 9.0).abs() < 1e-12);
    assert_eq!(v["route"], "closed_form");
    assert_eq!(v["aggregated_holds"], true);
    assert!(out.stderr.is_empty());
}

#[test]
fn state_report_well_rejects_zero() {
    let out = run(&[
        "state-report",
        "--family",
        "well",
        "--n",
        "0,1,1",
        "--L",
        "1",
    ]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("quantum number"), "{err}");
}

#[test]
fn state_report_gaussian_is_equality() {
    let out = run(&["state-report", "--family", "gauss", "--sigma", "1,1,1"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("state-report", &v);
    let scale = f(&v, "norm_p2") * f(&v, "norm_r2");
    assert!(f(&v, "slack").abs() < 1e-10 * scale);
    assert_eq!(v["saturation_exceeds_unity"], false);
    assert!(v["quantum_numbers"][0].is_null());
}

#[test]
fn state_report_anisotropic_well() {
    let out = run(&[
        "state-report",
        "--family",
        "well",
        "--n",
        "1,1,2",
        "--L",
        "1,2,1",
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let var_x = |n: f64, l: f64| l * l * (n * n * PI * PI - 6.0) / (12.0 * n * n * PI * PI);
    let expected = [var_x(1.0, 1.0), var_x(1.0, 2.0), var_x(2.0, 1.0)];
    for (i, e) in expected.iter().enumerate() {
        let got = v["position_variances"][i].as_f64().unwrap();
        assert!((got - e).abs() < 1e-12 * e, "axis {i}: {got} vs {e}");
    }
}

#[test]
fn numeric_route_matches_closed_form() {
    let closed = stdout_json(&run(&[
        "state-report",
        "--family",
        "ho",
        "--n",
        "0,3,7",
        "--m",
        "2",
        "--omega",
        "0.5",
    ]));
    let numeric = stdout_json(&run(&[
        "state-report",
        "--family",
        "ho",
        "--n",
        "0,3,7",
        "--m",
        "2",
        "--omega",
        "0.5",
        "--numeric",
    ]));
    assert_eq!(numeric["route"], "quadrature");
    for key in ["position_variances", "momentum_variances"] {
        for i in 0..3 {
            let (a, b) = (
                closed[key][i].as_f64().unwrap(),
                numeric[key][i].as_f64().unwrap(),
            );
            assert!((a - b).abs() < 1e-8 * a, "{key}[{i}]: {a} vs {b}");
        }
    }
}

#[test]
fn state_report_from_tables() {
    let dir = TempDir::new().unwrap();
    // Oscillator ground state, m = ω = ħ = 1.
    let mut text = String::from("# x psi\n");
    for i in 0..=2000 {
        let x = -12.0 + 24.0 * i as f64 / 2000.0;
        text += &format!("{x} {}\n", (-x * x / 2.0).exp());
    }
    let p = write(&dir, "ground.txt", &text);
    let out = run(&["state-report", "--family", "table", "--file", &p]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_schema("state-report", &v);
    assert_eq!(v["route"], "quadrature");
    for i in 0..3 {
        assert!((v["position_variances"][i].as_f64().unwrap() - 0.5).abs() < 1e-4);
        assert!((v["momentum_variances"][i].as_f64().unwrap() - 0.5).abs() < 1e-4);
    }
}

#[test]
fn state_report_rejects_bad_arguments() {
    for args in [
        vec!["state-report", "--family", "ho"],
        vec!["state-report", "--family", "ho", "--n", "1,2"],
        vec!["state-report", "--family", "gauss", "--sigma", "-1"],
        vec!["state-report", "--family", "gauss", "--n", "1"],
        vec!["state-report", "--family", "table"],
        vec![
            "state-report",
            "--family",
            "table",
            "--file",
            "/nonexistent/psi.txt",
        ],
        vec!["state-report", "--family", "plasma", "--n", "1"],
        vec!["state-report", "--family", "ho", "--n", "1", "--hbar", "0"],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

fn csv_rows(out: &Output) -> Vec<Vec<f64>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,cos_closed,cos_saturation_numeric,abs_diff")
    );
    lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sweep_oscillator() {
    let out = run(&["sweep", "--family", "ho", "--n-max", "3"]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(&out);
    let expected = [1.0, 1.0 / 9.0, 1.0 / 25.0, 1.0 / 49.0];
    assert_eq!(rows.len(), 4);
    for (n, (row, e)) in rows.iter().zip(expected).enumerate() {
        assert_eq!(row[0], n as f64);
        assert!((row[1] - e).abs() < 1e-15);
        assert!((row[2] - e).abs() < 1e-12);
        assert!(row[3] < 1e-12);
    }
}

#[test]
fn sweep_well_with_quadrature() {
    let out = run(&[
        "sweep",
        "--family",
        "well",
        "--n-max",
        "2",
        "--compare-quadrature",
    ]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    for (row, n) in rows.iter().zip([1.0f64, 2.0]) {
        let e = 3.0 / (n * n * PI * PI - 6.0);
        assert_eq!(row[0], n);
        assert!((row[1] - e).abs() < 1e-15);
        assert!(row[3] < 1e-6);
    }
    assert!((rows[0][1] - 0.775_273).abs() < 1e-6);
    assert!((rows[1][1] - 0.089_610_0).abs() < 1e-7);
}

#[test]
fn sweep_json_and_invalid_range() {
    let out = run(&[
        "sweep", "--family", "ho", "--n-max", "5", "--format", "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("sweep", &v);
    assert_eq!(v.as_array().unwrap().len(), 6);

    let out = run(&["sweep", "--family", "well", "--n-max", "0"]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
}

// E = ±√3/2 twice gives an unbiased var_E of 1; the momenta give ‖P2‖ = 3.
fn unit_moments_csv() -> String {
    let e = 3f64.sqrt() / 2.0;
    let p = (3f64.sqrt() * 3.0 / 4.0).sqrt();
    let mut s = String::from("E,px,py,pz\n");
    for sign in [1.0, 1.0, -1.0, -1.0] {
        s += &format!("{},{},{},{}\n", sign * e, sign * p, -sign * p, sign * p);
    }
    s
}

fn on_shell_csv(scale: f64) -> String {
    let mut s = String::from("# synthetic on-shell sample, m = 1\nE,px,py,pz\n");
    for i in 0..200 {
        let t = i as f64 * 0.37;
        let p = [
            0.4 * t.sin(),
            0.3 * (1.7 * t).cos(),
            0.2 * (0.9 * t).sin() + 0.1,
        ];
        let e = (1.0 + p.iter().map(|c| c * c).sum::<f64>()).sqrt();
        s += &format!("{},{},{},{}\n", e, p[0] * scale, p[1] * scale, p[2] * scale);
    }
    s
}

#[test]
fn velocity_direct_a() {
    let dir = TempDir::new().unwrap();
    let events = write(&dir, "ev.csv", &unit_moments_csv());
    let out = run(&["velocity", "--events", &events, "--A", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_schema("velocity", &v);
    assert!((f(&v, "var_E") - 1.0).abs() < 1e-12);
    assert!((f(&v, "P2_norm") - 3.0).abs() < 1e-12);
    assert!((f(&v, "u_bound") - 3f64.sqrt()).abs() < 1e-9);
    assert_eq!(v["calibration"]["mode"], "direct");
    assert_eq!(v["n_events"], 4);
}

#[test]
fn velocity_self_calibration_fixed_point() {
    let dir = TempDir::new().unwrap();
    let events = write(&dir, "ev.csv", &on_shell_csv(1.0));
    let out = run(&[
        "velocity",
        "--events",
        &events,
        "--calibrate",
        &events,
        "--u-ref",
        "1",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_schema("velocity", &v);
    assert!((f(&v, "u_bound") - 1.0).abs() < 1e-9);
    assert_eq!(v["calibration"]["mode"], "reference");
    assert_eq!(v["calibration"]["u_ref"], 1.0);
}

#[test]
fn velocity_parameters_and_jsonl() {
    let dir = TempDir::new().unwrap();
    let mut jsonl = String::new();
    for line in unit_moments_csv().lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        jsonl += &format!(
            "{{\"E\": {}, \"px\": {}, \"py\": {}, \"pz\": {}}}\n",
            c[0], c[1], c[2], c[3]
        );
    }
    let events = write(&dir, "ev.jsonl", &jsonl);
    let out = run(&[
        "velocity", "--events", &events, "--delta", "0.5", "--cos-u", "1",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_schema("velocity", &v);
    // A = 3/(δ² cos) = 12, ‖u²‖ = A var_E/‖P2‖ = 4.
    assert!((f(&v, "A") - 12.0).abs() < 1e-12);
    assert!((f(&v, "u2_norm") - 4.0).abs() < 1e-12);
    assert_eq!(v["calibration"]["delta"], 0.5);

    // δ falls back to the run configuration and is reported.
    let out = run(&["velocity", "--events", &events, "--cos-u", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["calibration"]["delta"], 0.5);
}

#[test]
fn velocity_calibration_conflicts() {
    let dir = TempDir::new().unwrap();
    let events = write(&dir, "ev.csv", &unit_moments_csv());
    let cases: [(&[&str], i32); 6] = [
        (&["--A", "3", "--delta", "0.5"], 3),
        (&["--A", "3", "--delta", "0.5", "--cos-u", "1"], 3),
        (&["--A", "3", "--u-ref", "1"], 3),
        (&[], 3),
        (&["--delta", "0.5"], 1),
        (&["--u-ref", "1"], 1),
    ];
    for (extra, expected) in cases {
        let mut args = vec!["velocity", "--events", events.as_str()];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(code(&out), expected, "{extra:?}");
        assert!(out.stdout.is_empty(), "{extra:?}");
    }
}

#[test]
fn velocity_ingestion_errors() {
    let dir = TempDir::new().unwrap();
    for (name, body) in [
        ("noheader.csv", "1,2,3,4\n5,6,7,8\n"),
        ("short.csv", "E,px,py,pz\n1,2,3\n"),
        ("text.csv", "E,px,py,pz\n1,2,abc,4\n2,3,4,5\n"),
        ("nan.csv", "E,px,py,pz\nNaN,1,1,1\n1,2,3,4\n"),
        ("one.csv", "E,px,py,pz\n1,2,3,4\n"),
        ("bad.jsonl", "{\"E\": 1}\n"),
    ] {
        let p = write(&dir, name, body);
        let out = run(&["velocity", "--events", &p, "--A", "3"]);
        assert_eq!(code(&out), 1, "{name}");
        assert!(out.stdout.is_empty(), "{name}");
    }
    let out = run(&["velocity", "--events", "/nonexistent.csv", "--A", "3"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn velocity_unit_scale() {
    let dir = TempDir::new().unwrap();
    let events = write(&dir, "ev.csv", &unit_moments_csv());
    let base = stdout_json(&run(&["velocity", "--events", &events, "--A", "3"]));
    let scaled = stdout_json(&run(&[
        "velocity",
        "--events",
        &events,
        "--A",
        "3",
        "--momentum-scale",
        "2",
    ]));
    assert!((f(&scaled, "u_bound") - f(&base, "u_bound") / 2.0).abs() < 1e-12);
}

#[test]
fn verify_passes_and_validates() {
    let out = run(&["verify", "--cases", "1000", "--seed", "42"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("verify", &v);
    assert_eq!(v["passed"], true);
    assert_eq!(v["seed"], 42);
}

#[test]
fn verify_rejects_zero_cases() {
    let out = run(&["verify", "--cases", "0"]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn verify_catches_corrupted_constant() {
    let out = run(&[
        "verify",
        "--cases",
        "100",
        "--seed",
        "7",
        "--per-axis-constant",
        "0.5",
    ]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("first failing case"), "{err}");
    assert!(err.contains("--seed 7"), "{err}");
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["verify", "--cases", "200", "--seed", "3"][..],
        &[
            "state-report",
            "--family",
            "well",
            "--n",
            "2,3,4",
            "--numeric",
        ][..],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout);
    }
}

#[test]
fn hbar_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "run.conf", "# run settings\nhbar = 3\n");
    let hbar = |args: &[String], env: &[(&str, &str)]| {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run_with(&args, env);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        f(&stdout_json(&out), "hbar")
    };
    let base = ["state-report", "--family", "ho", "--n", "0"];
    let with = |extra: &[&str]| -> Vec<String> {
        base.iter().chain(extra).map(|s| s.to_string()).collect()
    };
    assert_eq!(hbar(&with(&[]), &[]), 1.0);
    assert_eq!(hbar(&with(&["--config", &cfg]), &[]), 3.0);
    assert_eq!(
        hbar(&with(&["--config", &cfg]), &[("HIDDEN_ANGLE_HBAR", "2")]),
        2.0
    );
    assert_eq!(
        hbar(
            &with(&["--config", &cfg, "--hbar", "5"]),
            &[("HIDDEN_ANGLE_HBAR", "2")]
        ),
        5.0
    );

    // The saturation cosine of the ground state does not depend on ħ.
    let v = stdout_json(&run_with(&base, &[("HIDDEN_ANGLE_HBAR", "2")]));
    assert!((f(&v, "cos_saturation") - 1.0).abs() < 1e-12);
}

#[test]
fn config_file_errors() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.conf", "speed = 3\n");
    let out = run(&[
        "state-report",
        "--family",
        "ho",
        "--n",
        "0",
        "--config",
        &bad,
    ]);
    assert_eq!(code(&out), 1);
    let out = run(&[
        "state-report",
        "--family",
        "ho",
        "--n",
        "0",
        "--config",
        "/nonexistent.conf",
    ]);
    assert_eq!(code(&out), 1);
    let out = run_with(
        &["state-report", "--family", "ho", "--n", "0"],
        &[("HIDDEN_ANGLE_HBAR", "abc")],
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn human_and_csv_formats() {
    let out = run(&[
        "state-report",
        "--family",
        "ho",
        "--n",
        "2",
        "--format",
        "human",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text
        .lines()
        .find(|l| l.starts_with("cos_saturation "))
        .unwrap();
    let value: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((value - 0.04).abs() < 1e-12);

    let out = run(&[
        "state-report",
        "--family",
        "ho",
        "--n",
        "2",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"position_variances_z"));
    assert_eq!(lines.count(), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["bogus"])), 1);
    assert_eq!(code(&run(&["sweep", "--family", "ho"])), 1);
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("state-report"));
}
