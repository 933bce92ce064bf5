use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;
use swm_core::fk::fk_residual_system;
use swm_core::geometry::TautSet;
use swm_core::report::{OutcomeReport, OutcomeTag};
use swm_core::{CableLengths, MechanismConfig, PlatformPose, TensionVector};

fn swm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swm")).args(args).output().expect("run swm")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8")
}

fn json(out: &Output) -> Value {
    serde_json::from_str(stdout(out).trim()).expect("json")
}

fn file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

fn close(v: &Value, expected: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() < tol
}

#[test]
fn pair_case_as_json() {
    let out = swm(&["--format", "json", "solve", "--lengths", "20,20,21,21"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["outcome"], "definite");
    assert_eq!(v["taut"], serde_json::json!([1, 2]));
    assert_eq!(v["branch"], "pair");
    let t = v["tensions"].as_array().unwrap();
    assert!(close(&t[0], 61250.0, 1.0));
    // Statics fixes the second tension at mg minus the first.
    assert!(close(&t[1], 36750.0, 1.0));
    assert!(close(&t[2], 0.0, 1e-9) && close(&t[3], 0.0, 1e-9));
    let c = &v["pose"]["C"];
    assert!(close(&c[2], -30.198, 1e-2));
}

#[test]
fn single_cable_case_exits_with_two() {
    let out = swm(&["--format", "json", "solve", "--lengths", "20,21,22,21.5"]);
    assert_eq!(code(&out), 2);
    let v = json(&out);
    assert_eq!(v["outcome"], "single-cable");
    assert!(v.get("pose").is_none());
    let phi = v["phi"].as_array().unwrap();
    assert_eq!(phi.len(), 2);
    assert!(close(&phi[0][0], 0.0, 1e-12));
    assert!(close(&phi[0][1], 0.715, 5e-3));
    assert!(close(&phi[1][0], 5.565, 5e-3));
    assert!(close(&phi[1][1], std::f64::consts::TAU, 1e-12));

    let table = swm(&["solve", "--lengths", "20,21,22,21.5"]);
    assert_eq!(code(&table), 2);
    assert!(stdout(&table).contains("[0.000, 0.715] U [5.569, 6.283]"));
}

#[test]
fn equal_lengths_give_horizontal_pose_and_even_tensions() {
    let out = swm(&["--format", "json", "solve", "--lengths", "20,20,20,20"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["branch"], "equal-length");
    for p in ["B1", "B2", "B3"] {
        assert!(close(&v["pose"][p][2], -20.0, 1e-12));
    }
    let mg = 98000.0;
    let expected = [0.3625, 0.2375, 0.1375, 0.2625];
    for (t, e) in v["tensions"].as_array().unwrap().iter().zip(expected) {
        assert!(close(t, e * mg, 1e-6));
    }
}

#[test]
fn table_output_prints_kilonewtons_in_point_order() {
    let out = swm(&["solve", "--lengths", "20,20,20.1,20.1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with('B') || l.starts_with("C ")).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("B1") && rows[3].starts_with('C'));
    assert!(text.contains("tau1 (kN): 39.201"));
    assert!(text.contains("planar branch"));
}

#[test]
fn csv_solve_has_header_and_one_row() {
    let out = swm(&["--format", "csv", "solve", "--lengths", "20.3,20.1,20.5,20.2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(header.len(), row.len());
    assert_eq!(row[4], "definite");
    assert_eq!(row[5], "1 2 4");
}

#[test]
fn json_round_trip_reproduces_the_equilibrium() {
    let cfg = MechanismConfig::default();
    for l in ["20,20,21,21", "20,20,20.1,20.1", "20.3,20.1,20.5,20.2", "19.7,20.2,20.4,19.9"] {
        let out = swm(&["--format", "json", "solve", "--lengths", l]);
        assert_eq!(code(&out), 0, "{l}");
        let report: OutcomeReport = serde_json::from_str(stdout(&out).trim()).unwrap();
        assert_eq!(report.outcome, OutcomeTag::Definite);
        let lengths = CableLengths::new(report.lengths.unwrap()).unwrap();
        let taut = TautSet::from_indices(&report.taut.iter().map(|n| n - 1).collect::<Vec<_>>()).unwrap();
        let pose = PlatformPose::from(&report.pose.unwrap());
        let system = fk_residual_system(taut, &lengths, &cfg);
        let worst = system
            .residual_at(&pose, &TensionVector(report.tensions))
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()));
        assert!(worst < 1e-8, "{l}: residual {worst:e}");
    }
}

#[test]
fn exit_codes_follow_the_mapping() {
    assert_eq!(code(&swm(&[])), 64);
    assert_eq!(code(&swm(&["solve"])), 64);
    assert_eq!(code(&swm(&["solve", "--lengths", "20,20,20"])), 64);
    assert_eq!(code(&swm(&["solve", "--lengths", "20,20,20,x"])), 64);
    assert_eq!(code(&swm(&["solve", "--lengths", "20,20,20,-1"])), 64);
    assert_eq!(code(&swm(&["--format", "xml", "solve", "--lengths", "20,20,20,20"])), 64);
    assert_eq!(code(&swm(&["frobnicate"])), 64);
    assert_eq!(code(&swm(&["--help"])), 0);
    assert_eq!(code(&swm(&["--version"])), 0);
    assert_eq!(code(&swm(&["batch", "--input", "/nonexistent/cases.csv"])), 66);
    assert_eq!(code(&swm(&["--config", "/nonexistent/mech.toml", "even-tension"])), 66);
}

#[test]
fn infeasible_outcome_exits_with_one() {
    // Two or more taut cables cannot each carry 90% of the weight.
    let f = file("tau_tol = 0.9\n");
    let out = swm(&["--config", f.path().to_str().unwrap(), "--format", "json", "solve", "--lengths", "20,20,21,21"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["outcome"], "infeasible");
    assert!(!v["diagnostics"].as_array().unwrap().is_empty());
}

#[test]
fn bad_config_exits_with_sixty_five() {
    for doc in ["a = [", "a = 2.0\nwidth = 1.0", "k1 = 2.0", "m = -5.0", "tau_tol = -1.0"] {
        let f = file(doc);
        let out = swm(&["--config", f.path().to_str().unwrap(), "solve", "--lengths", "20,20,20,20"]);
        assert_eq!(code(&out), 65, "{doc:?}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn config_overrides_mechanism() {
    let f = file("k1 = 0.0\nk2 = 0.0\n");
    let out = swm(&["--config", f.path().to_str().unwrap(), "--format", "json", "even-tension"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for t in v["tensions_over_mg"].as_array().unwrap() {
        assert!(close(t, 0.25, 1e-12));
    }
    assert!(close(&v["delta_t"], 0.0, 1e-9));

    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/../../config/reference.toml");
    let out = swm(&["--config", shipped, "--format", "json", "solve", "--lengths", "20,20,21,21"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn even_tension_reference_split() {
    let out = swm(&["--format", "json", "even-tension"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for (t, e) in v["tensions_over_mg"].as_array().unwrap().iter().zip([0.3625, 0.2375, 0.1375, 0.2625]) {
        assert!(close(t, e, 1e-12));
    }
    assert!(close(&v["tau4_interval"][0], 0.025 * 98000.0, 1e-6));
    assert!(close(&v["tau4_interval"][1], 0.4 * 98000.0, 1e-6));
}

#[test]
fn grid_has_zero_at_origin_and_is_point_symmetric() {
    let out = swm(&["even-tension", "--grid", "101"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k1,k2,delta_t_min"));
    let rows: Vec<[f64; 3]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(rows.len(), 101 * 101);
    let centre = rows[50 * 101 + 50];
    assert_eq!((centre[0], centre[1]), (0.0, 0.0));
    assert!(centre[2].abs() < 1e-9);
    for i in 0..101 {
        for j in 0..101 {
            let p = rows[i * 101 + j];
            let q = rows[(100 - i) * 101 + (100 - j)];
            assert!((p[0] + q[0]).abs() < 1e-12 && (p[1] + q[1]).abs() < 1e-12);
            assert!((p[2] - q[2]).abs() <= 1e-9 * p[2].abs().max(1.0), "({i},{j})");
        }
    }
}

#[test]
fn check_single_reports() {
    let out = swm(&["check-single", "--lengths", "20,21,22,21.5"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("shortest cable: 1"));
    assert!(text.contains("phi (rad): [0.000, 0.715] U [5.569, 6.283]"));

    let out = swm(&["check-single", "--lengths", "20,20,20,20"]);
    assert!(stdout(&out).contains("not applicable (equal lengths)"));

    let out = swm(&["--format", "json", "check-single", "--lengths", "20.3,20.1,20.5,20.2"]);
    let v = json(&out);
    assert_eq!(v["shortest"], 2);
    assert_eq!(v["suspended"], false);
    assert!(v["phi"].as_array().unwrap().is_empty());
    assert_eq!(v["cables"].as_array().unwrap().len(), 3);
}

const REFERENCE_CASES: &str = "20,21,22,21.5\n20,20,20.1,20.1\n20,20,21,21\n20.3,20.1,20.5,20.2\n";

#[test]
fn batch_reproduces_the_reference_outcomes() {
    let f = file(REFERENCE_CASES);
    let out = swm(&["--format", "json", "batch", "--input", f.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let records: Vec<Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 4);
    assert_eq!(records[0]["outcome"], "single-cable");
    assert_eq!(records[1]["branch"], "planar");
    assert_eq!(records[2]["taut"], serde_json::json!([1, 2]));
    assert_eq!(records[3]["taut"], serde_json::json!([1, 2, 4]));
    assert_eq!(records[3]["lengths"], serde_json::json!([20.3, 20.1, 20.5, 20.2]));
}

#[test]
fn batch_skips_malformed_lines_with_line_numbers() {
    let f = file("# header comment\n20,20,21,21\n20,20,abc,21\n\n20 20 20 20\n1,2,3\n");
    let out = swm(&["--format", "csv", "batch", "--input", f.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 3);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(":3:"), "{err}");
    assert!(err.contains(":6:"), "{err}");
}

#[test]
fn empty_batch_is_empty_output() {
    let f = file("");
    for format in ["table", "json", "csv"] {
        let out = swm(&["--format", format, "batch", "--input", f.path().to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn batch_is_deterministic_and_independent_of_workers() {
    use std::fmt::Write as _;
    let mut state: u64 = 0x2545_f491_4f6c_dd1d;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        19.5 + (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut rows = String::new();
    for _ in 0..1000 {
        let _ = writeln!(rows, "{},{},{},{}", next(), next(), next(), next());
    }
    let f = file(&rows);
    let path = f.path().to_str().unwrap();
    let one = swm(&["--format", "json", "batch", "--input", path, "--jobs", "1"]);
    let many = swm(&["--format", "json", "batch", "--input", path, "--jobs", "8"]);
    let again = swm(&["--format", "json", "batch", "--input", path, "--jobs", "8"]);
    assert_eq!(code(&one), 0);
    assert_eq!(stdout(&one).lines().count(), 1000);
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(many.stdout, again.stdout);
}
