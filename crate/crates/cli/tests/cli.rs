use std::path::Path;
use std::process::{Command, Output};

fn gatedspad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gatedspad")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["fom-sweep", "--scheme", "photon", "--m", "1", "--n", "2"][..],
        &["fom-sweep", "--scheme", "photon", "--m", "3..1"],
        &["fom-sweep", "--scheme", "qubit"],
        &["fom-sweep", "--scheme", "photon", "--m", "2", "--detectors", "no-such-detector"],
        &["verify", "--mc-samples", "0"],
        &["verify", "--max-m", "9"],
        &["dcr", "project", "--ref-dcr", "5e6", "--target-disc-um", "10"],
        &["dcr", "project", "--ref-disc-um", "15", "--ref-dcr", "5e6", "--target-rect-um", "14.2by2"],
        &["qe", "sweep", "--coupler-nm", "10:0:1"],
        &["--jobs", "0", "fom-sweep", "--scheme", "qubit", "--n", "1"],
        &["no-such-command"],
    ] {
        let out = gatedspad(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = gatedspad(&["fom-sweep", "--scheme", "photon", "--m", "1", "--n", "2"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--n"));
}

#[test]
fn file_errors_exit_3_and_singular_fit_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let bad_scene = write(dir.path(), "scene.json", r#"{"layers": [], "coupler_nm": 0, "gap_nm": 0, "ge_nm": 0, "lambda_nm": 1550, "typo": 1}"#);
    let bad_csv = write(dir.path(), "bad.csv", "diameter,current\n1,2\n");
    let flat = write(dir.path(), "flat.csv", "diameter_um,current_na\n10,1\n10,1.1\n");
    let missing = dir.path().join("missing.json").to_string_lossy().into_owned();
    assert_eq!(code(&gatedspad(&["qe", "sweep", "--scene", &bad_scene])), 3);
    assert_eq!(code(&gatedspad(&["qe", "sweep", "--scene", &missing])), 3);
    assert_eq!(code(&gatedspad(&["dcr", "fit", "--input", &bad_csv])), 3);
    assert_eq!(code(&gatedspad(&["experiment", "run", "--config", &missing])), 3);
    assert_eq!(code(&gatedspad(&["dcr", "fit", "--input", &flat])), 4);
}

#[test]
fn injected_bug_fails_verification() {
    let out = gatedspad(&["verify", "--max-m", "2", "--max-qubits", "1", "--mc-samples", "1000", "--inject-bug"]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("failing rows"));
    let ok = gatedspad(&["verify", "--max-m", "3", "--max-qubits", "2", "--mc-samples", "20000"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
}

#[test]
fn photon_sweep_row_count_and_compare_file() {
    let out = gatedspad(&["fom-sweep", "--scheme", "photon", "--m", "1..20", "--detectors", "gesi-300k"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 211);

    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("qubit.csv");
    let out = gatedspad(&["fom-sweep", "--scheme", "qubit", "--n", "1..10", "--out", table.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("p_success_delta=3.8486"));
    let compare = std::fs::read_to_string(dir.path().join("qubit.compare.csv")).unwrap();
    assert_eq!(compare.lines().count(), 11);
}

#[test]
fn detector_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let det = write(dir.path(), "det.json", r#"{"spde": 0.5, "dcr_hz": 1000, "gate_s": 1e-9, "label": "custom"}"#);
    let out = gatedspad(&["fom-sweep", "--scheme", "photon", "--m", "2", "--detectors", &det]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("photon,custom,2,2,"));
}

#[test]
fn dcr_fit_recovers_generating_densities() {
    let (bulk, surf) = (4.12e-6, 0.7e-9);
    let mut csv = String::from("diameter_um,current_na\n");
    for d_um in [10.0f64, 15.0, 20.0, 30.0, 40.0] {
        let d_cm = d_um * 1e-4;
        let amps = bulk * std::f64::consts::PI * d_cm * d_cm / 4.0 + surf * std::f64::consts::PI * d_cm;
        csv.push_str(&format!("{d_um},{:e}\n", amps * 1e9));
    }
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "iv.csv", &csv);
    let out = gatedspad(&["--format", "json", "dcr", "fit", "--input", &input]);
    assert_eq!(code(&out), 0);
    let fit: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let got_bulk = fit["bulk_a_per_cm2"].as_f64().unwrap();
    let got_surf = fit["surface_a_per_cm"].as_f64().unwrap();
    assert!(((got_bulk - bulk) / bulk).abs() < 1e-9, "{got_bulk}");
    assert!(((got_surf - surf) / surf).abs() < 1e-9, "{got_surf}");
}

#[test]
fn identity_projection_keeps_the_rate() {
    let out = gatedspad(&["dcr", "project", "--ref-rect-um", "14.2x2", "--ref-dcr", "5e6", "--target-rect-um", "14.2x2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3);
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let v: f64 = fields[2].parse().unwrap();
        assert!((v - 5e6).abs() < 1e-6, "{line}");
    }
}

#[test]
fn lossless_scene_has_zero_qe_and_single_point_matches() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(
        dir.path(),
        "lossless.json",
        r#"{"layers": [{"t_nm": 670, "n": 3.476}, {"t_nm": 450, "n": 4.275, "absorber": true}],
            "coupler_nm": 1400, "gap_nm": 360, "ge_nm": 5000, "mirror_r": null, "lambda_nm": 1550}"#,
    );
    let out = gatedspad(&["qe", "sweep", "--scene", &scene, "--coupler-nm", "0:2000:500"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let qe: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert_eq!(qe, 0.0, "{row}");
    }

    let out = gatedspad(&["qe", "sweep"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    let qe: f64 = rows[1].split(',').nth(4).unwrap().parse().unwrap();
    let scene = gatedspad::photonic::Scene::reference_device();
    let (input, device) = scene.stacks(1550.0).unwrap();
    let direct = gatedspad::photonic::compute_qe(
        &input,
        &device,
        &scene.geometry().unwrap(),
        1550.0 * 1e-9,
        scene.pol,
        &scene.options(),
    )
    .unwrap();
    assert!((qe - direct.qe).abs() < 1e-15, "{qe} vs {}", direct.qe);
}

#[test]
fn hom_experiment_has_no_coincidences() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "hom.json",
        r#"{"circuit": {"modes": 2, "elements": [{"kind": "mzi", "pair": [0, 1], "theta": 1.5707963267948966, "phi": 0}]},
            "input": {"fock": [1, 1]}, "scheme": "photon", "detector": "snspd-4k"}"#,
    );
    let out = gatedspad(&["--format", "json", "experiment", "run", "--config", &config]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let json_end = text.rfind("\n#").unwrap();
    let report: serde_json::Value = serde_json::from_str(&text[..json_end]).unwrap();
    for entry in report["ideal"].as_array().unwrap() {
        if entry["outcome"] == serde_json::json!([1, 1]) {
            assert!(entry["probability"].as_f64().unwrap() < 1e-12);
        }
    }
}

#[test]
fn outputs_do_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for jobs in ["1", "4"] {
        let path = dir.path().join(format!("fom-{jobs}.json"));
        let out = gatedspad(&[
            "--jobs", jobs, "--format", "json", "--out", path.to_str().unwrap(),
            "fom-sweep", "--scheme", "photon", "--m", "1..8",
        ]);
        assert_eq!(code(&out), 0);
        files.push(std::fs::read(&path).unwrap());
        files.push(std::fs::read(dir.path().join(format!("fom-{jobs}.compare.json"))).unwrap());
    }
    assert_eq!(files[0], files[2]);
    assert_eq!(files[1], files[3]);
}
