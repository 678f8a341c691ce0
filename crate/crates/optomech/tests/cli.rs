//! End-to-end checks of the command-line interface: exit codes, manifest
//! plumbing, output formats, and agreement with direct library calls.

use std::path::Path;
use std::process::Command;

use optomech::{analytics, SystemParams};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optomech"))
}

fn default_params() -> SystemParams {
    SystemParams::from_kappa_units(2e5, 4.0, 1e-3, 0.0, -4.0, 50.0, 1e6, 0.0).unwrap()
}

fn read_manifest(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Parse a CSV produced by the CLI into (header, numeric rows); non-numeric
/// trailing fields (validity) are kept as NaN placeholders.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| f.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn figure_grid_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["figure", "fig2", "--points", "5", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());

    let (header, rows) = read_csv(&dir.path().join("fig2.csv"));
    assert_eq!(
        header,
        ["detuning_over_kappa", "linewidth_over_kappa", "damping_ratio"]
    );
    assert_eq!(rows.len(), 25);
    // gamma = 0 cells are self-ratios: exactly 1 wherever the damping is
    // nonzero (everywhere except detuning = 0)
    for row in rows.iter().filter(|r| r[1] == 0.0 && r[0] != 0.0) {
        assert_eq!(row[2], 1.0, "row {row:?}");
    }

    let manifest = read_manifest(dir.path());
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["outputs"][0], "fig2.csv");
    assert!(manifest["params_si"]["kappa"].as_f64().unwrap() > 0.0);
    assert_eq!(
        manifest["params_kappa_normalized"]["omega_m_over_kappa"]
            .as_f64()
            .unwrap(),
        4.0
    );
}

#[test]
fn unknown_figure_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["figure", "fig99", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // the manifest is still written, with the failure recorded
    let manifest = read_manifest(dir.path());
    assert_eq!(manifest["status"], "failed");
    assert!(manifest["error"].as_str().unwrap().contains("fig99"));
}

#[test]
fn bad_axis_spec_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sweep", "--axis", "gamma_l=1:2", "--quantity", "n_min", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "sweep",
            "--axis",
            "gamma_l=0",
            "--quantity",
            "gamma_opt",
            "--config",
            "/no/such/file.cfg",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn single_cell_sweep_matches_direct_call() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "sweep",
            "--axis",
            "gamma_l=2e4",
            "--quantity",
            "gamma_opt",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());

    let (header, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(header, ["gamma_l", "gamma_opt", "validity"]);
    assert_eq!(rows.len(), 1);

    let mut p = default_params();
    p.gamma_l = 2e4;
    let expect = analytics::optical_damping(&p).value;
    // values are written with shortest round-trip formatting, so the parsed
    // number is bit-identical to the direct call
    assert_eq!(rows[0][1], expect);
}

#[test]
fn sweep_damping_is_antisymmetric_in_detuning() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "sweep",
            "--axis",
            "detuning=-8e5:8e5:9",
            "--quantity",
            "gamma_opt",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let (_, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 9);
    for i in 0..rows.len() {
        let mirrored = rows[rows.len() - 1 - i][1];
        assert!(
            (rows[i][1] + mirrored).abs() <= 1e-12 * rows[i][1].abs().max(1e-300),
            "row {i}: {} vs {}",
            rows[i][1],
            mirrored
        );
    }
}

#[test]
fn sweep_rerun_is_bit_identical() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let status = bin()
            .args([
                "sweep",
                "--axis",
                "gamma_l=0:3e5:7",
                "--axis",
                "detuning=-8e5:-2e5:5",
                "--quantity",
                "n_min",
                "--out",
            ])
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(dir.path().join("sweep.csv")).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn sweep_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "sweep",
            "--axis",
            "gamma_l=0:2e4:3",
            "--quantity",
            "var_x",
            "--format",
            "json",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(dir.path().join("sweep.json")).unwrap();
    let records: serde_json::Value = serde_json::from_str(&text).unwrap();
    let records = records.as_array().unwrap();
    assert_eq!(records.len(), 3);
    assert!(records[0]["var_x"].as_f64().unwrap() >= 0.5);
    // Omega = 4 kappa is below the good-cavity regime, so the closed form
    // is flagged marginal rather than ok
    assert_eq!(records[0]["validity"], "marginal");
}

#[test]
fn failing_cells_give_partial_status_and_numerical_exit() {
    let dir = tempfile::tempdir().unwrap();
    // n_min is undefined for blue detuning: those cells become NaN/error,
    // the rest of the column is still written
    let status = bin()
        .args([
            "sweep",
            "--axis",
            "detuning=-4e5:4e5:3",
            "--quantity",
            "n_min",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    let (_, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows[0][1].is_finite());
    assert!(rows[2][1].is_nan());
    let manifest = read_manifest(dir.path());
    assert_eq!(manifest["status"], "partial");
}

#[test]
fn simulate_writes_trajectories_and_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "simulate",
            "--duration",
            "2e-4",
            "--n-traj",
            "2",
            "--x0",
            "2",
            "--record-every",
            "20",
            "--seed",
            "7",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());

    assert!(dir.path().join("traj_0000.csv").exists());
    assert!(dir.path().join("traj_0001.csv").exists());
    let (header, rows) = read_csv(&dir.path().join("traj_0000.csv"));
    assert_eq!(header, ["t", "x", "v", "beta_re", "beta_im", "phi"]);
    assert!(rows.len() > 100);

    let manifest = read_manifest(dir.path());
    assert_eq!(manifest["seed"], 7);
    let outputs: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(outputs.contains(&"traj_0000.csv"));
    assert!(outputs.contains(&"estimates.json"));
}

#[test]
fn simulate_flags_blue_detuned_instability() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "simulate",
            "--duration",
            "2e-4",
            "--set",
            "detuning=8e5",
            "--estimate",
            "ringdown",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(dir.path().join("estimates.json")).unwrap();
    let estimates: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(estimates["unstable"], true);
    assert!(estimates["analytic"]["gamma_eff"].as_f64().unwrap() < 0.0);
}

#[test]
fn gnuplot_script_references_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["figure", "fig3", "--points", "3", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = dir.path().join("fig3.csv");
    let status = bin()
        .arg("gnuplot")
        .arg(&csv)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let script = std::fs::read_to_string(dir.path().join("fig3.gp")).unwrap();
    assert!(script.contains("splot"));
    assert!(script.contains(csv.to_str().unwrap()));
    assert!(script.contains("using 1:2:3"));
}
