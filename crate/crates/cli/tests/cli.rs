use std::path::Path;
use std::process::{Command, Output};

fn plasmon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plasmon")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn csv_rows(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# schema: plasmon."), "{}", path.display());
    lines.skip(1).map(String::from).collect()
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

#[test]
fn modes_writes_branches_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let o = plasmon(&["modes", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files(&out), ["branch_n1.csv", "branch_n2.csv", "branch_n3.csv", "group_velocity.csv", "manifest.json"]);
    assert_eq!(csv_rows(&out.join("branch_n1.csv")).len(), 40);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "modes");
    assert_eq!(manifest["rng_consulted"], false);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 4);
    assert!(manifest["sigma3_provenance"].as_str().unwrap().len() > 10);
    assert_eq!(manifest["units"]["hbar_ev_fs"], 0.6582119569);
}

#[test]
fn single_branch_with_n_max_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = plasmon(&["modes", "--set", "mode.n_max=1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(files(dir.path()), ["branch_n1.csv", "group_velocity.csv", "manifest.json"]);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = plasmon(&["modes", "--set", "geometry.width=-5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("geometry.width"));
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[geometry]\nwidth = 20.0\nlenght = 3.0\n").unwrap();
    let o = plasmon(&["modes", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("lenght"));
    assert_eq!(code(&plasmon(&["modes", "--config", "/nonexistent/x.toml"])), 2);
    assert_eq!(code(&plasmon(&["bogus"])), 2);
    // Nothing is written on failure.
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn config_file_is_read_and_digested() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[material]\nfermi_energy = 0.12\n\n[mode]\nn_max = 2\nsamples = 10\n").unwrap();
    let out = dir.path().join("o");
    let o = plasmon(&["modes", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["material"]["fermi_energy"], 0.12);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(csv_rows(&out.join("branch_n2.csv")).len(), 10);
}

#[test]
fn scatter_summary_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = plasmon(&["scatter", "--set", "scatter.ratio=1000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let summary = csv_rows(&out.join("scatter_summary.csv"));
    let fields: Vec<&str> = summary[0].split(',').collect();
    let r: f64 = fields[10].parse().unwrap();
    assert!((r - 0.98755).abs() < 1e-5, "{r}");
    assert!(fields[16].is_empty());
    assert_eq!(csv_rows(&out.join("scatter_coefficients.csv")).len(), 201);

    let o = plasmon(&["scatter", "--set", "scatter.gamma2=0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let fields: Vec<String> = csv_rows(&out.join("scatter_summary.csv"))[0].split(',').map(String::from).collect();
    assert_eq!(fields[14].parse::<f64>().unwrap(), 0.0);

    // Pulse centre below the admissibility edge.
    let o = plasmon(&["scatter", "--set", "mode.kw=0.5", "--out", dir.path().join("bad").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("admissible"));
}

#[test]
fn gate_map_rows_and_empty_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let o = plasmon(&[
        "gate-map",
        "--set",
        "sweep.width.start=20",
        "--set",
        "sweep.width.stop=24",
        "--set",
        "sweep.fermi_energy.start=0.08",
        "--set",
        "sweep.fermi_energy.stop=0.1",
        "--set",
        "sweep.modes=[2]",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&out.join("gate_map_n2.csv")).len(), 5 * 5);

    let o = plasmon(&[
        "gate-map",
        "--set",
        "sweep.fermi_energy.start=0.2",
        "--set",
        "sweep.width.start=20",
        "--set",
        "sweep.width.stop=20",
        "--out",
        dir.path().join("empty").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 5);
    assert!(dir.path().join("empty/manifest.json").exists());
}

#[test]
fn optimize_rejects_unsorted_quality_list() {
    let dir = tempfile::tempdir().unwrap();
    let o = plasmon(&["optimize", "--set", "quality.q_list=[100.0, 50.0]", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = plasmon(&["optimize", "--set", "quality.q_list=[150.0, 1000.0]", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&dir.path().join("optimize_n2.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.ends_with(",ok")));
}

#[test]
fn rates_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = plasmon(&["rates", "--set", "material.drude_rate=0.001", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&dir.path().join("rates_gamma1.csv")).len(), 69);
    assert_eq!(csv_rows(&dir.path().join("rates_gamma2.csv")).len(), 3 * 40);
}
