use std::path::Path;
use std::process::{Command, Output};

use std::f64::consts::PI;

fn rough_heat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rough-heat"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.toml");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const SIM: &str = "scheme = \"euler\"\nhurst = 0.6\ntime_mesh = 200\nmodes = 16\nk = 1.0\nseed = 7\n";

#[test]
fn zero_strength_probe_follows_heat_decay() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SIM);
    let out = tmp.path().join("out");
    let res = rough_heat(&out, &["simulate", "--config", &cfg, "--set", "k=0", "--set", "kappa=0.05"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let bytes = read(&out, "probes.csv");
    let mut rdr = csv::Reader::from_reader(&bytes[..]);
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let t: f64 = rec[0].parse().unwrap();
        let y: f64 = rec[1].parse().unwrap();
        let want = 0.5 * (-0.05 * PI * PI * t).exp() - 0.6 * (-0.05 * 9.0 * PI * PI * t).exp();
        assert!((y - want).abs() < 1e-12, "t={t}: {y} vs {want}");
        rows += 1;
    }
    assert_eq!(rows, 201);
    let manifest: serde_json::Value = serde_json::from_slice(&read(&out, "manifest.json")).unwrap();
    assert_eq!(manifest["config"]["k"], 0.0);
    assert_eq!(manifest["config"]["seed"], 7);
    assert!(out.join("trajectory.csv").exists());
}

#[test]
fn missing_field_fails_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SIM.replace("seed = 7\n", ""));
    let out = tmp.path().join("out");
    let res = rough_heat(&out, &["simulate", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("seed"));
    assert!(!out.exists());
}

#[test]
fn bad_values_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SIM);
    let out = tmp.path().join("out");
    for extra in [
        &["--set", "hurst=1.2"][..],
        &["--set", "modes=0"],
        &["--set", "unknown_key=3"],
        &["--threads", "0"],
        &["--set", "probes=[1.5]"],
    ] {
        let mut args = vec!["simulate", "--config", cfg.as_str()];
        args.extend_from_slice(extra);
        let res = rough_heat(&out, &args);
        assert_eq!(res.status.code(), Some(2), "{extra:?}");
        assert!(!out.exists());
    }
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SIM);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let r1 = rough_heat(&a, &["simulate", "--config", &cfg, "--threads", "1", "--seed", "3"]);
    let r2 = rough_heat(&b, &["simulate", "--config", &cfg, "--threads", "2", "--seed", "3"]);
    assert!(r1.status.success() && r2.status.success());
    for name in ["trajectory.csv", "probes.csv", "manifest.json"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
}

#[test]
fn milstein_simulation_with_grid_view() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "scheme = \"milstein\"\nhurst = 0.4\ntime_mesh = 6\nmodes = 8\nk = 2.0\nseed = 1\n\
         components = 2\ntrajectory = \"grid\"\ngrid_size = 15\nprobes = [0.25, 0.5]\n",
    );
    let out = tmp.path().join("out");
    let res = rough_heat(&out, &["simulate", "--config", &cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let traj = String::from_utf8(read(&out, "trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 65);
    let probes = String::from_utf8(read(&out, "probes.csv")).unwrap();
    assert_eq!(probes.lines().next().unwrap().split(',').count(), 3);
}

#[test]
fn converge_with_single_rung_is_refused_but_written() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "scheme = \"euler\"\nmesh_ladder = [16]\nmode_ladder = [8]\nreference_mesh = 64\n\
         reference_modes = 16\nreplications = 2\n",
    );
    let out = tmp.path().join("out");
    let res = rough_heat(&out, &["converge", "--config", &cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&read(&out, "report.json")).unwrap();
    for fit in doc["report"]["fits"].as_array().unwrap() {
        assert_eq!(fit["verdict"], "refused");
    }
    let csv = String::from_utf8(read(&out, "errors.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "scheme,H,M,N,seed,error");
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
}

#[test]
fn converge_euler_slope_is_negative() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "scheme = \"euler\"\nmesh_ladder = [8, 16, 32, 64, 128]\nmode_ladder = [2, 4, 8, 16, 32]\n\
         reference_mesh = 256\nreference_modes = 32\nreplications = 4\n",
    );
    let out = tmp.path().join("out");
    let res = rough_heat(&out, &["converge", "--config", &cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&read(&out, "report.json")).unwrap();
    let fits = doc["report"]["fits"].as_array().unwrap();
    let time = fits.iter().find(|f| f["sweep"] == "time").unwrap();
    assert!(time["fit"]["slope"].as_f64().unwrap() < 0.0);
}

#[test]
fn converge_rejects_non_dyadic_milstein_reference() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = rough_heat(
        &out,
        &["converge", "--set", "scheme=\"milstein\"", "--set", "mesh_ladder=[3, 4, 5, 6]", "--set", "reference_mesh=5"],
    );
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn driver_stats_writes_per_seed_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = rough_heat(
        &out,
        &[
            "driver-stats", "--set", "hurst=0.6", "--set", "gamma=0.5", "--set", "fine_steps=256",
            "--set", "mesh_ladder=[8, 16, 32, 64]", "--set", "seeds=5",
        ],
    );
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = String::from_utf8(read(&out, "driver_stats.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "seed,M,holder_norm,u_M,v_M");
    assert_eq!(csv.lines().count(), 1 + 5 * 4);
    let doc: serde_json::Value = serde_json::from_slice(&read(&out, "driver_stats.json")).unwrap();
    assert!(doc["u_fit"]["slope"].as_f64().unwrap() < 0.0);
    assert_eq!(doc["medians"].as_array().unwrap().len(), 4);
}

#[test]
fn driver_stats_rejects_non_dividing_mesh() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = rough_heat(
        &out,
        &["driver-stats", "--set", "hurst=0.6", "--set", "gamma=0.5", "--set", "fine_steps=100", "--set", "mesh_ladder=[3]"],
    );
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn help_and_version() {
    let out = Command::new(env!("CARGO_BIN_EXE_rough-heat")).arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["simulate", "converge", "driver-stats"] {
        assert!(text.contains(cmd));
    }
}
