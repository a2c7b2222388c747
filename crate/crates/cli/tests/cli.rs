use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL_SCAN: &str = "\
scenario = scan
seed = 11
molecule.preset = no-dimer-droplet
field.fwhm_ps = 60
scan.f_start_ghz = 6
scan.f_stop_ghz = 10
scan.points = 5
scan.probe_delay_ps = 100
detector.n_ions = 300
sim.j_max = 8
sim.dt_ps = 0.5
";

fn centrifuge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_centrifuge")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn scan_outputs_are_byte_identical_across_runs_and_worker_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "scan.cfg", SMALL_SCAN);
    let mut dirs = Vec::new();
    for (i, workers) in ["1", "1", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("run{i}"));
        let o = centrifuge(&[
            "scan",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
            "--plot-data",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        dirs.push(out);
    }
    for name in ["scan.csv", "fit.txt", "plot_data.csv"] {
        let first = read(&dirs[0], name);
        for d in &dirs[1..] {
            assert_eq!(first, read(d, name), "{name} differs");
        }
    }
    let scan = String::from_utf8(read(&dirs[0], "scan.csv")).unwrap();
    assert!(scan.starts_with("fcfg_ghz,value,stderr\n"));
    assert_eq!(scan.lines().count(), 6);
}

#[test]
fn rerunning_from_the_manifest_reproduces_the_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "scan.cfg", SMALL_SCAN);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(centrifuge(&["scan", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert!(manifest.contains("manifest.version = "));
    assert!(manifest.contains("manifest.jmax_delta = "));
    assert!(manifest.contains("manifest.wall_time_s = "));
    let again = a.join("manifest.txt");
    let o = centrifuge(&["scan", "--config", again.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read(&a, "scan.csv"), read(&b, "scan.csv"));
    assert_eq!(read(&a, "fit.txt"), read(&b, "fit.txt"));
}

#[test]
fn seed_flag_overrides_the_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "scan.cfg", SMALL_SCAN);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(centrifuge(&["scan", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(centrifuge(&["scan", "--config", &cfg, "--out", b.to_str().unwrap(), "--seed", "12"]).status.success());
    assert_ne!(read(&a, "scan.csv"), read(&b, "scan.csv"));
    let manifest = fs::read_to_string(b.join("manifest.txt")).unwrap();
    assert!(manifest.lines().any(|l| l == "seed = 12"));
}

#[test]
fn missing_key_is_a_usage_error_naming_the_key() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "bad.cfg", "scenario = infield\nseed = 1\nmolecule.preset = no-dimer-droplet\n");
    let o = centrifuge(&["infield", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("field.f0_ghz"), "{}", stderr(&o));
}

#[test]
fn unknown_flags_keys_and_scenario_mismatch_are_usage_errors() {
    assert_eq!(centrifuge(&["levels", "--bogus"]).status.code(), Some(2));
    assert_eq!(centrifuge(&["levels", "--format", "json"]).status.code(), Some(2));
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "k.cfg", &format!("{SMALL_SCAN}field.colour = red\n"));
    let o = centrifuge(&["scan", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("field.colour"));
    let cfg = write(tmp.path(), "s.cfg", SMALL_SCAN);
    assert_eq!(centrifuge(&["infield", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn validate_fails_loudly_on_a_truncated_basis() {
    let tmp = TempDir::new().unwrap();
    let text = "scenario = infield\nseed = 3\nmolecule.preset = no-dimer-droplet\nfield.f0_ghz = 8.5\n\
                field.fwhm_ps = 60\ndetector.n_ions = 300\nsim.j_max = 2\n";
    let cfg = write(tmp.path(), "v.cfg", text);
    let o = centrifuge(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("jmax_convergence = FAIL"), "{out}");
    assert!(out.contains("operator_oracle = pass"));
    assert!(stderr(&o).contains("jmax_convergence"));
}

#[test]
fn levels_lists_the_gas_triplet_and_resonances() {
    let o = centrifuge(&["levels", "--preset", "no-dimer-gas", "--j-max", "1"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(text.lines().next(), Some("J,K,E_cm1,f_res_GHz"));
    assert_eq!(rows.len(), 4);
    // Rigid J = 1 levels B_y + B_z, B_x + B_z, B_x + B_y less D [J(J+1)]².
    let shift = 1e-6 * 4.0;
    for (row, e) in rows[1..].iter().zip([0.34, 1.01, 1.05]) {
        assert!((row[2] - (e - shift)).abs() < 1e-12, "{row:?}");
    }
    // 2f = 6 B_yz c for J = 0 -> 2 with B_yz = 0.17 cm⁻¹.
    assert!((rows[0][3] - 3.0 * 0.17 * 29.979_245_8).abs() < 1e-3);
}

#[test]
fn fit_recovers_a_synthetic_sinusoid_and_decay() {
    let tmp = TempDir::new().unwrap();
    let mut trace = String::from("delay_ps,value,stderr\n");
    for k in 0..201 {
        let t = -200.0 + 2.0 * k as f64;
        let v = 0.55 + 0.03 * (2.0 * std::f64::consts::PI * 17.0e-3 * t + 0.4).cos();
        trace.push_str(&format!("{t},{v},0.01\n"));
    }
    let path = write(tmp.path(), "t.csv", &trace);
    let out = tmp.path().join("fit");
    let o = centrifuge(&["fit", "--model", "sinusoid", "--input", &path, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec = fs::read_to_string(out.join("fit.txt")).unwrap();
    let f: f64 = rec.lines().find_map(|l| l.strip_prefix("frequency_ghz = ")).expect("frequency line").parse().unwrap();
    assert!((f - 17.0).abs() < 1e-6, "{rec}");

    let mut decay = String::from("delay_ps,value,stderr\n");
    for k in 0..40 {
        let t = 500.0 + 70.0 * k as f64;
        decay.push_str(&format!("{t},{},0.005\n", 0.5 + 0.04 * (-t / 1500.0).exp()));
    }
    let path = write(tmp.path(), "d.csv", &decay);
    let o = centrifuge(&["fit", "--model", "decay", "--input", &path]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec = String::from_utf8(o.stdout).unwrap();
    let tau: f64 = rec.lines().find_map(|l| l.strip_prefix("tau_ps = ")).unwrap().parse().unwrap();
    assert!((tau - 1500.0).abs() < 1e-6, "{rec}");
}

#[test]
fn fit_rejects_malformed_input() {
    let tmp = TempDir::new().unwrap();
    let path = write(tmp.path(), "x.csv", "time,value,stderr\n1,2,3\n");
    assert_eq!(centrifuge(&["fit", "--model", "sinusoid", "--input", &path]).status.code(), Some(2));
    let missing = tmp.path().join("nope.csv");
    assert_eq!(centrifuge(&["fit", "--model", "peak", "--input", missing.to_str().unwrap()]).status.code(), Some(2));
}
