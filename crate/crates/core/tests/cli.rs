use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn granlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_granlab"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .arg("--quiet")
        .env_remove("GRANLAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| if c.is_empty() { f64::NAN } else { c.parse().unwrap() }).collect())
        .collect()
}

#[test]
fn haff_table_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = granlab(dir.path(), &["haff", "--lambda", "2", "--rho0", "1", "--t0", "1", "--t-final", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("haff.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,T_closed,T_integrated,abs_diff");
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 4));
    let r = report(dir.path(), "haff");
    assert_eq!(r["schema_version"], "1");
    assert_eq!(r["failures"].as_array().unwrap().len(), 0);

    let out = granlab(dir.path(), &["haff", "--lambda", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));

    let zero = tempfile::tempdir().unwrap();
    assert_eq!(granlab(zero.path(), &["haff", "--t-final", "0"]).status.code(), Some(0));
    let rows = csv_rows(&zero.path().join("haff.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(granlab(d.path(), &["riemann", "--data", "1,1,0,1"]).status.code(), Some(0));
    }
    for name in ["fronts.csv", "point_masses.csv", "snapshot_1.csv", "regime.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn uniform_blowup_report() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(granlab(dir.path(), &["uniform", "--n", "2", "--gamma", "1.6666666666666667"]).status.code(), Some(0));
    let r = report(dir.path(), "uniform");
    let e = r["data"]["fitted_exponent"].as_f64().unwrap();
    assert!((e + 2.0).abs() <= 0.2, "{e}");
    assert_eq!(r["data"]["termination"]["kind"], "BlowUpDetected");
    assert!(dir.path().join("density_0.csv").exists());
}

#[test]
fn uniform_one_axis_compression_is_anisotropic() {
    let dir = tempfile::tempdir().unwrap();
    let out = granlab(dir.path(), &["uniform", "--alpha=-1,0,0,0", "--quad", "1,0,0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("anisotropy.csv"));
    assert!(rows.last().unwrap()[3] > 10.0);
    assert!(rows.windows(2).all(|w| w[1][3] >= w[0][3] - 1e-9));
}

#[test]
fn uniform_at_rest_follows_haff() {
    let dir = tempfile::tempdir().unwrap();
    let out = granlab(dir.path(), &["uniform", "--n", "1", "--alpha", "0", "--quad", "0", "--lambda", "2", "--t-final", "3"]);
    assert_eq!(out.status.code(), Some(0));
    for row in csv_rows(&dir.path().join("trajectory.csv")) {
        let t = row[0];
        let phi = 1.0 / (t + 1.0);
        assert!((row[1] - phi).abs() < 1e-9, "phi at {t}");
        // rho0 = phi0 / sqrt(C0) = 1, so C follows the cooling law
        assert!((row[2] - (t + 1.0).powi(-2)).abs() < 1e-9, "C at {t}");
    }
}

#[test]
fn riemann_regimes_in_the_record() {
    let cases = [("0,1,1,1", "TwoContactsForever"), ("3,1,0,1", "ImmediateConcentration"), ("1,1,0,1", "DelayedConcentration")];
    for (data, kind) in cases {
        let dir = tempfile::tempdir().unwrap();
        let out = granlab(dir.path(), &["riemann", "--data", data, "--lambda", "2", "--c", "1"]);
        assert_eq!(out.status.code(), Some(0));
        let r = report(dir.path(), "regime");
        assert_eq!(r["data"]["regime"]["kind"], kind);
        if kind == "DelayedConcentration" {
            assert!((r["data"]["regime"]["t_doublestar"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        }
        if kind == "ImmediateConcentration" {
            let masses = csv_rows(&dir.path().join("point_masses.csv"));
            assert_eq!(masses[0][0], 0.0);
            assert_eq!(masses[0][2], 0.0);
            assert!(masses[1][2] > 0.0);
        }
    }
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(granlab(dir.path(), &["riemann", "--data", "1,-1,0,1"]).status.code(), Some(2));
}

#[test]
fn resonance_reports_the_balance_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(granlab(dir.path(), &["resonance", "--n", "2", "--gamma", "1"]).status.code(), Some(0));
    let r = report(dir.path(), "resonance");
    let mut eig: Vec<f64> = r["data"]["eigenvalues"].as_array().unwrap().iter().map(|p| p[0].as_f64().unwrap()).collect();
    eig.sort_by(f64::total_cmp);
    let closed: Vec<f64> = r["data"]["closed_form"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(eig.len(), 4);
    for (a, b) in eig.iter().zip(&closed) {
        assert!((a - b).abs() < 1e-10, "{eig:?} vs {closed:?}");
    }
    assert!((eig[0] + 1.0).abs() < 1e-10 && eig[1].abs() < 1e-10 && eig[2].abs() < 1e-10);
}

#[test]
fn verify_exact_family_passes_and_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(granlab(dir.path(), &["verify", "--scenario", "exact-family-1d"]).status.code(), Some(0));
    let r = report(dir.path(), "verify");
    for o in r["data"]["study"]["orders"].as_array().unwrap() {
        let order = o["max_orders"].as_array().unwrap().last().unwrap().as_f64().unwrap();
        assert!((1.7..=2.3).contains(&order), "{o}");
    }
    let neg = tempfile::tempdir().unwrap();
    assert_eq!(granlab(neg.path(), &["verify", "--scenario", "exact-family-1d", "--perturb", "1.01"]).status.code(), Some(1));
    assert!(!report(neg.path(), "verify")["failures"].as_array().unwrap().is_empty());
    assert_eq!(granlab(neg.path(), &["verify", "--scenario", "nope"]).status.code(), Some(2));
}

#[test]
fn verify_imports_field_tables() {
    let dir = tempfile::tempdir().unwrap();
    let dx = 5e-3;
    let mut text = String::from("t,x,rho,v,T\n");
    // a gas at rest whose density decays is not a solution; the study still reports every equation
    for i in 0..=60 {
        for j in 0..=60 {
            let (t, x) = (0.2 + i as f64 * dx, -0.15 + j as f64 * dx);
            let rho = 1.0 / (1.0 + t);
            let temp = (0.5 * t + 1.0f64).powi(-2) / rho;
            text.push_str(&format!("{t},{x},{rho},0,{temp}\n"));
        }
    }
    let path = dir.path().join("fields.csv");
    fs::write(&path, text).unwrap();
    let out = granlab(dir.path(), &["verify", "--fields", path.to_str().unwrap(), "--gamma", "2", "--lambda", "1"]);
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    let r = report(dir.path(), "verify");
    assert_eq!(r["data"]["study"]["reports"].as_array().unwrap().len(), 3);
}

#[test]
fn meerson_global_blowup_time() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(granlab(dir.path(), &["meerson", "--mu", "1", "--amp", "1"]).status.code(), Some(0));
    let t = report(dir.path(), "meerson")["data"]["global_blowup_time"].as_f64().unwrap();
    assert!((t - 1.0).abs() < 1e-12);
    let rows = csv_rows(&dir.path().join("meerson_0.csv"));
    assert_eq!(rows[0].len(), 5);
}

#[test]
fn config_file_env_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "lambda = 3.0\nt-final = 2\nsamples = 5\n").unwrap();
    let a = dir.path().join("a");
    let out = granlab(&a, &["haff", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&a, "haff")["data"]["lambda"], 3.0);
    assert_eq!(csv_rows(&a.join("haff.csv")).len(), 5);
    let b = dir.path().join("b");
    granlab(&b, &["haff", "--config", cfg.to_str().unwrap(), "--lambda", "0.5"]);
    assert_eq!(report(&b, "haff")["data"]["lambda"], 0.5);

    fs::write(&cfg, "lambda = 3.0\nlamda = 1\n").unwrap();
    assert_eq!(granlab(&b, &["haff", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));

    let env_dir = dir.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_granlab"))
        .args(["haff", "--quiet"])
        .env("GRANLAB_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.join("haff.csv").exists());
}

#[test]
fn jobs_flag_controls_the_pool() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(granlab(dir.path(), &["verify", "--scenario", "uniform-2d", "--jobs", "2"]).status.code(), Some(0));
    assert_eq!(granlab(dir.path(), &["haff", "--jobs", "0"]).status.code(), Some(2));
}

#[test]
fn svg_and_format_toggles() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(granlab(dir.path(), &["riemann", "--svg", "--no-json"]).status.code(), Some(0));
    assert!(dir.path().join("fronts.svg").exists());
    assert!(!dir.path().join("regime.json").exists());
    assert!(dir.path().join("fronts.csv").exists());
}
