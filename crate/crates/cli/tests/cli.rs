use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, config: &str, args: &[&str]) -> (Output, String) {
    let cfg = dir.join("experiment.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out.csv");
    let output = Command::new(env!("CARGO_BIN_EXE_oqs-adiabatic"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    let csv = std::fs::read_to_string(&out).unwrap_or_default();
    (output, csv)
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let idx = rdr
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == name)
        .unwrap();
    rdr.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

const SWEEP: &str = r#"
model = "deutsch"
gamma0_over_omega = [0.05, 0.1]
tau_scan = [2.0, 4.0]
grid_points = 51
seed = 11
"#;

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let (a, first) = run(dir.path(), SWEEP, &["sweep"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let (_, second) = run(dir.path(), SWEEP, &["sweep", "--jobs", "1"]);
    assert_eq!(first, second);
    assert_eq!(first.lines().count(), 5);
    assert!(first.starts_with("model,gamma0_over_omega,"));
    assert!(column(&first, "status").iter().all(|s| s == "ok"));
    for x in column(&first, "infidelity") {
        assert!(x.parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn landau_zener_sweep_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = "model = \"landau_zener\"\ngamma0_over_omega = 0.1\ntau_scan = { start = 2.0, stop = 6.0, points = 3 }\n\
               grid_points = 51\nspectral_source = \"numeric\"\n";
    let (out, csv) = run(dir.path(), cfg, &["sweep"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let xi: Vec<f64> = column(&csv, "xi_max")
        .iter()
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(xi.len(), 3);
    assert!(xi.windows(2).all(|w| w[1] < w[0]), "{xi:?}");
}

#[test]
fn config_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    for cfg in [
        "model = \"deutsch\"\ngamma0_over_omega = 0.1\ntau_scan = []\n",
        "model = \"deutsch\"\ngamma0_over_omega = 0.1\ntau_scan = [1.0]\ngrid_points = 20\n",
        "model = \"deutsch\"\ngamma0_over_omega = 0.1\ntau_scan = [1.0]\nunknown_key = 3\n",
        "model = \"deutsch\"\ngamma0_over_omega = [0.1\n",
    ] {
        let (out, _) = run(dir.path(), cfg, &["sweep"]);
        assert_eq!(out.status.code(), Some(1), "{cfg}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
    let (out, _) = run(dir.path(), SWEEP, &["sweep", "--grid", "10"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numeric_failure_in_every_row_exits_with_two() {
    let dir = TempDir::new().unwrap();
    // gamma0 = omega is the exceptional point of the closed-form spectrum.
    let cfg = "model = \"deutsch\"\ngamma0_over_omega = 1.0\ntau_scan = [2.0]\ngrid_points = 51\n";
    let (out, csv) = run(dir.path(), cfg, &["conditions"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(column(&csv, "status")[0].starts_with("error"));
}

#[test]
fn failed_rows_do_not_stop_the_run() {
    let dir = TempDir::new().unwrap();
    let cfg =
        "model = \"deutsch\"\ngamma0_over_omega = [0.1, 1.0]\ntau_scan = [2.0]\ngrid_points = 51\n";
    let (out, csv) = run(dir.path(), cfg, &["sweep"]);
    assert_eq!(out.status.code(), Some(0));
    let status = column(&csv, "status");
    assert_eq!(status[0], "ok");
    assert!(status[1].starts_with("error"));
}

#[test]
fn spectrum_has_constant_decay_eigenvalue() {
    let dir = TempDir::new().unwrap();
    let cfg = "model = \"deutsch\"\ngamma0_over_omega = 0.1\ngrid_points = 51\n";
    let (out, csv) = run(dir.path(), cfg, &["spectrum"]);
    assert!(out.status.success());
    let last: Vec<f64> = column(&csv, "lambda3_re")
        .iter()
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(last.len(), 51);
    assert!(last.iter().all(|x| (x + 0.2).abs() < 1e-12));
    for r in column(&csv, "random_residual") {
        assert!(r.parse::<f64>().unwrap() < 1e-12);
    }
}

#[test]
fn thermo_rows_satisfy_equilibrium_relation() {
    let dir = TempDir::new().unwrap();
    let cfg = "model = \"thermo\"\n[thermo]\nbeta = 1.0\nomega_end = 1.5\npoints = 11\n";
    let (out, csv) = run(dir.path(), cfg, &["thermo"]);
    assert!(out.status.success());
    let rel: f64 = column(&csv, "relative_residual")[0].parse().unwrap();
    assert!(rel < 1e-6);

    for cfg in [
        "model = \"thermo\"\n[thermo]\nbeta = 1.0\npoints = 5\n",
        "model = \"thermo\"\n[thermo]\nbeta = 0.0\nomega_end = 2.0\npoints = 5\n",
    ] {
        let (out, csv) = run(dir.path(), cfg, &["thermo"]);
        assert!(out.status.success());
        for r in column(&csv, "residual") {
            assert!(r.parse::<f64>().unwrap() < 1e-14, "{cfg}: {r}");
        }
    }
}

#[test]
fn thermo_without_section_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let (out, _) = run(dir.path(), "model = \"deutsch\"\n", &["thermo"]);
    assert_eq!(out.status.code(), Some(1));
}
