use std::fs;
use std::process::Command as Process;

use cvkey::config::{parse_config, RunConfig};
use cvkey::information::Scheme;
use cvkey::report::RESULT_COLUMNS;
use cvkey::run::{run_command, Command, Table};
use cvkey::Error;

const SMALL: &str = r#"
[channel]
distance_km = 25
xi2_fraction = 0.5

[numerics]
n_trunc = 8
y_nodes = 9
m_grid = 16

[sweep]
distances_km = [10, 30]
xi2_fractions = [0, 0.8]
schemes = ["dr", "RR"]

[optimize]
alpha_sq_min = 0.5
alpha_sq_max = 0.5
"#;

fn config_path(path: &Error) -> String {
    match path {
        Error::Config { path, .. } => path.clone(),
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn empty_document_gives_defaults() {
    let cfg = parse_config("").unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert_eq!(cfg.signal.f, 1.0);
    assert_eq!(cfg.channel.loss_db_per_km, 0.2);
    assert_eq!(cfg.numerics.n_trunc, 12);
    assert_eq!(cfg.numerics.y_nodes, 21);
    assert_eq!(cfg.sweep.xi2_fractions, vec![0.0, 0.3, 0.5, 0.8]);
}

#[test]
fn out_of_range_and_unknown_keys_are_rejected_with_path() {
    let e = parse_config("[channel]\nxi2_fraction = 1.2\n").unwrap_err();
    assert_eq!(config_path(&e), "channel.xi2_fraction");
    let e = parse_config("[signal]\nalpha = 0.5\n").unwrap_err();
    assert_eq!(config_path(&e), "signal.alpha");
    let e = parse_config("[numerics]\nm_grid = 20\n").unwrap_err();
    assert_eq!(config_path(&e), "numerics.m_grid");
    let e = parse_config("[sweep]\nschemes = [\"xx\"]\n").unwrap_err();
    assert!(config_path(&e).starts_with("sweep.schemes"));
    assert!(parse_config("[channel\n").is_err());
}

#[test]
fn round_trip() {
    for text in ["", SMALL, "[numerics]\nm_max = 3.5\n[output]\npath = \"x.csv\"\n"] {
        let cfg = parse_config(text).unwrap();
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }
}

#[test]
fn sweep_emits_curves_in_fixed_schema() {
    let cfg = parse_config(SMALL).unwrap();
    let out = run_command(Command::Sweep, &cfg).unwrap();
    assert_eq!(out.failures, 0);
    let csv = out.csv().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), RESULT_COLUMNS.join(","));
    assert_eq!(lines.count(), 2 * 2 * 2);
    assert!(!csv.contains('\r'));
    let Table::Results(rows) = &out.table else { panic!() };
    assert_eq!(rows[0].scheme, Scheme::Dr);
    assert_eq!(rows[7].scheme, Scheme::Rr);
    for r in rows {
        let (e1, x1, e2, x2) = (r.eta1.unwrap(), r.xi1.unwrap(), r.eta2.unwrap(), r.xi2.unwrap());
        assert!((e1 * e2 - 10f64.powf(-0.02 * r.distance_km)).abs() < 1e-12);
        assert!((x1 * e2 + x2 - 0.01).abs() < 1e-12);
        assert!(r.key_rate.unwrap().is_finite());
    }
}

#[test]
fn optimize_over_singleton_equals_rate() {
    let cfg = parse_config(SMALL).unwrap();
    let rate = run_command(Command::Rate, &cfg).unwrap().csv().unwrap();
    let opt = run_command(Command::Optimize, &cfg).unwrap();
    assert_eq!(opt.csv().unwrap(), rate);
    assert_eq!(opt.scan.unwrap().len(), 1);
}

#[test]
fn converge_reports_both_settings() {
    let cfg = parse_config(SMALL).unwrap();
    let csv = run_command(Command::Converge, &cfg).unwrap().csv().unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..4], &["dr", "8", "9", "16"]);
    assert_eq!(&row[5..8], &["12", "19", "32"]);
}

fn cvkey() -> Process {
    Process::new(env!("CARGO_BIN_EXE_cvkey"))
}

#[test]
fn cli_rate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.toml");
    fs::write(&conf, SMALL).unwrap();
    let a = cvkey().arg("rate").arg("--config").arg(&conf).output().unwrap();
    let b = cvkey().arg("rate").arg("--config").arg(&conf).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 2);
}

#[test]
fn cli_writes_files_and_gnuplot_script() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.toml");
    fs::write(&conf, SMALL).unwrap();
    let out = dir.path().join("sweep.csv");
    let status = cvkey()
        .args(["sweep", "--gnuplot", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let script = fs::read_to_string(dir.path().join("sweep.gp")).unwrap();
    assert!(script.contains(&out.display().to_string()));
    assert_eq!(script.matches("linespoints").count(), 4);

    let opt_out = dir.path().join("opt.csv");
    let status = cvkey()
        .arg("optimize")
        .arg("--config")
        .arg(&conf)
        .arg("--out")
        .arg(&opt_out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("opt_scan.csv").exists());
}

#[test]
fn cli_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.toml");
    fs::write(&conf, SMALL).unwrap();
    // plot without a file to reference
    let o = cvkey()
        .args(["rate", "--gnuplot", "--config"])
        .arg(&conf)
        .output()
        .unwrap();
    assert!(!o.status.success());
    fs::write(&conf, "[channel]\nxi2_fraction = 1.2\n").unwrap();
    let o = cvkey().arg("rate").arg("--config").arg(&conf).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("channel.xi2_fraction"));
    let o = cvkey()
        .args(["rate", "--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert!(!o.status.success());
}
