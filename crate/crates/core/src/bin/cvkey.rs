use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use cvkey::config::load_config;
use cvkey::report::{gnuplot_script, write_scan_csv};
use cvkey::run::{run_command, Command, Table};
use cvkey::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Key rate at the configured distance.
    Rate,
    /// Rates over distances × detector-noise fractions × schemes.
    Sweep,
    /// Best photon number at the configured distance.
    Optimize,
    /// Compare the rate against refined numerical settings.
    Converge,
}

/// Postselected four-state CV-QKD key rates with a trusted noisy detector.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination (defaults to `output.path`, then standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    gnuplot: bool,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let cfg = load_config(&cli.config)?;
    let out = cli.out.or_else(|| cfg.output.path.clone());
    if cli.gnuplot && out.is_none() {
        return Err(Error::Config {
            path: "--gnuplot".into(),
            message: "needs an output file (--out or output.path)".into(),
        });
    }
    let command = match cli.command {
        Cmd::Rate => Command::Rate,
        Cmd::Sweep => Command::Sweep,
        Cmd::Optimize => Command::Optimize,
        Cmd::Converge => Command::Converge,
    };
    let output = run_command(command, &cfg)?;
    let csv = output.csv()?;
    match &out {
        Some(path) => fs::write(path, &csv).map_err(|e| io_err(path, e))?,
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| io_err(Path::new("<stdout>"), e))?,
    }
    if let (Some(scan), Some(path)) = (&output.scan, &out) {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let scan_path = path.with_file_name(format!("{stem}_scan.csv"));
        let file = fs::File::create(&scan_path).map_err(|e| io_err(&scan_path, e))?;
        write_scan_csv(file, scan)?;
        log::info!("photon-number scan written to {}", scan_path.display());
    }
    if cli.gnuplot {
        let path = out.as_ref().expect("checked above");
        let Table::Results(rows) = &output.table else {
            return Err(Error::Config {
                path: "--gnuplot".into(),
                message: "plots are available for rate, sweep and optimize".into(),
            });
        };
        let script = path.with_extension("gp");
        fs::write(&script, gnuplot_script(path, rows)).map_err(|e| io_err(&script, e))?;
    }
    if output.failures > 0 {
        log::error!("{} point(s) failed; their rows have empty rate cells", output.failures);
    }
    Ok(output.failures == 0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
