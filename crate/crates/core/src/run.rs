//! Command workflows behind the `cvkey` binary.

use crate::channel::ProtocolSignal;
use crate::config::RunConfig;
use crate::error::Result;
use crate::exec;
use crate::information::Scheme;
use crate::rate::{
    convergence_check, optimize_photon_number, secret_key_rate, sweep_distance, SweepRow, SweepTemplate,
};
use crate::report::{ConvergenceRow, ResultRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Rate,
    Sweep,
    Optimize,
    Converge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Results(Vec<ResultRow>),
    Convergence(Vec<ConvergenceRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub table: Table,
    /// Photon-number scan of `optimize`.
    pub scan: Option<Vec<(f64, f64)>>,
    /// Points whose computation failed; their rows carry empty rate cells.
    pub failures: usize,
}

impl CommandOutput {
    pub fn csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        match &self.table {
            Table::Results(rows) => crate::report::write_result_csv(&mut buf, rows)?,
            Table::Convergence(rows) => crate::report::write_convergence_csv(&mut buf, rows)?,
        }
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

pub fn template(cfg: &RunConfig, scheme: Scheme) -> Result<SweepTemplate> {
    Ok(SweepTemplate {
        xi: cfg.channel.xi,
        eta2: cfg.channel.eta2,
        loss_db_per_km: cfg.channel.loss_db_per_km,
        signal: ProtocolSignal::from_photon_number(cfg.signal.alpha_sq, cfg.signal.f)?,
        scheme,
        numerics: cfg.numerics.to_numerics(),
        sifting: cfg.protocol.sifting,
    })
}

pub fn run_command(cmd: Command, cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    exec::with_threads(cfg.numerics.threads, || match cmd {
        Command::Rate => rate(cfg),
        Command::Sweep => sweep(cfg),
        Command::Optimize => optimize(cfg),
        Command::Converge => converge(cfg),
    })
}

fn single(rows: Vec<ResultRow>, scan: Option<Vec<(f64, f64)>>) -> CommandOutput {
    let failures = rows.iter().filter(|r| !r.is_complete()).count();
    CommandOutput {
        table: Table::Results(rows),
        scan,
        failures,
    }
}

fn rate(cfg: &RunConfig) -> Result<CommandOutput> {
    let d = cfg.channel.distance_km;
    let pc = template(cfg, cfg.protocol.scheme)?.config(d, cfg.channel.xi2_fraction)?;
    let alpha_sq = cfg.signal.alpha_sq;
    let row = match secret_key_rate(&pc) {
        Ok(p) => ResultRow::from_point(d, alpha_sq, &p),
        Err(e) => {
            log::error!("rate at {d} km failed: {e}");
            ResultRow::from_config(d, alpha_sq, &pc)
        }
    };
    Ok(single(vec![row], None))
}

fn optimize(cfg: &RunConfig) -> Result<CommandOutput> {
    let d = cfg.channel.distance_km;
    let pc = template(cfg, cfg.protocol.scheme)?.config(d, cfg.channel.xi2_fraction)?;
    match optimize_photon_number(&pc, &cfg.optimize.grid()) {
        Ok(o) => {
            if o.all_zero {
                log::warn!("no photon number in the grid gives a positive rate at {d} km");
            }
            Ok(single(
                vec![ResultRow::from_point(d, o.alpha_sq, &o.point)],
                Some(o.scan),
            ))
        }
        Err(e) => {
            log::error!("photon-number scan at {d} km failed: {e}");
            Ok(single(vec![ResultRow::from_config(d, cfg.signal.alpha_sq, &pc)], None))
        }
    }
}

fn sweep(cfg: &RunConfig) -> Result<CommandOutput> {
    let s = &cfg.sweep;
    let grid = cfg.optimize.grid();
    let mut rows = Vec::new();
    let mut failures = 0;
    for &scheme in &s.schemes {
        let t = template(cfg, scheme)?;
        let computed = sweep_distance(&t, &s.distances_km, &s.xi2_fractions, s.optimize.then_some(&grid));
        // curve-major order: all distances of one fraction together
        for fi in 0..s.xi2_fractions.len() {
            for di in 0..s.distances_km.len() {
                let row = &computed[di * s.xi2_fractions.len() + fi];
                let out = sweep_row(&t, row);
                if !out.is_complete() {
                    failures += 1;
                }
                rows.push(out);
            }
        }
    }
    Ok(CommandOutput {
        table: Table::Results(rows),
        scan: None,
        failures,
    })
}

fn sweep_row(t: &SweepTemplate, row: &SweepRow) -> ResultRow {
    let d = row.distance_km;
    match &row.outcome {
        Ok(p) => ResultRow::from_point(d, p.alpha_sq, &p.point),
        Err(e) => {
            log::error!("{} at {d} km, xi2 fraction {}: {e}", t.scheme, row.xi2_fraction);
            let alpha_sq = t.signal.photon_number();
            match t.config(d, row.xi2_fraction) {
                Ok(pc) => ResultRow::from_config(d, alpha_sq, &pc),
                Err(_) => ResultRow {
                    distance_km: d,
                    eta1: None,
                    xi1: None,
                    eta2: Some(t.eta2),
                    xi2: Some(row.xi2_fraction * t.xi),
                    alpha_sq,
                    scheme: t.scheme,
                    key_rate: None,
                    postselection_fraction: None,
                    n_trunc: t.numerics.n_trunc,
                    y_nodes: t.numerics.y_nodes,
                    m_grid: t.numerics.m_grid,
                    converged: false,
                },
            }
        }
    }
}

fn converge(cfg: &RunConfig) -> Result<CommandOutput> {
    let d = cfg.channel.distance_km;
    let pc = template(cfg, cfg.protocol.scheme)?.config(d, cfg.channel.xi2_fraction)?;
    let report = convergence_check(&pc)?;
    if !report.converged {
        log::warn!(
            "rate at {d} km not converged: {} vs {} (relative change {})",
            report.base.rate,
            report.refined.rate,
            report.relative_change
        );
    }
    Ok(CommandOutput {
        table: Table::Convergence(vec![ConvergenceRow::from_report(&report)]),
        scan: None,
        failures: 0,
    })
}
