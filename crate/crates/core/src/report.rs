//! CSV rows and plot scripts.
//!
//! Numbers are written in plain decimal notation with 10 significant
//! digits so that output is byte-stable and readable by any tool.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::information::Scheme;
use crate::rate::{ConvergenceReport, KeyRatePoint, ProtocolConfig};

pub const RESULT_COLUMNS: [&str; 13] = [
    "distance_km",
    "eta1",
    "xi1",
    "eta2",
    "xi2",
    "alpha_sq",
    "scheme",
    "key_rate",
    "postselection_fraction",
    "n_trunc",
    "y_nodes",
    "m_grid",
    "converged",
];

pub const CONVERGENCE_COLUMNS: [&str; 11] = [
    "scheme",
    "n_trunc",
    "y_nodes",
    "m_grid",
    "key_rate",
    "refined_n_trunc",
    "refined_y_nodes",
    "refined_m_grid",
    "refined_key_rate",
    "relative_change",
    "converged",
];

/// `x` in decimal notation with 10 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp <= 9 {
        return format!("{:.*}", (9 - exp) as usize, x);
    }
    let sign = if x < 0.0 { "-" } else { "" };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    format!("{sign}{digits}{}", "0".repeat((exp - 9) as usize))
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// One computed point. Fields that could not be computed are `None` and
/// serialize as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub distance_km: f64,
    pub eta1: Option<f64>,
    pub xi1: Option<f64>,
    pub eta2: Option<f64>,
    pub xi2: Option<f64>,
    pub alpha_sq: f64,
    pub scheme: Scheme,
    pub key_rate: Option<f64>,
    pub postselection_fraction: Option<f64>,
    pub n_trunc: usize,
    pub y_nodes: usize,
    pub m_grid: usize,
    pub converged: bool,
}

impl ResultRow {
    pub fn from_point(distance_km: f64, alpha_sq: f64, point: &KeyRatePoint) -> Self {
        let mut row = Self::from_config(distance_km, alpha_sq, &point.config);
        row.key_rate = Some(point.rate);
        row.postselection_fraction = Some(point.postselection_fraction);
        row.converged = point.converged;
        row
    }

    /// Row for a configuration whose rate failed.
    pub fn from_config(distance_km: f64, alpha_sq: f64, cfg: &ProtocolConfig) -> Self {
        let l = &cfg.link;
        let n = &cfg.numerics;
        Self {
            distance_km,
            eta1: Some(l.channel.eta),
            xi1: Some(l.channel.xi),
            eta2: Some(l.detector.eta),
            xi2: Some(l.detector.xi),
            alpha_sq,
            scheme: cfg.scheme,
            key_rate: None,
            postselection_fraction: None,
            n_trunc: n.n_trunc,
            y_nodes: n.y_nodes,
            m_grid: n.m_grid,
            converged: false,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.key_rate.is_some()
    }

    fn record(&self) -> [String; 13] {
        [
            format_number(self.distance_km),
            opt(self.eta1),
            opt(self.xi1),
            opt(self.eta2),
            opt(self.xi2),
            format_number(self.alpha_sq),
            self.scheme.to_string(),
            opt(self.key_rate),
            opt(self.postselection_fraction),
            self.n_trunc.to_string(),
            self.y_nodes.to_string(),
            self.m_grid.to_string(),
            self.converged.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub scheme: Scheme,
    pub base: [usize; 3],
    pub key_rate: f64,
    pub refined: [usize; 3],
    pub refined_key_rate: f64,
    pub relative_change: f64,
    pub converged: bool,
}

impl ConvergenceRow {
    pub fn from_report(r: &ConvergenceReport) -> Self {
        let triple = |p: &KeyRatePoint| {
            let n = &p.config.numerics;
            [n.n_trunc, n.y_nodes, n.m_grid]
        };
        Self {
            scheme: r.base.config.scheme,
            base: triple(&r.base),
            key_rate: r.base.rate,
            refined: triple(&r.refined),
            refined_key_rate: r.refined.rate,
            relative_change: r.relative_change,
            converged: r.converged,
        }
    }

    fn record(&self) -> Vec<String> {
        let mut out = vec![self.scheme.to_string()];
        out.extend(self.base.iter().map(usize::to_string));
        out.push(format_number(self.key_rate));
        out.extend(self.refined.iter().map(usize::to_string));
        out.push(format_number(self.refined_key_rate));
        out.push(format_number(self.relative_change));
        out.push(self.converged.to_string());
        out
    }
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: "<csv>".to_string(),
        message: e.to_string(),
    }
}

fn write_records<W: Write, R: AsRef<[u8]>>(
    out: W,
    header: &[&str],
    records: impl Iterator<Item = Vec<R>>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for r in records {
        w.write_record(&r).map_err(csv_error)?;
    }
    w.flush().map_err(csv_error)
}

pub fn write_result_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    write_records(out, &RESULT_COLUMNS, rows.iter().map(|r| r.record().to_vec()))
}

pub fn write_convergence_csv<W: Write>(out: W, rows: &[ConvergenceRow]) -> Result<()> {
    write_records(out, &CONVERGENCE_COLUMNS, rows.iter().map(ConvergenceRow::record))
}

/// `(α², rate)` pairs of a photon-number scan.
pub fn write_scan_csv<W: Write>(out: W, scan: &[(f64, f64)]) -> Result<()> {
    write_records(
        out,
        &["alpha_sq", "key_rate"],
        scan.iter().map(|(a, r)| vec![format_number(*a), format_number(*r)]),
    )
}

pub fn result_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_result_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Gnuplot script drawing key rate against distance, one curve per
/// `(scheme, ξ2)` in first-appearance order, from the CSV at `csv_path`.
pub fn gnuplot_script(csv_path: &Path, rows: &[ResultRow]) -> String {
    let mut curves: Vec<(Scheme, String)> = Vec::new();
    for r in rows {
        let key = (r.scheme, opt(r.xi2));
        if !curves.contains(&key) {
            curves.push(key);
        }
    }
    let png = csv_path.with_extension("png");
    let csv = quoted(&csv_path.display().to_string());
    let mut s = String::new();
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output {}\n", quoted(&png.display().to_string())));
    s.push_str("set logscale y\n");
    s.push_str("set format y \"10^{%L}\"\n");
    s.push_str("set xlabel \"distance (km)\"\n");
    s.push_str("set ylabel \"key rate (bits per pulse)\"\n");
    s.push_str("set key outside right\n");
    s.push_str("plot \\\n");
    let lines: Vec<String> = curves
        .iter()
        .map(|(scheme, xi2)| {
            format!(
                "  {csv} skip 1 using 1:((strcol(7) eq \"{scheme}\" && strcol(5) eq \"{xi2}\" && $8 > 0) ? $8 : 1/0) \
                 with linespoints title \"{} xi2 = {xi2}\"",
                scheme.as_str().to_uppercase()
            )
        })
        .collect();
    s.push_str(&lines.join(", \\\n"));
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(0.5), "0.5000000000");
        assert_eq!(format_number(20.0), "20.00000000");
        assert_eq!(format_number(1.0 / 3.0), "0.3333333333");
        assert_eq!(format_number(1.2345678901234e-7), "0.0000001234567890");
        assert_eq!(format_number(-2.5e-3), "-0.002500000000");
        assert_eq!(format_number(0.99999999999), "1.000000000");
        assert_eq!(format_number(123456789012.0), "123456789000");
    }
}
