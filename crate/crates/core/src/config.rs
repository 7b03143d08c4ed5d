//! Run configuration: a TOML document with one table per concern.
//!
//! Every key is optional; missing keys take the defaults below and unknown
//! keys are rejected with their full path.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channel::DEFAULT_LOSS_DB_PER_KM;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::information::Scheme;
use crate::rate::{Numerics, PhotonGrid, PANEL_ORDER};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub channel: ChannelSection,
    pub signal: SignalSection,
    pub protocol: ProtocolSection,
    pub numerics: NumericsSection,
    pub sweep: SweepSection,
    pub optimize: OptimizeSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub loss_db_per_km: f64,
    /// Detector transmission.
    pub eta2: f64,
    /// Total excess noise seen by Bob.
    pub xi: f64,
    /// Distance used by `rate`, `optimize` and `converge`.
    pub distance_km: f64,
    /// Share of `xi` added inside the detector.
    pub xi2_fraction: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            loss_db_per_km: DEFAULT_LOSS_DB_PER_KM,
            eta2: 1.0,
            xi: 0.01,
            distance_km: 20.0,
            xi2_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalSection {
    pub alpha_sq: f64,
    /// Reconciliation efficiency factor in `I_AB = 1 - f h(ε)`.
    pub f: f64,
}

impl Default for SignalSection {
    fn default() -> Self {
        Self { alpha_sq: 0.5, f: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub scheme: Scheme,
    pub sifting: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    pub n_trunc: usize,
    pub y_nodes: usize,
    pub m_grid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<f64>,
    pub parity_shortcut: bool,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let n = Numerics::default();
        Self {
            n_trunc: n.n_trunc,
            y_nodes: n.y_nodes,
            m_grid: n.m_grid,
            m_max: n.m_max,
            parity_shortcut: n.parity_shortcut,
            threads: 0,
        }
    }
}

impl NumericsSection {
    pub fn to_numerics(&self) -> Numerics {
        Numerics {
            n_trunc: self.n_trunc,
            y_nodes: self.y_nodes,
            m_grid: self.m_grid,
            m_max: self.m_max,
            parity_shortcut: self.parity_shortcut,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub distances_km: Vec<f64>,
    pub xi2_fractions: Vec<f64>,
    pub schemes: Vec<Scheme>,
    /// Optimize the photon number at every sweep point.
    pub optimize: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            distances_km: (1..=16).map(|i| 5.0 * i as f64).collect(),
            xi2_fractions: vec![0.0, 0.3, 0.5, 0.8],
            schemes: Scheme::ALL.to_vec(),
            optimize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    pub alpha_sq_min: f64,
    pub alpha_sq_max: f64,
    pub alpha_sq_step: f64,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        let g = PhotonGrid::default();
        Self {
            alpha_sq_min: g.start,
            alpha_sq_max: g.stop,
            alpha_sq_step: g.step,
        }
    }
}

impl OptimizeSection {
    pub fn grid(&self) -> PhotonGrid {
        PhotonGrid {
            start: self.alpha_sq_min,
            stop: self.alpha_sq_max,
            step: self.alpha_sq_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// CSV destination when `--out` is not given; standard output otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn require(cond: bool, path: &str, message: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(path, message))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| invalid("", e.to_string().trim_end()))?;
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().message().trim_end().to_string();
        invalid(&path, message)
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config tables serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.channel;
        require(c.loss_db_per_km > 0.0, "channel.loss_db_per_km", "must be > 0")?;
        require(c.eta2 > 0.0 && c.eta2 <= 1.0, "channel.eta2", "must lie in (0, 1]")?;
        require(c.xi >= 0.0 && c.xi.is_finite(), "channel.xi", "must be >= 0")?;
        require(
            c.distance_km >= 0.0 && c.distance_km.is_finite(),
            "channel.distance_km",
            "must be >= 0",
        )?;
        require(
            (0.0..=1.0).contains(&c.xi2_fraction),
            "channel.xi2_fraction",
            "must lie in [0, 1]",
        )?;

        let s = &self.signal;
        require(
            s.alpha_sq > 0.0 && s.alpha_sq.is_finite(),
            "signal.alpha_sq",
            "must be > 0",
        )?;
        require(s.f >= 1.0 && s.f.is_finite(), "signal.f", "must be >= 1")?;

        let n = &self.numerics;
        require(n.n_trunc >= 1, "numerics.n_trunc", "must be >= 1")?;
        require(n.y_nodes >= 1, "numerics.y_nodes", "must be >= 1")?;
        require(
            n.m_grid >= PANEL_ORDER && n.m_grid.is_multiple_of(PANEL_ORDER),
            "numerics.m_grid",
            "must be a positive multiple of 8",
        )?;
        if let Some(m) = n.m_max {
            require(m > 0.0 && m.is_finite(), "numerics.m_max", "must be > 0")?;
        }

        let w = &self.sweep;
        require(!w.distances_km.is_empty(), "sweep.distances_km", "must not be empty")?;
        require(
            w.distances_km.iter().all(|d| *d > 0.0 && d.is_finite()),
            "sweep.distances_km",
            "distances must be > 0",
        )?;
        require(!w.xi2_fractions.is_empty(), "sweep.xi2_fractions", "must not be empty")?;
        require(
            w.xi2_fractions.iter().all(|f| (0.0..=1.0).contains(f)),
            "sweep.xi2_fractions",
            "fractions must lie in [0, 1]",
        )?;
        require(!w.schemes.is_empty(), "sweep.schemes", "must not be empty")?;

        let o = &self.optimize;
        require(o.alpha_sq_min > 0.0, "optimize.alpha_sq_min", "must be > 0")?;
        require(o.alpha_sq_step > 0.0, "optimize.alpha_sq_step", "must be > 0")?;
        require(
            o.alpha_sq_max >= o.alpha_sq_min,
            "optimize.alpha_sq_max",
            "must be >= alpha_sq_min",
        )?;
        Ok(())
    }
}
