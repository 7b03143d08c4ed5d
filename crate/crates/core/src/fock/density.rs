use std::f64::consts::PI;

use crate::channel::LinkModel;
use crate::error::{Error, Result};
use crate::fock::matrix::{FactoredState, FockMatrix};
use crate::fock::wavepacket::{coefficient_columns, wavepacket_from_params};
use crate::quadrature::gauss_hermite;

/// Quadrature over the detector's outcome shift `Z = sqrt(1 - eta2) Y`.
///
/// `Z` is Gaussian with variance `(1 - eta2 + xi2) / 4`, which stays finite
/// (`xi2 / 4`) at unit detector transmission where `Y` itself is unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct YQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl YQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn detector_noise_nodes(link: &LinkModel, k: usize) -> Result<YQuadrature> {
    if k < 1 {
        return Err(Error::InvalidParameter {
            name: "y_nodes",
            value: k as f64,
            reason: "need at least one node",
        });
    }
    let variance = link.detector_shift_variance();
    if variance == 0.0 {
        return Ok(YQuadrature {
            nodes: vec![0.0],
            weights: vec![1.0],
        });
    }
    // ∫ f(z) N(0, σ²) dz = π^{-1/2} ∫ f(√2 σ t) e^{-t²} dt
    let rule = gauss_hermite(k);
    let scale = (2.0 * variance).sqrt();
    let nodes = rule.nodes.iter().map(|t| scale * t).collect();
    let total: f64 = rule.weights.iter().sum();
    let weights = rule.weights.iter().map(|w| w / total).collect();
    Ok(YQuadrature { nodes, weights })
}

/// Unnormalized `ρ_{S,m}` as a mixture of pure Gaussian states over the
/// detector-noise nodes.
pub fn eve_state(s: f64, m: f64, link: &LinkModel, n_trunc: usize, nodes: &YQuadrature) -> Result<FactoredState> {
    let packets = nodes
        .nodes
        .iter()
        .zip(&nodes.weights)
        .map(|(&z, &w)| Ok((w, wavepacket_from_params(s, m, z, link)?)))
        .collect::<Result<Vec<_>>>()?;
    let state = FactoredState {
        n_trunc,
        columns: coefficient_columns(&packets, n_trunc)?,
    };
    let trace = state.trace();
    if !(trace > 1e-300) {
        return Err(Error::Underflow { s, m, trace });
    }
    Ok(state)
}

/// Eve's conditional state in the number basis together with its trace,
/// the probability density of Bob's outcome.
pub fn eve_density_matrix(
    s: f64,
    m: f64,
    link: &LinkModel,
    n_trunc: usize,
    y_nodes: usize,
) -> Result<(FockMatrix, f64)> {
    let nodes = detector_noise_nodes(link, y_nodes)?;
    let state = eve_state(s, m, link, n_trunc, &nodes)?;
    let rho = state.to_matrix();
    let trace = rho.trace();
    Ok((rho, trace))
}

/// Closed-form `tr ρ_{S,m}`.
pub fn trace_closed_form(s: f64, m: f64, link: &LinkModel) -> f64 {
    let spread = 1.0 + link.channel.xi * link.detector.eta + link.detector.xi;
    let d = m - (link.channel.eta * link.detector.eta).sqrt() * s;
    (2.0 / PI).sqrt() * (1.0 / spread).sqrt() * (-2.0 * d * d / spread).exp()
}
