//! Eve's postselected ensemble and its Holevo bound.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{bit_error_rate, LinkModel, ProtocolSignal};
use crate::error::{Error, Result};
use crate::fock::{detector_noise_nodes, eve_state, FactoredState, FockMatrix, YQuadrature};

/// Eigenvalues below this contribute nothing to an entropy.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;
/// Eigenvalues below this are treated as a numerical failure.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-6;
/// Allowed gap between `S(ρ⁰)` and `S(ρ¹)`.
pub const PARITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Direct reconciliation: Eve targets Alice's bit.
    #[default]
    #[serde(alias = "DR")]
    Dr,
    /// Reverse reconciliation: Eve targets Bob's bit.
    #[serde(alias = "RR")]
    Rr,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Dr, Scheme::Rr];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Dr => "dr",
            Scheme::Rr => "rr",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dr" => Ok(Scheme::Dr),
            "rr" => Ok(Scheme::Rr),
            other => Err(format!("unknown scheme `{other}` (expected dr or rr)")),
        }
    }
}

/// Eve's normalized states at one outcome magnitude, indexed by Alice's bit
/// `i` and Bob's bit `j`.
#[derive(Debug, Clone)]
pub struct ConditionalEnsemble {
    pub m_abs: f64,
    pub eps: f64,
    /// `[ω00, ω01, ω10, ω11]`
    pub omega: [FactoredState; 4],
    /// Unnormalized traces `tr ρ_{α,|m|}` and `tr ρ_{α,-|m|}`.
    pub traces: [f64; 2],
}

impl ConditionalEnsemble {
    pub fn omega(&self, i: usize, j: usize) -> &FactoredState {
        &self.omega[2 * i + j]
    }

    pub fn omega_matrix(&self, i: usize, j: usize) -> FockMatrix {
        self.omega(i, j).to_matrix()
    }
}

pub fn sliced_states(
    m_abs: f64,
    signal: &ProtocolSignal,
    link: &LinkModel,
    n_trunc: usize,
    y_nodes: usize,
) -> Result<ConditionalEnsemble> {
    let nodes = detector_noise_nodes(link, y_nodes)?;
    build_ensemble(m_abs, signal, link, n_trunc, &nodes, true)
}

/// Same as [`sliced_states`] but computes all four states directly instead
/// of obtaining `ω11`, `ω10` by parity conjugation.
pub fn sliced_states_full(
    m_abs: f64,
    signal: &ProtocolSignal,
    link: &LinkModel,
    n_trunc: usize,
    y_nodes: usize,
) -> Result<ConditionalEnsemble> {
    let nodes = detector_noise_nodes(link, y_nodes)?;
    build_ensemble(m_abs, signal, link, n_trunc, &nodes, false)
}

pub(crate) fn build_ensemble(
    m_abs: f64,
    signal: &ProtocolSignal,
    link: &LinkModel,
    n_trunc: usize,
    nodes: &YQuadrature,
    parity_shortcut: bool,
) -> Result<ConditionalEnsemble> {
    if !(m_abs > 0.0) {
        return Err(Error::ZeroSlice);
    }
    let alpha = signal.alpha;
    let eps = bit_error_rate(m_abs, alpha, &link.total());
    let rho00 = eve_state(alpha, m_abs, link, n_trunc, nodes)?;
    let rho01 = eve_state(alpha, -m_abs, link, n_trunc, nodes)?;
    let traces = [rho00.trace(), rho01.trace()];
    let w00 = rho00.scaled(1.0 / traces[0]);
    let w01 = rho01.scaled(1.0 / traces[1]);
    let (w10, w11) = if parity_shortcut {
        (w01.parity_flipped(), w00.parity_flipped())
    } else {
        let rho10 = eve_state(-alpha, m_abs, link, n_trunc, nodes)?;
        let rho11 = eve_state(-alpha, -m_abs, link, n_trunc, nodes)?;
        (rho10.normalized()?, rho11.normalized()?)
    };
    Ok(ConditionalEnsemble {
        m_abs,
        eps,
        omega: [w00, w01, w10, w11],
        traces,
    })
}

/// `(ρ⁰, ρ¹)` for the given scheme in factored form.
pub(crate) fn factored_mixtures(ens: &ConditionalEnsemble, scheme: Scheme) -> (FactoredState, FactoredState) {
    let keep = 1.0 - ens.eps;
    let flip = ens.eps;
    let [w00, w01, w10, w11] = &ens.omega;
    match scheme {
        Scheme::Dr => (
            FactoredState::mixture(&[(keep, w00), (flip, w01)]),
            FactoredState::mixture(&[(keep, w11), (flip, w10)]),
        ),
        Scheme::Rr => (
            FactoredState::mixture(&[(keep, w00), (flip, w10)]),
            FactoredState::mixture(&[(keep, w11), (flip, w01)]),
        ),
    }
}

/// `(ρ⁰, ρ¹, (ρ⁰ + ρ¹)/2)` for the given scheme.
pub fn reconciliation_mixtures(ens: &ConditionalEnsemble, scheme: Scheme) -> (FockMatrix, FockMatrix, FockMatrix) {
    let (r0, r1) = factored_mixtures(ens, scheme);
    let (r0, r1) = (r0.to_matrix(), r1.to_matrix());
    let avg = FockMatrix::combine(&[(0.5, &r0), (0.5, &r1)]);
    (r0, r1, avg)
}

/// `-Σ λ log2 λ` over a spectrum, with the floor and negativity policy.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < -NEGATIVITY_TOLERANCE {
            return Err(Error::NegativeEigenvalue(l));
        }
        if l > EIGENVALUE_FLOOR {
            s -= l * l.log2();
        }
    }
    Ok(s)
}

pub fn von_neumann_entropy(rho: &FockMatrix) -> Result<f64> {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// Spectral summary of the states entering one Holevo evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoDetails {
    pub chi: f64,
    pub entropy_avg: f64,
    pub entropy0: f64,
    pub entropy1: f64,
    /// Most negative eigenvalue seen across `ρ⁰, ρ¹, ρ`.
    pub min_eigenvalue: f64,
    /// Largest `|tr - 1|` across `ρ⁰, ρ¹, ρ`.
    pub trace_error: f64,
}

pub fn holevo(ens: &ConditionalEnsemble, scheme: Scheme) -> Result<f64> {
    holevo_details(ens, scheme).map(|d| d.chi)
}

pub fn holevo_details(ens: &ConditionalEnsemble, scheme: Scheme) -> Result<HolevoDetails> {
    let (r0, r1) = factored_mixtures(ens, scheme);
    let avg = FactoredState::mixture(&[(0.5, &r0), (0.5, &r1)]);
    let mut min_eigenvalue = f64::INFINITY;
    let mut trace_error: f64 = 0.0;
    let mut entropy = |state: &FactoredState| -> Result<f64> {
        let spectrum = state.spectrum();
        min_eigenvalue = min_eigenvalue.min(spectrum.first().copied().unwrap_or(0.0));
        trace_error = trace_error.max((state.trace() - 1.0).abs());
        entropy_of_spectrum(&spectrum)
    };
    let entropy0 = entropy(&r0)?;
    let entropy1 = entropy(&r1)?;
    let entropy_avg = entropy(&avg)?;
    if (entropy0 - entropy1).abs() > PARITY_TOLERANCE {
        return Err(Error::ParityMismatch(entropy0, entropy1));
    }
    Ok(HolevoDetails {
        chi: entropy_avg - 0.5 * (entropy0 + entropy1),
        entropy_avg,
        entropy0,
        entropy1,
        min_eigenvalue,
        trace_error,
    })
}
