//! Eve's conditional two-mode state in a truncated photon-number basis.
//!
//! The production route writes `ρ_{S,m}` as a Gauss–Hermite mixture of pure
//! Gaussian wavepackets over the detector-noise variable and expands each
//! in closed form. [`direct`] evaluates the same elements through the
//! four-variable Gaussian kernel.

mod density;
pub mod direct;
mod matrix;
mod wavepacket;

pub use density::{detector_noise_nodes, eve_density_matrix, eve_state, trace_closed_form, YQuadrature};
pub use direct::{matrix_element_direct, quadratic_form_direct, QuadraticForm4D};
pub use matrix::{composite, FactoredState, FockMatrix};
pub use wavepacket::{fock_coefficients, hermite, number_state, wavepacket_from_params, GaussianWavepacket2D};
