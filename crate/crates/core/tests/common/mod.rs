//! Independent reference computations shared by the integration tests and
//! the acceptance runner.
#![allow(dead_code)]

use cvkey::fock::FockMatrix;
use cvkey::information::Scheme;
use cvkey::rate::KeyRatePoint;
use nalgebra::{DMatrix, SymmetricEigen};

pub fn entropy_bits(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().filter(|&&l| l > 1e-15).map(|&l| -l * l.log2()).sum()
}

pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// Error probability of the sign decision at `|m|` for a coherent state
/// of amplitude `alpha` through a channel `(eta, xi)`.
pub fn sign_error(m_abs: f64, alpha: f64, eta: f64, xi: f64) -> f64 {
    let v = (1.0 + xi) / 4.0;
    let mu = eta.sqrt() * alpha;
    let g = |x: f64| (-(x - mu).powi(2) / (2.0 * v)).exp();
    let h = |x: f64| (-(x + mu).powi(2) / (2.0 * v)).exp();
    h(m_abs) / (g(m_abs) + h(m_abs))
}

/// Nonzero spectrum of `Σ_k p_k |ψ_k⟩⟨ψ_k|` from the Gram matrix of the
/// pure states.
fn mixture_spectrum(weights: &[f64], gram: &DMatrix<f64>) -> Vec<f64> {
    let n = weights.len();
    let m = DMatrix::from_fn(n, n, |i, j| (weights[i] * weights[j]).sqrt() * gram[(i, j)]);
    SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
}

/// Holevo quantity when Eve holds the coherent state `|±β⟩` (sign given by
/// Alice's bit) and nothing else, so every conditional state is pure.
pub fn coherent_holevo(beta: f64, eps: f64, scheme: Scheme) -> f64 {
    // states ordered ω00, ω01, ω10, ω11; Alice's bit fixes the amplitude
    let amp = [beta, beta, -beta, -beta];
    let gram = DMatrix::from_fn(4, 4, |i, j| (-(amp[i] - amp[j]).powi(2) / 2.0).exp());
    let k = 1.0 - eps;
    let (w0, w1) = match scheme {
        Scheme::Dr => ([k, eps, 0.0, 0.0], [0.0, 0.0, eps, k]),
        Scheme::Rr => ([k, 0.0, eps, 0.0], [0.0, eps, 0.0, k]),
    };
    let avg: Vec<f64> = (0..4).map(|i| 0.5 * (w0[i] + w1[i])).collect();
    let s = |w: &[f64]| entropy_bits(&mixture_spectrum(w, &gram));
    s(&avg) - 0.5 * (s(&w0) + s(&w1))
}

/// `∫₀^{m_max} [P(m|α) + P(-m|α)] (1 - f h(ε(m))) dm` by composite Simpson.
pub fn chi_free_rate(alpha: f64, eta: f64, xi: f64, f: f64, m_max: f64) -> f64 {
    let v = (1.0 + xi) / 4.0;
    let mu = eta.sqrt() * alpha;
    let pdf = |x: f64| (-(x - mu).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
    let g = |m: f64| {
        let e = sign_error(m, alpha, eta, xi);
        (pdf(m) + pdf(-m)) * (1.0 - f * binary_entropy(e)).max(0.0)
    };
    let n = 20_000;
    let h = m_max / n as f64;
    let mut sum = g(0.0) + g(m_max);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    sum * h / 3.0
}

/// Distance at which `rates` (sampled at increasing `distances`) first falls
/// to `level`, interpolating `log10(rate)` linearly between grid points.
pub fn crossing_distance(distances: &[f64], rates: &[f64], level: f64) -> Option<f64> {
    for i in 0..distances.len().saturating_sub(1) {
        let (r0, r1) = (rates[i], rates[i + 1]);
        if r0 >= level && r1 < level {
            if r1 <= 0.0 {
                // no log-scale point below; fall back to linear in rate
                return Some(distances[i] + (distances[i + 1] - distances[i]) * (r0 - level) / (r0 - r1));
            }
            let (l0, l1, lt) = (r0.log10(), r1.log10(), level.log10());
            return Some(distances[i] + (distances[i + 1] - distances[i]) * (l0 - lt) / (l0 - l1));
        }
    }
    None
}

/// Running record of spectral checks on every state produced.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumAudit {
    pub matrices: usize,
    pub points: usize,
    pub max_trace_error: f64,
    pub max_asymmetry: f64,
    pub min_eigenvalue: f64,
    pub chi_min: f64,
    pub chi_max: f64,
    pub unhealthy_points: usize,
}

impl Default for SpectrumAudit {
    fn default() -> Self {
        Self {
            matrices: 0,
            points: 0,
            max_trace_error: 0.0,
            max_asymmetry: 0.0,
            min_eigenvalue: f64::INFINITY,
            chi_min: f64::INFINITY,
            chi_max: f64::NEG_INFINITY,
            unhealthy_points: 0,
        }
    }
}

impl SpectrumAudit {
    /// Checks a state that is supposed to have unit trace.
    pub fn matrix(&mut self, rho: &FockMatrix) {
        self.matrices += 1;
        self.max_trace_error = self.max_trace_error.max((rho.trace() - 1.0).abs());
        self.max_asymmetry = self.max_asymmetry.max(rho.asymmetry());
        let ev = rho.eigenvalues();
        self.min_eigenvalue = self.min_eigenvalue.min(ev.first().copied().unwrap_or(0.0));
    }

    pub fn chi(&mut self, chi: f64) {
        self.chi_min = self.chi_min.min(chi);
        self.chi_max = self.chi_max.max(chi);
    }

    /// Folds in the diagnostics gathered while integrating a key rate.
    pub fn point(&mut self, p: &KeyRatePoint) {
        let d = &p.diagnostics;
        self.points += 1;
        self.matrices += 3 * d.slices;
        self.max_trace_error = self.max_trace_error.max(d.trace_error);
        self.min_eigenvalue = self.min_eigenvalue.min(d.min_eigenvalue);
        if d.slices > 0 {
            self.chi(d.chi_min);
            self.chi(d.chi_max);
        }
        if !p.converged {
            self.unhealthy_points += 1;
        }
    }

    pub fn passes(&self) -> bool {
        self.max_trace_error <= 1e-8
            && self.max_asymmetry <= 1e-10
            && self.min_eigenvalue >= -1e-8
            && self.chi_min >= 0.0
            && self.chi_max <= 1.0
    }
}
