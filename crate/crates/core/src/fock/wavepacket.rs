use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Vector2};

use crate::channel::LinkModel;
use crate::error::{Error, Result};

/// Real two-mode Gaussian wavefunction `exp(-xᵀ M x + 2 xᵀ v + c0)` over the
/// quadratures `(x1, x2)` of Eve's modes `E1, E2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWavepacket2D {
    pub m: Matrix2<f64>,
    pub v: Vector2<f64>,
    /// Log of the prefactor.
    pub c0: f64,
}

impl GaussianWavepacket2D {
    pub fn new(m: Matrix2<f64>, v: Vector2<f64>, c0: f64) -> Result<Self> {
        let finite = m.iter().chain(v.iter()).all(|x| x.is_finite()) && c0.is_finite();
        let min_eigenvalue = min_eigenvalue_2x2(&m);
        if !finite || (m[(0, 1)] - m[(1, 0)]).abs() > 1e-14 * m.amax() || min_eigenvalue <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }
        Ok(Self { m, v, c0 })
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let x = Vector2::new(x1, x2);
        (-(x.dot(&(self.m * x))) + 2.0 * x.dot(&self.v) + self.c0).exp()
    }
}

fn min_eigenvalue_2x2(m: &Matrix2<f64>) -> f64 {
    let tr = m[(0, 0)] + m[(1, 1)];
    let diff = m[(0, 0)] - m[(1, 1)];
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    0.5 * (tr - (diff * diff + 4.0 * off * off).sqrt())
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Number-state wavefunction `u_n(x)` in the `x = (a + a†)/2` convention.
pub fn number_state(n: usize, x: f64) -> f64 {
    // (2/π)^{1/4} H_n(√2 x) e^{-x²} / sqrt(2^n n!), evaluated by the
    // normalized recurrence to stay finite for large n
    let y = 2f64.sqrt() * x;
    let mut u0 = (2.0 / PI).powf(0.25) * (-x * x).exp();
    if n == 0 {
        return u0;
    }
    let mut u1 = 2f64.sqrt() * y * u0;
    for k in 1..n {
        let kf = k as f64;
        let u2 = (2.0 / (kf + 1.0)).sqrt() * y * u1 - (kf / (kf + 1.0)).sqrt() * u0;
        u0 = u1;
        u1 = u2;
    }
    u1
}

/// Eve's pure conditional state on `E1 E2` when Alice sent `s`, Bob saw `m`
/// and the detector added the outcome shift `shift` (the detector noise
/// variable `sqrt(1 - eta2) Y`).
///
/// With `u = (m + shift) / sqrt(eta2)` the wavefunction is
///
/// ```text
/// (8/(π³ η2))^{1/4}
///   · exp(-[√(1-η1) x2 + √η1 u - s]²)
///   · exp(-V1/2 [x1 + √η1 x2 - √(1-η1) u]²)
///   · exp(-1/(2V1) [x1 - √η1 x2 + √(1-η1) u]²)
/// ```
pub fn wavepacket_from_params(s: f64, m: f64, shift: f64, link: &LinkModel) -> Result<GaussianWavepacket2D> {
    let eta1 = link.channel.eta;
    let eta2 = link.detector.eta;
    let a = (1.0 - eta1).sqrt();
    let b = eta1.sqrt();
    let c = 0.5 * link.v1;
    let d = 0.5 / link.v1;
    let w1 = c + d;
    let u = (m + shift) / eta2.sqrt();
    let t = b * u - s;

    let mm = Matrix2::new(w1, b * (c - d), b * (c - d), a * a + b * b * w1);
    let v = Vector2::new(a * u * (c - d), -a * t + a * b * u * w1);
    let c0 = 0.25 * (8.0 / (PI.powi(3) * eta2)).ln() - t * t - w1 * a * a * u * u;
    GaussianWavepacket2D::new(mm, v, c0)
}

/// Expansion coefficients `c[n1, n2] = ∬ u_{n1}(x1) u_{n2}(x2) ψ(x1, x2)`
/// for `n1, n2 < n_trunc`, row-major in `n1`.
///
/// Integrating the number-state generating function
/// `Σ_n u_n(x) tⁿ/√(n!) = (2/π)^{1/4} exp(-x² + 2xt - t²/2)` against `ψ`
/// gives `C exp(½ tᵀ R t + tᵀ s)` with `K = M + I`, `R = 2K⁻¹ - I`,
/// `s = 2K⁻¹ v` and `C = sqrt(2π / det K) exp(c0 + vᵀ K⁻¹ v)`. Matching
/// powers of `t` yields
/// `c[n + e_i] = (s_i c[n] + Σ_j R_ij √n_j c[n - e_j]) / √(n_i + 1)`.
pub fn fock_coefficients(wp: &GaussianWavepacket2D, n_trunc: usize) -> Result<Vec<f64>> {
    let k = wp.m + Matrix2::identity();
    let det = k.determinant();
    let k_inv = k
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: det })?;
    let r = 2.0 * k_inv - Matrix2::identity();
    let s = 2.0 * k_inv * wp.v;
    let log_c = 0.5 * (2.0 * PI / det).ln() + wp.c0 + wp.v.dot(&(k_inv * wp.v));

    let n = n_trunc;
    let mut c = vec![0.0; n * n];
    let sqrt: Vec<f64> = (0..=n).map(|i| (i as f64).sqrt()).collect();
    c[0] = log_c.exp();
    for n1 in 0..n {
        if n1 > 0 {
            // step in mode 1 from (n1 - 1, 0)
            let prev = c[(n1 - 1) * n];
            let back = if n1 >= 2 { c[(n1 - 2) * n] } else { 0.0 };
            c[n1 * n] = (s[0] * prev + r[(0, 0)] * sqrt[n1 - 1] * back) / sqrt[n1];
        }
        for n2 in 1..n {
            let here = c[n1 * n + n2 - 1];
            let back1 = if n1 >= 1 { c[(n1 - 1) * n + n2 - 1] } else { 0.0 };
            let back2 = if n2 >= 2 { c[n1 * n + n2 - 2] } else { 0.0 };
            c[n1 * n + n2] = (s[1] * here + r[(1, 0)] * sqrt[n1] * back1 + r[(1, 1)] * sqrt[n2 - 1] * back2) / sqrt[n2];
        }
    }
    if let Some(bad) = c.iter().position(|x| !x.is_finite()) {
        return Err(Error::Overflow {
            n1: bad / n,
            n2: bad % n,
        });
    }
    Ok(c)
}

/// Coefficient grids for several wavepackets as the columns of one matrix.
pub(crate) fn coefficient_columns(packets: &[(f64, GaussianWavepacket2D)], n_trunc: usize) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(n_trunc * n_trunc, packets.len());
    for (j, (weight, wp)) in packets.iter().enumerate() {
        let c = fock_coefficients(wp, n_trunc)?;
        let scale = weight.sqrt();
        for (i, x) in c.into_iter().enumerate() {
            out[(i, j)] = scale * x;
        }
    }
    Ok(out)
}
