//! Number-basis matrix elements from the four-variable Gaussian kernel.
//!
//! After integrating out the detector noise, `⟨x1,x2|ρ_{S,m}|x3,x4⟩
//! e^{-Σ x_i²}` is a single Gaussian `pref · exp(-xᵀ A x + 2 xᵀ b + c)`.
//! Each matrix element is then a Gaussian moment of a product of Hermite
//! polynomials, evaluated exactly after whitening `A`. This route is slow
//! and limited to `eta2 < 1`; it serves as an independent check of the
//! node-decomposition path.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Matrix4, SymmetricEigen, Vector4};

use crate::channel::LinkModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm4D {
    pub a: Matrix4<f64>,
    pub b: Vector4<f64>,
    pub c: f64,
    pub alpha: [f64; 6],
    pub beta: [f64; 2],
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// Curvature of the integrated detector-noise Gaussian.
    pub curvature: f64,
}

impl QuadraticForm4D {
    /// Exponent `-xᵀ A x + 2 xᵀ b + c`.
    pub fn exponent(&self, x: &Vector4<f64>) -> f64 {
        -x.dot(&(self.a * x)) + 2.0 * x.dot(&self.b) + self.c
    }
}

pub fn quadratic_form_direct(s: f64, m: f64, link: &LinkModel) -> Result<QuadraticForm4D> {
    let (eta1, eta2) = (link.channel.eta, link.detector.eta);
    let v2 = match link.v2 {
        Some(v2) => v2,
        None => return Err(Error::UnitDetectorTransmission(eta2)),
    };
    let v1 = link.v1;
    let s1 = v1 + 1.0 / v1;
    let d1 = v1 - 1.0 / v1;
    let s2 = v2 + 1.0 / v2;

    let curvature = s1 * (1.0 - eta1) / eta2 + 2.0 * eta1 / eta2 + 4.0 / (s2 * (1.0 - eta2));
    let p = -0.5 * d1 * ((1.0 - eta1) / eta2).sqrt();
    let q = (1.0 - 0.5 * s1) * (eta1 * (1.0 - eta1) / eta2).sqrt();
    let r = -2.0 * (eta1 / eta2).sqrt() * s - 4.0 / s2 * m / (1.0 - eta2);

    let alpha = [
        1.0 - p * p / curvature + 0.5 * s1,
        1.0 - q * q / curvature + (1.0 - eta1) + 0.5 * eta1 * s1,
        // the x1 x2 coupling inside one wavefunction is √η1 (V1 - 1/V1) / 2
        -p * q / curvature + 0.5 * eta1.sqrt() * d1,
        -p * p / curvature,
        -q * q / curvature,
        -p * q / curvature,
    ];
    let beta = [p * r / curvature, q * r / curvature + (1.0 - eta1).sqrt() * s];
    let c = -4.0 / s2 * m * m / (1.0 - eta2) + r * r / curvature - 2.0 * s * s;

    let [a1, a2, a3, a4, a5, a6] = alpha;
    #[rustfmt::skip]
    let a = Matrix4::new(
        a1, a3, a4, a6,
        a3, a2, a6, a5,
        a4, a6, a1, a3,
        a6, a5, a3, a2,
    );
    let b = Vector4::new(beta[0], beta[1], beta[0], beta[1]);
    Ok(QuadraticForm4D {
        a,
        b,
        c,
        alpha,
        beta,
        p,
        q,
        r,
        curvature,
    })
}

/// Log of the kernel prefactor, `ln(sqrt(4/(π(V2+1/V2))) sqrt(8/(π² P η2 (1-η2))))`.
fn log_prefactor(qf: &QuadraticForm4D, link: &LinkModel) -> Result<f64> {
    let eta2 = link.detector.eta;
    let v2 = link.v2.ok_or(Error::UnitDetectorTransmission(eta2))?;
    let s2 = v2 + 1.0 / v2;
    Ok(0.5 * (4.0 / (PI * s2)).ln() + 0.5 * (8.0 / (PI * PI * qf.curvature * eta2 * (1.0 - eta2))).ln())
}

/// Kernel `⟨x1,x2|ρ|x3,x4⟩ e^{-Σx²}` evaluated pointwise.
pub fn kernel_direct(qf: &QuadraticForm4D, link: &LinkModel, x: &Vector4<f64>) -> Result<f64> {
    Ok((log_prefactor(qf, link)? + qf.exponent(x)).exp())
}

/// Sparse polynomial in four variables.
#[derive(Debug, Clone, Default)]
struct Poly4(BTreeMap<[u8; 4], f64>);

impl Poly4 {
    fn constant(c: f64) -> Self {
        let mut p = Poly4::default();
        p.0.insert([0; 4], c);
        p
    }

    /// `c + Σ_j g_j y_j`
    fn affine(c: f64, g: [f64; 4]) -> Self {
        let mut p = Poly4::constant(c);
        for (j, gj) in g.into_iter().enumerate() {
            let mut e = [0u8; 4];
            e[j] = 1;
            p.0.insert(e, gj);
        }
        p
    }

    fn mul(&self, other: &Poly4) -> Poly4 {
        let mut out = BTreeMap::new();
        for (ea, ca) in &self.0 {
            for (eb, cb) in &other.0 {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                *out.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        Poly4(out)
    }

    fn axpy(&self, a: f64, other: &Poly4) -> Poly4 {
        let mut out = self.0.clone();
        for (e, c) in &other.0 {
            *out.entry(*e).or_insert(0.0) += a * c;
        }
        Poly4(out)
    }

    fn scale(&self, a: f64) -> Poly4 {
        Poly4(self.0.iter().map(|(e, c)| (*e, a * c)).collect())
    }

    /// `∫ p(y) e^{-yᵀy} d⁴y`
    fn gaussian_integral(&self) -> f64 {
        self.0
            .iter()
            .map(|(e, c)| c * e.iter().map(|&k| gaussian_moment(k as u32)).product::<f64>())
            .sum()
    }
}

/// `∫ y^k e^{-y²} dy`
fn gaussian_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let half = k / 2;
    let double_fact: f64 = (1..=half).map(|i| (2 * i - 1) as f64).product();
    PI.sqrt() * double_fact / 2f64.powi(half as i32)
}

/// `H_n(z)` for a polynomial argument.
fn hermite_poly(n: usize, z: &Poly4) -> Poly4 {
    let mut h0 = Poly4::constant(1.0);
    if n == 0 {
        return h0;
    }
    let mut h1 = z.scale(2.0);
    for k in 1..n {
        let h2 = z.mul(&h1).scale(2.0).axpy(-2.0 * k as f64, &h0);
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// `⟨n1,n2|ρ_{S,m}|n3,n4⟩` from the four-variable kernel.
///
/// `A = Q Λ Qᵀ` is diagonalized, `x = A^{-1/2} y + A⁻¹ b` turns the exponent
/// into `-yᵀy + c'` with `c' = c + bᵀ A⁻¹ b`, and the Hermite product is
/// expanded in `y` and integrated monomial by monomial.
pub fn matrix_element_direct(qf: &QuadraticForm4D, n: [usize; 4], link: &LinkModel) -> Result<f64> {
    let eig = SymmetricEigen::new(qf.a);
    let min_eigenvalue = eig.eigenvalues.min();
    if !(min_eigenvalue > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let q = eig.eigenvectors;
    let inv_sqrt = q * Matrix4::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt())) * q.transpose();
    let inv = q * Matrix4::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l)) * q.transpose();
    let det: f64 = eig.eigenvalues.iter().product();
    let mean = inv * qf.b;
    let c_shifted = qf.c + qf.b.dot(&mean);

    let sqrt2 = 2f64.sqrt();
    let mut product = Poly4::constant(1.0);
    let mut norm = 1.0;
    for (i, &ni) in n.iter().enumerate() {
        // √2 x_i as an affine function of y
        let row = inv_sqrt.row(i);
        let z = Poly4::affine(
            sqrt2 * mean[i],
            [sqrt2 * row[0], sqrt2 * row[1], sqrt2 * row[2], sqrt2 * row[3]],
        );
        product = product.mul(&hermite_poly(ni, &z));
        let fact: f64 = (1..=ni).map(|k| k as f64).product();
        norm *= 1.0 / (2f64.powi(ni as i32) * fact).sqrt();
    }
    let log_scale = (2.0 / PI).ln() + log_prefactor(qf, link)? + c_shifted - 0.5 * det.ln();
    Ok(log_scale.exp() * norm * product.gaussian_integral())
}
