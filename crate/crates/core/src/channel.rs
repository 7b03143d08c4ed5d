//! Scalar channel arithmetic.
//!
//! Excess noise is measured in the shot-noise convention where a coherent
//! state observed through a channel `(eta, xi)` has quadrature variance
//! `(1 + xi) / 4`, with `x = (a + a†) / 2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};

/// Default fiber attenuation in dB/km.
pub const DEFAULT_LOSS_DB_PER_KM: f64 = 0.2;

/// Largest channel transmission handed to the cloner model when a distance
/// of zero is requested.
pub const MAX_CHANNEL_TRANSMISSION: f64 = 1.0 - 1e-9;

/// A lossy, noisy phase-insensitive Gaussian channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub eta: f64,
    pub xi: f64,
}

impl ChannelParams {
    pub fn new(eta: f64, xi: f64) -> Result<Self> {
        check(eta > 0.0 && eta <= 1.0, "eta", eta, "transmission must lie in (0, 1]")?;
        check(
            xi >= 0.0 && xi.is_finite(),
            "xi",
            xi,
            "excess noise must be finite and >= 0",
        )?;
        Ok(Self { eta, xi })
    }

    /// Noiseless, lossless channel.
    pub fn identity() -> Self {
        Self { eta: 1.0, xi: 0.0 }
    }

    /// Quadrature variance of a coherent state observed through this channel.
    pub fn variance(&self) -> f64 {
        0.25 * (1.0 + self.xi)
    }

    /// Channel `self` followed by `next`.
    pub fn then(&self, next: &ChannelParams) -> ChannelParams {
        ChannelParams {
            eta: self.eta * next.eta,
            xi: self.xi * next.eta + next.xi,
        }
    }
}

/// Eavesdropper-controlled transmission line followed by a trusted detector,
/// each modelled as an entangling cloner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    pub channel: ChannelParams,
    pub detector: ChannelParams,
    /// Two-mode squeezing variance of the transmission-line cloner.
    pub v1: f64,
    /// Two-mode squeezing variance of the detector cloner. `None` when the
    /// detector has unit transmission, where only the limiting noise
    /// variance `xi2 / 4` is meaningful.
    pub v2: Option<f64>,
}

impl LinkModel {
    pub fn new(channel: ChannelParams, detector: ChannelParams) -> Result<Self> {
        check(
            channel.eta < 1.0,
            "eta1",
            channel.eta,
            "the eavesdropper's cloner needs a lossy channel (eta1 < 1)",
        )?;
        let v1 = cloner_variance(channel.eta, channel.xi)?;
        let v2 = if detector.eta < 1.0 {
            Some(cloner_variance(detector.eta, detector.xi)?)
        } else {
            None
        };
        Ok(Self {
            channel,
            detector,
            v1,
            v2,
        })
    }

    /// Splits observed totals `(eta, xi)` into a channel part and a detector
    /// part with detector parameters `(eta2, xi2)`.
    pub fn split(total: ChannelParams, eta2: f64, xi2: f64) -> Result<Self> {
        let detector = ChannelParams::new(eta2, xi2)?;
        let eta1 = total.eta / eta2;
        let xi1 = (total.xi - xi2) / eta2;
        if xi1 < 0.0 {
            return Err(Error::InfeasibleSplit { xi1 });
        }
        Self::new(ChannelParams::new(eta1, xi1)?, detector)
    }

    pub fn total(&self) -> ChannelParams {
        compose_channels(self)
    }

    /// Variance of the detector-noise shift `sqrt(1 - eta2) * Y` added to
    /// Bob's outcome before it reaches the transmission-line modes.
    pub fn detector_shift_variance(&self) -> f64 {
        0.25 * (1.0 - self.detector.eta + self.detector.xi)
    }
}

/// The protocol's signal: four coherent states `|±alpha>, |±i alpha>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSignal {
    pub alpha: f64,
    /// Error-correction efficiency (1 is the Shannon limit).
    pub f: f64,
}

impl ProtocolSignal {
    pub fn new(alpha: f64, f: f64) -> Result<Self> {
        check(
            alpha > 0.0 && alpha.is_finite(),
            "alpha",
            alpha,
            "amplitude must be > 0",
        )?;
        check(f >= 1.0 && f.is_finite(), "f", f, "efficiency must be >= 1")?;
        Ok(Self { alpha, f })
    }

    pub fn from_photon_number(alpha_sq: f64, f: f64) -> Result<Self> {
        check(alpha_sq > 0.0, "alpha_sq", alpha_sq, "photon number must be > 0")?;
        Self::new(alpha_sq.sqrt(), f)
    }

    pub fn photon_number(&self) -> f64 {
        self.alpha * self.alpha
    }
}

/// Totals seen by Bob: `(eta1 eta2, xi1 eta2 + xi2)`.
pub fn compose_channels(link: &LinkModel) -> ChannelParams {
    link.channel.then(&link.detector)
}

/// Squeezing variance `V` of the entangling cloner realising `(eta, xi)`,
/// the root `V >= 1` of `(V + 1/V) / 2 = (1 - eta + xi) / (1 - eta)`.
pub fn cloner_variance(eta: f64, xi: f64) -> Result<f64> {
    if eta >= 1.0 {
        return Err(Error::ClonerLimit { xi });
    }
    check(eta > 0.0, "eta", eta, "transmission must be > 0")?;
    check(xi >= 0.0, "xi", xi, "excess noise must be >= 0")?;
    let w = 1.0 + xi / (1.0 - eta);
    // w + sqrt(w^2 - 1), with w^2 - 1 = (w - 1)(w + 1) to keep small xi accurate
    Ok(w + ((w - 1.0) * (w + 1.0)).sqrt())
}

/// Density of Bob's quadrature outcome `m` given Alice's signed amplitude `s`.
pub fn quadrature_pdf(m: f64, s: f64, total: &ChannelParams) -> f64 {
    let spread = 1.0 + total.xi;
    let d = m - total.eta.sqrt() * s;
    (2.0 / (PI * spread)).sqrt() * (-2.0 * d * d / spread).exp()
}

/// Bit error rate of the binary symmetric channel seen at outcome magnitude `|m|`.
pub fn bit_error_rate(m_abs: f64, alpha: f64, total: &ChannelParams) -> f64 {
    let x = 8.0 * total.eta.sqrt() * m_abs.abs() * alpha / (1.0 + total.xi);
    1.0 / (1.0 + x.exp())
}

pub fn binary_entropy(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(eps));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(eps) + term(1.0 - eps))
}

/// `I_AB = 1 - f h(eps)`; negative values are possible when `f > 1`.
pub fn mutual_information(eps: f64, f: f64) -> Result<f64> {
    Ok(1.0 - f * binary_entropy(eps)?)
}

/// Fiber transmission over `d_km` at `loss_db_per_km`.
pub fn distance_to_transmission(d_km: f64, loss_db_per_km: f64) -> f64 {
    10f64.powf(-loss_db_per_km * d_km / 10.0)
}

/// Transmission usable by the cloner model: values at or above
/// [`MAX_CHANNEL_TRANSMISSION`] are clamped with a warning.
pub fn channel_transmission(d_km: f64, loss_db_per_km: f64) -> Result<f64> {
    check(d_km >= 0.0, "distance_km", d_km, "distance must be >= 0")?;
    check(
        loss_db_per_km > 0.0,
        "loss_db_per_km",
        loss_db_per_km,
        "attenuation must be > 0",
    )?;
    let eta = distance_to_transmission(d_km, loss_db_per_km);
    if eta > MAX_CHANNEL_TRANSMISSION {
        log::warn!("distance {d_km} km gives transmission {eta}; clamping to {MAX_CHANNEL_TRANSMISSION}");
        Ok(MAX_CHANNEL_TRANSMISSION)
    } else {
        Ok(eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(e1: f64, x1: f64, e2: f64, x2: f64) -> LinkModel {
        LinkModel::new(ChannelParams::new(e1, x1).unwrap(), ChannelParams::new(e2, x2).unwrap()).unwrap()
    }

    #[test]
    fn composition() {
        let id = ChannelParams::identity().then(&ChannelParams::identity());
        assert_eq!((id.eta, id.xi), (1.0, 0.0));

        let t = compose_channels(&link(0.5, 0.02, 0.8, 0.01));
        assert!((t.eta - 0.4).abs() < 1e-15);
        assert!((t.xi - 0.026).abs() < 1e-15);

        let t = compose_channels(&link(0.3, 0.01, 1.0, 0.004));
        assert_eq!(t.eta, 0.3);
        assert!((t.xi - 0.014).abs() < 1e-15);
    }

    #[test]
    fn composition_is_associative() {
        let a = ChannelParams::new(0.7, 0.03).unwrap();
        let b = ChannelParams::new(0.4, 0.011).unwrap();
        let c = ChannelParams::new(0.9, 0.2).unwrap();
        let left = a.then(&b).then(&c);
        let right = a.then(&b.then(&c));
        assert!((left.eta - right.eta).abs() < 1e-12);
        assert!((left.xi - right.xi).abs() < 1e-12);
    }

    #[test]
    fn cloner_variance_values() {
        for eta in [0.01, 0.5, 0.999] {
            assert_eq!(cloner_variance(eta, 0.0).unwrap(), 1.0);
        }
        let v = cloner_variance(0.5, 0.5).unwrap();
        assert!((v - (2.0 + 3f64.sqrt())).abs() < 1e-12);
        assert!((v - 3.7320508).abs() < 1e-7);
        assert!(matches!(cloner_variance(1.0, 0.1), Err(Error::ClonerLimit { .. })));
        for (eta, xi) in [(0.1, 0.01), (0.9, 0.002), (0.5, 3.0), (0.999, 1e-6)] {
            let v = cloner_variance(eta, xi).unwrap();
            let w = (1.0 - eta + xi) / (1.0 - eta);
            assert!(v >= 1.0);
            assert!((0.5 * (v + 1.0 / v) - w).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_channel_transmission_rejected() {
        let err = LinkModel::new(ChannelParams::identity(), ChannelParams::identity());
        assert!(matches!(err, Err(Error::InvalidParameter { name: "eta1", .. })));
    }

    #[test]
    fn pdf_normalized_with_expected_moments() {
        let total = ChannelParams::new(0.37, 0.08).unwrap();
        let s = -0.8;
        let sigma = total.variance().sqrt();
        let mean = total.eta.sqrt() * s;
        let (lo, hi) = (mean - 10.0 * sigma, mean + 10.0 * sigma);
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for i in 0..=n {
            let x = lo + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 } * h;
            let p = quadrature_pdf(x, s, &total);
            z += w * p;
            m1 += w * p * x;
            m2 += w * p * x * x;
        }
        assert!((z - 1.0).abs() < 1e-9);
        assert!((m1 - mean).abs() < 1e-9);
        assert!((m2 - mean * mean - total.variance()).abs() < 1e-9);
    }

    #[test]
    fn pdf_matches_coherent_state_marginal() {
        // |<x|alpha>|^2 = sqrt(2/pi) exp(-2 (x - alpha)^2)
        let alpha: f64 = 0.9;
        for x in [-1.0, 0.0, 0.4, 0.9, 2.0] {
            let direct = (2.0 / PI).sqrt() * (-2.0 * (x - alpha) * (x - alpha)).exp();
            assert!((quadrature_pdf(x, alpha, &ChannelParams::identity()) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn bit_error_rate_values() {
        let t = ChannelParams::identity();
        assert_eq!(bit_error_rate(0.0, 0.7, &t), 0.5);
        let e = bit_error_rate(0.25, 0.5, &t);
        assert!((e - 1.0 / (1.0 + 1f64.exp())).abs() < 1e-15);
        assert!((e - 0.2689414).abs() < 1e-7);
        let t = ChannelParams::new(0.3, 0.02).unwrap();
        assert_eq!(bit_error_rate(0.6, 0.7, &t), bit_error_rate(-0.6, 0.7, &t));
        assert!(bit_error_rate(0.61, 0.7, &t) < bit_error_rate(0.6, 0.7, &t));
        assert!(bit_error_rate(0.6, 0.71, &t) < bit_error_rate(0.6, 0.7, &t));
        // Ratio definition P(-|m| | alpha) / (P(m|alpha) + P(-m|alpha))
        let (m, a) = (0.43, 0.8);
        let ratio = quadrature_pdf(-m, a, &t) / (quadrature_pdf(m, a, &t) + quadrature_pdf(-m, a, &t));
        assert!((ratio - bit_error_rate(m, a, &t)).abs() < 1e-14);
    }

    #[test]
    fn entropy_and_information() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        let h = binary_entropy(0.11).unwrap();
        assert!((h - 0.4999).abs() < 1e-4, "{h}");
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(-0.1).is_err());

        assert_eq!(mutual_information(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(mutual_information(0.5, 1.0).unwrap(), 0.0);
        let i = mutual_information(0.2689414, 1.0).unwrap();
        // 1 - h(0.2689414) = 0.16006
        assert!((i - 0.16006).abs() < 1e-4, "{i}");
        assert!(mutual_information(0.3, 1.2).unwrap() < 0.0);
    }

    #[test]
    fn distance_conversion() {
        assert_eq!(distance_to_transmission(0.0, 0.2), 1.0);
        assert!((distance_to_transmission(50.0, 0.2) - 0.1).abs() < 1e-15);
        assert!((distance_to_transmission(15.0, 0.2) - 0.5012).abs() < 1e-4);
        assert_eq!(channel_transmission(0.0, 0.2).unwrap(), MAX_CHANNEL_TRANSMISSION);
        assert!(channel_transmission(-1.0, 0.2).is_err());
    }

    #[test]
    fn split_reproduces_totals() {
        let total = ChannelParams::new(0.2, 0.01).unwrap();
        for frac in [0.0, 0.3, 0.5, 0.8] {
            let l = LinkModel::split(total, 1.0, frac * total.xi).unwrap();
            let t = l.total();
            assert!((t.eta - total.eta).abs() < 1e-12);
            assert!((t.xi - total.xi).abs() < 1e-12);
        }
        let l = LinkModel::split(total, 0.8, 0.004).unwrap();
        assert!((l.total().xi - 0.01).abs() < 1e-12);
        assert!(matches!(
            LinkModel::split(total, 1.0, 0.012),
            Err(Error::InfeasibleSplit { .. })
        ));
    }
}
