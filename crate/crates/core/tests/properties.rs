use proptest::prelude::*;

use cvkey::channel::{bit_error_rate, compose_channels, quadrature_pdf, ChannelParams, LinkModel, ProtocolSignal};
use cvkey::information::{holevo, sliced_states, Scheme};
use cvkey::quadrature::{gauss_legendre, gauss_legendre_on};
use cvkey::rate::{secret_key_rate, Numerics, ProtocolConfig};
use cvkey::report::format_number;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_matches_split(eta in 0.01f64..0.99, xi in 0.0f64..0.05, u in 0.0f64..1.0, frac in 0.0f64..1.0) {
        let total = ChannelParams::new(eta, xi).unwrap();
        // detector transmission between the total and 1
        let eta2 = eta + (1.0 - eta) * u;
        let l = LinkModel::split(total, eta2, frac * xi).unwrap();
        let c = compose_channels(&l);
        prop_assert!((c.eta - eta).abs() < 1e-12);
        prop_assert!((c.xi - xi).abs() < 1e-12);
    }

    #[test]
    fn outcome_density_normalized(eta in 0.01f64..1.0, xi in 0.0f64..0.1, s in -1.5f64..1.5) {
        let total = ChannelParams::new(eta, xi).unwrap();
        let base = gauss_legendre(16);
        let mass: f64 = (-8..8)
            .map(|k| gauss_legendre_on(&base, k as f64, k as f64 + 1.0).integrate(|m| quadrature_pdf(m, s, &total)))
            .sum();
        prop_assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn error_rate_below_half(m in 0.0f64..3.0, a in 0.1f64..1.5, eta in 0.01f64..1.0, xi in 0.0f64..0.1) {
        let e = bit_error_rate(m, a, &ChannelParams::new(eta, xi).unwrap());
        prop_assert!((0.0..=0.5).contains(&e));
    }

    #[test]
    fn formatted_numbers_reparse(x in -1e6f64..1e6) {
        let s = format_number(x);
        prop_assert!(!s.contains('e'));
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-9 * x.abs().max(1e-300) + f64::MIN_POSITIVE);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn holevo_within_one_bit(
        m in 0.05f64..1.5,
        a2 in 0.1f64..1.0,
        e1 in 0.1f64..0.9,
        x1 in 0.0f64..0.02,
        e2 in 0.8f64..1.0,
        x2 in 0.0f64..0.01,
    ) {
        let l = LinkModel::new(ChannelParams::new(e1, x1).unwrap(), ChannelParams::new(e2, x2).unwrap()).unwrap();
        let ens = sliced_states(m, &ProtocolSignal::from_photon_number(a2, 1.0).unwrap(), &l, 8, 9).unwrap();
        for scheme in Scheme::ALL {
            let chi = holevo(&ens, scheme).unwrap();
            prop_assert!((0.0..=1.0).contains(&chi), "{chi}");
        }
    }

    #[test]
    fn rate_and_kept_mass_in_range(
        a2 in 0.1f64..1.0,
        e1 in 0.05f64..0.9,
        x1 in 0.0f64..0.03,
        x2 in 0.0f64..0.01,
    ) {
        let l = LinkModel::new(ChannelParams::new(e1, x1).unwrap(), ChannelParams::new(1.0, x2).unwrap()).unwrap();
        for scheme in Scheme::ALL {
            let cfg = ProtocolConfig::new(l, ProtocolSignal::from_photon_number(a2, 1.0).unwrap(), scheme)
                .with_numerics(Numerics { n_trunc: 8, y_nodes: 9, m_grid: 16, ..Numerics::default() });
            let p = secret_key_rate(&cfg).unwrap();
            prop_assert!(p.rate >= 0.0);
            prop_assert!((0.0..=1.0).contains(&p.postselection_fraction));
            prop_assert!(p.rate <= p.postselection_fraction + 1e-12);
        }
    }
}
