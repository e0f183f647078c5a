use proptest::prelude::*;
use tcpstab::dde_sim::{DelaySystem, ScalarFluid};
use tcpstab::linearize::{compound_ab, hstcp_ab, reno_ab};
use tcpstab::loss_models::Gaussian;
use tcpstab::protocols::{Compound, Hstcp};
use tcpstab::{scalar_coefficients, solve_equilibrium, Error, LossModel, ProtocolSpec, Variant};

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1e-300)
}

fn sloped_hstcp() -> Hstcp {
    Hstcp::new(
        vec![[1.0, 1.0], [38.0, 1.0], [1000.0, 8.0], [1e5, 70.0]],
        vec![[1.0, 0.5], [38.0, 0.5], [1000.0, 0.3], [1e5, 0.1]],
    )
    .unwrap()
}

proptest! {
    // alpha w^(k-2) = beta (w / C tau)^B solved in logs.
    #[test]
    fn compound_equilibrium_closed_form(
        alpha in 0.01f64..1.0, beta in 0.1f64..0.9, k in 0.1f64..1.9,
        b in 1.0f64..60.0, cap in 10.0f64..2000.0, tau in 0.01f64..1.0,
    ) {
        let spec = ProtocolSpec::Compound(Compound::new(alpha, beta, k).unwrap());
        let loss = LossModel::drop_tail(cap, b, tau).unwrap();
        let ln_w = (alpha.ln() - beta.ln() + b * (cap * tau).ln()) / (b + 2.0 - k);
        prop_assume!(ln_w < (cap * tau).ln());
        let eq = solve_equilibrium(&spec, &loss, Variant::Plain).unwrap();
        prop_assert!(rel(eq.w_star, ln_w.exp()) < 1e-12, "{} vs {}", eq.w_star, ln_w.exp());
        prop_assert!(rel(eq.x_star, eq.w_star / tau) < 1e-15);
    }

    // w* = (2 (C tau)^B)^(1/(B+2)).
    #[test]
    fn reno_equilibrium_closed_form(b in 1.0f64..60.0, cap in 10.0f64..2000.0, tau in 0.01f64..1.0) {
        let loss = LossModel::drop_tail(cap, b, tau).unwrap();
        let ln_w = (2f64.ln() + b * (cap * tau).ln()) / (b + 2.0);
        prop_assume!(ln_w < (cap * tau).ln());
        let eq = solve_equilibrium(&ProtocolSpec::Reno, &loss, Variant::Plain).unwrap();
        prop_assert!(rel(eq.w_star, ln_w.exp()) < 1e-12);
    }

    #[test]
    fn equilibrium_grows_with_buffer(b in 1.0f64..50.0, db in 0.1f64..10.0) {
        let spec = ProtocolSpec::compound_default();
        let lo = solve_equilibrium(&spec, &LossModel::drop_tail(138.9, b, 0.1).unwrap(), Variant::Plain).unwrap();
        let hi = solve_equilibrium(&spec, &LossModel::drop_tail(138.9, b + db, 0.1).unwrap(), Variant::Plain).unwrap();
        prop_assert!(hi.w_star > lo.w_star);
    }

    // (tau, C) -> (s tau, C / s) keeps w*; a tau and b tau stay put.
    #[test]
    fn time_rescaling(e in -5i32..5, b in 2.0f64..40.0, ack in any::<bool>()) {
        let s = 2f64.powi(e);
        let variant = if ack { Variant::AckWeighted } else { Variant::Plain };
        let spec = ProtocolSpec::compound_default();
        let loss = LossModel::drop_tail(138.9, b, 0.1).unwrap();
        let scaled = loss.rescaled(s).unwrap();
        let e0 = solve_equilibrium(&spec, &loss, variant).unwrap();
        let e1 = solve_equilibrium(&spec, &scaled, variant).unwrap();
        prop_assert_eq!(e0.w_star, e1.w_star);
        let c0 = scalar_coefficients(&spec, &loss, &e0).unwrap();
        let c1 = scalar_coefficients(&spec, &scaled, &e1).unwrap();
        prop_assert!(rel(c0.a * c0.tau, c1.a * c1.tau) < 1e-14);
        prop_assert!(rel(c0.b * c0.tau, c1.b * c1.tau) < 1e-14);
    }

    // a = -d(rhs)/dw and b = -d(rhs)/dw_d at w*.
    #[test]
    fn coefficients_match_numerical_linearization(
        alpha in 0.02f64..0.5, k in 0.2f64..1.8, b in 2.0f64..40.0, ack in any::<bool>(), which in 0usize..3,
    ) {
        let variant = if ack { Variant::AckWeighted } else { Variant::Plain };
        let spec = match which {
            0 => ProtocolSpec::Compound(Compound::new(alpha, 0.5, k).unwrap()),
            1 => ProtocolSpec::Reno,
            _ => ProtocolSpec::Hstcp(sloped_hstcp()),
        };
        let loss = LossModel::drop_tail(1000.0, b, 0.1).unwrap();
        let eq = solve_equilibrium(&spec, &loss, variant).unwrap();
        let c = scalar_coefficients(&spec, &loss, &eq).unwrap();
        let sys = ScalarFluid { spec: spec.clone(), loss, variant, delay: 0.1 };
        let w = eq.w_star;
        let h = 1e-6 * w;
        let f = |now: f64, del: f64| sys.rhs(&[now], &[del]).unwrap()[0];
        let a_fd = -(f(w + h, w) - f(w - h, w)) / (2.0 * h);
        let b_fd = -(f(w, w + h) - f(w, w - h)) / (2.0 * h);
        let scale = c.a.abs().max(c.b.abs());
        prop_assert!((c.a - a_fd).abs() < 1e-6 * scale, "a {} vs {}", c.a, a_fd);
        prop_assert!((c.b - b_fd).abs() < 1e-6 * scale, "b {} vs {}", c.b, b_fd);
    }

    #[test]
    fn particular_coefficients_match_generic(alpha in 0.01f64..1.0, k in 0.1f64..1.9, b in 1.0f64..60.0, tau in 0.01f64..1.0) {
        let loss = LossModel::drop_tail(500.0, b, tau).unwrap();
        let spec = ProtocolSpec::Compound(Compound::new(alpha, 0.5, k).unwrap());
        let ln_w = (alpha.ln() - 0.5f64.ln() + b * (500.0 * tau).ln()) / (b + 2.0 - k);
        prop_assume!(ln_w < (500.0 * tau).ln());
        let eq = solve_equilibrium(&spec, &loss, Variant::Plain).unwrap();
        let c = scalar_coefficients(&spec, &loss, &eq).unwrap();
        let (a, bb) = compound_ab(alpha, k, b, eq.w_star, tau);
        prop_assert!(rel(c.a, a) < 1e-9 && rel(c.b, bb) < 1e-9);

        let eq = solve_equilibrium(&ProtocolSpec::Reno, &loss, Variant::Plain).unwrap();
        let c = scalar_coefficients(&ProtocolSpec::Reno, &loss, &eq).unwrap();
        let (a, bb) = reno_ab(b, eq.w_star, tau);
        prop_assert!(rel(c.a, a) < 1e-9 && rel(c.b, bb) < 1e-9);
    }

    #[test]
    fn hstcp_coefficients_match_generic(b in 1.0f64..60.0, cap in 50.0f64..50_000.0) {
        let h = sloped_hstcp();
        let spec = ProtocolSpec::Hstcp(h.clone());
        let loss = LossModel::drop_tail(cap, b, 0.1).unwrap();
        let eq = match solve_equilibrium(&spec, &loss, Variant::Plain) {
            Ok(eq) => eq,
            Err(Error::NoEquilibrium(_)) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let c = scalar_coefficients(&spec, &loss, &eq).unwrap();
        let (a, bb) = hstcp_ab(&h, b, eq.p_star, eq.w_star, 0.1).unwrap();
        let scale = c.a.abs().max(c.b.abs());
        prop_assert!((c.a - a).abs() <= 1e-9 * scale && rel(c.b, bb) < 1e-9);
    }
}

#[test]
fn ack_weighting_vanishes_as_loss_vanishes() {
    let spec = ProtocolSpec::compound_default();
    let mut last_gap = f64::INFINITY;
    for cap in [1e2, 1e3, 1e4, 1e5] {
        let loss = LossModel::drop_tail(cap, 15.0, 0.1).unwrap();
        let plain = solve_equilibrium(&spec, &loss, Variant::Plain).unwrap();
        let ack = solve_equilibrium(&spec, &loss, Variant::AckWeighted).unwrap();
        let gap = rel(plain.w_star, ack.w_star);
        assert!(ack.w_star < plain.w_star);
        assert!(gap < plain.p_star, "gap {gap} vs p {}", plain.p_star);
        assert!(gap < last_gap);
        last_gap = gap;
    }
    assert!(last_gap < 1e-5);
}

#[test]
fn residual_is_small_for_both_variants() {
    let loss = LossModel::drop_tail(138.9, 15.0, 0.1).unwrap();
    for v in [Variant::Plain, Variant::AckWeighted] {
        for spec in [ProtocolSpec::compound_default(), ProtocolSpec::Reno] {
            let eq = solve_equilibrium(&spec, &loss, v).unwrap();
            let (i, _) = spec.increase(eq.w_star).unwrap();
            assert!(eq.residual <= 1e-12 * i, "{spec:?} {v:?} {}", eq.residual);
        }
    }
}

#[test]
fn gaussian_equilibrium_below_saturation() {
    let loss = LossModel::gaussian(Gaussian {
        capacity_per_flow: 100.0,
        buffer_pkts: 10.0,
        rtt_s: 0.2,
        v: 20.0,
        sigma1_sq: 1.0,
        sigma2_sq: 2.0,
    })
    .unwrap();
    let eq = solve_equilibrium(&ProtocolSpec::Reno, &loss, Variant::Plain).unwrap();
    assert!(eq.w_star < loss.saturation_window());
    assert!(eq.residual < 1e-12);
}

#[test]
fn table_domain_missing_loss_range() {
    let h = Hstcp::new(vec![[100.0, 1.0], [200.0, 1.0]], vec![[100.0, 0.5], [200.0, 0.5]]).unwrap();
    let loss = LossModel::drop_tail(100.0, 15.0, 0.1).unwrap();
    let r = solve_equilibrium(&ProtocolSpec::Hstcp(h), &loss, Variant::Plain);
    assert!(matches!(r, Err(Error::NoEquilibrium(_))));
}
