use proptest::prelude::*;
use tcpstab::loss_models::Gaussian;
use tcpstab::protocols::{Compound, Hstcp};
use tcpstab::{LossModel, ProtocolSpec};

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1e-300)
}

fn reno_as_hstcp() -> ProtocolSpec {
    ProtocolSpec::Hstcp(Hstcp::new(vec![[1.0, 1.0], [1e4, 1.0]], vec![[1.0, 0.5], [1e4, 0.5]]).unwrap())
}

fn sloped_hstcp() -> ProtocolSpec {
    ProtocolSpec::Hstcp(
        Hstcp::new(
            vec![[1.0, 1.0], [38.0, 1.0], [1000.0, 8.0], [1e5, 70.0]],
            vec![[1.0, 0.5], [38.0, 0.5], [1000.0, 0.3], [1e5, 0.1]],
        )
        .unwrap(),
    )
}

/// Central difference of `f` at `w`.
fn fd(f: impl Fn(f64) -> f64, w: f64) -> f64 {
    let h = 1e-5 * w;
    (f(w + h) - f(w - h)) / (2.0 * h)
}

proptest! {
    #[test]
    fn constant_table_hstcp_is_reno(w in 1.0f64..1e4) {
        let reno = ProtocolSpec::Reno.gains(w).unwrap();
        let h = reno_as_hstcp().gains(w).unwrap();
        prop_assert!(rel(reno.i, h.i) < 1e-14);
        prop_assert!(rel(reno.di, h.di) < 1e-14);
        prop_assert!(rel(reno.d, h.d) < 1e-14);
        prop_assert!(rel(reno.dd, h.dd) < 1e-14);
    }

    #[test]
    fn compound_derivatives_match_differences(alpha in 0.01f64..1.0, beta in 0.05f64..0.95, k in 0.05f64..1.95, w in 0.5f64..500.0) {
        let p = ProtocolSpec::Compound(Compound::new(alpha, beta, k).unwrap());
        let g = p.gains(w).unwrap();
        prop_assert!(rel(g.di, fd(|x| p.increase(x).unwrap().0, w)) < 1e-6);
        prop_assert!(rel(g.dd, fd(|x| p.decrease(x).unwrap().0, w)) < 1e-6);
    }

    #[test]
    fn hstcp_derivatives_match_differences(seg in 0usize..3, frac in 0.05f64..0.95) {
        let knots = [1.0f64, 38.0, 1000.0, 1e5];
        let w = (knots[seg].ln() + frac * (knots[seg + 1].ln() - knots[seg].ln())).exp();
        let p = sloped_hstcp();
        let g = p.gains(w).unwrap();
        prop_assert!(rel(g.di, fd(|x| p.increase(x).unwrap().0, w)) < 1e-6);
        prop_assert!(rel(g.dd, fd(|x| p.decrease(x).unwrap().0, w)) < 1e-6);
    }

    #[test]
    fn droptail_derivative(b in 1.0f64..60.0, frac in 0.05f64..0.99) {
        let loss = LossModel::drop_tail(100.0, b, 0.2).unwrap();
        let w = frac * 20.0;
        let dp = loss.loss_prob_deriv(w).unwrap().value;
        prop_assert!(rel(dp, fd(|x| loss.loss_prob(x).unwrap().value, w)) < 1e-6);
    }

    #[test]
    fn gaussian_derivative(b in 1.0f64..30.0, v in 0.0f64..50.0, s1 in 0.1f64..5.0, s2 in 0.0f64..5.0, frac in 0.3f64..0.99) {
        let loss = LossModel::gaussian(Gaussian {
            capacity_per_flow: 100.0, buffer_pkts: b, rtt_s: 0.2, v, sigma1_sq: s1, sigma2_sq: s2,
        }).unwrap();
        let w = frac * loss.saturation_window();
        let dp = loss.loss_prob_deriv(w).unwrap().value;
        prop_assume!(dp > 1e-250);
        prop_assert!(rel(dp, fd(|x| loss.loss_prob(x).unwrap().value, w)) < 1e-5);
    }

    // Powers of two keep every product in the formulas exact.
    #[test]
    fn time_rescaling_leaves_loss_unchanged(e in -6i32..6, b in 1.0f64..40.0, v in 0.0f64..50.0, frac in 0.01f64..1.2) {
        let s = 2f64.powi(e);
        let g = LossModel::gaussian(Gaussian {
            capacity_per_flow: 100.0, buffer_pkts: b, rtt_s: 0.2, v, sigma1_sq: 1.3, sigma2_sq: 0.7,
        }).unwrap();
        let d = LossModel::drop_tail(100.0, b, 0.2).unwrap();
        for loss in [g, d] {
            let w = frac * loss.saturation_window();
            let r = loss.rescaled(s).unwrap();
            prop_assert_eq!(loss.loss_prob(w).unwrap(), r.loss_prob(w).unwrap());
            prop_assert_eq!(loss.loss_prob_deriv(w).unwrap(), r.loss_prob_deriv(w).unwrap());
        }
    }
}

#[test]
fn overload_clamps_and_flags() {
    let loss = LossModel::drop_tail(100.0, 15.0, 0.1).unwrap();
    let p = loss.loss_prob(12.0).unwrap();
    assert_eq!(p.value, 1.0);
    assert!(p.overload);
    let dp = loss.loss_prob_deriv(12.0).unwrap();
    assert_eq!(dp.value, 0.0);
    assert!(dp.overload);
    assert!(!loss.loss_prob(9.0).unwrap().overload);
}

#[test]
fn windows_must_be_positive() {
    let loss = LossModel::drop_tail(100.0, 15.0, 0.1).unwrap();
    assert!(loss.loss_prob(0.0).is_err());
    assert!(loss.loss_prob(f64::NAN).is_err());
    assert!(ProtocolSpec::Reno.increase(-1.0).is_err());
}

#[test]
fn hstcp_outside_table_is_domain_error() {
    let p = sloped_hstcp();
    assert!(matches!(p.increase(0.5), Err(tcpstab::Error::Domain(_))));
    assert!(matches!(p.decrease(2e5), Err(tcpstab::Error::Domain(_))));
    assert_eq!(p.domain(), (1.0, 1e5));
}

#[test]
fn hstcp_tables_validated() {
    assert!(Hstcp::new(vec![[1.0, 1.0]], vec![[1.0, 0.5], [10.0, 0.5]]).is_err());
    assert!(Hstcp::new(vec![[10.0, 1.0], [1.0, 1.0]], vec![[1.0, 0.5], [10.0, 0.5]]).is_err());
    assert!(Hstcp::new(vec![[1.0, 1.0], [10.0, 1.0]], vec![[1.0, 0.5], [10.0, 1.5]]).is_err());
    assert!(Hstcp::new(vec![[1.0, -1.0], [10.0, 1.0]], vec![[1.0, 0.5], [10.0, 0.5]]).is_err());
}

#[test]
fn loss_json_names_bad_field() {
    let ok = r#"{"kind":"droptail","capacity_per_flow":138.9,"buffer_pkts":15,"rtt_s":0.1}"#;
    let m: LossModel = serde_json::from_str(ok).unwrap();
    assert_eq!(m.buffer(), 15.0);
    let bad = r#"{"kind":"droptail","capacity_per_flow":138.9,"buffer_pkts":0.5,"rtt_s":0.1}"#;
    let err = serde_json::from_str::<LossModel>(bad).unwrap_err().to_string();
    assert!(err.contains("buffer_pkts"), "{err}");
    let bad_v = r#"{"kind":"gaussian","capacity_per_flow":10,"buffer_pkts":5,"rtt_s":0.1,"v":12,"sigma1_sq":1,"sigma2_sq":1}"#;
    let err = serde_json::from_str::<LossModel>(bad_v).unwrap_err().to_string();
    assert!(err.contains("v"), "{err}");
    let extra = r#"{"kind":"droptail","capacity_per_flow":138.9,"buffer_pkts":15,"rtt_s":0.1,"x":1}"#;
    assert!(serde_json::from_str::<LossModel>(extra).is_err());
}
