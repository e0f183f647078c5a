use std::f64::consts::{E, PI};

use proptest::prelude::*;
use tcpstab::closed_forms::*;
use tcpstab::linearize::HstcpBracket;
use tcpstab::loss_models::Gaussian;
use tcpstab::par::Execution;
use tcpstab::protocols::{Compound, Hstcp};
use tcpstab::quasi_poly::{grid_rightmost, GridOptions, ScalarQuasi};
use tcpstab::scalar_stability::*;
use tcpstab::{scalar_coefficients, solve_equilibrium, LossModel, ProtocolSpec, ScalarCoefficients, Variant};

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1e-300)
}

fn coeffs(a: f64, b: f64, tau: f64) -> ScalarCoefficients {
    ScalarCoefficients::new(a, b, tau).unwrap()
}

fn sloped_hstcp() -> Hstcp {
    Hstcp::new(
        vec![[1.0, 1.0], [38.0, 1.0], [1000.0, 8.0], [1e5, 70.0]],
        vec![[1.0, 0.5], [38.0, 0.5], [1000.0, 0.3], [1e5, 0.1]],
    )
    .unwrap()
}

proptest! {
    #[test]
    fn necsuf_agrees_with_rightmost_root(a in 0.0f64..5.0, frac in 0.0f64..1.0, tau in 1e-3f64..5.0) {
        let b = a + (10.0 - a) * frac + 1e-9;
        let c = coeffs(a, b, tau);
        let v = necsuf_stable(&c).unwrap();
        let r = rightmost_root(&c).unwrap();
        prop_assume!(v.margin.abs() >= 1e-6);
        prop_assert_eq!(v.stable, r.lambda.re < 0.0, "margin {} root {}", v.margin, r.lambda);
    }

    #[test]
    fn rightmost_root_is_a_root(a in 0.0f64..5.0, b in 1e-3f64..10.0, tau in 1e-3f64..5.0) {
        let c = coeffs(a, b, tau);
        let r = rightmost_root(&c).unwrap();
        prop_assert!(r.residual < 1e-10 * (1.0 + a + b), "{}", r.residual);
    }

    // sufficient => necsuf and non-oscillatory => sufficient.
    #[test]
    fn verdict_chain(a in 0.0f64..5.0, b in 1e-3f64..10.0, tau in 1e-3f64..5.0) {
        let c = coeffs(a, b, tau);
        let s = sufficient_stable(&c).unwrap();
        let n = necsuf_stable(&c).unwrap();
        let o = non_oscillatory(&c).unwrap();
        prop_assert!(!s.stable || n.stable);
        prop_assert!(!o.verdict.stable || s.stable);
    }

    #[test]
    fn non_oscillatory_iff_real_root(a in 0.0f64..3.0, b in 1e-3f64..3.0, tau in 1e-3f64..3.0) {
        let c = coeffs(a, b, tau);
        let o = non_oscillatory(&c).unwrap();
        prop_assume!(o.verdict.margin.abs() >= 1e-6);
        let r = rightmost_root(&c).unwrap();
        prop_assert_eq!(o.verdict.stable, r.lambda.im.abs() < 1e-8, "{:?} {}", o, r.lambda);
    }

    #[test]
    fn hopf_root_on_axis(a in 0.0f64..5.0, frac in 0.01f64..1.0) {
        let b = a + (10.0 - a) * frac;
        let tau = hopf_delay(a, b).unwrap();
        let r = rightmost_root(&coeffs(a, b, tau)).unwrap();
        prop_assert!(r.lambda.re.abs() < 1e-8, "{}", r.lambda);
        prop_assert!((r.lambda.im - hopf_frequency(a, b).unwrap()).abs() < 1e-8);
    }

    // Grid-seeded Newton finds the same rightmost root as the Lambert path.
    #[test]
    fn lambert_matches_grid_newton(a in 0.0f64..3.0, b in 0.05f64..5.0, tau in 0.05f64..3.0) {
        let c = coeffs(a, b, tau);
        let r = rightmost_root(&c).unwrap();
        let opts = GridOptions { max_seeds: 20_000, ..GridOptions::default() };
        let g = grid_rightmost(&ScalarQuasi { a, b, tau }, &opts).unwrap();
        prop_assert!((r.lambda.re - g.lambda.re).abs() < 1e-7 * (1.0 + a + b), "{} vs {}", r.lambda, g.lambda);
        prop_assert!((r.lambda.im.abs() - g.lambda.im.abs()).abs() < 1e-6 * (1.0 + a + b));
    }

    #[test]
    fn compound_closed_forms(alpha in 0.01f64..1.0, k in 0.1f64..1.9, b in 3.0f64..60.0, tau in 0.01f64..1.0) {
        let spec = ProtocolSpec::Compound(Compound::new(alpha, 0.5, k).unwrap());
        let loss = LossModel::drop_tail(500.0, b, tau).unwrap();
        let ln_w = (alpha.ln() - 0.5f64.ln() + b * (500.0 * tau).ln()) / (b + 2.0 - k);
        prop_assume!(ln_w < (500.0 * tau).ln());
        let eq = solve_equilibrium(&spec, &loss, Variant::Plain).unwrap();
        let c = scalar_coefficients(&spec, &loss, &eq).unwrap();
        let s = compound_necsuf(alpha, k, b, eq.w_star);
        prop_assert!(rel(s.lhs, c.tau * ((c.b - c.a) * (c.b + c.a)).sqrt()) < 1e-9);
        prop_assert!(rel(s.rhs, (-c.a / c.b).acos()) < 1e-9);
        prop_assert!(rel(compound_hopf_delay(alpha, k, b, eq.w_star, tau), hopf_delay(c.a, c.b).unwrap()) < 1e-9);
        let ln_ratio = compound_nonosc_ratio(alpha, k, b, eq.w_star).ln();
        let generic = (c.b * c.tau).ln() + c.a * c.tau + 1.0;
        prop_assert!((ln_ratio - generic).abs() < 1e-9 * (1.0 + generic.abs()));
    }

    #[test]
    fn reno_closed_forms(b in 3.0f64..60.0, cap in 20.0f64..2000.0, tau in 0.01f64..1.0) {
        let loss = LossModel::drop_tail(cap, b, tau).unwrap();
        prop_assume!((2f64.ln() + b * (cap * tau).ln()) / (b + 2.0) < (cap * tau).ln());
        let eq = solve_equilibrium(&ProtocolSpec::Reno, &loss, Variant::Plain).unwrap();
        let c = scalar_coefficients(&ProtocolSpec::Reno, &loss, &eq).unwrap();
        let s = reno_necsuf(b, eq.w_star);
        prop_assert!(rel(s.lhs, c.tau * ((c.b - c.a) * (c.b + c.a)).sqrt()) < 1e-9);
        prop_assert!(rel(s.rhs, (-c.a / c.b).acos()) < 1e-9);
        prop_assert!(rel(reno_hopf_delay(b, eq.w_star, tau), hopf_delay(c.a, c.b).unwrap()) < 1e-9);
        let ln_ratio = reno_nonosc_ratio(b, eq.w_star).ln();
        let generic = (c.b * c.tau).ln() + c.a * c.tau + 1.0;
        prop_assert!((ln_ratio - generic).abs() < 1e-9 * (1.0 + generic.abs()));
    }

    #[test]
    fn hstcp_closed_forms(b in 3.0f64..60.0, cap in 100.0f64..50_000.0) {
        let h = sloped_hstcp();
        let spec = ProtocolSpec::Hstcp(h.clone());
        let loss = LossModel::drop_tail(cap, b, 0.1).unwrap();
        let Ok(eq) = solve_equilibrium(&spec, &loss, Variant::Plain) else { return Ok(()) };
        let c = scalar_coefficients(&spec, &loss, &eq).unwrap();
        prop_assume!(c.a >= 0.0 && c.b > c.a);
        let s = hstcp_necsuf(&h, b, eq.p_star, eq.w_star).unwrap();
        prop_assert!(rel(s.lhs, c.tau * ((c.b - c.a) * (c.b + c.a)).sqrt()) < 1e-9);
        prop_assert!(rel(s.rhs, (-c.a / c.b).acos()) < 1e-9);
        let ln_ratio = hstcp_nonosc_ratio(&h, b, eq.p_star, eq.w_star, HstcpBracket::Cubic).unwrap().ln();
        let generic = (c.b * c.tau).ln() + c.a * c.tau + 1.0;
        prop_assert!((ln_ratio - generic).abs() < 1e-9 * (1.0 + generic.abs()));
    }

    #[test]
    fn mixed_traffic_closed_form(
        b in 2.0f64..30.0, v in 0.0f64..60.0, s1 in 0.2f64..5.0, s2 in 0.0f64..5.0, which in 0usize..2,
    ) {
        let g = Gaussian { capacity_per_flow: 200.0, buffer_pkts: b, rtt_s: 0.1, v, sigma1_sq: s1, sigma2_sq: s2 };
        let loss = LossModel::gaussian(g).unwrap();
        let spec = if which == 0 { ProtocolSpec::compound_default() } else { ProtocolSpec::Reno };
        let Ok(eq) = solve_equilibrium(&spec, &loss, Variant::Plain) else { return Ok(()) };
        let c = scalar_coefficients(&spec, &loss, &eq).unwrap();
        let btau = mixed_traffic_btau(&spec, &g, eq.w_star).unwrap();
        prop_assert!(rel(btau, c.b * c.tau) < 1e-9, "{} vs {}", btau, c.b * c.tau);
        let v = mixed_traffic_sufficient(&spec, &loss, Variant::Plain).unwrap();
        prop_assert!(rel(v.margin, std::f64::consts::FRAC_PI_2 - btau) < 1e-9 || (v.margin - (std::f64::consts::FRAC_PI_2 - btau)).abs() < 1e-12);
    }
}

#[test]
fn non_oscillatory_boundary_at_inverse_e() {
    for tau in [0.01, 0.3, 1.0, 7.0] {
        let c = coeffs(0.0, 1.0 / (E * tau), tau);
        let o = non_oscillatory(&c).unwrap();
        assert!(o.verdict.margin.abs() < 1e-10, "{}", o.verdict.margin);
        // Double real root at -1/tau.
        let r = rightmost_root(&c).unwrap();
        assert!((r.lambda.re + 1.0 / tau).abs() < 1e-6 / tau, "{}", r.lambda);
    }
}

#[test]
fn sufficient_boundary_is_pi_over_two() {
    let c = coeffs(0.0, PI / 2.0, 1.0);
    let r = rightmost_root(&c).unwrap();
    assert!(r.lambda.re.abs() < 1e-12);
    assert!((r.lambda.im - PI / 2.0).abs() < 1e-12);
    assert!((hopf_delay(0.0, 2.0).unwrap() - PI / 4.0).abs() < 1e-15);
}

#[test]
fn large_gain_uses_log_form() {
    // ln(b tau) + a tau well above the direct-evaluation range.
    let c = coeffs(100.0, 200.0, 8.0);
    let r = rightmost_root(&c).unwrap();
    let f = r.lambda + c.a + c.b * (-r.lambda * c.tau).exp();
    assert!(f.norm() < 1e-8 * c.b, "{}", f);
    assert!(r.lambda.re > 0.0);
    assert!(!necsuf_stable(&c).unwrap().stable);
}

#[test]
fn printed_nonoscillatory_forms_differ() {
    let (alpha, k, b, w) = (0.125, 0.75, 15.0, 10.4);
    let a = compound_nonosc_ratio(alpha, k, b, w);
    let p = compound_nonosc_ratio_as_printed(alpha, k, b, w);
    assert!(rel(a, p) > 1e-3);
    // At w = 1 the exponents coincide.
    assert!(rel(compound_nonosc_ratio(alpha, k, b, 1.0), compound_nonosc_ratio_as_printed(alpha, k, b, 1.0)) < 1e-15);
    let a = reno_nonosc_ratio(15.0, 8.0);
    let p = reno_nonosc_ratio_as_printed(15.0, 8.0);
    assert!((a / p - (0.5f64).exp()).abs() < 1e-12);
}

#[test]
fn hstcp_square_bracket_only_agrees_for_flat_f2() {
    let flat = Hstcp::new(vec![[1.0, 1.0], [1e3, 8.0]], vec![[1.0, 0.5], [1e3, 0.5]]).unwrap();
    let (p, w) = (0.01, 20.0);
    let cubic = tcpstab::linearize::hstcp_bracket(&flat, p, w, HstcpBracket::Cubic).unwrap();
    let square = tcpstab::linearize::hstcp_bracket(&flat, p, w, HstcpBracket::Square).unwrap();
    assert_eq!(cubic, square);
    let h = sloped_hstcp();
    let cubic = tcpstab::linearize::hstcp_bracket(&h, p, 200.0, HstcpBracket::Cubic).unwrap();
    let square = tcpstab::linearize::hstcp_bracket(&h, p, 200.0, HstcpBracket::Square).unwrap();
    assert!(rel(cubic, square) > 1e-3);
}

#[test]
fn mixed_traffic_requires_gaussian() {
    let loss = LossModel::drop_tail(100.0, 15.0, 0.1).unwrap();
    assert!(mixed_traffic_sufficient(&ProtocolSpec::Reno, &loss, Variant::Plain).is_err());
}

#[test]
fn chart_labels_follow_margins() {
    let loss = LossModel::drop_tail(138.9, 15.0, 0.1).unwrap();
    let alphas: Vec<f64> = (1..=12).map(|j| 0.02 * j as f64).collect();
    let buffers: Vec<f64> = (1..=12).map(|j| 25.0 * j as f64).collect();
    let seq = stability_chart(&Compound::default(), &loss, Variant::Plain, &alphas, &buffers, Execution::Sequential)
        .unwrap();
    assert_eq!(seq.len(), 144);
    for cell in &seq {
        let expect = if cell.margin_nonosc > 0.0 {
            ChartLabel::NonOscillatory
        } else if cell.margin_necsuf > 0.0 {
            ChartLabel::StableOscillatory
        } else {
            ChartLabel::Unstable
        };
        assert_eq!(cell.label, expect);
    }
    // Row-major order: alpha outer, buffer inner.
    assert_eq!((seq[1].alpha, seq[1].buffer), (0.02, 50.0));
    // Larger buffers eventually destabilize at every alpha.
    for row in seq.chunks(12) {
        assert_eq!(row.last().unwrap().label, ChartLabel::Unstable);
    }
    let par = stability_chart(&Compound::default(), &loss, Variant::Plain, &alphas, &buffers, Execution::Parallel)
        .unwrap();
    assert_eq!(seq, par);
}

#[test]
fn small_alpha_small_buffer_is_non_oscillatory() {
    let loss = LossModel::drop_tail(138.9, 2.0, 0.1).unwrap();
    let cells =
        stability_chart(&Compound::default(), &loss, Variant::Plain, &[0.01], &[1.5], Execution::Sequential).unwrap();
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0].label, ChartLabel::NonOscillatory);
}

#[test]
fn conjugate_of_rightmost_root_is_a_root() {
    let r = rightmost_root(&coeffs(0.5, 3.0, 1.0)).unwrap();
    assert!(r.lambda.im > 0.0);
    let z = r.lambda.conj();
    let f = z + 0.5 + 3.0 * (-z).exp();
    assert!(f.norm() < 1e-12);
}
