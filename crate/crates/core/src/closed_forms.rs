//! Protocol-specific closed forms of the delay conditions (Drop-Tail loss,
//! plain dynamics). Each returns the two sides so callers can compare them
//! to the generic (a, b) path without dividing by a near-zero margin.
//!
//! Functions suffixed `_as_printed` reproduce forms that differ from what
//! the generic path gives; they exist so the discrepancy stays measurable.

use crate::error::Result;
use crate::linearize::{hstcp_bracket, HstcpBracket};
use crate::loss_models::Gaussian;
use crate::protocols::{Hstcp, ProtocolSpec};

/// Stable iff `lhs < rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// alpha w^(k-1) sqrt(B^2 - (k-2)^2) < acos((k-2)/B).
pub fn compound_necsuf(alpha: f64, k: f64, buffer: f64, w: f64) -> Sides {
    let lhs = alpha * w.powf(k - 1.0) * (buffer * buffer - (k - 2.0) * (k - 2.0)).sqrt();
    Sides { lhs, rhs: ((k - 2.0) / buffer).acos() }
}

/// (1/w) sqrt(B^2 - 4) < acos(-2/B).
pub fn reno_necsuf(buffer: f64, w: f64) -> Sides {
    Sides { lhs: (buffer * buffer - 4.0).sqrt() / w, rhs: (-2.0 / buffer).acos() }
}

/// (f1/w) sqrt(B^2 - br^2) < acos(br/B) with the cubic bracket.
pub fn hstcp_necsuf(h: &Hstcp, buffer: f64, p: f64, w: f64) -> Result<Sides> {
    let (f1, _) = h.f1().eval(w)?;
    let br = hstcp_bracket(h, p, w, HstcpBracket::Cubic)?;
    Ok(Sides { lhs: f1 / w * (buffer * buffer - br * br).sqrt(), rhs: (br / buffer).acos() })
}

/// Hopf delay of Compound + Drop-Tail, for reference RTT `tau`.
pub fn compound_hopf_delay(alpha: f64, k: f64, buffer: f64, w: f64, tau: f64) -> f64 {
    let s = compound_necsuf(alpha, k, buffer, w);
    tau * s.rhs / (s.lhs)
}

pub fn reno_hopf_delay(buffer: f64, w: f64, tau: f64) -> f64 {
    let s = reno_necsuf(buffer, w);
    tau * s.rhs / s.lhs
}

/// b tau under Gaussian loss, using the equilibrium identity per protocol.
pub fn mixed_traffic_btau(spec: &ProtocolSpec, g: &Gaussian, w: f64) -> Result<f64> {
    let den = w * g.sigma1_sq + g.v * g.sigma2_sq * g.rtt_s;
    let core = 2.0 * g.buffer_pkts * g.rtt_s
        * (g.v * g.sigma2_sq + (g.capacity_per_flow - g.v) * g.sigma1_sq)
        / (den * den);
    Ok(match spec {
        ProtocolSpec::Compound(c) => c.alpha() * w.powf(c.k()) * core,
        ProtocolSpec::Reno => core,
        ProtocolSpec::Hstcp(h) => h.f1().eval(w)?.0 * core,
    })
}

/// Non-oscillatory test written as `ratio < 1`, from ln(b tau) + a tau + 1 < 0.
pub fn compound_nonosc_ratio(alpha: f64, k: f64, buffer: f64, w: f64) -> f64 {
    alpha * buffer * w.powf(k - 1.0) / (alpha * (k - 2.0) * w.powf(k - 1.0) - 1.0).exp()
}

/// The printed Compound form, with w^(k-2) in the exponent.
pub fn compound_nonosc_ratio_as_printed(alpha: f64, k: f64, buffer: f64, w: f64) -> f64 {
    alpha * buffer * w.powf(k - 1.0) / (alpha * (k - 2.0) * w.powf(k - 2.0) - 1.0).exp()
}

pub fn reno_nonosc_ratio(buffer: f64, w: f64) -> f64 {
    buffer / (w * (-2.0 / w - 1.0).exp())
}

/// The printed Reno form, with exp(2/w - 1).
pub fn reno_nonosc_ratio_as_printed(buffer: f64, w: f64) -> f64 {
    buffer / (w * (2.0 / w - 1.0).exp())
}

pub fn hstcp_nonosc_ratio(h: &Hstcp, buffer: f64, p: f64, w: f64, form: HstcpBracket) -> Result<f64> {
    let (f1, _) = h.f1().eval(w)?;
    let br = hstcp_bracket(h, p, w, form)?;
    Ok(f1 * buffer / (w * (f1 / w * br - 1.0).exp()))
}
