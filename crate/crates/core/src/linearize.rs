//! Linearization of the scalar model about w*:
//! d(dw)/dt = -a dw(t) - b dw(t - tau).
//!
//! The 1/tau prefactor uses the loss model's reference RTT; `tau` in the
//! returned coefficients is the feedback delay and defaults to that RTT.

use serde::Serialize;

use crate::equilibrium::{Equilibrium, Variant};
use crate::error::{require_positive, Error, Result};
use crate::loss_models::LossModel;
use crate::protocols::{Hstcp, ProtocolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarCoefficients {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
}

impl ScalarCoefficients {
    pub fn new(a: f64, b: f64, tau: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::parameter("a", "must be finite"));
        }
        if !b.is_finite() {
            return Err(Error::parameter("b", "must be finite"));
        }
        require_positive("tau", tau)?;
        Ok(ScalarCoefficients { a, b, tau })
    }

    /// Same gains, different feedback delay.
    pub fn with_delay(self, tau: f64) -> Result<Self> {
        ScalarCoefficients::new(self.a, self.b, tau)
    }
}

pub fn scalar_coefficients(
    spec: &ProtocolSpec,
    loss: &LossModel,
    eq: &Equilibrium,
) -> Result<ScalarCoefficients> {
    let w = eq.w_star;
    let tau = loss.rtt();
    let g = spec.gains(w)?;
    let p = loss.loss_prob(w)?;
    if p.overload {
        return Err(Error::Domain(format!("equilibrium w* = {w} lies in the overload region")));
    }
    let p = p.value;
    let dp = loss.loss_prob_deriv(w)?.value;
    let (a, b) = match eq.variant {
        Variant::Plain => (-(w / tau) * (g.di - g.dd * p), (w / tau) * dp * g.d),
        Variant::AckWeighted => (
            -(w / tau) * (g.di * (1.0 - p) - g.dd * p),
            (w / tau) * dp * (g.i + g.d),
        ),
    };
    if a < 0.0 {
        log::warn!("a = {a} < 0: the delay stability conditions assume a >= 0");
    }
    ScalarCoefficients::new(a, b, tau)
}

/// Compound with Drop-Tail (plain): a tau = alpha (2-k) w^(k-1), b tau = alpha B w^(k-1).
pub fn compound_ab(alpha: f64, k: f64, buffer: f64, w_star: f64, tau: f64) -> (f64, f64) {
    let base = alpha * w_star.powf(k - 1.0) / tau;
    ((2.0 - k) * base, buffer * base)
}

/// Reno with Drop-Tail (plain): a tau = 2/w, b tau = B/w.
pub fn reno_ab(buffer: f64, w_star: f64, tau: f64) -> (f64, f64) {
    (2.0 / (w_star * tau), buffer / (w_star * tau))
}

/// Which printed HSTCP bracket to evaluate; see [`hstcp_bracket`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HstcpBracket {
    /// `w f1'/f1 - 2 - f2' w^3 p / f1`, the form obtained by linearizing.
    Cubic,
    /// `w f1'/f1 - 2 - f2' w^2 p / f1`, an alternative printed form.
    Square,
}

/// HSTCP bracket at w*, so that -a/b = bracket / B.
pub fn hstcp_bracket(h: &Hstcp, p: f64, w_star: f64, form: HstcpBracket) -> Result<f64> {
    let (f1, df1) = h.f1().eval(w_star)?;
    let (_, df2) = h.f2().eval(w_star)?;
    let power = match form {
        HstcpBracket::Cubic => 3,
        HstcpBracket::Square => 2,
    };
    Ok(w_star * df1 / f1 - 2.0 - df2 * w_star.powi(power) * p / f1)
}

/// HSTCP with Drop-Tail (plain): a tau = -(f1/w) bracket, b tau = B f1 / w.
pub fn hstcp_ab(h: &Hstcp, buffer: f64, p: f64, w_star: f64, tau: f64) -> Result<(f64, f64)> {
    let (f1, _) = h.f1().eval(w_star)?;
    let bracket = hstcp_bracket(h, p, w_star, HstcpBracket::Cubic)?;
    Ok((-(f1 / w_star) * bracket / tau, buffer * f1 / (w_star * tau)))
}
