//! Case I: symmetric flows, tau_1 = tau_2 = tau.
//!
//! The characteristic function factors as g1 g2 with
//! g1 = lam + a + (b + c) e^(-lam tau) and g2 = lam + a + (b - c) e^(-lam tau).

use serde::Serialize;

use crate::error::{Error, Result};

use super::{CoeffVariant, MultiCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseICoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CaseICoefficients {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::parameter("a", format!("must be >= 0, got {a}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::parameter("c", format!("must be > 0, got {c}")));
        }
        if !(b > c && b.is_finite()) {
            return Err(Error::parameter("b", format!("must exceed c = {c}, got {b}")));
        }
        Ok(CaseICoefficients { a, b, c })
    }

    /// Requires the two flows' coefficients to coincide.
    pub fn from_multi(mc: &MultiCoefficients) -> Result<Self> {
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs());
        if !(close(mc.m1, mc.m2) && close(mc.n1, mc.n2) && close(mc.p1, mc.p2) && mc.tau1 == mc.tau2) {
            return Err(Error::parameter("topology", "Case I needs identical flows (B1 = B2, C1 = C2, tau1 = tau2)"));
        }
        CaseICoefficients::new(mc.m1, mc.n1, mc.p1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Case1Report {
    pub coefficients: CaseICoefficients,
    /// Crossing frequencies of g1 and g2 (None when that factor never crosses).
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub tau1c: Option<f64>,
    pub tau2c: Option<f64>,
    pub tau_c: Option<f64>,
    pub delay_independent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Case1Verdict {
    pub stable: bool,
    /// acos(-a/(b+c)) - tau omega1; +inf when delay-independent.
    pub margin: f64,
}

impl Case1Report {
    pub fn verdict(&self, tau: f64) -> Case1Verdict {
        match (self.omega1, self.tau_c) {
            (Some(w1), Some(tc)) => {
                let c = &self.coefficients;
                let margin = (-c.a / (c.b + c.c)).acos() - tau * w1;
                Case1Verdict { stable: tau < tc && margin > 0.0, margin }
            }
            _ => Case1Verdict { stable: true, margin: f64::INFINITY },
        }
    }
}

fn factor_crossing(a: f64, gain: f64) -> (Option<f64>, Option<f64>) {
    if gain <= a {
        return (None, None);
    }
    let w = ((gain - a) * (gain + a)).sqrt();
    (Some(w), Some((-a / gain).acos() / w))
}

pub fn case1_analyze(c: &CaseICoefficients) -> Case1Report {
    let (omega1, tau1c) = factor_crossing(c.a, c.b + c.c);
    let (omega2, tau2c) = factor_crossing(c.a, c.b - c.c);
    let tau_c = match (tau1c, tau2c) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    Case1Report { coefficients: *c, omega1, omega2, tau1c, tau2c, tau_c, delay_independent: tau_c.is_none() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Case1Closed {
    Margin { lhs: f64, rhs: f64, margin: f64 },
    DelayIndependent,
}

/// Compound closed form of the Case I condition at a symmetric equilibrium.
/// extended: alpha w^(k-1) sqrt(B^2 - (k-2)^2 (1-2p)^2) < acos((k-2)(1-2p)/B);
/// appendix: the same with (1 - 2p) replaced by 1.
pub fn case1_compound_condition(alpha: f64, k: f64, buffer: f64, w: f64, p: f64, variant: CoeffVariant) -> Case1Closed {
    let x = match variant {
        CoeffVariant::Extended => (k - 2.0) * (1.0 - 2.0 * p),
        CoeffVariant::Appendix => k - 2.0,
    };
    if buffer <= x.abs() {
        return Case1Closed::DelayIndependent;
    }
    let lhs = alpha * w.powf(k - 1.0) * ((buffer - x) * (buffer + x)).sqrt();
    let rhs = (x / buffer).acos();
    Case1Closed::Margin { lhs, rhs, margin: rhs - lhs }
}

/// Re(d lam / d kappa) at the g1 crossing of the kappa-scaled system
/// lam + kappa a + kappa (b + c) e^(-lam tau0).
pub fn transversality_case1(a: f64, b: f64, c: f64, tau0: f64, kappa_c: f64) -> Result<f64> {
    let coeffs = CaseICoefficients::new(a, b, c)?;
    if !(tau0 > 0.0 && kappa_c > 0.0) {
        return Err(Error::parameter("tau0", "tau0 and kappa_c must be > 0"));
    }
    let (omega1, _) = factor_crossing(coeffs.a, coeffs.b + coeffs.c);
    let w = kappa_c * omega1.ok_or_else(|| Error::Domain("b + c <= a: no crossing".into()))?;
    let x = 1.0 + kappa_c * a * tau0;
    Ok(w * w * tau0 / (kappa_c * (x * x + (w * tau0).powi(2))))
}
