//! Delay-stability verdicts for lam + a + b e^(-lam tau) = 0.
//!
//! Margins are positive when stable; a margin of exactly zero is a boundary
//! point and counts as not stable.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::equilibrium::{solve_equilibrium, Variant};
use crate::error::{Error, Result};
use crate::lambert::{lambert_w0, lambert_w0_from_log};
use crate::linearize::{scalar_coefficients, ScalarCoefficients};
use crate::loss_models::LossModel;
use crate::par::{self, Execution};
use crate::protocols::{Compound, ProtocolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Sufficient,
    NecessarySufficient,
    DelayIndependent,
    NonOscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub margin: f64,
    pub condition: Condition,
}

impl StabilityVerdict {
    fn from_margin(margin: f64, condition: Condition) -> Self {
        StabilityVerdict { stable: margin > 0.0, margin, condition }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonOscillatoryVerdict {
    #[serde(flatten)]
    pub verdict: StabilityVerdict,
    /// Real point ln(b tau)/tau where F'(sigma) = 0.
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RightmostRoot {
    pub lambda: Complex64,
    pub residual: f64,
}

fn check(c: &ScalarCoefficients) -> Result<()> {
    if !(c.a >= 0.0) {
        return Err(Error::parameter("a", format!("must be >= 0, got {}", c.a)));
    }
    if !(c.b > 0.0) {
        return Err(Error::parameter("b", format!("must be > 0, got {}", c.b)));
    }
    if !(c.tau > 0.0 && c.tau.is_finite()) {
        return Err(Error::parameter("tau", format!("must be > 0, got {}", c.tau)));
    }
    Ok(())
}

/// sqrt(b^2 - a^2) without cancellation.
fn crossing_frequency(a: f64, b: f64) -> f64 {
    ((b - a) * (b + a)).sqrt()
}

/// b tau < pi/2.
pub fn sufficient_stable(c: &ScalarCoefficients) -> Result<StabilityVerdict> {
    check(c)?;
    Ok(StabilityVerdict::from_margin(FRAC_PI_2 - c.b * c.tau, Condition::Sufficient))
}

/// tau sqrt(b^2 - a^2) < acos(-a/b); delay-independent when b <= a.
pub fn necsuf_stable(c: &ScalarCoefficients) -> Result<StabilityVerdict> {
    check(c)?;
    if c.b <= c.a {
        return Ok(StabilityVerdict { stable: true, margin: c.a - c.b, condition: Condition::DelayIndependent });
    }
    let margin = (-c.a / c.b).acos() - c.tau * crossing_frequency(c.a, c.b);
    Ok(StabilityVerdict::from_margin(margin, Condition::NecessarySufficient))
}

/// Delay at which a root pair crosses the imaginary axis.
pub fn hopf_delay(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::parameter("a", format!("must be >= 0, got {a}")));
    }
    if !(b > 0.0) {
        return Err(Error::parameter("b", format!("must be > 0, got {b}")));
    }
    if b <= a {
        return Err(Error::Domain(format!("no Hopf delay: b = {b} <= a = {a} is stable for every delay")));
    }
    Ok((-a / b).acos() / crossing_frequency(a, b))
}

/// Crossing frequency at the Hopf delay.
pub fn hopf_frequency(a: f64, b: f64) -> Result<f64> {
    hopf_delay(a, b)?;
    Ok(crossing_frequency(a, b))
}

/// ln(b tau) + a tau + 1 < 0: all roots real-dominated, no oscillation.
pub fn non_oscillatory(c: &ScalarCoefficients) -> Result<NonOscillatoryVerdict> {
    check(c)?;
    let lbt = (c.b * c.tau).ln();
    Ok(NonOscillatoryVerdict {
        verdict: StabilityVerdict::from_margin(-(lbt + c.a * c.tau + 1.0), Condition::NonOscillatory),
        sigma: lbt / c.tau,
    })
}

/// Rightmost root -a + W0(-b tau e^(a tau)) / tau.
pub fn rightmost_root(c: &ScalarCoefficients) -> Result<RightmostRoot> {
    if !(c.b > 0.0) {
        return Err(Error::parameter("b", format!("must be > 0, got {}", c.b)));
    }
    if !(c.tau > 0.0 && c.tau.is_finite() && c.a.is_finite() && c.b.is_finite()) {
        return Err(Error::parameter("tau", "a, b, tau must be finite with tau > 0"));
    }
    let log_mag = (c.b * c.tau).ln() + c.a * c.tau;
    let w = if log_mag < 600.0 {
        lambert_w0(Complex64::new(-(log_mag.exp()), 0.0))
    } else {
        lambert_w0_from_log(Complex64::new(log_mag, PI))
    };
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Numeric(format!("Lambert W failed for a = {}, b = {}, tau = {}", c.a, c.b, c.tau)));
    }
    let lambda = -c.a + w / c.tau;
    let residual = (lambda + c.a + c.b * (-lambda * c.tau).exp()).norm();
    Ok(RightmostRoot { lambda, residual })
}

/// Sufficient test with a Gaussian loss; b comes from the generic linearization.
pub fn mixed_traffic_sufficient(
    spec: &ProtocolSpec,
    loss: &LossModel,
    variant: Variant,
) -> Result<StabilityVerdict> {
    if !matches!(loss, LossModel::Gaussian(_)) {
        return Err(Error::parameter("loss", "mixed-traffic test needs the gaussian loss model"));
    }
    let eq = solve_equilibrium(spec, loss, variant)?;
    sufficient_stable(&scalar_coefficients(spec, loss, &eq)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartLabel {
    NonOscillatory,
    StableOscillatory,
    Unstable,
    NoEquilibrium,
}

impl ChartLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ChartLabel::NonOscillatory => "non_oscillatory",
            ChartLabel::StableOscillatory => "stable_oscillatory",
            ChartLabel::Unstable => "unstable",
            ChartLabel::NoEquilibrium => "no_equilibrium",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartCell {
    pub alpha: f64,
    pub buffer: f64,
    pub label: ChartLabel,
    pub margin_necsuf: f64,
    pub margin_nonosc: f64,
}

/// Stability chart for Compound over (alpha, B) at a fixed capacity and RTT.
pub fn stability_chart(
    base: &Compound,
    loss: &LossModel,
    variant: Variant,
    alphas: &[f64],
    buffers: &[f64],
    exec: Execution,
) -> Result<Vec<ChartCell>> {
    let grid: Vec<(f64, f64)> =
        alphas.iter().flat_map(|&a| buffers.iter().map(move |&b| (a, b))).collect();
    par::map(exec, &grid, |&(alpha, buffer)| chart_cell(base, loss, variant, alpha, buffer))
        .into_iter()
        .collect()
}

fn chart_cell(base: &Compound, loss: &LossModel, variant: Variant, alpha: f64, buffer: f64) -> Result<ChartCell> {
    let spec = ProtocolSpec::Compound(base.with_alpha(alpha)?);
    let loss = loss.with_buffer(buffer)?;
    let eq = match solve_equilibrium(&spec, &loss, variant) {
        Ok(eq) => eq,
        Err(Error::NoEquilibrium(_)) => {
            return Ok(ChartCell {
                alpha,
                buffer,
                label: ChartLabel::NoEquilibrium,
                margin_necsuf: f64::NAN,
                margin_nonosc: f64::NAN,
            })
        }
        Err(e) => return Err(e),
    };
    let c = scalar_coefficients(&spec, &loss, &eq)?;
    let ns = necsuf_stable(&c)?;
    let no = non_oscillatory(&c)?;
    let label = if no.verdict.stable {
        ChartLabel::NonOscillatory
    } else if ns.stable {
        ChartLabel::StableOscillatory
    } else {
        ChartLabel::Unstable
    };
    Ok(ChartCell { alpha, buffer, label, margin_necsuf: ns.margin, margin_nonosc: no.verdict.margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preconditions() {
        let bad = ScalarCoefficients { a: -0.1, b: 1.0, tau: 1.0 };
        assert!(matches!(necsuf_stable(&bad), Err(Error::Parameter { field: "a", .. })));
        let bad = ScalarCoefficients { a: 0.1, b: 0.0, tau: 1.0 };
        assert!(sufficient_stable(&bad).is_err());
        assert!(matches!(hopf_delay(2.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn boundary_counts_as_unstable() {
        let c = ScalarCoefficients { a: 0.0, b: FRAC_PI_2, tau: 1.0 };
        let v = sufficient_stable(&c).unwrap();
        assert_eq!(v.margin, 0.0);
        assert!(!v.stable);
    }

    #[test]
    fn delay_independent_branch() {
        let c = ScalarCoefficients { a: 2.0, b: 1.0, tau: 100.0 };
        let v = necsuf_stable(&c).unwrap();
        assert_eq!(v.condition, Condition::DelayIndependent);
        assert!(v.stable && v.margin == 1.0);
    }
}
