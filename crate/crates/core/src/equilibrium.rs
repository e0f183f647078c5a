//! Equilibrium window of the scalar fluid model.
//!
//! plain:        i(w) = d(w) p(w)
//! ack_weighted: i(w) (1 - p(w)) = d(w) p(w)

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss_models::LossModel;
use crate::protocols::ProtocolSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Plain,
    AckWeighted,
}

impl Variant {
    /// Weight of p in the increase term: 0 for plain, 1 for ack-weighted.
    pub(crate) fn ack_weight(self) -> f64 {
        match self {
            Variant::Plain => 0.0,
            Variant::AckWeighted => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub w_star: f64,
    pub p_star: f64,
    /// Sending rate w*/tau.
    pub x_star: f64,
    pub residual: f64,
    pub variant: Variant,
}

/// Net drift factor i(w)(1 - v p) - d(w) p evaluated at a common window.
pub fn residual(spec: &ProtocolSpec, loss: &LossModel, variant: Variant, w: f64) -> Result<f64> {
    let (i, _) = spec.increase(w)?;
    let (d, _) = spec.decrease(w)?;
    let p = loss.loss_prob(w)?.value;
    Ok(i * (1.0 - variant.ack_weight() * p) - d * p)
}

fn residual_deriv(spec: &ProtocolSpec, loss: &LossModel, variant: Variant, w: f64) -> Result<f64> {
    let g = spec.gains(w)?;
    let p = loss.loss_prob(w)?.value;
    let dp = loss.loss_prob_deriv(w)?.value;
    let v = variant.ack_weight();
    Ok(g.di * (1.0 - v * p) - g.i * v * dp - g.dd * p - g.d * dp)
}

pub fn solve_equilibrium(spec: &ProtocolSpec, loss: &LossModel, variant: Variant) -> Result<Equilibrium> {
    let (dom_lo, dom_hi) = spec.domain();
    let sat = loss.saturation_window();
    let hi = sat.min(dom_hi);
    let lo = (sat * 1e-9).max(dom_lo);
    if !(lo < hi) {
        return Err(Error::NoEquilibrium(format!(
            "protocol domain [{dom_lo}, {dom_hi}] misses the loss range (0, {sat}]"
        )));
    }
    let f = |w: f64| residual(spec, loss, variant, w);
    let (mut a, mut b) = (lo, hi);
    let (ra, rb) = (f(a)?, f(b)?);
    if ra == 0.0 {
        return finish(spec, loss, variant, a);
    }
    if rb == 0.0 {
        return finish(spec, loss, variant, b);
    }
    if ra.signum() == rb.signum() {
        return Err(Error::NoEquilibrium(format!(
            "residual keeps sign {} on [{lo:.6e}, {hi:.6e}]",
            if ra > 0.0 { "+" } else { "-" }
        )));
    }
    let sa = ra.signum();
    for _ in 0..300 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || b - a <= 4.0 * f64::EPSILON * b {
            break;
        }
        let rm = f(m)?;
        if rm == 0.0 {
            return finish(spec, loss, variant, m);
        }
        if rm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    // Newton polish inside the final bracket.
    let mut w = 0.5 * (a + b);
    let mut r = f(w)?;
    for _ in 0..4 {
        let dr = residual_deriv(spec, loss, variant, w)?;
        if dr == 0.0 || !dr.is_finite() {
            break;
        }
        let next = w - r / dr;
        if !(next >= a && next <= b) {
            break;
        }
        let rn = f(next)?;
        if rn.abs() >= r.abs() {
            break;
        }
        w = next;
        r = rn;
    }
    finish(spec, loss, variant, w)
}

fn finish(spec: &ProtocolSpec, loss: &LossModel, variant: Variant, w: f64) -> Result<Equilibrium> {
    let p = loss.loss_prob(w)?.value;
    Ok(Equilibrium {
        w_star: w,
        p_star: p,
        x_star: w / loss.rtt(),
        residual: residual(spec, loss, variant, w)?.abs(),
        variant,
    })
}
