//! Loss probability p(w) at a bottleneck and its derivative.
//!
//! Drop-Tail small buffer: p = (w / (C tau))^B.
//! Gaussian mixed traffic:  p = exp(-2B (C tau - w - v tau) / (w s1 + v s2 tau)),
//! with s1, s2 the per-unit-time variances of the TCP and background flows.
//! A formula value above 1 is clamped to 1 and flagged as overload.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Saturated {
    pub value: f64,
    pub overload: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropTail {
    pub capacity_per_flow: f64,
    pub buffer_pkts: f64,
    pub rtt_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian {
    pub capacity_per_flow: f64,
    pub buffer_pkts: f64,
    pub rtt_s: f64,
    pub v: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LossRaw", into = "LossRaw")]
pub enum LossModel {
    DropTail(DropTail),
    Gaussian(Gaussian),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum LossRaw {
    DropTail(DropTail),
    Gaussian(Gaussian),
}

impl TryFrom<LossRaw> for LossModel {
    type Error = Error;
    fn try_from(raw: LossRaw) -> Result<Self> {
        match raw {
            LossRaw::DropTail(m) => LossModel::drop_tail(m.capacity_per_flow, m.buffer_pkts, m.rtt_s),
            LossRaw::Gaussian(g) => LossModel::gaussian(g),
        }
    }
}

impl From<LossModel> for LossRaw {
    fn from(m: LossModel) -> Self {
        match m {
            LossModel::DropTail(d) => LossRaw::DropTail(d),
            LossModel::Gaussian(g) => LossRaw::Gaussian(g),
        }
    }
}

impl LossModel {
    pub fn drop_tail(capacity_per_flow: f64, buffer_pkts: f64, rtt_s: f64) -> Result<Self> {
        require_positive("capacity_per_flow", capacity_per_flow)?;
        require_positive("rtt_s", rtt_s)?;
        if !(buffer_pkts.is_finite() && buffer_pkts >= 1.0) {
            return Err(Error::parameter("buffer_pkts", format!("must be >= 1, got {buffer_pkts}")));
        }
        Ok(LossModel::DropTail(DropTail { capacity_per_flow, buffer_pkts, rtt_s }))
    }

    pub fn gaussian(g: Gaussian) -> Result<Self> {
        require_positive("capacity_per_flow", g.capacity_per_flow)?;
        require_positive("rtt_s", g.rtt_s)?;
        require_positive("buffer_pkts", g.buffer_pkts)?;
        require_positive("sigma1_sq", g.sigma1_sq)?;
        if !(g.v.is_finite() && g.v >= 0.0 && g.v < g.capacity_per_flow) {
            return Err(Error::parameter("v", format!("must lie in [0, capacity_per_flow), got {}", g.v)));
        }
        if !(g.sigma2_sq.is_finite() && g.sigma2_sq >= 0.0) {
            return Err(Error::parameter("sigma2_sq", format!("must be >= 0, got {}", g.sigma2_sq)));
        }
        Ok(LossModel::Gaussian(g))
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossModel::DropTail(_) => "droptail",
            LossModel::Gaussian(_) => "gaussian",
        }
    }

    pub fn rtt(&self) -> f64 {
        match self {
            LossModel::DropTail(m) => m.rtt_s,
            LossModel::Gaussian(m) => m.rtt_s,
        }
    }

    pub fn capacity(&self) -> f64 {
        match self {
            LossModel::DropTail(m) => m.capacity_per_flow,
            LossModel::Gaussian(m) => m.capacity_per_flow,
        }
    }

    pub fn buffer(&self) -> f64 {
        match self {
            LossModel::DropTail(m) => m.buffer_pkts,
            LossModel::Gaussian(m) => m.buffer_pkts,
        }
    }

    pub fn with_buffer(&self, buffer_pkts: f64) -> Result<Self> {
        match *self {
            LossModel::DropTail(m) => LossModel::drop_tail(m.capacity_per_flow, buffer_pkts, m.rtt_s),
            LossModel::Gaussian(g) => LossModel::gaussian(Gaussian { buffer_pkts, ..g }),
        }
    }

    /// Rescale time by `s`: tau -> s tau, C -> C/s (and v -> v/s). Leaves p(w) unchanged.
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        require_positive("s", s)?;
        match *self {
            LossModel::DropTail(m) => {
                LossModel::drop_tail(m.capacity_per_flow / s, m.buffer_pkts, m.rtt_s * s)
            }
            LossModel::Gaussian(g) => LossModel::gaussian(Gaussian {
                capacity_per_flow: g.capacity_per_flow / s,
                rtt_s: g.rtt_s * s,
                v: g.v / s,
                ..g
            }),
        }
    }

    /// Window at which the unclamped formula reaches 1.
    pub fn saturation_window(&self) -> f64 {
        match self {
            LossModel::DropTail(m) => m.capacity_per_flow * m.rtt_s,
            LossModel::Gaussian(g) => (g.capacity_per_flow - g.v) * g.rtt_s,
        }
    }

    /// Unclamped formula value.
    fn raw(&self, w: f64) -> f64 {
        match self {
            LossModel::DropTail(m) => (w / (m.capacity_per_flow * m.rtt_s)).powf(m.buffer_pkts),
            LossModel::Gaussian(g) => {
                let num = g.capacity_per_flow * g.rtt_s - w - g.v * g.rtt_s;
                (-2.0 * g.buffer_pkts * num / gaussian_den(g, w)).exp()
            }
        }
    }

    pub fn loss_prob(&self, w: f64) -> Result<Saturated> {
        check_window(w)?;
        let p = self.raw(w);
        Ok(if p > 1.0 {
            Saturated { value: 1.0, overload: true }
        } else {
            Saturated { value: p, overload: false }
        })
    }

    /// dp/dw; zero where the probability is clamped.
    pub fn loss_prob_deriv(&self, w: f64) -> Result<Saturated> {
        check_window(w)?;
        let p = self.raw(w);
        if p > 1.0 {
            return Ok(Saturated { value: 0.0, overload: true });
        }
        let dp = match self {
            LossModel::DropTail(m) => m.buffer_pkts * p / w,
            LossModel::Gaussian(g) => {
                let den = gaussian_den(g, w);
                p * 2.0 * g.buffer_pkts * g.rtt_s
                    * (g.v * g.sigma2_sq + (g.capacity_per_flow - g.v) * g.sigma1_sq)
                    / (den * den)
            }
        };
        Ok(Saturated { value: dp, overload: false })
    }
}

fn gaussian_den(g: &Gaussian, w: f64) -> f64 {
    w * g.sigma1_sq + g.v * g.sigma2_sq * g.rtt_s
}

fn check_window(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("window must be finite and > 0, got {w}")))
    }
}
