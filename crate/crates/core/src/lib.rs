//! Stability analysis of fluid models of TCP window dynamics.
//!
//! The scalar model is
//!
//! ```text
//! dw/dt = (i(w(t)) - d(w(t)) p(w(t - tau))) w(t - tau) / tau
//! ```
//!
//! with increase/decrease gains `i`, `d` from [`protocols`] and loss
//! probability `p` from [`loss_models`]. [`equilibrium`] finds w*,
//! [`linearize`] produces the coefficients of
//! `d(dw)/dt = -a dw(t) - b dw(t - tau)`, and [`scalar_stability`] turns them
//! into verdicts and the rightmost characteristic root. [`multibottleneck`]
//! covers two flows sharing a core link, [`dde_sim`] integrates the
//! nonlinear delay equations, and [`queue_stats`] gives finite-buffer queue
//! distributions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_forms;
pub mod dde_sim;
pub mod equilibrium;
pub mod error;
pub mod format;
pub mod lambert;
pub mod linearize;
pub mod loss_models;
pub mod multibottleneck;
pub mod par;
pub mod protocols;
pub mod quasi_poly;
pub mod queue_stats;
pub mod scalar_stability;

pub use equilibrium::{solve_equilibrium, Equilibrium, Variant};
pub use error::{Error, Result};
pub use linearize::{scalar_coefficients, ScalarCoefficients};
pub use loss_models::LossModel;
pub use protocols::ProtocolSpec;

/// Buffer from the rule B = C RTT / sqrt(N), rounded up to whole packets.
pub fn buffer_rule(capacity_pkts_per_s: f64, rtt_s: f64, flows: u64) -> Result<u64> {
    error::require_positive("capacity_pkts_per_s", capacity_pkts_per_s)?;
    error::require_positive("rtt_s", rtt_s)?;
    if flows == 0 {
        return Err(Error::parameter("flows", "must be >= 1"));
    }
    let b = (capacity_pkts_per_s * rtt_s / (flows as f64).sqrt()).ceil();
    if !b.is_finite() || b > u64::MAX as f64 {
        return Err(Error::Numeric(format!("buffer {b} out of range")));
    }
    Ok(b as u64)
}
