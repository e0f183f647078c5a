//! Two flows, each behind its own edge link, sharing a core link.
//!
//! dw_j/dt = (w_j(t - tau_j) / tau_j) [i(w_j)(1 - v L_j) - d(w_j) L_j],
//! L_j = p_j(w_j(t - tau_j)) + q(w_1(t - tau_1), w_2(t - tau_2)),
//! p_j = (w_j / (C_j tau_j))^B_j,  q = ((w_1/tau_1 + w_2/tau_2) / C~)^B.
//!
//! `extended` takes v = 1 and C~ = 2C; `appendix` takes v = 0 and C~ = C.

mod case1;
mod case2;

pub use case1::{
    case1_analyze, case1_compound_condition, transversality_case1, Case1Closed, Case1Report, CaseICoefficients,
};
pub use case2::{
    case2_analyze, case2_reduce, decomposition_as_printed, sign_factor_decomposition, term3, transversality_case2,
    Case2Class, Case2Reduction, Case2Report, Case2Transversality, Case2Verdict, Crossing, QuadCoefficients,
};

use serde::{Deserialize, Serialize};

use crate::dde_sim::{
    classify_component, integrate, steps_per, CycleKind, CycleVerdict, DelaySystem, History, SimSettings,
    StepConfig, SweepParameter, Trajectory, POSITIVITY_FLOOR,
};
use crate::error::{require_positive, Error, Result};
use crate::protocols::ProtocolSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffVariant {
    #[default]
    Extended,
    Appendix,
}

impl CoeffVariant {
    fn ack_weight(self) -> f64 {
        match self {
            CoeffVariant::Extended => 1.0,
            CoeffVariant::Appendix => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiTopology {
    pub protocol: ProtocolSpec,
    /// Edge buffers and the core buffer.
    pub b1: f64,
    pub b2: f64,
    pub b: f64,
    /// Edge capacities and the core capacity (packets per second).
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
    /// Reference round-trip times (seconds).
    pub tau1: f64,
    pub tau2: f64,
}

impl MultiTopology {
    pub fn validate(&self) -> Result<()> {
        for (name, b) in [("b1", self.b1), ("b2", self.b2), ("b", self.b)] {
            if !(b.is_finite() && b >= 1.0) {
                return Err(Error::parameter(name, format!("buffer must be >= 1, got {b}")));
            }
        }
        require_positive("c1", self.c1)?;
        require_positive("c2", self.c2)?;
        require_positive("c", self.c)?;
        require_positive("tau1", self.tau1)?;
        require_positive("tau2", self.tau2)?;
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.b1 == self.b2 && self.c1 == self.c2 && self.tau1 == self.tau2
    }

    pub fn core_capacity(&self, variant: CoeffVariant) -> f64 {
        match variant {
            CoeffVariant::Extended => 2.0 * self.c,
            CoeffVariant::Appendix => self.c,
        }
    }

    fn edge_loss(&self, j: usize, w: f64) -> f64 {
        let (c, tau, b) = if j == 0 { (self.c1, self.tau1, self.b1) } else { (self.c2, self.tau2, self.b2) };
        (w / (c * tau)).powf(b).min(1.0)
    }

    fn core_loss(&self, variant: CoeffVariant, w1: f64, w2: f64) -> f64 {
        ((w1 / self.tau1 + w2 / self.tau2) / self.core_capacity(variant)).powf(self.b).min(1.0)
    }

    fn drift(&self, variant: CoeffVariant, w: f64, l: f64) -> Result<f64> {
        let (i, _) = self.protocol.increase(w)?;
        let (d, _) = self.protocol.decrease(w)?;
        Ok(i * (1.0 - variant.ack_weight() * l) - d * l)
    }

    /// Residuals of both flows at a common time (the equilibrium equations).
    pub fn residuals(&self, variant: CoeffVariant, w1: f64, w2: f64) -> Result<[f64; 2]> {
        let q = self.core_loss(variant, w1, w2);
        Ok([
            self.drift(variant, w1, self.edge_loss(0, w1) + q)?,
            self.drift(variant, w2, self.edge_loss(1, w2) + q)?,
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiEquilibrium {
    pub w1: f64,
    pub w2: f64,
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
    /// Largest residual relative to max(i, d L) of its flow.
    pub residual: f64,
    pub variant: CoeffVariant,
}

/// Root in w of `f` on (lo, hi] by bisection; `f(lo) > 0 > f(hi)` expected.
fn bisect<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64, what: &str) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoEquilibrium(format!("{what}: residual keeps one sign on [{lo:.6e}, {hi:.6e}]")));
    }
    let sa = fa.signum();
    for _ in 0..300 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

pub fn multi_equilibrium(top: &MultiTopology, variant: CoeffVariant) -> Result<MultiEquilibrium> {
    top.validate()?;
    let hi1 = top.c1 * top.tau1;
    let hi2 = top.c2 * top.tau2;
    let (w1, w2) = if top.is_symmetric() {
        let w = bisect(|w| Ok(top.residuals(variant, w, w)?[0]), 1e-9 * hi1, hi1, "symmetric flow")?;
        (w, w)
    } else {
        // Gauss-Seidel over the two scalar equations.
        let mut w1 = bisect(|w| Ok(top.residuals(variant, w, 1e-9 * hi2)?[0]), 1e-9 * hi1, hi1, "flow 1")?;
        let mut w2 = hi2;
        let mut converged = false;
        for _ in 0..500 {
            let n2 = bisect(|w| Ok(top.residuals(variant, w1, w)?[1]), 1e-9 * hi2, hi2, "flow 2")?;
            let n1 = bisect(|w| Ok(top.residuals(variant, w, n2)?[0]), 1e-9 * hi1, hi1, "flow 1")?;
            let change = ((n1 - w1) / n1).abs().max(((n2 - w2) / n2).abs());
            w1 = n1;
            w2 = n2;
            if change <= 1e-14 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence { what: "two-flow equilibrium", iterations: 500 });
        }
        (w1, w2)
    };
    let q = top.core_loss(variant, w1, w2);
    let (p1, p2) = (top.edge_loss(0, w1), top.edge_loss(1, w2));
    let r = top.residuals(variant, w1, w2)?;
    let scale = |w: f64, l: f64| -> Result<f64> {
        let (i, _) = top.protocol.increase(w)?;
        let (d, _) = top.protocol.decrease(w)?;
        Ok(i.max(d * l))
    };
    let residual = (r[0].abs() / scale(w1, p1 + q)?).max(r[1].abs() / scale(w2, p2 + q)?);
    Ok(MultiEquilibrium { w1, w2, p1, p2, q, residual, variant })
}

/// du_j/dt = -M_j u_j(t) - N_j u_j(t - tau_j) - P_j u_k(t - tau_k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiCoefficients {
    pub m1: f64,
    pub n1: f64,
    pub p1: f64,
    pub m2: f64,
    pub n2: f64,
    pub p2: f64,
    pub tau1: f64,
    pub tau2: f64,
}

pub fn multi_coefficients(top: &MultiTopology, eq: &MultiEquilibrium) -> Result<MultiCoefficients> {
    let v = eq.variant.ack_weight();
    let s = eq.w1 / top.tau1 + eq.w2 / top.tau2;
    let core = top.b * eq.q / s;
    let taus = [top.tau1, top.tau2];
    let ws = [eq.w1, eq.w2];
    let ps = [eq.p1, eq.p2];
    let bs = [top.b1, top.b2];
    let mut out = [[0.0; 3]; 2];
    for j in 0..2 {
        let (w, tau) = (ws[j], taus[j]);
        let g = top.protocol.gains(w)?;
        let l = ps[j] + eq.q;
        let m = -(w / tau) * (g.di * (1.0 - v * l) - g.dd * l);
        let gain = (w / tau) * (v * g.i + g.d);
        let n = gain * (bs[j] * ps[j] / w + core / tau);
        let p = gain * core / taus[1 - j];
        out[j] = [m, n, p];
    }
    Ok(MultiCoefficients {
        m1: out[0][0],
        n1: out[0][1],
        p1: out[0][2],
        m2: out[1][0],
        n2: out[1][1],
        p2: out[1][2],
        tau1: top.tau1,
        tau2: top.tau2,
    })
}

/// Nonlinear two-flow model with feedback delays separate from the RTTs.
#[derive(Debug, Clone)]
pub struct PairFluid {
    pub topology: MultiTopology,
    pub variant: CoeffVariant,
    pub delays: [f64; 2],
}

impl DelaySystem<2> for PairFluid {
    fn delays(&self) -> [f64; 2] {
        self.delays
    }

    fn rhs(&self, now: &[f64; 2], delayed: &[f64; 2]) -> Result<[f64; 2]> {
        let top = &self.topology;
        let q = top.core_loss(self.variant, delayed[0], delayed[1]);
        let taus = [top.tau1, top.tau2];
        let mut out = [0.0; 2];
        for j in 0..2 {
            let l = top.edge_loss(j, delayed[j]) + q;
            out[j] = top.drift(self.variant, now[j], l)? * delayed[j] / taus[j];
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairScenario {
    pub topology: MultiTopology,
    pub variant: CoeffVariant,
    /// Feedback delays; the reference RTTs when `None`.
    pub delays: Option<[f64; 2]>,
    pub sim: SimSettings,
}

impl PairScenario {
    pub fn delays(&self) -> [f64; 2] {
        self.delays.unwrap_or([self.topology.tau1, self.topology.tau2])
    }

    /// Copy with one parameter changed. `Tau` sets flow 1's delay and keeps
    /// the ratio of the two delays.
    pub fn with_parameter(&self, parameter: SweepParameter, v: f64) -> Result<Self> {
        let mut out = self.clone();
        match parameter {
            SweepParameter::Tau => {
                let [d1, d2] = self.delays();
                out.delays = Some([v, v * d2 / d1]);
            }
            SweepParameter::Buffer => out.topology.b = v,
            SweepParameter::Alpha => match &self.topology.protocol {
                ProtocolSpec::Compound(c) => out.topology.protocol = ProtocolSpec::Compound(c.with_alpha(v)?),
                _ => return Err(Error::parameter("parameter", "alpha sweeps need the compound protocol")),
            },
        }
        Ok(out)
    }

    pub fn simulate(&self) -> Result<(MultiEquilibrium, Trajectory)> {
        let eq = multi_equilibrium(&self.topology, self.variant)?;
        let delays = self.delays();
        let shortest = delays[0].min(delays[1]);
        let (dt, _) = self.sim.grid(shortest)?;
        for d in delays {
            steps_per(d, dt)?;
        }
        let horizon = self.sim.horizon_delays * delays[0].max(delays[1]);
        let h = [
            History::Constant(self.sim.history.value(eq.w1)?),
            History::Constant(self.sim.history.value(eq.w2)?),
        ];
        let sys = PairFluid { topology: self.topology.clone(), variant: self.variant, delays };
        let traj = integrate(&sys, &h, StepConfig { dt, horizon, floor: Some(POSITIVITY_FLOOR) })?;
        Ok((eq, traj))
    }

    /// Verdict of the less settled of the two flows.
    pub fn classify(&self, traj: &Trajectory) -> CycleVerdict {
        let rank = |k: CycleKind| match k {
            CycleKind::Converged => 0,
            CycleKind::Undecided => 1,
            CycleKind::LimitCycle => 2,
            CycleKind::Divergent => 3,
        };
        let v1 = classify_component(traj, 0, &self.sim.classify);
        let v2 = classify_component(traj, 1, &self.sim.classify);
        if rank(v2.kind) > rank(v1.kind) {
            v2
        } else {
            v1
        }
    }
}
