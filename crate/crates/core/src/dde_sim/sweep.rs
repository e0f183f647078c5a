//! Scenario-level simulation and one-parameter bifurcation sweeps.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_equilibrium, Equilibrium, Variant};
use crate::error::{Error, Result};
use crate::loss_models::LossModel;
use crate::multibottleneck::PairScenario;
use crate::par::{self, Execution};
use crate::protocols::ProtocolSpec;

use super::{classify, demo_hopf_normal_form, simulate_scalar, ClassifyOptions, CycleVerdict, History, Trajectory};

/// Constant initial history, relative to w* or in packets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HistorySpec {
    Fraction(f64),
    Absolute(f64),
}

impl Default for HistorySpec {
    fn default() -> Self {
        HistorySpec::Fraction(0.9)
    }
}

impl HistorySpec {
    pub fn value(&self, w_star: f64) -> Result<f64> {
        let v = match *self {
            HistorySpec::Fraction(f) => f * w_star,
            HistorySpec::Absolute(a) => a,
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::parameter("history", format!("initial window must be > 0, got {v}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub steps_per_delay: usize,
    pub horizon_delays: f64,
    pub history: HistorySpec,
    pub classify: ClassifyOptions,
    /// Decimation for trajectory output only.
    pub output_every: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            steps_per_delay: 200,
            horizon_delays: 50.0,
            history: HistorySpec::default(),
            classify: ClassifyOptions::default(),
            output_every: 1,
        }
    }
}

impl SimSettings {
    pub(crate) fn grid(&self, delay: f64) -> Result<(f64, f64)> {
        if self.steps_per_delay == 0 {
            return Err(Error::parameter("steps_per_delay", "must be >= 1"));
        }
        if !(self.horizon_delays.is_finite() && self.horizon_delays > 0.0) {
            return Err(Error::parameter("horizon_delays", "must be > 0"));
        }
        Ok((delay / self.steps_per_delay as f64, self.horizon_delays * delay))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarScenario {
    pub spec: ProtocolSpec,
    pub loss: LossModel,
    pub variant: Variant,
    /// Feedback delay; the loss model's RTT when `None`.
    pub delay: Option<f64>,
    pub sim: SimSettings,
}

impl ScalarScenario {
    pub fn delay(&self) -> f64 {
        self.delay.unwrap_or_else(|| self.loss.rtt())
    }
}

pub fn simulate_scenario(sc: &ScalarScenario) -> Result<(Equilibrium, Trajectory)> {
    let eq = solve_equilibrium(&sc.spec, &sc.loss, sc.variant)?;
    let delay = sc.delay();
    let (dt, horizon) = sc.sim.grid(delay)?;
    let h = History::Constant(sc.sim.history.value(eq.w_star)?);
    let traj = simulate_scalar(&sc.spec, &sc.loss, sc.variant, delay, h, horizon, dt)?;
    Ok((eq, traj))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalFormSettings {
    pub horizon: f64,
    pub dt: f64,
}

impl Default for NormalFormSettings {
    fn default() -> Self {
        NormalFormSettings { horizon: 400.0, dt: 5e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Feedback delay in seconds (gains stay at the reference RTT).
    Tau,
    /// Buffer B of the loss model.
    #[serde(alias = "b")]
    Buffer,
    /// Compound alpha, or the normal-form parameter for that target.
    Alpha,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepTarget {
    Scalar(ScalarScenario),
    Pair(PairScenario),
    NormalForm(NormalFormSettings),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub param: f64,
    #[serde(flatten)]
    pub verdict: CycleVerdict,
}

/// `steps` evenly spaced values from `start` to `end` inclusive.
pub fn sweep_values(start: f64, end: f64, steps: usize) -> Result<Vec<f64>> {
    if !(start.is_finite() && end.is_finite()) {
        return Err(Error::parameter("sweep", "range must be finite"));
    }
    Ok(match steps {
        0 => return Err(Error::parameter("steps", "must be >= 1")),
        1 => vec![start],
        n => (0..n).map(|j| start + (end - start) * j as f64 / (n - 1) as f64).collect(),
    })
}

pub fn sweep_bifurcation(
    target: &SweepTarget,
    parameter: SweepParameter,
    values: &[f64],
    exec: Execution,
) -> Result<Vec<SweepPoint>> {
    par::map(exec, values, |&v| sweep_point(target, parameter, v).map(|verdict| SweepPoint { param: v, verdict }))
        .into_iter()
        .collect()
}

fn sweep_point(target: &SweepTarget, parameter: SweepParameter, v: f64) -> Result<CycleVerdict> {
    match (target, parameter) {
        (SweepTarget::NormalForm(nf), SweepParameter::Alpha) => Ok(demo_hopf_normal_form(v, nf.horizon, nf.dt)?.1),
        (SweepTarget::NormalForm(_), p) => {
            Err(Error::parameter("parameter", format!("the normal form only sweeps alpha, not {p:?}")))
        }
        (SweepTarget::Scalar(sc), p) => {
            let mut sc = sc.clone();
            match p {
                SweepParameter::Tau => sc.delay = Some(v),
                SweepParameter::Buffer => sc.loss = sc.loss.with_buffer(v)?,
                SweepParameter::Alpha => match &sc.spec {
                    ProtocolSpec::Compound(c) => sc.spec = ProtocolSpec::Compound(c.with_alpha(v)?),
                    _ => return Err(Error::parameter("parameter", "alpha sweeps need the compound protocol")),
                },
            }
            let (_, traj) = simulate_scenario(&sc)?;
            Ok(classify(&traj, &sc.sim.classify))
        }
        (SweepTarget::Pair(ps), p) => {
            let ps = ps.with_parameter(p, v)?;
            let (_, traj) = ps.simulate()?;
            Ok(ps.classify(&traj))
        }
    }
}
