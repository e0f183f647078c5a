//! Right-hand sides integrated by the simulator.

use crate::equilibrium::Variant;
use crate::error::{require_positive, Result};
use crate::loss_models::LossModel;
use crate::protocols::ProtocolSpec;

use super::{classify, integrate, integrate_ode, ClassifyOptions, CycleVerdict, DelaySystem, History, StepConfig, Trajectory, POSITIVITY_FLOOR};

/// dw/dt = (i(w)(1 - v p(w_d)) - d(w) p(w_d)) w_d / rtt with w_d = w(t - delay).
#[derive(Debug, Clone)]
pub struct ScalarFluid {
    pub spec: ProtocolSpec,
    pub loss: LossModel,
    pub variant: Variant,
    pub delay: f64,
}

impl DelaySystem<1> for ScalarFluid {
    fn delays(&self) -> [f64; 1] {
        [self.delay]
    }

    fn rhs(&self, now: &[f64; 1], delayed: &[f64; 1]) -> Result<[f64; 1]> {
        let (w, wd) = (now[0], delayed[0]);
        let (i, _) = self.spec.increase(w)?;
        let (d, _) = self.spec.decrease(w)?;
        let p = self.loss.loss_prob(wd)?.value;
        let v = self.variant.ack_weight();
        Ok([(i * (1.0 - v * p) - d * p) * wd / self.loss.rtt()])
    }
}

/// dx/dt = -a x(t) - b x(t - delay).
#[derive(Debug, Clone, Copy)]
pub struct LinearDelay {
    pub a: f64,
    pub b: f64,
    pub delay: f64,
}

impl DelaySystem<1> for LinearDelay {
    fn delays(&self) -> [f64; 1] {
        [self.delay]
    }

    fn rhs(&self, now: &[f64; 1], delayed: &[f64; 1]) -> Result<[f64; 1]> {
        Ok([-self.a * now[0] - self.b * delayed[0]])
    }
}

/// Hopf normal form x' = a x - y - x r^2, y' = x + a y - y r^2.
#[derive(Debug, Clone, Copy)]
pub struct HopfNormalForm {
    pub alpha: f64,
}

impl HopfNormalForm {
    pub fn rhs(&self, s: &[f64; 2]) -> [f64; 2] {
        let (x, y) = (s[0], s[1]);
        let r2 = x * x + y * y;
        [self.alpha * x - y - x * r2, x + self.alpha * y - y * r2]
    }
}

pub fn simulate_scalar(
    spec: &ProtocolSpec,
    loss: &LossModel,
    variant: Variant,
    delay: f64,
    history: History,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory> {
    require_positive("delay", delay)?;
    let sys = ScalarFluid { spec: spec.clone(), loss: *loss, variant, delay };
    integrate(&sys, &[history], StepConfig { dt, horizon, floor: Some(POSITIVITY_FLOOR) })
}

/// Integrate the normal form from (0.1, 0) and classify the x component.
pub fn demo_hopf_normal_form(alpha: f64, horizon: f64, dt: f64) -> Result<(Trajectory, CycleVerdict)> {
    let nf = HopfNormalForm { alpha };
    let traj = integrate_ode(|s| nf.rhs(s), [0.1, 0.0], dt, horizon)?;
    let verdict = classify(&traj, &ClassifyOptions::default());
    Ok((traj, verdict))
}
