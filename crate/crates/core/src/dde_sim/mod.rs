//! Fixed-step RK4 for systems with constant discrete delays.
//!
//! Method of steps: every delay is an integer number of steps, so delayed
//! values at full steps are stored samples and at half steps come from the
//! cubic Hermite interpolant built from stored values and derivatives. For
//! times <= 0 the history function is evaluated directly. Derivative
//! discontinuities propagate only to multiples of the delays, which all fall
//! on the grid, so the scheme keeps fourth order.

mod classify;
mod models;
mod sweep;

pub use classify::{classify, classify_component, CycleKind, CycleVerdict, ClassifyOptions};
pub use models::{demo_hopf_normal_form, simulate_scalar, HopfNormalForm, LinearDelay, ScalarFluid};
pub use sweep::{
    simulate_scenario, sweep_bifurcation, sweep_values, HistorySpec, NormalFormSettings, ScalarScenario,
    SimSettings, SweepParameter, SweepPoint, SweepTarget,
};

use std::sync::Arc;

use crate::error::{require_positive, Error, Result};

/// Lower bound applied to window-like states after each step.
pub const POSITIVITY_FLOOR: f64 = 1e-9;
/// |x| beyond this marks the run as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e12;

pub trait DelaySystem<const N: usize>: Sync {
    /// Delay acting on each component.
    fn delays(&self) -> [f64; N];
    /// Derivative given current states and `delayed[j] = x_j(t - delay_j)`.
    fn rhs(&self, now: &[f64; N], delayed: &[f64; N]) -> Result<[f64; N]>;
}

/// Initial function on [-delay, 0].
#[derive(Clone)]
pub enum History {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl History {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            History::Constant(v) => *v,
            History::Function(f) => f(t),
        }
    }
}

impl std::fmt::Debug for History {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            History::Constant(v) => write!(f, "Constant({v})"),
            History::Function(_) => write!(f, "Function(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub horizon: f64,
    pub floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub delays: Vec<f64>,
    /// Delays in steps.
    pub delay_steps: Vec<usize>,
    pub t: Vec<f64>,
    /// Component-major samples, `states[j][n] = x_j(t[n])`.
    pub states: Vec<Vec<f64>>,
    pub diverged: bool,
    pub floor_hits: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> Vec<f64> {
        self.states.iter().map(|c| *c.last().expect("non-empty trajectory")).collect()
    }

    /// CSV with header `t,w1[,w2...]` and 12 significant digits,
    /// keeping every `every`-th sample.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W, every: usize) -> std::io::Result<()> {
        use crate::format::sig12;
        let every = every.max(1);
        let header: Vec<String> = (1..=self.states.len()).map(|j| format!("w{j}")).collect();
        writeln!(out, "t,{}", header.join(","))?;
        for n in (0..self.t.len()).step_by(every) {
            let row: Vec<String> = self.states.iter().map(|c| sig12(c[n])).collect();
            writeln!(out, "{},{}", sig12(self.t[n]), row.join(","))?;
        }
        Ok(())
    }
}

/// Number of steps in `delay`, requiring `dt` to divide it.
pub fn steps_per(delay: f64, dt: f64) -> Result<usize> {
    let m = (delay / dt).round();
    if m < 1.0 || (m * dt - delay).abs() > 1e-9 * delay {
        return Err(Error::Config(format!("dt = {dt} does not divide delay = {delay}")));
    }
    Ok(m as usize)
}

pub fn integrate<const N: usize, S: DelaySystem<N>>(
    sys: &S,
    history: &[History; N],
    cfg: StepConfig,
) -> Result<Trajectory> {
    let dt = require_positive("dt", cfg.dt)?;
    require_positive("horizon", cfg.horizon)?;
    let delays = sys.delays();
    let mut m = [0usize; N];
    for j in 0..N {
        require_positive("delay", delays[j])?;
        m[j] = steps_per(delays[j], dt)?;
    }
    let n_steps = (cfg.horizon / dt).round().max(1.0) as usize;
    let mut y: Vec<[f64; N]> = Vec::with_capacity(n_steps + 1);
    let mut f: Vec<[f64; N]> = Vec::with_capacity(n_steps + 1);
    y.push(std::array::from_fn(|j| history[j].at(0.0)));

    // Delayed state at t_n + half * dt / 2 (half in {0, 1, 2}).
    let delayed = |y: &[[f64; N]], f: &[[f64; N]], n: usize, half: i64| -> [f64; N] {
        std::array::from_fn(|j| {
            let pos2 = 2 * (n as i64 - m[j] as i64) + half;
            if pos2 <= 0 {
                history[j].at(pos2 as f64 * dt * 0.5)
            } else if pos2 % 2 == 0 {
                y[(pos2 / 2) as usize][j]
            } else {
                let i = ((pos2 - 1) / 2) as usize;
                0.5 * (y[i][j] + y[i + 1][j]) + dt * (f[i][j] - f[i + 1][j]) / 8.0
            }
        })
    };

    let mut diverged = false;
    let mut floor_hits = 0usize;
    for n in 0..n_steps {
        let yn = y[n];
        let k1 = sys.rhs(&yn, &delayed(&y, &f, n, 0))?;
        f.push(k1);
        let d_half = delayed(&y, &f, n, 1);
        let k2 = sys.rhs(&axpy(&yn, 0.5 * dt, &k1), &d_half)?;
        let k3 = sys.rhs(&axpy(&yn, 0.5 * dt, &k2), &d_half)?;
        let k4 = sys.rhs(&axpy(&yn, dt, &k3), &delayed(&y, &f, n, 2))?;
        let mut next: [f64; N] =
            std::array::from_fn(|j| yn[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        if let Some(floor) = cfg.floor {
            for v in next.iter_mut() {
                if *v < floor {
                    *v = floor;
                    floor_hits += 1;
                }
            }
        }
        if next.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
            diverged = true;
            break;
        }
        y.push(next);
    }

    let len = y.len();
    Ok(Trajectory {
        dt,
        delays: delays.to_vec(),
        delay_steps: m.to_vec(),
        t: (0..len).map(|n| n as f64 * dt).collect(),
        states: (0..N).map(|j| y.iter().map(|s| s[j]).collect()).collect(),
        diverged,
        floor_hits,
    })
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|j| y[j] + h * k[j])
}

/// Classical RK4 for an autonomous ODE.
pub fn integrate_ode<const N: usize, F>(rhs: F, y0: [f64; N], dt: f64, horizon: f64) -> Result<Trajectory>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    require_positive("dt", dt)?;
    require_positive("horizon", horizon)?;
    let n_steps = (horizon / dt).round().max(1.0) as usize;
    let mut y = Vec::with_capacity(n_steps + 1);
    y.push(y0);
    let mut diverged = false;
    for n in 0..n_steps {
        let yn = y[n];
        let k1 = rhs(&yn);
        let k2 = rhs(&axpy(&yn, 0.5 * dt, &k1));
        let k3 = rhs(&axpy(&yn, 0.5 * dt, &k2));
        let k4 = rhs(&axpy(&yn, dt, &k3));
        let next: [f64; N] =
            std::array::from_fn(|j| yn[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        if next.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
            diverged = true;
            break;
        }
        y.push(next);
    }
    let len = y.len();
    Ok(Trajectory {
        dt,
        delays: Vec::new(),
        delay_steps: Vec::new(),
        t: (0..len).map(|n| n as f64 * dt).collect(),
        states: (0..N).map(|j| y.iter().map(|s| s[j]).collect()).collect(),
        diverged,
        floor_hits: 0,
    })
}
