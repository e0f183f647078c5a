//! Post-transient classification of a simulated trajectory.

use serde::{Deserialize, Serialize};

use super::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleKind {
    Converged,
    LimitCycle,
    Divergent,
    Undecided,
}

impl CycleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CycleKind::Converged => "converged",
            CycleKind::LimitCycle => "limit_cycle",
            CycleKind::Divergent => "divergent",
            CycleKind::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleVerdict {
    pub kind: CycleKind,
    /// Half peak-to-trough height; zero unless `kind` is `LimitCycle`.
    pub amplitude: f64,
    /// Mean spacing between peaks; NaN unless `kind` is `LimitCycle`.
    pub period: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyOptions {
    pub transient_fraction: f64,
    pub rel_tol: f64,
    /// Largest spread of peak heights, relative to the amplitude, for a cycle.
    pub peak_cv: f64,
    pub min_peaks: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { transient_fraction: 0.5, rel_tol: 1e-3, peak_cv: 0.01, min_peaks: 5 }
    }
}

pub fn classify(traj: &Trajectory, opts: &ClassifyOptions) -> CycleVerdict {
    classify_component(traj, 0, opts)
}

pub fn classify_component(traj: &Trajectory, component: usize, opts: &ClassifyOptions) -> CycleVerdict {
    let x = &traj.states[component];
    let undecided = |mean| CycleVerdict { kind: CycleKind::Undecided, amplitude: 0.0, period: f64::NAN, mean };
    if traj.diverged {
        return CycleVerdict { kind: CycleKind::Divergent, amplitude: 0.0, period: f64::NAN, mean: f64::NAN };
    }
    let start = ((x.len() as f64) * opts.transient_fraction.clamp(0.0, 1.0)) as usize;
    let window = &x[start.min(x.len().saturating_sub(1))..];
    if window.len() < 3 {
        return undecided(window.first().copied().unwrap_or(f64::NAN));
    }
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    let (lo, hi) = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let reference = x.iter().fold(mean.abs(), |acc, v| acc.max(v.abs()));
    if hi - lo < opts.rel_tol * reference {
        return CycleVerdict { kind: CycleKind::Converged, amplitude: 0.0, period: f64::NAN, mean };
    }

    let peaks = extrema(window, traj.dt, true);
    let troughs = extrema(window, traj.dt, false);
    if peaks.len() < opts.min_peaks || troughs.len() < opts.min_peaks {
        return undecided(mean);
    }
    let avg = |v: &[(f64, f64)]| v.iter().map(|p| p.1).sum::<f64>() / v.len() as f64;
    let peak_mean = avg(&peaks);
    let amplitude = 0.5 * (peak_mean - avg(&troughs));
    let spread = |v: &[(f64, f64)]| {
        let m = avg(v);
        (v.iter().map(|p| (p.1 - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    if !(amplitude > 0.0) || spread(&peaks).max(spread(&troughs)) >= opts.peak_cv * amplitude {
        return undecided(mean);
    }
    let period = (peaks[peaks.len() - 1].0 - peaks[0].0) / (peaks.len() - 1) as f64;
    CycleVerdict { kind: CycleKind::LimitCycle, amplitude, period, mean }
}

/// Local maxima (or minima) refined by a parabola through three samples.
/// Returns (time offset within the window, height).
fn extrema(x: &[f64], dt: f64, maxima: bool) -> Vec<(f64, f64)> {
    let s = if maxima { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    for i in 1..x.len() - 1 {
        let (y0, y1, y2) = (s * x[i - 1], s * x[i], s * x[i + 1]);
        if y1 > y0 && y1 >= y2 {
            let curv = y0 - 2.0 * y1 + y2;
            let delta = if curv != 0.0 { 0.5 * (y0 - y2) / curv } else { 0.0 };
            let height = y1 - 0.25 * (y0 - y2) * delta;
            out.push(((i as f64 + delta) * dt, s * height));
        }
    }
    out
}
