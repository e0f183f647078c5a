//! Command-line front end: scenario files in, CSV or JSON out.
//!
//! Exit statuses: 0 ok, 2 input or domain error, 3 numeric failure,
//! 4 internal error.

pub mod commands;
pub mod scenario;

use std::fmt::Write as _;

use serde::Serialize;
use tcpstab::format::sig12;
use tcpstab::multibottleneck::CoeffVariant;
use tcpstab::par::Execution;
use tcpstab::Variant;

pub use commands::*;
pub use scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Input(String),
    Numeric(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<tcpstab::Error> for CliError {
    fn from(e: tcpstab::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Equilibrium,
    Stability,
    Chart,
    Simulate,
    Bifurcation,
    Multibottleneck,
    QueueDist,
    BufferRule,
}

impl Command {
    pub fn default_format(self) -> Format {
        match self {
            Command::Chart | Command::Simulate | Command::Bifurcation | Command::QueueDist => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// Command-line overrides of the scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Options {
    pub variant: Option<Variant>,
    pub coeff_variant: Option<CoeffVariant>,
    pub format: Option<Format>,
    pub exec: Execution,
}

/// Sizes the global pool; one job means sequential evaluation.
pub fn configure_jobs(jobs: Option<usize>) -> Result<Execution, CliError> {
    match jobs {
        Some(0) => Err(CliError::Input("--jobs must be >= 1".into())),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None => Ok(Execution::available()),
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn no_csv(cmd: &str) -> CliError {
    CliError::Input(format!("{cmd} has no CSV form; use --format json"))
}

fn opt(x: Option<f64>) -> String {
    x.map(sig12).unwrap_or_else(|| "nan".into())
}

/// Run one subcommand and render its output.
pub fn execute(cmd: Command, sc: &Scenario, opts: &Options) -> Result<String, CliError> {
    let format = opts.format.unwrap_or(cmd.default_format());
    let mut out = String::new();
    match cmd {
        Command::Equilibrium => {
            let r = cmd_equilibrium(sc, opts)?;
            if format == Format::Json {
                return json(&r);
            }
            match r {
                EquilibriumReport::Scalar(e) => {
                    out.push_str("w_star,p_star,x_star,residual,variant\n");
                    let v = serde_json::to_value(e.variant).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        sig12(e.w_star),
                        sig12(e.p_star),
                        sig12(e.x_star),
                        sig12(e.residual),
                        v.as_str().unwrap_or_default()
                    );
                }
                EquilibriumReport::Pair { w_star, p_star, q, residual, .. } => {
                    out.push_str("w1,w2,p1,p2,q,residual\n");
                    let cells = [w_star[0], w_star[1], p_star[0], p_star[1], q, residual].map(sig12);
                    let _ = writeln!(out, "{}", cells.join(","));
                }
            }
        }
        Command::Stability => {
            let r = cmd_stability(sc, opts)?;
            return if format == Format::Json { json(&r) } else { Err(no_csv("stability")) };
        }
        Command::Multibottleneck => {
            let r = cmd_multibottleneck(sc, opts)?;
            return if format == Format::Json { json(&r) } else { Err(no_csv("multibottleneck")) };
        }
        Command::Chart => {
            let rows = cmd_chart(sc, opts)?;
            if format == Format::Json {
                return json(&rows);
            }
            out.push_str("alpha,B,label,margin_necsuf,margin_nonosc\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    sig12(r.alpha),
                    sig12(r.buffer),
                    r.label,
                    opt(r.margin_necsuf),
                    opt(r.margin_nonosc)
                );
            }
        }
        Command::Simulate => {
            let s = cmd_simulate(sc, opts)?;
            if format == Format::Json {
                #[derive(Serialize)]
                struct Out<'a> {
                    model: &'a str,
                    w_star: &'a [f64],
                    verdict: &'a tcpstab::dde_sim::CycleVerdict,
                    diverged: bool,
                    floor_hits: usize,
                    t: Vec<f64>,
                    w: Vec<Vec<f64>>,
                }
                let every = s.output_every;
                let pick = |v: &[f64]| v.iter().step_by(every).copied().collect::<Vec<_>>();
                return json(&Out {
                    model: s.model,
                    w_star: &s.w_star,
                    verdict: &s.verdict,
                    diverged: s.trajectory.diverged,
                    floor_hits: s.trajectory.floor_hits,
                    t: pick(&s.trajectory.t),
                    w: s.trajectory.states.iter().map(|c| pick(c)).collect(),
                });
            }
            let mut buf = Vec::new();
            s.trajectory.write_csv(&mut buf, s.output_every).map_err(|e| CliError::Internal(e.to_string()))?;
            out = String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))?;
        }
        Command::Bifurcation => {
            let pts = cmd_bifurcation(sc, opts)?;
            if format == Format::Json {
                return json(&pts);
            }
            out.push_str("param,kind,amplitude,period,mean\n");
            for p in pts {
                let v = p.verdict;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    sig12(p.param),
                    v.kind.as_str(),
                    sig12(v.amplitude),
                    sig12(v.period),
                    sig12(v.mean)
                );
            }
        }
        Command::QueueDist => {
            let q = cmd_queue_dist(sc, opts)?;
            if format == Format::Json {
                return json(&q);
            }
            out.push_str("n,pmf,ccdf\n");
            for (n, (p, c)) in q.pmf.iter().zip(&q.ccdf).enumerate() {
                let _ = writeln!(out, "{n},{},{}", sig12(*p), sig12(*c));
            }
        }
        Command::BufferRule => {
            let r = cmd_buffer_rule(sc, opts)?;
            if format == Format::Json {
                return json(&r);
            }
            out.push_str("capacity_pkts_per_s,rtt_s,flows,buffer_pkts\n");
            let _ = writeln!(out, "{},{},{},{}", sig12(r.capacity_pkts_per_s), sig12(r.rtt_s), r.flows, r.buffer_pkts);
        }
    }
    Ok(out)
}
