//! One function per subcommand. Each returns a typed report; rendering to
//! CSV or JSON happens in `lib.rs`.

use serde::Serialize;
use tcpstab::dde_sim::{
    classify, demo_hopf_normal_form, simulate_scenario, sweep_bifurcation, sweep_values, CycleVerdict, ScalarScenario,
    SweepPoint, SweepTarget, Trajectory,
};
use tcpstab::multibottleneck::{
    case1_analyze, case1_compound_condition, case2_analyze, case2_reduce, multi_coefficients, multi_equilibrium,
    transversality_case1, transversality_case2, Case1Closed, Case1Report, Case2Reduction, Case2Report,
    Case2Transversality, Case2Verdict, CaseICoefficients, CoeffVariant, MultiCoefficients, MultiTopology,
    PairScenario,
};
use tcpstab::par::{self, Execution};
use tcpstab::queue_stats::{md1b_dist, mm1b_dist};
use tcpstab::scalar_stability::{
    hopf_delay, hopf_frequency, mixed_traffic_sufficient, necsuf_stable, non_oscillatory, rightmost_root,
    stability_chart, sufficient_stable, NonOscillatoryVerdict, StabilityVerdict,
};
use tcpstab::{scalar_coefficients, solve_equilibrium, Equilibrium, LossModel, ProtocolSpec, ScalarCoefficients};

use crate::scenario::{Case, ChartAxis, QueueModel, Range, Scenario};
use crate::{CliError, Options};

fn variant(sc: &Scenario, opts: &Options) -> tcpstab::Variant {
    opts.variant.or(sc.variant).unwrap_or_default()
}

fn coeff_variant(sc: &Scenario, opts: &Options) -> CoeffVariant {
    opts.coeff_variant.or(sc.coeff_variant).unwrap_or_default()
}

fn range(r: &Range) -> Result<Vec<f64>, CliError> {
    Ok(sweep_values(r.start, r.end, r.steps)?)
}

fn scalar_scenario(sc: &Scenario, opts: &Options) -> Result<ScalarScenario, CliError> {
    Ok(ScalarScenario {
        spec: sc.protocol(),
        loss: *Scenario::require(&sc.loss, "loss")?,
        variant: variant(sc, opts),
        delay: sc.delay,
        sim: sc.sim,
    })
}

fn pair_scenario(sc: &Scenario, opts: &Options) -> Result<PairScenario, CliError> {
    Ok(PairScenario {
        topology: Scenario::require(&sc.topology, "topology")?.clone(),
        variant: coeff_variant(sc, opts),
        delays: sc.delays,
        sim: sc.sim,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum EquilibriumReport {
    Scalar(Equilibrium),
    Pair {
        coeff_variant: CoeffVariant,
        w_star: [f64; 2],
        p_star: [f64; 2],
        q: f64,
        residual: f64,
    },
}

pub fn cmd_equilibrium(sc: &Scenario, opts: &Options) -> Result<EquilibriumReport, CliError> {
    if let Some(top) = &sc.topology {
        let eq = multi_equilibrium(top, coeff_variant(sc, opts))?;
        return Ok(EquilibriumReport::Pair {
            coeff_variant: eq.variant,
            w_star: [eq.w1, eq.w2],
            p_star: [eq.p1, eq.p2],
            q: eq.q,
            residual: eq.residual,
        });
    }
    let loss = Scenario::require(&sc.loss, "loss")?;
    Ok(EquilibriumReport::Scalar(solve_equilibrium(&sc.protocol(), loss, variant(sc, opts))?))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RootReport {
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarStability {
    pub equilibrium: Equilibrium,
    pub coefficients: ScalarCoefficients,
    pub sufficient: StabilityVerdict,
    pub necsuf: StabilityVerdict,
    pub non_oscillatory: NonOscillatoryVerdict,
    /// Only for the gaussian loss model.
    pub mixed_traffic: Option<StabilityVerdict>,
    /// None when stability does not depend on the delay.
    pub hopf_delay: Option<f64>,
    pub hopf_frequency: Option<f64>,
    pub rightmost_root: RootReport,
}

pub fn scalar_stability(sc: &Scenario, opts: &Options) -> Result<ScalarStability, CliError> {
    let s = scalar_scenario(sc, opts)?;
    let eq = solve_equilibrium(&s.spec, &s.loss, s.variant)?;
    let c = scalar_coefficients(&s.spec, &s.loss, &eq)?.with_delay(s.delay())?;
    let necsuf = necsuf_stable(&c)?;
    let (hd, hf) = if c.b > c.a { (Some(hopf_delay(c.a, c.b)?), Some(hopf_frequency(c.a, c.b)?)) } else { (None, None) };
    let mixed = match s.loss {
        LossModel::Gaussian(_) => Some(mixed_traffic_sufficient(&s.spec, &s.loss, s.variant)?),
        _ => None,
    };
    let r = rightmost_root(&c)?;
    Ok(ScalarStability {
        equilibrium: eq,
        coefficients: c,
        sufficient: sufficient_stable(&c)?,
        necsuf,
        non_oscillatory: non_oscillatory(&c)?,
        mixed_traffic: mixed,
        hopf_delay: hd,
        hopf_frequency: hf,
        rightmost_root: RootReport { re: r.lambda.re, im: r.lambda.im, residual: r.residual },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Case1Detail {
    pub report: Case1Report,
    /// Compound closed form; present for symmetric Compound topologies.
    pub compound_condition: Option<Case1Closed>,
    /// Re(d lam / d kappa) at tau_c.
    pub transversality: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Case2Detail {
    pub reduction: Case2Reduction,
    pub report: Case2Report,
    pub transversality: Option<Case2Transversality>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairVerdict {
    /// Feedback delay of flow 1.
    pub delay: f64,
    pub label: Case2Verdict,
    /// Case I phase margin; absent for Case II.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairStability {
    pub case: &'static str,
    pub coeff_variant: CoeffVariant,
    pub w_star: [f64; 2],
    pub coefficients: MultiCoefficients,
    pub omegas: Vec<f64>,
    pub critical_delays: Vec<f64>,
    pub classification: String,
    pub verdict: PairVerdict,
    pub case1: Option<Case1Detail>,
    pub case2: Option<Case2Detail>,
}

pub fn pair_stability(sc: &Scenario, opts: &Options) -> Result<PairStability, CliError> {
    let top: &MultiTopology = Scenario::require(&sc.topology, "topology")?;
    let cv = coeff_variant(sc, opts);
    let delay = sc.delays.map_or(top.tau1, |d| d[0]);
    match sc.analysis.case {
        Case::Case1 => {
            let eq = multi_equilibrium(top, cv)?;
            let mc = multi_coefficients(top, &eq)?;
            let cc = CaseICoefficients::from_multi(&mc)?;
            let rep = case1_analyze(&cc);
            let compound_condition = match &top.protocol {
                ProtocolSpec::Compound(c) if top.is_symmetric() && top.b1 == top.b => {
                    Some(case1_compound_condition(c.alpha(), c.k(), top.b, eq.w1, eq.p1, cv))
                }
                _ => None,
            };
            let transversality = match rep.tau1c {
                Some(t) => Some(transversality_case1(cc.a, cc.b, cc.c, t, 1.0)?),
                None => None,
            };
            let v = rep.verdict(delay);
            Ok(PairStability {
                case: "case1",
                coeff_variant: cv,
                w_star: [eq.w1, eq.w2],
                coefficients: mc,
                omegas: [rep.omega1, rep.omega2].into_iter().flatten().collect(),
                critical_delays: [rep.tau1c, rep.tau2c].into_iter().flatten().collect(),
                classification: if rep.delay_independent { "delay_independent" } else { "hopf" }.into(),
                verdict: PairVerdict {
                    delay,
                    label: if v.stable { Case2Verdict::Stable } else { Case2Verdict::Unstable },
                    margin: Some(v.margin),
                },
                case1: Some(Case1Detail { report: rep, compound_condition, transversality }),
                case2: None,
            })
        }
        Case::Case2 => {
            let red = case2_reduce(top, cv, sc.analysis.eps_fraction)?;
            let rep = case2_analyze(&red.coefficients)?;
            let transversality = match (rep.omega_sq.first(), rep.tau1c) {
                (Some(&w2), Some(t)) => Some(transversality_case2(&red.coefficients, w2.sqrt(), 1.0, t)),
                _ => None,
            };
            let classification = serde_json::to_value(rep.classification)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            Ok(PairStability {
                case: "case2",
                coeff_variant: cv,
                w_star: [red.equilibrium.w1, red.equilibrium.w2],
                coefficients: red.multi,
                omegas: rep.omega_sq.iter().map(|x| x.sqrt()).collect(),
                critical_delays: rep.crossings.iter().map(|c| c.tau1).collect(),
                classification,
                verdict: PairVerdict { delay, label: rep.verdict(delay), margin: None },
                case1: None,
                case2: Some(Case2Detail { reduction: red, report: rep, transversality }),
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum StabilityReport {
    Scalar(Box<ScalarStability>),
    Pair(Box<PairStability>),
}

/// Scalar verdict stack, or the Case I / Case II analysis for a topology.
pub fn cmd_stability(sc: &Scenario, opts: &Options) -> Result<StabilityReport, CliError> {
    if sc.topology.is_some() {
        Ok(StabilityReport::Pair(Box::new(pair_stability(sc, opts)?)))
    } else {
        Ok(StabilityReport::Scalar(Box::new(scalar_stability(sc, opts)?)))
    }
}

pub fn cmd_multibottleneck(sc: &Scenario, opts: &Options) -> Result<PairStability, CliError> {
    pair_stability(sc, opts)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartRow {
    pub alpha: f64,
    #[serde(rename = "B")]
    pub buffer: f64,
    pub label: &'static str,
    pub margin_necsuf: Option<f64>,
    pub margin_nonosc: Option<f64>,
}

pub fn cmd_chart(sc: &Scenario, opts: &Options) -> Result<Vec<ChartRow>, CliError> {
    let chart = Scenario::require(&sc.chart, "chart")?;
    let base = match sc.protocol() {
        ProtocolSpec::Compound(c) => c,
        _ => return Err(CliError::Input("chart needs the compound protocol".into())),
    };
    let loss = *Scenario::require(&sc.loss, "loss")?;
    let v = variant(sc, opts);
    let alphas = range(&chart.alpha)?;
    let buffers = range(&chart.buffer)?;
    let cells: Vec<(f64, f64)> = match chart.x {
        ChartAxis::Alpha => alphas.iter().flat_map(|&a| buffers.iter().map(move |&b| (a, b))).collect(),
        ChartAxis::Buffer => buffers.iter().flat_map(|&b| alphas.iter().map(move |&a| (a, b))).collect(),
    };
    let finite = |x: f64| x.is_finite().then_some(x);
    Ok(par::map(opts.exec, &cells, |&(alpha, buffer)| {
        match stability_chart(&base, &loss, v, &[alpha], &[buffer], Execution::Sequential) {
            Ok(cell) => ChartRow {
                alpha,
                buffer,
                label: cell[0].label.as_str(),
                margin_necsuf: finite(cell[0].margin_necsuf),
                margin_nonosc: finite(cell[0].margin_nonosc),
            },
            Err(e) => {
                log::warn!("chart cell alpha = {alpha}, B = {buffer}: {e}");
                ChartRow { alpha, buffer, label: "error", margin_necsuf: None, margin_nonosc: None }
            }
        }
    }))
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub model: &'static str,
    pub w_star: Vec<f64>,
    pub verdict: CycleVerdict,
    pub trajectory: Trajectory,
    pub output_every: usize,
}

/// Normal form when `normal_form.alpha` is set, else the pair or scalar model.
pub fn cmd_simulate(sc: &Scenario, opts: &Options) -> Result<Simulation, CliError> {
    let every = sc.sim.output_every.max(1);
    if let Some(nf) = sc.normal_form.filter(|nf| nf.alpha.is_some()) {
        let s = nf.settings();
        let (traj, verdict) = demo_hopf_normal_form(nf.alpha.unwrap_or_default(), s.horizon, s.dt)?;
        return Ok(Simulation { model: "normal_form", w_star: vec![0.0, 0.0], verdict, trajectory: traj, output_every: every });
    }
    if sc.topology.is_some() {
        let ps = pair_scenario(sc, opts)?;
        let (eq, traj) = ps.simulate()?;
        let verdict = ps.classify(&traj);
        return Ok(Simulation { model: "pair", w_star: vec![eq.w1, eq.w2], verdict, trajectory: traj, output_every: every });
    }
    let s = scalar_scenario(sc, opts)?;
    let (eq, traj) = simulate_scenario(&s)?;
    let verdict = classify(&traj, &s.sim.classify);
    Ok(Simulation { model: "scalar", w_star: vec![eq.w_star], verdict, trajectory: traj, output_every: every })
}

pub fn cmd_bifurcation(sc: &Scenario, opts: &Options) -> Result<Vec<SweepPoint>, CliError> {
    let sweep = Scenario::require(&sc.sweep, "sweep")?;
    let target = if let Some(nf) = &sc.normal_form {
        SweepTarget::NormalForm(nf.settings())
    } else if sc.topology.is_some() {
        SweepTarget::Pair(pair_scenario(sc, opts)?)
    } else {
        SweepTarget::Scalar(scalar_scenario(sc, opts)?)
    };
    let values = sweep_values(sweep.start, sweep.end, sweep.steps)?;
    Ok(sweep_bifurcation(&target, sweep.parameter, &values, opts.exec)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct QueueReport {
    pub model: &'static str,
    pub rho: f64,
    pub buffer: usize,
    pub pmf: Vec<f64>,
    pub ccdf: Vec<f64>,
    pub blocking: f64,
    pub mean: f64,
}

pub fn cmd_queue_dist(sc: &Scenario, _opts: &Options) -> Result<QueueReport, CliError> {
    let q = Scenario::require(&sc.queue, "queue")?;
    let (model, d) = match q.model {
        QueueModel::Mm1b => ("mm1b", mm1b_dist(q.rho, q.buffer)?),
        QueueModel::Md1b => ("md1b", md1b_dist(q.rho, q.buffer)?),
    };
    Ok(QueueReport { model, rho: d.rho, buffer: d.buffer, ccdf: d.ccdf(), blocking: d.blocking(), mean: d.mean(), pmf: d.pmf })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BufferRuleReport {
    pub capacity_pkts_per_s: f64,
    pub rtt_s: f64,
    pub flows: u64,
    pub buffer_pkts: u64,
}

/// B = ceil(C RTT / sqrt(N)).
pub fn cmd_buffer_rule(sc: &Scenario, _opts: &Options) -> Result<BufferRuleReport, CliError> {
    let r = Scenario::require(&sc.buffer_rule, "buffer_rule")?;
    let c = r.capacity()?;
    Ok(BufferRuleReport {
        capacity_pkts_per_s: c,
        rtt_s: r.rtt_s,
        flows: r.flows,
        buffer_pkts: tcpstab::buffer_rule(c, r.rtt_s, r.flows)?,
    })
}
