//! Scenario files. Every section is optional; each subcommand asks for the
//! sections it needs and reports a missing one by name.

use std::path::Path;

use serde::Deserialize;
use tcpstab::dde_sim::{NormalFormSettings, SimSettings, SweepParameter};
use tcpstab::multibottleneck::{CoeffVariant, MultiTopology};
use tcpstab::{LossModel, ProtocolSpec, Variant};

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub protocol: Option<ProtocolSpec>,
    pub loss: Option<LossModel>,
    pub topology: Option<MultiTopology>,
    pub variant: Option<Variant>,
    pub coeff_variant: Option<CoeffVariant>,
    /// Scalar feedback delay in seconds; the loss model's RTT when absent.
    pub delay: Option<f64>,
    /// Pair feedback delays; the topology's RTTs when absent.
    pub delays: Option<[f64; 2]>,
    #[serde(default)]
    pub analysis: Analysis,
    #[serde(default)]
    pub sim: SimSettings,
    pub normal_form: Option<NormalForm>,
    pub sweep: Option<Sweep>,
    pub chart: Option<Chart>,
    pub queue: Option<Queue>,
    pub buffer_rule: Option<BufferRule>,
}

/// Which reduction the two-bottleneck analysis uses.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Analysis {
    pub case: Case,
    /// tau2 = eps_fraction * tau1 in the Case II reduction.
    pub eps_fraction: f64,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis { case: Case::Case1, eps_fraction: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Case1,
    Case2,
}

/// The Hopf normal form demo; `alpha` is used by `simulate`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalForm {
    pub alpha: Option<f64>,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
}

impl NormalForm {
    pub fn settings(&self) -> NormalFormSettings {
        let d = NormalFormSettings::default();
        NormalFormSettings { horizon: self.horizon.unwrap_or(d.horizon), dt: self.dt.unwrap_or(d.dt) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartAxis {
    #[default]
    Alpha,
    #[serde(alias = "b")]
    Buffer,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chart {
    /// Outer loop of the row order; the other axis varies fastest.
    #[serde(default)]
    pub x: ChartAxis,
    pub alpha: Range,
    pub buffer: Range,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueModel {
    Mm1b,
    Md1b,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Queue {
    pub model: QueueModel,
    pub rho: f64,
    pub buffer: usize,
}

/// Either a packet rate or a link rate with a packet size.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferRule {
    pub capacity_pkts_per_s: Option<f64>,
    pub link_mbps: Option<f64>,
    pub packet_bytes: Option<f64>,
    pub rtt_s: f64,
    pub flows: u64,
}

impl BufferRule {
    pub fn capacity(&self) -> Result<f64, CliError> {
        match (self.capacity_pkts_per_s, self.link_mbps, self.packet_bytes) {
            (Some(c), None, None) => Ok(c),
            (None, Some(mbps), Some(bytes)) => Ok(mbps * 1e6 / (8.0 * bytes)),
            _ => Err(CliError::Input(
                "buffer_rule: give either capacity_pkts_per_s or both link_mbps and packet_bytes".into(),
            )),
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                CliError::Input(format!("scenario: {}", e.inner()))
            } else {
                CliError::Input(format!("scenario field `{path}`: {}", e.inner()))
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        section.as_ref().ok_or_else(|| CliError::Input(format!("scenario is missing the `{name}` section")))
    }

    pub fn protocol(&self) -> ProtocolSpec {
        self.protocol.clone().unwrap_or_else(ProtocolSpec::compound_default)
    }
}
