//! Experiment configuration, validation and hashing.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use chanbench::channels::ChannelSpec;
use chanbench::optimize::OptimizerSettings;
use chanbench::random::random_density_matrix;
use chanbench::serde_util::{from_pairs, PairRows};
use chanbench::state::DensityMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel_arg::{parse_channel, ParsedChannel};

pub const SCHEMA_VERSION: u32 = 1;
pub const SCHEMA: &str = include_str!("../schema/experiment-config.v1.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Capacity,
    Decompose,
    VerifyThm2,
    VerifyThm3,
    VerifyAdditivity,
    VerifyProofSteps,
    VerifyCapacity,
    VerifyDecomposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EntropyUnits {
    #[default]
    Nats,
    Bits,
}

impl EntropyUnits {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            EntropyUnits::Nats => nats,
            EntropyUnits::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EntropyUnits::Nats => "nats",
            EntropyUnits::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Nu,
    Smin,
    Holevo,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AdditivityCheck {
    Multiplicativity,
    Smin,
    Holevo,
}

/// A channel given either in the mini-language or as an inline JSON object.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelInput {
    Text(String),
    Spec(ChannelSpec),
}

impl ChannelInput {
    pub fn parse(&self) -> Result<ParsedChannel> {
        match self {
            ChannelInput::Text(t) => parse_channel(t),
            ChannelInput::Spec(s) => Ok(s.clone().into()),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_omegas: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_phis: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Measure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<AdditivityCheck>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub command: Command,
    /// Channels of `capacity` and `decompose`, or the `Φ` pool of `verify-thm3`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<ChannelInput>,
    /// Explicit `Ω` channels of `verify-additivity`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub omegas: Vec<ChannelInput>,
    /// Explicit unital `Φ` channels of `verify-additivity`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phis: Vec<ChannelInput>,
    /// Input state of `decompose`: `random`, `maximally-mixed`, `bloch:x,y,z` or `@file.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default)]
    pub parameters: Parameters,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub entropy_units: EntropyUnits,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

/// One validation problem, addressed by a JSON path.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            channels: Vec::new(),
            omegas: Vec::new(),
            phis: Vec::new(),
            state: None,
            parameters: Parameters::default(),
            seed: 0,
            output: None,
            entropy_units: EntropyUnits::Nats,
        }
    }

    /// Parses a config file; syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| anyhow::anyhow!("line {} column {}: {e}", e.line(), e.column()))
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn settings(&self) -> OptimizerSettings {
        let d = OptimizerSettings::default();
        let p = &self.parameters;
        OptimizerSettings {
            restarts: p.restarts.unwrap_or(d.restarts),
            max_iters: p.max_iters.unwrap_or(d.max_iters),
            tolerance: p.tolerance.unwrap_or(d.tolerance),
            seed: self.seed,
        }
    }

    /// Every problem found, not just the first.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut push = |field: String, message: String| out.push(Diagnostic { field, message });
        if self.schema_version != SCHEMA_VERSION {
            push("schema_version".into(), format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version));
        }
        let p = &self.parameters;
        if let Some(ps) = &p.p {
            if ps.is_empty() {
                push("parameters.p".into(), "list is empty".into());
            }
            for (i, &x) in ps.iter().enumerate() {
                if !(x >= 1.0) || !x.is_finite() {
                    push(format!("parameters.p[{i}]"), format!("p must be ≥ 1 (got {x})"));
                }
            }
        }
        if let Some(g) = p.lambda_grid {
            if !(g > 0.0 && g <= 2.0) {
                push("parameters.lambda_grid".into(), format!("grid step must be in (0, 2] (got {g})"));
            }
        }
        if let Some(ks) = &p.k {
            if ks.is_empty() {
                push("parameters.k".into(), "list is empty".into());
            }
            for (i, &k) in ks.iter().enumerate() {
                if k == 0 || k > 16 {
                    push(format!("parameters.k[{i}]"), format!("K must be between 1 and 16 (got {k})"));
                }
            }
        }
        for (name, v) in [("trials", p.trials.map(|x| x as u128)), ("random_trials", p.random_trials.map(|x| x as u128))] {
            if v == Some(0) {
                push(format!("parameters.{name}"), "must be ≥ 1".into());
            }
        }
        for (name, v) in [("random_omegas", p.random_omegas), ("random_phis", p.random_phis)] {
            if v == Some(0) {
                push(format!("parameters.{name}"), "must be ≥ 1".into());
            }
        }
        if p.restarts == Some(0) {
            push("parameters.restarts".into(), "must be ≥ 1".into());
        }
        if let Some(t) = p.tolerance {
            if !(t > 0.0) {
                push("parameters.tolerance".into(), format!("must be > 0 (got {t})"));
            }
        }

        let check_list = |field: &str, list: &[ChannelInput], out: &mut Vec<Diagnostic>, unital: bool| {
            for (i, ch) in list.iter().enumerate() {
                match ch.parse() {
                    Err(e) => out.push(Diagnostic { field: format!("{field}[{i}]"), message: format!("{e:#}") }),
                    Ok(parsed) if unital && parsed.unital().is_none() => out.push(Diagnostic {
                        field: format!("{field}[{i}]"),
                        message: "must be a unital qubit channel".into(),
                    }),
                    Ok(parsed) if parsed.in_dim() > 4 => out.push(Diagnostic {
                        field: format!("{field}[{i}]"),
                        message: "input dimension must be ≤ 4".into(),
                    }),
                    Ok(_) => {}
                }
            }
        };
        let needs_unital_channels = matches!(self.command, Command::Decompose | Command::VerifyThm3);
        check_list("channels", &self.channels, &mut out, needs_unital_channels);
        check_list("omegas", &self.omegas, &mut out, false);
        check_list("phis", &self.phis, &mut out, true);

        match self.command {
            Command::Capacity | Command::Decompose if self.channels.is_empty() => {
                out.push(Diagnostic { field: "channels".into(), message: "at least one channel is required".into() })
            }
            Command::VerifyAdditivity if self.omegas.is_empty() != self.phis.is_empty() => out.push(Diagnostic {
                field: "omegas".into(),
                message: "give both omegas and phis, or neither for a random grid".into(),
            }),
            _ => {}
        }
        if let Some(s) = &self.state {
            if let Err(e) = parse_state(s, self.seed) {
                out.push(Diagnostic { field: "state".into(), message: format!("{e:#}") });
            }
        }
        out
    }
}

/// Qubit state for `decompose`.
pub fn parse_state(text: &str, seed: u64) -> Result<DensityMatrix> {
    let text = text.trim();
    if let Some(path) = text.strip_prefix('@') {
        let raw = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let rows: PairRows = serde_json::from_str(&raw).with_context(|| format!("{path}: expected a matrix of [re, im] pairs"))?;
        let rho = DensityMatrix::new(from_pairs(&rows)?)?;
        if rho.dim() != 2 {
            bail!("{path}: state must be 2×2");
        }
        return Ok(rho);
    }
    let (name, args) = text.split_once(':').unwrap_or((text, ""));
    match name {
        "random" => Ok(random_density_matrix(2, 2, seed)?),
        "maximally-mixed" => Ok(DensityMatrix::maximally_mixed(2)),
        "bloch" => {
            let b: Vec<f64> = args.split(',').map(|s| s.trim().parse::<f64>()).collect::<std::result::Result<_, _>>()?;
            if b.len() != 3 {
                bail!("bloch needs three components");
            }
            Ok(DensityMatrix::from_bloch([b[0], b[1], b[2]])?)
        }
        other => bail!("unknown state `{other}`; expected random, maximally-mixed, bloch:x,y,z or @file.json"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_p_with_field() {
        let mut c = ExperimentConfig::new(Command::VerifyThm2);
        c.parameters.p = Some(vec![2.0, 0.5]);
        let d = c.validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "parameters.p[1]");
        assert!(d[0].message.contains("p must be ≥ 1"));
    }

    #[test]
    fn rejects_non_cp_channel_citing_inequality() {
        let mut c = ExperimentConfig::new(Command::Capacity);
        c.channels.push(ChannelInput::Text("depolarizing:-0.5".into()));
        let d = c.validate();
        assert!(d[0].message.contains("1 + λ3 >= |λ1 + λ2|"), "{d:?}");
    }

    #[test]
    fn reports_all_problems() {
        let text = r#"{"command": "verify-thm3", "channels": ["amplitude-damping:0.2", "bogus"],
                      "parameters": {"p": [0.1], "k": [0], "trials": 0}}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.validate().len(), 5);
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = ExperimentConfig::from_json("{\n \"command\": \"capacity\",\n \"bogus\": 1}").unwrap_err().to_string();
        assert!(e.starts_with("line 3"), "{e}");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::new(Command::VerifyThm2);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn round_trips_through_json() {
        let mut c = ExperimentConfig::new(Command::Capacity);
        c.channels.push(ChannelInput::Text("depolarizing:0.5".into()));
        c.parameters.p = Some(vec![2.0]);
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn states() {
        assert!(parse_state("bloch:0,0,1", 0).is_ok());
        assert!(parse_state("bloch:0,0,2", 0).is_err());
        assert!(parse_state("random", 3).is_ok());
        assert!(parse_state("maximally-mixed", 0).is_ok());
        assert!(parse_state("other", 0).is_err());
    }
}
