//! Channel mini-language: `name:params` for named families and
//! `@file.json` for channels stored as JSON.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use chanbench::channels::{Channel, ChannelSpec, GeneralChannel, KrausData, UnitalQubitChannel};
use chanbench::matrix::{c, ComplexMatrix};
use chanbench::random::{random_channel, random_unital_channel, trial_rng};

pub const HELP: &str = "identity | depolarizing:λ | phase-damping:λ | two-pauli:λ | diagonal:λ1,λ2,λ3 | \
corner:i,λ | amplitude-damping:γ | random-unital:seed | random:seed[,kraus] | @file.json";

#[derive(Debug, Clone)]
pub enum ParsedChannel {
    Unital(UnitalQubitChannel),
    General(GeneralChannel),
}

impl ParsedChannel {
    pub fn unital(&self) -> Option<&UnitalQubitChannel> {
        match self {
            ParsedChannel::Unital(u) => Some(u),
            ParsedChannel::General(_) => None,
        }
    }

    pub fn general(&self) -> Result<GeneralChannel> {
        match self {
            ParsedChannel::Unital(u) => Ok(u.kraus_from_transfer()?),
            ParsedChannel::General(g) => Ok(g.clone()),
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            ParsedChannel::Unital(_) => 2,
            ParsedChannel::General(g) => g.in_dim(),
        }
    }
}

impl From<ChannelSpec> for ParsedChannel {
    fn from(spec: ChannelSpec) -> Self {
        match spec {
            ChannelSpec::UnitalQubit(u) => ParsedChannel::Unital(u),
            ChannelSpec::Kraus(g) => ParsedChannel::General(g),
        }
    }
}

fn numbers(args: &str, expected: usize, name: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = args
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("{name}: cannot parse `{s}` as a number")))
        .collect::<Result<_>>()?;
    if v.len() != expected {
        bail!("{name} takes {expected} parameter(s), got {}", v.len());
    }
    Ok(v)
}

fn read_file(path: &Path) -> Result<ParsedChannel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(spec) = serde_json::from_str::<ChannelSpec>(&text) {
        return Ok(spec.into());
    }
    let data: KrausData = serde_json::from_str(&text)
        .map_err(|e| anyhow!("{}: not a channel description ({e})", path.display()))?;
    Ok(ParsedChannel::General(GeneralChannel::try_from(data)?))
}

/// Parses one channel; CP and trace preservation are checked on construction.
pub fn parse_channel(text: &str) -> Result<ParsedChannel> {
    let text = text.trim();
    if let Some(path) = text.strip_prefix('@') {
        return read_file(Path::new(path));
    }
    let (name, args) = text.split_once(':').unwrap_or((text, ""));
    let one = |n: &str| -> Result<f64> { Ok(numbers(args, 1, n)?[0]) };
    let ch = match name {
        "identity" => ParsedChannel::Unital(UnitalQubitChannel::identity()),
        "depolarizing" => ParsedChannel::Unital(UnitalQubitChannel::depolarizing(one(name)?)?),
        "phase-damping" => ParsedChannel::Unital(UnitalQubitChannel::phase_damping(one(name)?)?),
        "two-pauli" => ParsedChannel::Unital(UnitalQubitChannel::two_pauli(one(name)?)?),
        "diagonal" => {
            let l = numbers(args, 3, name)?;
            ParsedChannel::Unital(UnitalQubitChannel::diagonal(l[0], l[1], l[2])?)
        }
        "corner" => {
            let v = numbers(args, 2, name)?;
            if v[0].fract() != 0.0 || !(1.0..=4.0).contains(&v[0]) {
                bail!("corner index must be 1, 2, 3 or 4");
            }
            ParsedChannel::Unital(UnitalQubitChannel::corner_map(v[0] as usize, v[1])?)
        }
        "amplitude-damping" => {
            let g = one(name)?;
            if !(0.0..=1.0).contains(&g) {
                bail!("amplitude damping needs 0 <= γ <= 1, got {g}");
            }
            let k0 = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - g).sqrt(), 0.0)]);
            let k1 = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(g.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
            ParsedChannel::General(GeneralChannel::new(vec![k0, k1])?)
        }
        "random-unital" => {
            let seed = parse_seed(args)?;
            ParsedChannel::Unital(random_unital_channel(&mut trial_rng(seed, 0))?)
        }
        "random" => {
            let (seed, n) = args.split_once(',').unwrap_or((args, "2"));
            let n: usize = n.trim().parse().context("random: Kraus count must be a positive integer")?;
            if n == 0 {
                bail!("random: Kraus count must be >= 1");
            }
            ParsedChannel::General(random_channel(2, 2, n, &mut trial_rng(parse_seed(seed)?, 0))?)
        }
        other => bail!("unknown channel `{other}`; expected {HELP}"),
    };
    Ok(ch)
}

fn parse_seed(s: &str) -> Result<u64> {
    s.trim().parse().with_context(|| format!("cannot parse `{s}` as a seed"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_families() {
        assert!(parse_channel("depolarizing:0.5").unwrap().unital().is_some());
        assert!(parse_channel("two-pauli:0.5").unwrap().unital().is_some());
        assert!(parse_channel("diagonal:0.3,-0.2,0.4").is_ok());
        assert!(parse_channel("corner:2,0.5").is_ok());
        assert!(parse_channel("amplitude-damping:0.3").unwrap().unital().is_none());
        assert_eq!(parse_channel("random:4,3").unwrap().general().unwrap().kraus().len(), 3);
        let a = parse_channel("random-unital:9").unwrap();
        let b = parse_channel("random-unital:9").unwrap();
        assert_eq!(a.unital().unwrap().transfer(), b.unital().unwrap().transfer());
    }

    #[test]
    fn rejects_non_cp_with_inequality() {
        let e = parse_channel("depolarizing:-0.5").unwrap_err().to_string();
        assert!(e.contains("1 + λ3 >= |λ1 + λ2|"), "{e}");
        assert!(parse_channel("phase-damping:2").is_err());
        assert!(parse_channel("nonsense:1").is_err());
        assert!(parse_channel("diagonal:1,2").is_err());
    }

    #[test]
    fn reads_json_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ch.json");
        let spec = ChannelSpec::UnitalQubit(UnitalQubitChannel::depolarizing(0.2).unwrap());
        std::fs::write(&path, spec.to_json()).unwrap();
        let parsed = parse_channel(&format!("@{}", path.display())).unwrap();
        assert!(parsed.unital().is_some());
        std::fs::write(&path, "{\"in_dim\": 2}").unwrap();
        assert!(parse_channel(&format!("@{}", path.display())).is_err());
    }
}
