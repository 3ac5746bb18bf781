//! Turns a validated config into campaigns and computations.

use std::time::Instant;

use anyhow::{bail, Result};
use chanbench::capacity::{
    holevo_ensemble_opt, holevo_unital_qubit, nu_p_closed_form, nu_p_numeric, opwsw_divergence_radius, s_min,
};
use chanbench::channels::{GeneralChannel, UnitalQubitChannel};
use chanbench::decomposition::{lemma1_decompose, standard_form, verify_decomposition, TOL_DECOMPOSITION};
use chanbench::state::DensityMatrix;
use chanbench::verification::{Campaign, ChannelGrid, CheckReport, Sampling};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_state, AdditivityCheck, ChannelInput, Command, ExperimentConfig, Measure};

/// A non-check result: capacity values or a decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub kind: String,
    pub body: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureRow {
    pub measure: String,
    pub p: Option<f64>,
    pub method: String,
    pub value: f64,
    pub units: Option<String>,
    pub label: String,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<CheckReport>,
    pub records: Vec<Record>,
    pub rows: Vec<(String, Vec<MeasureRow>)>,
}

fn label(input: &ChannelInput) -> String {
    match input {
        ChannelInput::Text(t) => t.clone(),
        ChannelInput::Spec(s) => s.to_json(),
    }
}

fn unital_list(list: &[ChannelInput]) -> Result<Vec<UnitalQubitChannel>> {
    list.iter()
        .map(|c| match c.parse()?.unital() {
            Some(u) => Ok(*u),
            None => bail!("{} is not a unital qubit channel", label(c)),
        })
        .collect()
}

fn general_list(list: &[ChannelInput]) -> Result<Vec<GeneralChannel>> {
    list.iter().map(|c| c.parse()?.general()).collect()
}

fn p_sampling(ps: &Option<Vec<f64>>) -> Sampling {
    match ps {
        Some(v) => Sampling::Values(v.clone()),
        None => Sampling::Uniform { min: 1.0, max: 5.0 },
    }
}

/// The campaigns a verification command runs.
pub fn campaigns(config: &ExperimentConfig) -> Result<Vec<Campaign>> {
    let p = &config.parameters;
    let seed = config.seed;
    let settings = config.settings();
    let list = |default: &[f64]| p.p.clone().unwrap_or_else(|| default.to_vec());
    let out = match config.command {
        Command::VerifyThm2 => {
            let trials = p.trials.unwrap_or(10_000);
            let ks = p.k.clone().unwrap_or_else(|| vec![1, 2, 3, 4]);
            let lambdas = match p.lambda_grid {
                Some(step) => Sampling::grid(-1.0, 1.0, step)?,
                None => Sampling::Uniform { min: -1.0, max: 1.0 },
            };
            vec![
                Campaign::Thm2 { trials, ks: ks.clone(), ps: p_sampling(&p.p), lambdas, equality: false, seed },
                Campaign::Thm2 {
                    trials,
                    ks,
                    ps: p_sampling(&p.p),
                    lambdas: Sampling::Values(vec![0.0]),
                    equality: true,
                    seed: seed.wrapping_add(1),
                },
            ]
        }
        Command::VerifyThm3 => {
            let phis = if config.channels.is_empty() { None } else { Some(unital_list(&config.channels)?) };
            vec![Campaign::Thm3 {
                trials: p.trials.unwrap_or(1000),
                ks: p.k.clone().unwrap_or_else(|| vec![1, 2, 3]),
                ps: p_sampling(&p.p),
                phis,
                seed,
            }]
        }
        Command::VerifyAdditivity => {
            let grid = if config.omegas.is_empty() {
                ChannelGrid::Random { omegas: p.random_omegas.unwrap_or(20), phis: p.random_phis.unwrap_or(20) }
            } else {
                ChannelGrid::Explicit { omegas: general_list(&config.omegas)?, phis: unital_list(&config.phis)? }
            };
            let random_trials = p.random_trials.unwrap_or(1000);
            let checks = p.checks.clone().unwrap_or_else(|| {
                vec![AdditivityCheck::Multiplicativity, AdditivityCheck::Smin, AdditivityCheck::Holevo]
            });
            checks
                .iter()
                .map(|c| match c {
                    AdditivityCheck::Multiplicativity => Campaign::Multiplicativity {
                        grid: grid.clone(),
                        ps: list(&[1.5, 2.0, 3.0]),
                        random_trials,
                        settings,
                    },
                    AdditivityCheck::Smin => Campaign::SminAdditivity {
                        grid: grid.clone(),
                        random_trials,
                        settings: settings.with_seed(seed.wrapping_add(1)),
                    },
                    AdditivityCheck::Holevo => Campaign::HolevoAdditivity {
                        grid: grid.clone(),
                        random_trials,
                        settings: settings.with_seed(seed.wrapping_add(2)),
                    },
                })
                .collect()
        }
        Command::VerifyProofSteps => {
            let trials = p.trials.unwrap_or(1000);
            let mut v: Vec<Campaign> =
                list(&[1.5, 2.0, 3.0]).into_iter().map(|p| Campaign::Epstein { trials, p, dim: 4, seed }).collect();
            v.push(Campaign::Section4 {
                trials,
                ks: p.k.clone().unwrap_or_else(|| vec![1, 2, 3, 4]),
                seed: seed.wrapping_add(1),
            });
            v.push(Campaign::EntropyDerivative { trials: (trials / 10).max(1), seed: seed.wrapping_add(2) });
            v
        }
        Command::VerifyCapacity => {
            let trials = p.trials.unwrap_or(200);
            vec![
                Campaign::ClosedFormNu { channels: trials, ps: list(&[1.5, 2.0, 3.0, 5.0]), settings },
                Campaign::CapacityTriangle { channels: (trials / 4).max(1), settings: settings.with_seed(seed.wrapping_add(1)) },
            ]
        }
        Command::VerifyDecomposition => vec![Campaign::Decomposition { trials: p.trials.unwrap_or(1000), seed }],
        Command::Capacity | Command::Decompose => Vec::new(),
    };
    Ok(out)
}

fn binary_entropy(q: f64) -> f64 {
    [q, 1.0 - q].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

fn capacity_rows(config: &ExperimentConfig, input: &ChannelInput) -> Result<Vec<MeasureRow>> {
    let parsed = input.parse()?;
    let settings = config.settings();
    let units = config.entropy_units;
    let measure = config.parameters.measure.unwrap_or(Measure::All);
    let ps = config.parameters.p.clone().unwrap_or_else(|| vec![2.0]);
    let general = parsed.general()?;
    let mut rows = Vec::new();
    let row = |measure: &str, p: Option<f64>, method: &str, value: f64, entropic: bool, label: &str| MeasureRow {
        measure: measure.into(),
        p,
        method: method.into(),
        value: if entropic { units.convert(value) } else { value },
        units: entropic.then(|| units.label().to_string()),
        label: label.into(),
    };
    let wants = |m: Measure| measure == Measure::All || measure == m;
    if wants(Measure::Nu) {
        for &p in &ps {
            if let Some(u) = parsed.unital() {
                rows.push(row("nu_p", Some(p), "closed_form", nu_p_closed_form(u, p)?, false, "exact"));
            }
            rows.push(row("nu_p", Some(p), "optimizer", nu_p_numeric(&general, p, &settings)?.value, false, "certified lower bound"));
        }
    }
    if wants(Measure::Smin) {
        if let Some(u) = parsed.unital() {
            let l = standard_form(u)?.lambdas[2].min(1.0);
            rows.push(row("s_min", None, "closed_form", binary_entropy((1.0 + l) / 2.0), true, "exact"));
        }
        rows.push(row("s_min", None, "optimizer", s_min(&general, &settings)?.value, true, "upper bound"));
    }
    if wants(Measure::Holevo) {
        if let Some(u) = parsed.unital() {
            rows.push(row("chi_star", None, "unital_qubit", holevo_unital_qubit(u, &settings)?.value, true, "exact up to optimizer tolerance"));
        }
        let ens = holevo_ensemble_opt(&general, &settings)?;
        rows.push(row("chi_star", None, "ensemble", ens.value, true, "certified lower bound"));
        let center = if parsed.unital().is_some() { DensityMatrix::maximally_mixed(2) } else { ens.ensemble.average() };
        let radius = opwsw_divergence_radius(&general, &center, &settings)?;
        rows.push(row("chi_star", None, "divergence_radius", radius, true, "upper bound"));
    }
    Ok(rows)
}

fn decompose(config: &ExperimentConfig, input: &ChannelInput) -> Result<(Record, CheckReport)> {
    let start = Instant::now();
    let phi = match input.parse()?.unital() {
        Some(u) => *u,
        None => bail!("decompose needs a unital qubit channel"),
    };
    let state = parse_state(config.state.as_deref().unwrap_or("random"), config.seed)?;
    let d = lemma1_decompose(&phi, &state)?;
    let rep = verify_decomposition(&d, &phi);
    let violation = rep.recomposition_error.max(rep.trace_violation).max(100.0 * rep.weight_sum_deviation);
    let body = json!({ "channel": label(input), "state": chanbench::serde_util::to_pairs(state.matrix()), "decomposition": d, "report": rep });
    let check = CheckReport {
        check_name: "decomposition".into(),
        trials: 1,
        max_violation: violation,
        witness: None,
        passed: rep.passed && violation <= TOL_DECOMPOSITION,
        runtime_ms: start.elapsed().as_millis() as u64,
        seed: config.seed,
        tolerance: TOL_DECOMPOSITION,
        metrics: [
            ("recomposition_error".to_string(), rep.recomposition_error),
            ("trace_violation".to_string(), rep.trace_violation),
            ("weight_sum_deviation".to_string(), rep.weight_sum_deviation),
            ("n_terms".to_string(), rep.n_terms as f64),
        ]
        .into_iter()
        .collect(),
        failure_classes: Default::default(),
        params: None,
    };
    Ok((Record { kind: "decompose".into(), body }, check))
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    match config.command {
        Command::Capacity => {
            for input in &config.channels {
                let rows = capacity_rows(config, input)?;
                outcome.records.push(Record {
                    kind: "capacity".into(),
                    body: json!({ "channel": label(input), "entropy_units": config.entropy_units, "measures": rows }),
                });
                outcome.rows.push((label(input), rows));
            }
        }
        Command::Decompose => {
            for input in &config.channels {
                let (record, check) = decompose(config, input)?;
                outcome.records.push(record);
                outcome.checks.push(check);
            }
        }
        _ => {
            for c in campaigns(config)? {
                outcome.checks.push(c.run()?);
            }
        }
    }
    Ok(outcome)
}
