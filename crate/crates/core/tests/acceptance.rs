//! Acceptance suite. Runs every criterion at full size and prints one line
//! per criterion. Set `CHANBENCH_CRITERIA=1,4` to run a subset.

use std::process::ExitCode;
use std::time::Instant;

use chanbench::optimize::OptimizerSettings;
use chanbench::verification::{Campaign, ChannelGrid, CheckReport, Sampling};

struct Criterion {
    id: u32,
    title: &'static str,
    budget_s: f64,
    campaigns: fn() -> Vec<Campaign>,
}

fn settings(seed: u64) -> OptimizerSettings {
    OptimizerSettings { seed, ..Default::default() }
}

fn grid() -> ChannelGrid {
    ChannelGrid::Random { omegas: 20, phis: 20 }
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: 1,
            title: "closed-form maximal p-norm",
            budget_s: 120.0,
            campaigns: || vec![Campaign::ClosedFormNu { channels: 200, ps: vec![1.5, 2.0, 3.0, 5.0], settings: settings(101) }],
        },
        Criterion {
            id: 2,
            title: "phase-damping decomposition",
            budget_s: 60.0,
            campaigns: || vec![Campaign::Decomposition { trials: 1000, seed: 102 }],
        },
        Criterion {
            id: 3,
            title: "half-noisy phase-damping bound",
            budget_s: 180.0,
            campaigns: || {
                let ks = vec![1, 2, 3, 4];
                let ps = Sampling::Uniform { min: 1.0, max: 5.0 };
                vec![
                    Campaign::Thm2 {
                        trials: 10_000,
                        ks: ks.clone(),
                        ps: ps.clone(),
                        lambdas: Sampling::Uniform { min: -1.0, max: 1.0 },
                        equality: false,
                        seed: 103,
                    },
                    Campaign::Thm2 { trials: 1000, ks, ps, lambdas: Sampling::Values(vec![0.0]), equality: true, seed: 203 },
                ]
            },
        },
        Criterion {
            id: 4,
            title: "unital reduction inequality",
            budget_s: 180.0,
            campaigns: || {
                vec![Campaign::Thm3 { trials: 1000, ks: vec![1, 2, 3], ps: Sampling::Uniform { min: 1.0, max: 5.0 }, phis: None, seed: 104 }]
            },
        },
        Criterion {
            id: 5,
            title: "multiplicativity of the maximal p-norm",
            budget_s: 600.0,
            campaigns: || {
                vec![Campaign::Multiplicativity { grid: grid(), ps: vec![1.5, 2.0, 3.0], random_trials: 1000, settings: settings(105) }]
            },
        },
        Criterion {
            id: 6,
            title: "additivity of minimal entropy and Holevo capacity",
            budget_s: 900.0,
            campaigns: || {
                vec![
                    Campaign::SminAdditivity { grid: grid(), random_trials: 1000, settings: settings(106) },
                    Campaign::HolevoAdditivity { grid: grid(), random_trials: 1000, settings: settings(206) },
                ]
            },
        },
        Criterion {
            id: 7,
            title: "proof steps",
            budget_s: 120.0,
            campaigns: || {
                let mut v: Vec<Campaign> =
                    [1.5, 2.0, 3.0].iter().map(|&p| Campaign::Epstein { trials: 1000, p, dim: 4, seed: 107 }).collect();
                v.push(Campaign::Section4 { trials: 1000, ks: vec![1, 2, 3, 4], seed: 207 });
                v.push(Campaign::EntropyDerivative { trials: 100, seed: 307 });
                v
            },
        },
        Criterion {
            id: 8,
            title: "capacity triangle",
            budget_s: 300.0,
            campaigns: || vec![Campaign::CapacityTriangle { channels: 50, settings: settings(108) }],
        },
    ]
}

fn selected() -> Option<Vec<u32>> {
    let v = std::env::var("CHANBENCH_CRITERIA").ok()?;
    Some(v.split(',').filter_map(|s| s.trim().parse().ok()).collect())
}

fn run(c: &Criterion) -> bool {
    let start = Instant::now();
    let reports: Vec<CheckReport> = (c.campaigns)()
        .iter()
        .map(|campaign| {
            campaign.run().unwrap_or_else(|e| panic!("criterion {} could not run: {e}", c.id))
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    for r in &reports {
        println!("    {}", r.summary_line());
        if !r.passed {
            println!("      witness: {}", serde_json::to_string(&r.witness).unwrap_or_default());
            println!("      failure classes: {:?}", r.failure_classes);
        }
    }
    let within_budget = elapsed <= c.budget_s;
    let passed = reports.iter().all(|r| r.passed);
    println!(
        "criterion {} [{}]: {} ({:.1} s, budget {:.0} s{})",
        c.id,
        c.title,
        if passed { "PASS" } else { "FAIL" },
        elapsed,
        c.budget_s,
        if within_budget { "" } else { ", over budget" }
    );
    passed
}

fn main() -> ExitCode {
    let only = selected();
    let mut all = true;
    for c in criteria() {
        if only.as_ref().is_some_and(|v| !v.contains(&c.id)) {
            continue;
        }
        all &= run(&c);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
