//! Numerical checks of the norm bounds, the additivity statements and the
//! individual proof steps, single-instance and as seeded campaigns.
//!
//! A campaign is a serializable [`Campaign`] value. Running it yields a
//! [`CheckReport`] that embeds the campaign itself, so any report can be
//! replayed. Trials draw from independent counter-derived RNG streams and
//! the worst trial is chosen by violation, then by trial index, so results
//! do not depend on thread scheduling.
//!
//! Searches for violations are evidence, not proof: a passing report means
//! no violation was found in the stated number of trials.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::capacity::{
    self, divergence_radius_to, holevo_ensemble_opt, holevo_unital_qubit, m_p, nu_p_closed_form, nu_p_numeric,
    opwsw_divergence_radius, s_min, LogTarget,
};
use crate::channels::{apply_half_noisy, Channel, GeneralChannel, UnitalQubitChannel};
use crate::decomposition::{lemma1_decompose, standard_form, verify_decomposition, TOL_DECOMPOSITION};
use crate::error::{Error, Result};
use crate::matrix::{self, max_abs_diff, trace_power, ComplexMatrix};
use crate::optimize::OptimizerSettings;
use crate::random::{
    random_channel, random_density_matrix_with, random_psd, random_pure_state_with, random_unital_channel,
};
use crate::serde_util::to_pairs;
use crate::state::{
    bloch_matrix, from_qubit_blocks, p_norm_of_spectrum, qubit_blocks, reduced_qubit, schatten_p_norm, von_neumann_entropy,
    DensityMatrix, PauliBlockState,
};

pub const TOL_NORM: f64 = 1e-9;
pub const TOL_EQUALITY: f64 = 1e-10;
pub const TOL_ENTROPIC: f64 = 1e-4;
pub const TOL_DERIVATIVE: f64 = 1e-3;
pub const TOL_OPTIMIZER: f64 = 1e-6;
/// Mixing weight toward `I/(2K)` applied when a diagonal block is singular.
pub const REGULARIZATION: f64 = 1e-8;
/// Step of the one-sided difference in `p`.
pub const DERIVATIVE_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub trials: u64,
    pub max_violation: f64,
    pub witness: Option<Value>,
    pub passed: bool,
    pub runtime_ms: u64,
    pub seed: u64,
    pub tolerance: f64,
    /// Summary statistics beyond the headline violation.
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    /// Counts of failing trials by kind.
    #[serde(default)]
    pub failure_classes: BTreeMap<String, u64>,
    /// The campaign that produced this report, for replay.
    #[serde(default)]
    pub params: Option<Campaign>,
}

impl CheckReport {
    pub fn summary_line(&self) -> String {
        format!(
            "{:<28} trials={:<7} max_violation={:<12.3e} tol={:<8.1e} {}",
            self.check_name,
            self.trials,
            self.max_violation,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone)]
pub struct Trial {
    pub violation: f64,
    pub witness: Value,
    pub failure_class: Option<&'static str>,
    pub metrics: Vec<(&'static str, f64)>,
}

impl Trial {
    fn new(violation: f64, witness: Value) -> Self {
        Self { violation, witness, failure_class: None, metrics: Vec::new() }
    }

    fn metric(mut self, name: &'static str, value: f64) -> Self {
        self.metrics.push((name, value));
        self
    }
}

fn state_json(m: &ComplexMatrix) -> Value {
    json!(to_pairs(m))
}

/// Runs `trials` independent trials and keeps the worst.
fn run_trials<F>(name: &str, trials: u64, tolerance: f64, seed: u64, f: F) -> CheckReport
where
    F: Fn(u64) -> Result<Trial> + Sync,
{
    let start = Instant::now();
    let outcomes: Vec<(u64, Trial)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let t = f(i).unwrap_or_else(|e| Trial {
                violation: f64::INFINITY,
                witness: json!({ "error": e.to_string() }),
                failure_class: Some("error"),
                metrics: Vec::new(),
            });
            (i, t)
        })
        .collect();
    let mut failure_classes = BTreeMap::new();
    let mut metrics: BTreeMap<String, f64> = BTreeMap::new();
    let mut worst: Option<&(u64, Trial)> = None;
    for o in &outcomes {
        let v = if o.1.violation.is_nan() { f64::INFINITY } else { o.1.violation };
        if v > tolerance {
            let class = o.1.failure_class.unwrap_or("violation");
            *failure_classes.entry(class.to_string()).or_insert(0) += 1;
        }
        for (k, x) in &o.1.metrics {
            let e = metrics.entry(format!("max_{k}")).or_insert(f64::NEG_INFINITY);
            *e = e.max(*x);
        }
        let better = match worst {
            None => true,
            Some(w) => {
                let wv = if w.1.violation.is_nan() { f64::INFINITY } else { w.1.violation };
                v > wv
            }
        };
        if better {
            worst = Some(o);
        }
    }
    let max_violation = worst.map(|w| if w.1.violation.is_nan() { f64::INFINITY } else { w.1.violation }).unwrap_or(f64::NEG_INFINITY);
    let witness = worst.map(|w| {
        let mut v = w.1.witness.clone();
        if let Value::Object(map) = &mut v {
            map.insert("trial".into(), json!(w.0));
        }
        v
    });
    CheckReport {
        check_name: name.to_string(),
        trials,
        max_violation,
        witness,
        passed: max_violation <= tolerance,
        runtime_ms: start.elapsed().as_millis() as u64,
        seed,
        tolerance,
        metrics,
        failure_classes,
        params: None,
    }
}

/// RNG for role `role`, item `idx` of a campaign seeded with `seed`.
pub fn stream(seed: u64, role: u64, idx: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((role << 40) | idx);
    rng
}

fn check_exponent(p: f64) -> Result<()> {
    m_p(0.0, p).map(|_| ())
}

fn qubit_pair_dim(rho: &DensityMatrix) -> Result<usize> {
    if rho.dim() % 2 != 0 || rho.dim() == 0 {
        return Err(Error::DimensionMismatch(format!("state dimension {} is not 2K", rho.dim())));
    }
    Ok(rho.dim() / 2)
}

/// `2 m_p(λ) [½Tr(X+Y3)^p + ½Tr(X−Y3)^p]^{1/p}`.
pub fn thm2_rhs(rho: &DensityMatrix, lambda: f64, p: f64) -> Result<f64> {
    let blocks = PauliBlockState::decompose(rho)?;
    let upper = trace_power(&matrix::symmetrize(&blocks.upper()), p)?;
    let lower = trace_power(&matrix::symmetrize(&blocks.lower()), p)?;
    Ok(2.0 * m_p(lambda, p)? * (0.5 * upper + 0.5 * lower).powf(1.0 / p))
}

fn thm2_trial(rho: &DensityMatrix, lambda: f64, p: f64) -> Result<(f64, f64)> {
    check_exponent(p)?;
    qubit_pair_dim(rho)?;
    let psi = UnitalQubitChannel::phase_damping(lambda)?;
    let lhs = schatten_p_norm(&apply_half_noisy(&psi, rho)?, p)?;
    let rhs = thm2_rhs(rho, lambda, p)?;
    Ok((lhs, rhs))
}

/// `‖(I⊗Ψ_λ)(ρ)‖_p ≤ 2 m_p(λ) [½Tr(X+Y3)^p + ½Tr(X−Y3)^p]^{1/p}` for one input.
pub fn check_thm2(rho: &DensityMatrix, lambda: f64, p: f64) -> Result<CheckReport> {
    thm2_trial(rho, lambda, p)?;
    let rho = rho.clone();
    Ok(run_trials("thm2", 1, TOL_NORM, 0, move |_| {
        let (lhs, rhs) = thm2_trial(&rho, lambda, p)?;
        Ok(Trial::new(lhs - rhs, json!({ "lambda": lambda, "p": p, "lhs": lhs, "rhs": rhs, "rho": state_json(rho.matrix()) })))
    }))
}

/// Evaluates the Theorem 3 inequality with the constructed decomposition.
/// Returns `(lhs, rhs, decomposition invariants passed, max trace violation, N)`.
fn thm3_trial(rho: &DensityMatrix, phi: &UnitalQubitChannel, p: f64) -> Result<(f64, f64, bool, f64, usize)> {
    check_exponent(p)?;
    let k = qubit_pair_dim(rho)?;
    let r = reduced_qubit(rho)?;
    let d = lemma1_decompose(phi, &r)?;
    let rep = verify_decomposition(&d, phi);
    let lhs = schatten_p_norm(&apply_half_noisy(phi, rho)?, p)?;
    let nu = nu_p_closed_form(phi, p)?;
    let mut sum = 0.0;
    for t in &d.terms {
        let big = matrix::identity(k).kronecker(&t.u);
        let rho_i = &big * rho.matrix() * big.adjoint();
        let b = qubit_blocks(&rho_i, k);
        let upper = trace_power(&matrix::symmetrize(&b[0][0]), p)?;
        let lower = trace_power(&matrix::symmetrize(&b[1][1]), p)?;
        sum += t.c * (upper + lower).powf(1.0 / p);
    }
    let rhs = nu * sum / m_p(0.0, p)?;
    Ok((lhs, rhs, rep.passed && rep.trace_violation <= TOL_DECOMPOSITION, rep.trace_violation, rep.n_terms))
}

fn thm3_outcome(rho: &DensityMatrix, phi: &UnitalQubitChannel, p: f64, witness: Value) -> Result<Trial> {
    let (lhs, rhs, invariants_ok, trace_violation, n) = thm3_trial(rho, phi, p)?;
    let mut w = witness;
    if let Value::Object(map) = &mut w {
        map.insert("lhs".into(), json!(lhs));
        map.insert("rhs".into(), json!(rhs));
        map.insert("n_terms".into(), json!(n));
    }
    let mut t = Trial::new(lhs - rhs, w).metric("n_terms", n as f64).metric("trace_violation", trace_violation);
    if !invariants_ok {
        t.violation = f64::INFINITY;
        t.failure_class = Some("decomposition_invariant");
    } else if lhs - rhs > TOL_NORM {
        t.failure_class = Some("construction_divergence");
    }
    Ok(t)
}

/// Theorem 3 for one input, using the decomposition built for `Tr₁ρ`.
pub fn check_thm3(rho: &DensityMatrix, phi: &UnitalQubitChannel, p: f64) -> Result<CheckReport> {
    thm3_trial(rho, phi, p)?;
    let (rho, phi) = (rho.clone(), *phi);
    Ok(run_trials("thm3", 1, TOL_NORM, 0, move |_| {
        thm3_outcome(&rho, &phi, p, json!({ "p": p, "transfer": phi.transfer().as_slice(), "rho": state_json(rho.matrix()) }))
    }))
}

/// Input on which a unital qubit channel attains its maximal output norm.
fn best_qubit_input(phi: &UnitalQubitChannel) -> Result<ComplexMatrix> {
    let sf = standard_form(phi)?;
    let b = sf.r_pre.transpose() * Vector3::z();
    Ok(bloch_matrix([b[0], b[1], b[2]]))
}


fn random_omega(rng: &mut ChaCha8Rng) -> Result<GeneralChannel> {
    let n_kraus = rng.random_range(1..=4);
    random_channel(2, 2, n_kraus, rng)
}

fn binary_entropy(q: f64) -> f64 {
    [q, 1.0 - q].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// `S_min` of a unital qubit channel: the output spectrum at the best input
/// is `(1 ± λ3)/2`.
fn s_min_unital(phi: &UnitalQubitChannel) -> Result<f64> {
    let l = standard_form(phi)?.lambdas[2].min(1.0);
    Ok(binary_entropy((1.0 + l) / 2.0))
}

fn random_joint_pure(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    random_pure_state_with(dim, rng).expect("positive dimension").into_matrix()
}

/// Worst of random joint inputs for a pure-input objective to be maximized.
fn random_search(dim: usize, trials: usize, rng: &mut ChaCha8Rng, f: impl Fn(&ComplexMatrix) -> f64) -> (f64, ComplexMatrix) {
    let mut best = (f64::NEG_INFINITY, ComplexMatrix::zeros(dim, dim));
    for _ in 0..trials {
        let tau = random_joint_pure(dim, rng);
        let v = f(&tau);
        if v > best.0 {
            best = (v, tau);
        }
    }
    best
}

struct MultiplicativityOutcome {
    bound: f64,
    best_found: f64,
    product_value: f64,
    witness: ComplexMatrix,
}

fn multiplicativity_core(
    omega: &GeneralChannel,
    nu_omega: &capacity::Extremum,
    phi: &UnitalQubitChannel,
    p: f64,
    random_trials: usize,
    settings: &OptimizerSettings,
    rng: &mut ChaCha8Rng,
) -> Result<MultiplicativityOutcome> {
    let nu_phi = nu_p_closed_form(phi, p)?;
    let bound = nu_omega.value * nu_phi;
    let product = omega.tensor(&phi.kraus_from_transfer()?);
    let dim = product.in_dim();
    let norm = |tau: &ComplexMatrix| p_norm_of_spectrum(&capacity::spectrum(&product.apply_matrix(tau)), p);
    let (mut best_found, mut witness) = random_search(dim, random_trials, rng, norm);
    let opt = nu_p_numeric(&product, p, settings)?;
    if opt.value > best_found {
        best_found = opt.value;
        witness = opt.state.into_matrix();
    }
    let product_input = nu_omega.state.matrix().kronecker(&best_qubit_input(phi)?);
    let product_value = norm(&product_input);
    Ok(MultiplicativityOutcome { bound, best_found, product_value, witness })
}

/// Searches entangled inputs of `Ω⊗Φ` for output p-norm above
/// `ν_p(Ω)ν_p(Φ)`, and checks that a product input attains the product.
pub fn check_multiplicativity(
    omega: &GeneralChannel,
    phi: &UnitalQubitChannel,
    p: f64,
    random_trials: usize,
    settings: &OptimizerSettings,
) -> Result<CheckReport> {
    let grid = ChannelGrid::Explicit { omegas: vec![omega.clone()], phis: vec![*phi] };
    Campaign::Multiplicativity { grid, ps: vec![p], random_trials, settings: *settings }.run()
}

fn multiplicativity_trial(o: &MultiplicativityOutcome, witness: Value) -> Trial {
    let excess = o.best_found - o.bound;
    let shortfall = o.bound - o.product_value;
    let mut w = witness;
    if let Value::Object(map) = &mut w {
        map.insert("bound".into(), json!(o.bound));
        map.insert("best_found".into(), json!(o.best_found));
        map.insert("product_value".into(), json!(o.product_value));
        map.insert("input".into(), state_json(&o.witness));
    }
    let mut t = Trial::new(excess.max(shortfall.abs()), w).metric("excess", excess).metric("product_gap", shortfall.abs());
    if shortfall.abs() > TOL_OPTIMIZER && excess <= TOL_OPTIMIZER {
        t.failure_class = Some("product_not_attained");
    }
    t
}

struct SminOutcome {
    sum: f64,
    best_joint: f64,
    product_value: f64,
    witness: ComplexMatrix,
}

fn smin_core(
    omega: &GeneralChannel,
    s_omega: &capacity::Extremum,
    phi: &UnitalQubitChannel,
    random_trials: usize,
    settings: &OptimizerSettings,
    rng: &mut ChaCha8Rng,
) -> Result<SminOutcome> {
    let sum = s_omega.value + s_min_unital(phi)?;
    let product = omega.tensor(&phi.kraus_from_transfer()?);
    let dim = product.in_dim();
    let neg_entropy = |tau: &ComplexMatrix| -crate::state::entropy_of_spectrum(&capacity::spectrum(&product.apply_matrix(tau)));
    let (v, mut witness) = random_search(dim, random_trials, rng, neg_entropy);
    let mut best_joint = -v;
    let opt = s_min(&product, settings)?;
    if opt.value < best_joint {
        best_joint = opt.value;
        witness = opt.state.into_matrix();
    }
    let product_input = s_omega.state.matrix().kronecker(&best_qubit_input(phi)?);
    let product_value = -neg_entropy(&product_input);
    Ok(SminOutcome { sum, best_joint, product_value, witness })
}

fn smin_trial(o: &SminOutcome, witness: Value) -> Trial {
    let deficit = o.sum - o.best_joint;
    let gap = (o.product_value - o.sum).abs();
    let mut w = witness;
    if let Value::Object(map) = &mut w {
        map.insert("sum".into(), json!(o.sum));
        map.insert("best_joint".into(), json!(o.best_joint));
        map.insert("product_value".into(), json!(o.product_value));
        map.insert("input".into(), state_json(&o.witness));
    }
    let mut t = Trial::new(deficit.max(gap), w).metric("subadditive_deficit", deficit).metric("product_gap", gap);
    if gap > TOL_ENTROPIC && deficit <= TOL_ENTROPIC {
        t.failure_class = Some("product_not_attained");
    }
    t
}

/// Searches joint inputs for `S((Ω⊗Φ)(τ)) < S_min(Ω) + S_min(Φ)`.
pub fn check_smin_additivity(
    omega: &GeneralChannel,
    phi: &UnitalQubitChannel,
    random_trials: usize,
    settings: &OptimizerSettings,
) -> Result<CheckReport> {
    let grid = ChannelGrid::Explicit { omegas: vec![omega.clone()], phis: vec![*phi] };
    Campaign::SminAdditivity { grid, random_trials, settings: *settings }.run()
}

/// Optimal ensemble of `Ω` and the divergence radius at its average.
#[derive(Debug, Clone)]
struct HolevoCenter {
    chi: f64,
    center: ComplexMatrix,
    radius: f64,
}

fn holevo_center(omega: &GeneralChannel, settings: &OptimizerSettings) -> Result<HolevoCenter> {
    let opt = holevo_ensemble_opt(omega, settings)?;
    let avg = opt.ensemble.average();
    let radius = opwsw_divergence_radius(omega, &avg, settings)?;
    Ok(HolevoCenter { chi: opt.value, center: omega.apply_matrix(avg.matrix()), radius })
}

struct HolevoOutcome {
    bound: f64,
    best_found: f64,
    center_gap: f64,
    witness: ComplexMatrix,
}

fn holevo_core(
    omega: &GeneralChannel,
    center: &HolevoCenter,
    phi: &UnitalQubitChannel,
    random_trials: usize,
    settings: &OptimizerSettings,
    rng: &mut ChaCha8Rng,
) -> Result<HolevoOutcome> {
    let chi_phi = std::f64::consts::LN_2 - s_min_unital(phi)?;
    let bound = center.chi + chi_phi;
    let product = omega.tensor(&phi.kraus_from_transfer()?);
    let sigma = center.center.kronecker(&matrix::identity(2).unscale(2.0));
    let target = LogTarget::new(&sigma);
    let dim = product.in_dim();
    let (mut best_found, mut witness) = random_search(dim, random_trials, rng, |tau| target.relative_entropy(&product.apply_matrix(tau)));
    let sup = divergence_radius_to(&product, &target, settings)?;
    if sup > best_found {
        best_found = sup;
        witness = ComplexMatrix::zeros(dim, dim);
    }
    Ok(HolevoOutcome { bound, best_found, center_gap: (center.radius - center.chi).abs(), witness })
}

fn holevo_trial(o: &HolevoOutcome, witness: Value) -> Trial {
    let excess = o.best_found - o.bound;
    let mut w = witness;
    if let Value::Object(map) = &mut w {
        map.insert("bound".into(), json!(o.bound));
        map.insert("best_found".into(), json!(o.best_found));
        map.insert("center_gap".into(), json!(o.center_gap));
        map.insert("input".into(), state_json(&o.witness));
    }
    let mut t = Trial::new(excess, w).metric("certificate_excess", excess).metric("center_gap", o.center_gap);
    if o.center_gap > TOL_DERIVATIVE {
        t.violation = t.violation.max(o.center_gap);
        t.failure_class = Some("center_cross_check");
    }
    t
}

/// Relative-entropy certificate for `χ*(Ω⊗Φ) ≤ χ*(Ω) + χ*(Φ)`: no joint input
/// `τ` has `S((Ω⊗Φ)(τ) | Ω(ρ̄)⊗I/2)` above the sum, where `ρ̄` is the input
/// average of the best ensemble found for `Ω`.
pub fn check_holevo_additivity(
    omega: &GeneralChannel,
    phi: &UnitalQubitChannel,
    random_trials: usize,
    settings: &OptimizerSettings,
) -> Result<CheckReport> {
    let grid = ChannelGrid::Explicit { omegas: vec![omega.clone()], phis: vec![*phi] };
    Campaign::HolevoAdditivity { grid, random_trials, settings: *settings }.run()
}

/// `Tr(B A^{1/p} B)^p`.
pub fn epstein_functional(a: &ComplexMatrix, b: &ComplexMatrix, p: f64) -> Result<f64> {
    let root = matrix::hermitian_function(&matrix::symmetrize(a), |x| x.max(0.0).powf(1.0 / p))?;
    trace_power(&matrix::symmetrize(&(b * root * b)), p)
}

fn epstein_trial(a1: &ComplexMatrix, a2: &ComplexMatrix, b: &ComplexMatrix, p: f64) -> Result<f64> {
    let f1 = epstein_functional(a1, b, p)?;
    let f2 = epstein_functional(a2, b, p)?;
    let mut worst = f64::NEG_INFINITY;
    for t in [0.25, 0.5, 0.75] {
        let mix = a1.scale(t) + a2.scale(1.0 - t);
        let fm = epstein_functional(&mix, b, p)?;
        worst = worst.max(t * f1 + (1.0 - t) * f2 - fm);
    }
    Ok(worst)
}

/// Concavity of `A ↦ Tr(B A^{1/p} B)^p` on random positive pairs.
pub fn check_epstein_concavity(b: &ComplexMatrix, p: f64, trials: u64, seed: u64) -> Result<CheckReport> {
    check_exponent(p)?;
    if matrix::hermitian_deviation(b) > matrix::TOL_HERM {
        return Err(Error::NotHermitian { deviation: matrix::hermitian_deviation(b) });
    }
    let b = b.clone();
    let n = b.nrows();
    Ok(run_trials("epstein_concavity", trials, TOL_NORM, seed, move |i| {
        let mut rng = stream(seed, 0, i);
        let a1 = random_psd(n, &mut rng);
        let a2 = random_psd(n, &mut rng);
        let v = epstein_trial(&a1, &a2, &b, p)?;
        Ok(Trial::new(v, json!({ "p": p, "a1": state_json(&a1), "a2": state_json(&a2) })))
    }))
}

/// Pieces of the factorization `(I⊗Ψ_λ)(ρ) = F^{1/2} G F^{1/2}` in qubit-major
/// block order.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub regularization: f64,
    pub factorization_error: f64,
    pub gp_error: f64,
    pub max_singular_value: f64,
}

fn block_matrix(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix, d: &ComplexMatrix) -> ComplexMatrix {
    let k = a.nrows();
    let mut m = ComplexMatrix::zeros(2 * k, 2 * k);
    m.view_mut((0, 0), (k, k)).copy_from(a);
    m.view_mut((0, k), (k, k)).copy_from(b);
    m.view_mut((k, 0), (k, k)).copy_from(c);
    m.view_mut((k, k), (k, k)).copy_from(d);
    m
}

/// `R = W diag(s) Z*` from the eigensystem of `R*R`. Left vectors of
/// vanishing singular values are completed to an orthonormal basis.
fn singular_system(r: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let k = r.nrows();
    let eig = matrix::eigensystem_unchecked(&(r.adjoint() * r));
    let s: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let z = eig.vectors;
    let scale = s.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let mut candidates: Vec<nalgebra::DVector<num_complex::Complex64>> = (0..k)
        .filter(|&i| s[i] > 1e-8 * scale)
        .map(|i| (r * z.column(i)).unscale(s[i]))
        .collect();
    candidates.extend((0..k).map(|i| {
        let mut e = nalgebra::DVector::zeros(k);
        e[i] = num_complex::Complex64::new(1.0, 0.0);
        e
    }));
    let mut w = ComplexMatrix::zeros(k, k);
    let mut filled = 0;
    for mut v in candidates {
        if filled == k {
            break;
        }
        for _ in 0..2 {
            for j in 0..filled {
                let proj = w.column(j).dotc(&v);
                v -= w.column(j) * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            w.set_column(filled, &v.unscale(norm));
            filled += 1;
        }
    }
    (w, s, z)
}

/// Rebuilds the factorization with the contraction `R` replaced by the
/// average of two unitaries `W diag(s ± i√(1−s²)) Z*`, and checks the
/// closed form of `G^p` for each of them.
pub fn section4_factorization(rho: &DensityMatrix, lambda: f64, p: f64) -> Result<Factorization> {
    check_exponent(p)?;
    let k = qubit_pair_dim(rho)?;
    let min_block = |m: &ComplexMatrix| -> f64 { matrix::hermitian_eigenvalues(&matrix::symmetrize(m)).min() };
    let blocks0 = PauliBlockState::decompose(rho)?;
    let singular = min_block(&blocks0.upper()) < 1e-10 || min_block(&blocks0.lower()) < 1e-10;
    let (eps, m) = if singular {
        let mixed = rho.matrix().scale(1.0 - REGULARIZATION) + matrix::identity(2 * k).unscale(2.0 * k as f64).scale(REGULARIZATION);
        (REGULARIZATION, mixed)
    } else {
        (0.0, rho.matrix().clone())
    };
    let b = qubit_blocks(&m, k);
    let (a, z, c) = (matrix::symmetrize(&b[0][0]), b[0][1].clone(), matrix::symmetrize(&b[1][1]));
    let a_half = matrix::psd_sqrt(&a)?;
    let c_half = matrix::psd_sqrt(&c)?;
    let a_inv_half = matrix::hermitian_function(&a, |x| 1.0 / x.sqrt())?;
    let c_inv_half = matrix::hermitian_function(&c, |x| 1.0 / x.sqrt())?;
    let r = &a_inv_half * &z * &c_inv_half;

    let (w, s, zv) = singular_system(&r);
    let max_singular_value = s.iter().copied().fold(0.0, f64::max);
    let dilation = |sign: f64| {
        let phases = nalgebra::DVector::from_iterator(
            k,
            s.iter().map(|&x| {
                let x = x.min(1.0);
                num_complex::Complex64::new(x, sign * (1.0 - x * x).max(0.0).sqrt())
            }),
        );
        &w * ComplexMatrix::from_diagonal(&phases) * zv.adjoint()
    };
    let unitaries = [dilation(1.0), dilation(-1.0)];
    let completed = (&unitaries[0] + &unitaries[1]).unscale(2.0);

    let id = matrix::identity(k);
    let zero = ComplexMatrix::zeros(k, k);
    let f_half = block_matrix(&a_half, &zero, &zero, &c_half);
    let g = block_matrix(&id, &completed.scale(lambda), &completed.adjoint().scale(lambda), &id);
    let product = &f_half * g * &f_half;
    let split = |i: usize, j: usize| product.view((i * k, j * k), (k, k)).into_owned();
    let rebuilt = from_qubit_blocks(&[[split(0, 0), split(0, 1)], [split(1, 0), split(1, 1)]]);
    let output = apply_half_noisy(&UnitalQubitChannel::phase_damping(lambda)?, &DensityMatrix::new(m.clone())?)?;
    let factorization_error = max_abs_diff(&rebuilt, output.matrix());

    let alpha = 0.5 * ((1.0 + lambda).powf(p) + (1.0 - lambda).powf(p));
    let beta = 0.5 * ((1.0 + lambda).powf(p) - (1.0 - lambda).powf(p));
    let mut gp_error: f64 = 0.0;
    for v in &unitaries {
        let gv = block_matrix(&id, &v.scale(lambda), &v.adjoint().scale(lambda), &id);
        let direct = matrix::hermitian_function(&matrix::symmetrize(&gv), |x| x.max(0.0).powf(p))?;
        let closed = block_matrix(&id.scale(alpha), &v.scale(beta), &v.adjoint().scale(beta), &id.scale(alpha));
        gp_error = gp_error.max(max_abs_diff(&direct, &closed));
    }
    Ok(Factorization { regularization: eps, factorization_error, gp_error, max_singular_value })
}

/// Factorization, `G^p` closed form and contraction property for one input.
pub fn check_section4_factorization(rho: &DensityMatrix, lambda: f64, p: f64) -> Result<CheckReport> {
    section4_factorization(rho, lambda, p)?;
    let rho = rho.clone();
    Ok(run_trials("section4_factorization", 1, TOL_NORM, 0, move |_| section4_outcome(&rho, lambda, p)))
}

fn section4_outcome(rho: &DensityMatrix, lambda: f64, p: f64) -> Result<Trial> {
    let f = section4_factorization(rho, lambda, p)?;
    let contraction = (f.max_singular_value - 1.0 - 1e-10).max(0.0);
    let v = f.factorization_error.max(f.gp_error).max(contraction);
    Ok(Trial::new(
        v,
        json!({
            "lambda": lambda, "p": p, "regularization": f.regularization,
            "factorization_error": f.factorization_error, "gp_error": f.gp_error,
            "max_singular_value": f.max_singular_value, "rho": state_json(rho.matrix())
        }),
    )
    .metric("factorization_error", f.factorization_error)
    .metric("gp_error", f.gp_error)
    .metric("singular_value", f.max_singular_value)
    .metric("regularization", f.regularization))
}

/// `(‖ρ‖_{1+h} − 1)/h` against `−S(ρ)`.
pub fn entropy_derivative_gap(rho: &DensityMatrix) -> f64 {
    let h = DERIVATIVE_STEP;
    let slope = (p_norm_of_spectrum(&rho.spectrum(), 1.0 + h) - 1.0) / h;
    (slope + von_neumann_entropy(rho)).abs()
}

pub fn check_entropy_derivative(rho: &DensityMatrix) -> CheckReport {
    let rho = rho.clone();
    run_trials("entropy_derivative", 1, TOL_DERIVATIVE, 0, move |_| {
        Ok(Trial::new(entropy_derivative_gap(&rho), json!({ "rho": state_json(rho.matrix()) })))
    })
}

fn random_mixed(dim: usize, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let rank = rng.random_range(1..=dim);
    random_density_matrix_with(dim, rank, rng)
}

/// Serializable description of a seeded batch of trials.
/// How a campaign draws a real parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Uniform on `[min, max]`.
    Uniform { min: f64, max: f64 },
    /// Uniform over a finite list.
    Values(Vec<f64>),
}

impl Sampling {
    /// `min, min + step, …` up to and including `max` (within rounding).
    pub fn grid(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || max < min {
            return Err(Error::InvalidParameter("grid step must be > 0 and max >= min".into()));
        }
        let n = ((max - min) / step + 1e-9).floor() as usize;
        Ok(Sampling::Values((0..=n).map(|i| (min + i as f64 * step).min(max)).collect()))
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampling::Uniform { min, max } => rng.random_range(*min..=*max),
            Sampling::Values(v) => v[rng.random_range(0..v.len())],
        }
    }

    fn extremes(&self) -> Result<Vec<f64>> {
        match self {
            Sampling::Uniform { min, max } if max >= min => Ok(vec![*min, *max]),
            Sampling::Uniform { .. } => Err(Error::InvalidParameter("uniform range needs max >= min".into())),
            Sampling::Values(v) if v.is_empty() => Err(Error::InvalidParameter("value list is empty".into())),
            Sampling::Values(v) => Ok(v.clone()),
        }
    }
}

/// Channels of the `Ω ⊗ Φ` campaigns; every `Ω` is paired with every `Φ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelGrid {
    /// Random qubit channels `Ω` and random unital qubit channels `Φ`.
    Random { omegas: u64, phis: u64 },
    Explicit { omegas: Vec<GeneralChannel>, phis: Vec<UnitalQubitChannel> },
}

impl ChannelGrid {
    fn build(&self, seed: u64) -> Result<(Vec<GeneralChannel>, Vec<UnitalQubitChannel>)> {
        match self {
            ChannelGrid::Random { omegas, phis } => Ok((
                (0..*omegas).map(|j| random_omega(&mut stream(seed, 1, j))).collect::<Result<_>>()?,
                (0..*phis).map(|j| random_unital_channel(&mut stream(seed, 2, j))).collect::<Result<_>>()?,
            )),
            ChannelGrid::Explicit { omegas, phis } => Ok((omegas.clone(), phis.clone())),
        }
    }

    fn validate(&self) -> Result<()> {
        if let ChannelGrid::Explicit { omegas, phis } = self {
            if omegas.is_empty() || phis.is_empty() {
                return Err(Error::InvalidParameter("channel lists must be non-empty".into()));
            }
            if omegas.iter().any(|o| o.in_dim() > 4) {
                return Err(Error::InvalidParameter("omega input dimension must be <= 4".into()));
            }
        }
        Ok(())
    }
}

/// Serializable description of a seeded batch of trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "campaign", rename_all = "snake_case")]
pub enum Campaign {
    /// `|ν_p numeric − m_p(λ3)|` for random unital qubit channels.
    ClosedFormNu { channels: u64, ps: Vec<f64>, settings: OptimizerSettings },
    /// Decomposition invariants for random `(Φ, r)`.
    Decomposition { trials: u64, seed: u64 },
    /// Random `(ρ, λ, p)`; `equality` pins `λ = 0` and measures `|LHS − RHS|`.
    Thm2 { trials: u64, ks: Vec<usize>, ps: Sampling, lambdas: Sampling, equality: bool, seed: u64 },
    /// Random `(ρ, Φ, p)`, or `Φ` drawn from `phis` when given.
    Thm3 { trials: u64, ks: Vec<usize>, ps: Sampling, phis: Option<Vec<UnitalQubitChannel>>, seed: u64 },
    Multiplicativity { grid: ChannelGrid, ps: Vec<f64>, random_trials: usize, settings: OptimizerSettings },
    SminAdditivity { grid: ChannelGrid, random_trials: usize, settings: OptimizerSettings },
    HolevoAdditivity { grid: ChannelGrid, random_trials: usize, settings: OptimizerSettings },
    Epstein { trials: u64, p: f64, dim: usize, seed: u64 },
    Section4 { trials: u64, ks: Vec<usize>, seed: u64 },
    EntropyDerivative { trials: u64, seed: u64 },
    /// `holevo_unital_qubit`, `holevo_ensemble_opt` and the divergence radius at `I/2`.
    CapacityTriangle { channels: u64, settings: OptimizerSettings },
}

impl Campaign {
    pub fn name(&self) -> String {
        match self {
            Campaign::ClosedFormNu { .. } => "closed_form_nu_p".into(),
            Campaign::Decomposition { .. } => "lemma1_decomposition".into(),
            Campaign::Thm2 { equality: false, .. } => "thm2".into(),
            Campaign::Thm2 { equality: true, .. } => "thm2_equality_lambda0".into(),
            Campaign::Thm3 { .. } => "thm3".into(),
            Campaign::Multiplicativity { .. } => "multiplicativity".into(),
            Campaign::SminAdditivity { .. } => "smin_additivity".into(),
            Campaign::HolevoAdditivity { .. } => "holevo_additivity".into(),
            Campaign::Epstein { p, .. } => format!("epstein_concavity_p{p}"),
            Campaign::Section4 { .. } => "section4_factorization".into(),
            Campaign::EntropyDerivative { .. } => "entropy_derivative".into(),
            Campaign::CapacityTriangle { .. } => "capacity_triangle".into(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Campaign::ClosedFormNu { settings, .. }
            | Campaign::Multiplicativity { settings, .. }
            | Campaign::SminAdditivity { settings, .. }
            | Campaign::HolevoAdditivity { settings, .. }
            | Campaign::CapacityTriangle { settings, .. } => settings.seed,
            Campaign::Decomposition { seed, .. }
            | Campaign::Thm2 { seed, .. }
            | Campaign::Thm3 { seed, .. }
            | Campaign::Epstein { seed, .. }
            | Campaign::Section4 { seed, .. }
            | Campaign::EntropyDerivative { seed, .. } => *seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ps: Vec<f64> = match self {
            Campaign::ClosedFormNu { ps, .. } | Campaign::Multiplicativity { ps, .. } => ps.clone(),
            Campaign::Thm2 { ps, lambdas, .. } => {
                if lambdas.extremes()?.iter().any(|l| !(l.abs() <= 1.0)) {
                    return Err(Error::InvalidParameter("lambda must lie in [-1, 1]".into()));
                }
                ps.extremes()?
            }
            Campaign::Thm3 { ps, phis, .. } => {
                if phis.as_ref().is_some_and(|v| v.is_empty()) {
                    return Err(Error::InvalidParameter("channel list must be non-empty".into()));
                }
                ps.extremes()?
            }
            Campaign::Epstein { p, .. } => vec![*p],
            _ => vec![],
        };
        for p in ps {
            if !(p >= 1.0) {
                return Err(Error::InvalidExponent(p));
            }
        }
        match self {
            Campaign::Thm2 { ks, .. } | Campaign::Thm3 { ks, .. } | Campaign::Section4 { ks, .. } => {
                if ks.is_empty() || ks.contains(&0) {
                    return Err(Error::InvalidParameter("K values must be >= 1".into()));
                }
            }
            Campaign::ClosedFormNu { settings, .. }
            | Campaign::Multiplicativity { settings, .. }
            | Campaign::SminAdditivity { settings, .. }
            | Campaign::HolevoAdditivity { settings, .. }
            | Campaign::CapacityTriangle { settings, .. } => settings.validate()?,
            _ => {}
        }
        match self {
            Campaign::Multiplicativity { grid, .. } | Campaign::SminAdditivity { grid, .. } | Campaign::HolevoAdditivity { grid, .. } => {
                grid.validate()?
            }
            _ => {}
        }
        Ok(())
    }

    pub fn run(&self) -> Result<CheckReport> {
        self.validate()?;
        let mut report = match self.clone() {
            Campaign::ClosedFormNu { channels, ps, settings } => {
                let n_p = ps.len() as u64;
                run_trials(&self.name(), channels * n_p, TOL_OPTIMIZER, settings.seed, |i| {
                    let phi = random_unital_channel(&mut stream(settings.seed, 1, i / n_p))?;
                    let p = ps[(i % n_p) as usize];
                    let exact = nu_p_closed_form(&phi, p)?;
                    let num = nu_p_numeric(&phi, p, &settings.with_seed(settings.seed.wrapping_add(i)))?.value;
                    Ok(Trial::new((num - exact).abs(), json!({ "p": p, "closed_form": exact, "numeric": num, "transfer": phi.transfer().as_slice() })))
                })
            }
            Campaign::Decomposition { trials, seed } => run_trials(&self.name(), trials, TOL_DECOMPOSITION, seed, |i| {
                let mut rng = stream(seed, 0, i);
                let phi = random_unital_channel(&mut rng)?;
                let r = random_mixed(2, &mut rng)?;
                let d = lemma1_decompose(&phi, &r)?;
                let rep = verify_decomposition(&d, &phi);
                // A single 1e-10 threshold covers all three invariants: the weight
                // sum tolerance is 1e-12, so its deviation enters scaled by 100.
                let v = rep.recomposition_error.max(rep.trace_violation).max(100.0 * rep.weight_sum_deviation);
                let v = if rep.min_weight > 0.0 { v } else { f64::INFINITY };
                Ok(Trial::new(v, json!({ "report": rep, "transfer": phi.transfer().as_slice(), "r": state_json(r.matrix()) }))
                    .metric("n_terms", rep.n_terms as f64)
                    .metric("recomposition_error", rep.recomposition_error)
                    .metric("trace_violation", rep.trace_violation)
                    .metric("weight_sum_deviation", rep.weight_sum_deviation))
            }),
            Campaign::Thm2 { trials, ks, ps, lambdas, equality, seed } => {
                let tol = if equality { TOL_EQUALITY } else { TOL_NORM };
                run_trials(&self.name(), trials, tol, seed, |i| {
                    let mut rng = stream(seed, 0, i);
                    let k = ks[rng.random_range(0..ks.len())];
                    let rho = random_mixed(2 * k, &mut rng)?;
                    let lambda = if equality { 0.0 } else { lambdas.sample(&mut rng) };
                    let p = ps.sample(&mut rng);
                    let (lhs, rhs) = thm2_trial(&rho, lambda, p)?;
                    let v = if equality { (lhs - rhs).abs() } else { lhs - rhs };
                    Ok(Trial::new(v, json!({ "k": k, "lambda": lambda, "p": p, "lhs": lhs, "rhs": rhs, "rho": state_json(rho.matrix()) })))
                })
            }
            Campaign::Thm3 { trials, ks, ps, phis, seed } => run_trials(&self.name(), trials, TOL_NORM, seed, |i| {
                let mut rng = stream(seed, 0, i);
                let k = ks[rng.random_range(0..ks.len())];
                let rho = random_mixed(2 * k, &mut rng)?;
                let phi = match &phis {
                    Some(list) => list[rng.random_range(0..list.len())],
                    None => random_unital_channel(&mut rng)?,
                };
                let p = ps.sample(&mut rng);
                thm3_outcome(&rho, &phi, p, json!({ "k": k, "p": p, "transfer": phi.transfer().as_slice(), "rho": state_json(rho.matrix()) }))
            }),
            Campaign::Multiplicativity { grid, ps, random_trials, settings } => {
                let n_p = ps.len() as u64;
                let (omega_list, phi_list) = grid.build(settings.seed)?;
                let (omegas, phis) = (omega_list.len() as u64, phi_list.len() as u64);
                let nus: Vec<Vec<capacity::Extremum>> = omega_list
                    .par_iter()
                    .enumerate()
                    .map(|(j, o)| {
                        ps.iter()
                            .map(|&p| nu_p_numeric(o, p, &settings.with_seed(settings.seed.wrapping_add(j as u64))))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                run_trials(&self.name(), omegas * phis * n_p, TOL_OPTIMIZER, settings.seed, |i| {
                    let (pair, pi) = (i / n_p, (i % n_p) as usize);
                    let (oi, fi) = ((pair / phis) as usize, (pair % phis) as usize);
                    let mut rng = stream(settings.seed, 3, i);
                    let s = settings.with_seed(settings.seed.wrapping_add(i));
                    let o = multiplicativity_core(&omega_list[oi], &nus[oi][pi], &phi_list[fi], ps[pi], random_trials, &s, &mut rng)?;
                    Ok(multiplicativity_trial(&o, json!({ "omega": oi, "phi": fi, "p": ps[pi] })))
                })
            }
            Campaign::SminAdditivity { grid, random_trials, settings } => {
                let (omega_list, phi_list) = grid.build(settings.seed)?;
                let (omegas, phis) = (omega_list.len() as u64, phi_list.len() as u64);
                let smins: Vec<capacity::Extremum> = omega_list
                    .par_iter()
                    .enumerate()
                    .map(|(j, o)| s_min(o, &settings.with_seed(settings.seed.wrapping_add(j as u64))))
                    .collect::<Result<_>>()?;
                run_trials(&self.name(), omegas * phis, TOL_ENTROPIC, settings.seed, |i| {
                    let (oi, fi) = ((i / phis) as usize, (i % phis) as usize);
                    let mut rng = stream(settings.seed, 3, i);
                    let s = settings.with_seed(settings.seed.wrapping_add(i));
                    let o = smin_core(&omega_list[oi], &smins[oi], &phi_list[fi], random_trials, &s, &mut rng)?;
                    Ok(smin_trial(&o, json!({ "omega": oi, "phi": fi })))
                })
            }
            Campaign::HolevoAdditivity { grid, random_trials, settings } => {
                let (omega_list, phi_list) = grid.build(settings.seed)?;
                let (omegas, phis) = (omega_list.len() as u64, phi_list.len() as u64);
                let centers: Vec<HolevoCenter> = omega_list
                    .par_iter()
                    .enumerate()
                    .map(|(j, o)| holevo_center(o, &settings.with_seed(settings.seed.wrapping_add(j as u64))))
                    .collect::<Result<_>>()?;
                run_trials(&self.name(), omegas * phis, TOL_ENTROPIC, settings.seed, |i| {
                    let (oi, fi) = ((i / phis) as usize, (i % phis) as usize);
                    let mut rng = stream(settings.seed, 3, i);
                    let s = settings.with_seed(settings.seed.wrapping_add(i));
                    let o = holevo_core(&omega_list[oi], &centers[oi], &phi_list[fi], random_trials, &s, &mut rng)?;
                    Ok(holevo_trial(&o, json!({ "omega": oi, "phi": fi, "chi_omega": centers[oi].chi })))
                })
            }
            Campaign::Epstein { trials, p, dim, seed } => run_trials(&self.name(), trials, TOL_NORM, seed, |i| {
                let mut rng = stream(seed, 0, i);
                let b = random_psd(dim, &mut rng);
                let a1 = random_psd(dim, &mut rng);
                let a2 = random_psd(dim, &mut rng);
                let v = epstein_trial(&a1, &a2, &b, p)?;
                Ok(Trial::new(v, json!({ "p": p, "b": state_json(&b), "a1": state_json(&a1), "a2": state_json(&a2) })))
            }),
            Campaign::Section4 { trials, ks, seed } => run_trials(&self.name(), trials, TOL_NORM, seed, |i| {
                let mut rng = stream(seed, 0, i);
                let k = ks[rng.random_range(0..ks.len())];
                let rho = if i % 4 == 0 { random_pure_state_with(2 * k, &mut rng)? } else { random_mixed(2 * k, &mut rng)? };
                let lambda = rng.random_range(-1.0..=1.0);
                let p = rng.random_range(1.0..=5.0);
                section4_outcome(&rho, lambda, p)
            }),
            Campaign::EntropyDerivative { trials, seed } => run_trials(&self.name(), trials, TOL_DERIVATIVE, seed, |i| {
                let mut rng = stream(seed, 0, i);
                let dim = rng.random_range(2..=4);
                let rho = random_mixed(dim, &mut rng)?;
                Ok(Trial::new(entropy_derivative_gap(&rho), json!({ "rho": state_json(rho.matrix()) })))
            }),
            Campaign::CapacityTriangle { channels, settings } => run_trials(&self.name(), channels, TOL_ENTROPIC, settings.seed, |i| {
                let phi = random_unital_channel(&mut stream(settings.seed, 1, i))?;
                let s = settings.with_seed(settings.seed.wrapping_add(i));
                let a = holevo_unital_qubit(&phi, &s)?.value;
                let b = holevo_ensemble_opt(&phi, &s)?.value;
                let c = opwsw_divergence_radius(&phi, &DensityMatrix::maximally_mixed(2), &s)?;
                let v = (a - b).abs().max((a - c).abs()).max((b - c).abs());
                Ok(Trial::new(v, json!({ "holevo_unital": a, "holevo_ensemble": b, "divergence_radius": c, "transfer": phi.transfer().as_slice() })))
            }),
        };
        report.seed = self.seed();
        report.params = Some(self.clone());
        Ok(report)
    }
}

/// Re-runs the campaign recorded in `report` and returns the new report
/// together with the drift in `max_violation`.
pub fn replay(report: &CheckReport) -> Result<(CheckReport, f64)> {
    let campaign = report
        .params
        .as_ref()
        .ok_or_else(|| Error::Serialization("report has no campaign parameters".into()))?;
    let again = campaign.run()?;
    let drift = if again.max_violation == report.max_violation {
        0.0
    } else {
        (again.max_violation - report.max_violation).abs()
    };
    Ok((again, drift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_density_matrix;

    fn quick() -> OptimizerSettings {
        OptimizerSettings { restarts: 4, ..Default::default() }
    }

    #[test]
    fn thm2_lambda_zero_is_equality() {
        for seed in 0..20 {
            let rho = random_density_matrix(6, 3, seed).unwrap();
            for p in [1.0, 1.7, 3.0] {
                let (lhs, rhs) = thm2_trial(&rho, 0.0, p).unwrap();
                assert!((lhs - rhs).abs() < 1e-10, "{lhs} {rhs}");
            }
        }
    }

    #[test]
    fn thm2_product_example() {
        let sigma = random_pure_state_with(3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let zero = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        let rho = DensityMatrix::new(sigma.matrix().kronecker(zero.matrix())).unwrap();
        for p in [1.5, 2.0, 4.0] {
            let (lhs, rhs) = thm2_trial(&rho, 1.0, p).unwrap();
            assert!((lhs - 1.0).abs() < 1e-10);
            assert!((rhs - 2.0 * 0.5f64.powf(1.0 / p)).abs() < 1e-10);
            assert!(check_thm2(&rho, 1.0, p).unwrap().passed);
        }
    }

    #[test]
    fn thm2_block_diagonal_inputs_respect_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = random_psd(2, &mut rng);
            let c = random_psd(2, &mut rng);
            let zero = ComplexMatrix::zeros(2, 2);
            // Qubit-last ordering: interleave the two blocks.
            let mut m = ComplexMatrix::zeros(4, 4);
            for i in 0..2 {
                for j in 0..2 {
                    m[(2 * i, 2 * j)] = a[(i, j)] * 0.5;
                    m[(2 * i + 1, 2 * j + 1)] = c[(i, j)] * 0.5;
                }
            }
            let _ = zero;
            let rho = DensityMatrix::new(m).unwrap();
            for lambda in [-0.7, 0.3, 1.0] {
                let (lhs, rhs) = thm2_trial(&rho, lambda, 2.5).unwrap();
                assert!(lhs <= rhs + 1e-12);
            }
        }
    }

    #[test]
    fn thm2_rejects_bad_inputs() {
        assert!(check_thm2(&DensityMatrix::maximally_mixed(3), 0.5, 2.0).is_err());
        assert!(check_thm2(&DensityMatrix::maximally_mixed(4), 0.5, 0.5).is_err());
    }

    #[test]
    fn thm3_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density_matrix_with(4, 4, &mut rng).unwrap();
        let d = UnitalQubitChannel::depolarizing(0.5).unwrap();
        assert!(check_thm3(&rho, &d, 2.0).unwrap().passed);
        let tp = UnitalQubitChannel::two_pauli(0.6).unwrap();
        assert!(check_thm3(&rho, &tp, 3.0).unwrap().passed);
        // Reduced state with no σ3 component.
        let bell = {
            let mut v = nalgebra::DVector::zeros(4);
            v[0] = num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            v[3] = num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            DensityMatrix::from_pure(&v).unwrap()
        };
        let psi = UnitalQubitChannel::phase_damping(0.4).unwrap();
        let rep = check_thm3(&bell, &psi, 2.0).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn multiplicativity_examples() {
        let s = quick();
        let id = GeneralChannel::identity(2);
        let phi = UnitalQubitChannel::depolarizing(0.5).unwrap();
        let rep = check_multiplicativity(&id, &phi, 2.0, 200, &s).unwrap();
        assert!(rep.passed, "{rep:?}");
        let omega = UnitalQubitChannel::depolarizing(0.7).unwrap().kraus_from_transfer().unwrap();
        let rep = check_multiplicativity(&omega, &phi, 2.0, 200, &s).unwrap();
        assert!(rep.passed, "{rep:?}");
        let bound = rep.witness.as_ref().unwrap()["bound"].as_f64().unwrap();
        assert!((bound - m_p(0.7, 2.0).unwrap() * m_p(0.5, 2.0).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn additivity_examples() {
        let s = quick();
        let id = GeneralChannel::identity(2);
        let phi = UnitalQubitChannel::depolarizing(0.5).unwrap();
        assert!(check_smin_additivity(&id, &phi, 200, &s).unwrap().passed);
        let omega = UnitalQubitChannel::depolarizing(0.7).unwrap().kraus_from_transfer().unwrap();
        let rep = check_smin_additivity(&omega, &phi, 200, &s).unwrap();
        assert!(rep.passed, "{rep:?}");
        let sum = rep.witness.as_ref().unwrap()["sum"].as_f64().unwrap();
        assert!((sum - binary_entropy(0.85) - binary_entropy(0.75)).abs() < 1e-7);
        let rep = check_holevo_additivity(&omega, &phi, 200, &s).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn epstein_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random_psd(3, &mut rng);
        let a = random_psd(3, &mut rng);
        assert!(epstein_trial(&a, &a, &b, 2.0).unwrap().abs() < 1e-12);
        let a2 = random_psd(3, &mut rng);
        assert!(epstein_trial(&a, &a2, &b, 1.0).unwrap().abs() < 1e-12);
        assert!(check_epstein_concavity(&b, 2.0, 100, 1).unwrap().passed);
    }

    #[test]
    fn section4_examples() {
        // Block diagonal: R = 0 and G = I.
        let rho = DensityMatrix::new(ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            [0.1, 0.2, 0.3, 0.4].map(|x| num_complex::Complex64::new(x, 0.0)).to_vec(),
        )))
        .unwrap();
        let f = section4_factorization(&rho, 0.5, 2.0).unwrap();
        assert_eq!(f.max_singular_value, 0.0);
        assert!(f.factorization_error < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pure = random_pure_state_with(4, &mut rng).unwrap();
        let rep = check_section4_factorization(&pure, 0.6, 3.0).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.metrics["max_singular_value"] <= 1.0 + 1e-10);
    }

    #[test]
    fn entropy_derivative_examples() {
        let pure = random_pure_state_with(3, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        assert!(entropy_derivative_gap(&pure) < 1e-9);
        let half = DensityMatrix::maximally_mixed(2);
        assert!(entropy_derivative_gap(&half) < 1e-3);
        let r = random_density_matrix(4, 3, 7).unwrap();
        assert!(check_entropy_derivative(&r).passed);
    }

    #[test]
    fn campaigns_are_deterministic_and_replayable() {
        let c = Campaign::Thm2 { trials: 200, ks: vec![1, 2], ps: Sampling::Uniform { min: 1.0, max: 5.0 }, lambdas: Sampling::Uniform { min: -1.0, max: 1.0 }, equality: false, seed: 9 };
        let a = c.run().unwrap();
        assert!(a.passed);
        let text = serde_json::to_string(&a).unwrap();
        let back: CheckReport = serde_json::from_str(&text).unwrap();
        let (again, drift) = replay(&back).unwrap();
        assert_eq!(drift, 0.0);
        assert_eq!(again.max_violation, a.max_violation);
    }

    #[test]
    fn small_campaigns_pass() {
        let s = quick();
        let campaigns = vec![
            Campaign::Decomposition { trials: 100, seed: 1 },
            Campaign::Thm2 { trials: 100, ks: vec![1, 2, 3, 4], ps: Sampling::Uniform { min: 1.0, max: 5.0 }, lambdas: Sampling::Values(vec![0.0]), equality: true, seed: 1 },
            Campaign::Thm3 { trials: 100, ks: vec![1, 2, 3], ps: Sampling::Uniform { min: 1.0, max: 5.0 }, phis: None, seed: 1 },
            Campaign::Epstein { trials: 50, p: 1.5, dim: 4, seed: 1 },
            Campaign::Section4 { trials: 50, ks: vec![1, 2, 3], seed: 1 },
            Campaign::EntropyDerivative { trials: 50, seed: 1 },
            Campaign::ClosedFormNu { channels: 5, ps: vec![2.0], settings: s },
            Campaign::CapacityTriangle { channels: 2, settings: s },
            Campaign::Multiplicativity { grid: ChannelGrid::Random { omegas: 1, phis: 2 }, ps: vec![2.0], random_trials: 50, settings: s },
            Campaign::SminAdditivity { grid: ChannelGrid::Random { omegas: 1, phis: 2 }, random_trials: 50, settings: s },
            Campaign::HolevoAdditivity { grid: ChannelGrid::Random { omegas: 1, phis: 2 }, random_trials: 50, settings: s },
        ];
        for c in campaigns {
            let r = c.run().unwrap();
            assert!(r.passed, "{}", serde_json::to_string_pretty(&r).unwrap());
        }
    }

    #[test]
    fn invalid_campaigns_are_rejected() {
        let c = Campaign::Thm2 { trials: 1, ks: vec![1], ps: Sampling::Values(vec![0.5, 2.0]), lambdas: Sampling::Values(vec![0.5]), equality: false, seed: 0 };
        assert!(matches!(c.run(), Err(Error::InvalidExponent(_))));
        let c = Campaign::Section4 { trials: 1, ks: vec![0], seed: 0 };
        assert!(c.run().is_err());
    }
}
