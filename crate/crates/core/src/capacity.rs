//! Maximal output p-norm, minimal output entropy and the Holevo quantity,
//! in closed form for unital qubit channels and by direct search otherwise.
//!
//! The searches run over pure inputs only. The p-norm and the entropy are
//! convex and concave respectively on states, so their extrema over the
//! convex set of inputs sit at extreme points. A unit vector in `C^d` is
//! parametrized by `2d` reals (real parts, then imaginary parts) and
//! normalized before every evaluation. Values found by search are lower
//! bounds for suprema and upper bounds for infima.

use nalgebra::DVector;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, UnitalQubitChannel};
use crate::decomposition::standard_form;
use crate::error::{Error, Result};
use crate::matrix::{self, ComplexMatrix};
use crate::optimize::{multistart_minimize, nelder_mead, OptimizerSettings};
use crate::state::{bloch_matrix, entropy_of_spectrum, p_norm_of_spectrum, DensityMatrix, SUPPORT_TOL};

/// Largest input dimension accepted by [`holevo_ensemble_opt`].
pub const MAX_ENSEMBLE_DIM: usize = 4;

/// `m_p(x) = [((1+x)/2)^p + ((1−x)/2)^p]^{1/p}`.
pub fn m_p(x: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("m_p needs |x| <= 1, got {x}")));
    }
    Ok((((1.0 + x) / 2.0).powf(p) + ((1.0 - x) / 2.0).powf(p)).powf(1.0 / p))
}

/// `ν_p(Φ) = m_p(λ3)` with `λ3` from the standard form.
pub fn nu_p_closed_form(phi: &UnitalQubitChannel, p: f64) -> Result<f64> {
    let l = standard_form(phi)?.lambdas[2];
    m_p(l.min(1.0), p)
}

/// Eigenvalues of a Hermitian matrix, closed form for 2×2.
pub(crate) fn spectrum(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 2 {
        let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
        let b = m[(0, 1)];
        let mean = (a + d) / 2.0;
        let r = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
        vec![mean + r, mean - r]
    } else {
        matrix::hermitian_eigenvalues(m).iter().copied().collect()
    }
}

pub(crate) fn entropy(m: &ComplexMatrix) -> f64 {
    entropy_of_spectrum(&spectrum(m))
}

pub(crate) fn unit_vector(x: &[f64]) -> DVector<Complex64> {
    let d = x.len() / 2;
    let v = DVector::from_fn(d, |i, _| Complex64::new(x[i], x[d + i]));
    let n = v.norm();
    if n < 1e-300 {
        let mut e = DVector::zeros(d);
        e[0] = Complex64::new(1.0, 0.0);
        e
    } else {
        v.unscale(n)
    }
}

pub(crate) fn gaussian_params(dim: usize) -> impl Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync {
    move |rng: &mut ChaCha8Rng| (0..2 * dim).map(|_| StandardNormal.sample(rng)).collect()
}

const STEP: f64 = 0.3;

/// Optimum of a search over pure inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub state: DensityMatrix,
}

fn pure_extremum<C: Channel + Sync + ?Sized>(
    ch: &C,
    settings: &OptimizerSettings,
    objective: impl Fn(&ComplexMatrix) -> f64 + Sync,
) -> (f64, DVector<Complex64>) {
    let f = |x: &[f64]| objective(&ch.apply_pure(&unit_vector(x)));
    let m = multistart_minimize(&f, &gaussian_params(ch.in_dim()), STEP, settings);
    (m.value, unit_vector(&m.x))
}

fn pure_state(psi: &DVector<Complex64>) -> DensityMatrix {
    DensityMatrix::from_pure(psi).expect("normalized vector")
}

/// `sup_ρ ‖ch(ρ)‖_p` by multistart search over pure inputs (a lower bound).
pub fn nu_p_numeric<C: Channel + Sync + ?Sized>(ch: &C, p: f64, settings: &OptimizerSettings) -> Result<Extremum> {
    m_p(0.0, p)?;
    settings.validate()?;
    let (v, psi) = pure_extremum(ch, settings, |out| -p_norm_of_spectrum(&spectrum(out), p));
    Ok(Extremum { value: -v, state: pure_state(&psi) })
}

/// `inf_ρ S(ch(ρ))` in nats by multistart search over pure inputs (an upper bound).
pub fn s_min<C: Channel + Sync + ?Sized>(ch: &C, settings: &OptimizerSettings) -> Result<Extremum> {
    settings.validate()?;
    let (v, psi) = pure_extremum(ch, settings, entropy);
    Ok(Extremum { value: v, state: pure_state(&psi) })
}

/// Forward difference `(ν_{1+h} − ν_1)/h`, which tends to `−S_min` as `h → 0`.
pub fn nu_p_slope_at_one<C: Channel + Sync + ?Sized>(ch: &C, h: f64, settings: &OptimizerSettings) -> Result<f64> {
    let nu = nu_p_numeric(ch, 1.0 + h, settings)?.value;
    Ok((nu - 1.0) / h)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleItem {
    pub weight: f64,
    pub state: DensityMatrix,
}

/// Probability weights `π_i` and states `ρ_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<EnsembleItem>", into = "Vec<EnsembleItem>")]
pub struct Ensemble {
    items: Vec<EnsembleItem>,
}

impl TryFrom<Vec<EnsembleItem>> for Ensemble {
    type Error = Error;
    fn try_from(items: Vec<EnsembleItem>) -> Result<Self> {
        Ensemble::new(items)
    }
}

impl From<Ensemble> for Vec<EnsembleItem> {
    fn from(e: Ensemble) -> Self {
        e.items
    }
}

impl Ensemble {
    pub fn new(items: Vec<EnsembleItem>) -> Result<Self> {
        let dim = items
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty ensemble".into()))?
            .state
            .dim();
        if items.iter().any(|it| it.state.dim() != dim) {
            return Err(Error::DimensionMismatch("ensemble states of different dimension".into()));
        }
        if items.iter().any(|it| !(it.weight > 0.0)) {
            return Err(Error::InvalidParameter("ensemble weights must be positive".into()));
        }
        let total: f64 = items.iter().map(|it| it.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("ensemble weights sum to {total}")));
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[EnsembleItem] {
        &self.items
    }

    pub fn dim(&self) -> usize {
        self.items[0].state.dim()
    }

    pub fn average(&self) -> DensityMatrix {
        let mut m = ComplexMatrix::zeros(self.dim(), self.dim());
        for it in &self.items {
            m += it.state.matrix().scale(it.weight);
        }
        DensityMatrix::new(matrix::symmetrize(&m)).expect("convex combination of states")
    }

    /// `S(Σ π_i ch(ρ_i)) − Σ π_i S(ch(ρ_i))`.
    pub fn holevo_quantity<C: Channel + ?Sized>(&self, ch: &C) -> f64 {
        let outs: Vec<ComplexMatrix> = self.items.iter().map(|it| ch.apply_matrix(it.state.matrix())).collect();
        let weights: Vec<f64> = self.items.iter().map(|it| it.weight).collect();
        holevo_of_outputs(&weights, &outs)
    }
}

fn holevo_of_outputs(weights: &[f64], outs: &[ComplexMatrix]) -> f64 {
    let mut avg = ComplexMatrix::zeros(outs[0].nrows(), outs[0].nrows());
    let mut mean_entropy = 0.0;
    for (w, o) in weights.iter().zip(outs) {
        avg += o.scale(*w);
        mean_entropy += w * entropy(o);
    }
    entropy(&avg) - mean_entropy
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolevoResult {
    pub value: f64,
    pub ensemble: Ensemble,
}

/// `log 2 − S_min(Φ)`, achieved by the minimizing pure state and its
/// antipode with equal weights.
pub fn holevo_unital_qubit(phi: &UnitalQubitChannel, settings: &OptimizerSettings) -> Result<HolevoResult> {
    let min = s_min(phi, settings)?;
    let b = min.state.bloch_vector()?;
    let anti = DensityMatrix::new(bloch_matrix([-b[0], -b[1], -b[2]]))?;
    let ensemble = Ensemble::new(vec![
        EnsembleItem { weight: 0.5, state: min.state },
        EnsembleItem { weight: 0.5, state: anti },
    ])?;
    Ok(HolevoResult { value: std::f64::consts::LN_2 - min.value, ensemble })
}

/// `−Tr(O log σ)` helper with support handling: `None` when `O` has weight
/// outside the support of `σ`.
pub(crate) struct LogTarget {
    log: ComplexMatrix,
    kernel: Vec<DVector<Complex64>>,
}

impl LogTarget {
    pub(crate) fn new(sigma: &ComplexMatrix) -> Self {
        let eig = matrix::eigensystem_unchecked(sigma);
        let n = sigma.nrows();
        let mut log = ComplexMatrix::zeros(n, n);
        let mut kernel = Vec::new();
        for k in 0..n {
            let v = eig.vectors.column(k).into_owned();
            let mu = eig.values[k];
            if mu < SUPPORT_TOL {
                kernel.push(v);
            } else {
                log += (&v * v.adjoint()).scale(mu.ln());
            }
        }
        Self { log, kernel }
    }

    /// `S(O|σ)`, or infinity on a support violation.
    pub(crate) fn relative_entropy(&self, o: &ComplexMatrix) -> f64 {
        for v in &self.kernel {
            if (v.adjoint() * o * v)[(0, 0)].re > SUPPORT_TOL {
                return f64::INFINITY;
            }
        }
        (-entropy(o) - matrix::trace_product_re(o, &self.log)).max(0.0)
    }
}

/// Blahut–Arimoto weight updates for fixed output states.
fn blahut_arimoto(weights: &mut [f64], outs: &[ComplexMatrix], iters: usize) {
    for _ in 0..iters {
        let mut avg = ComplexMatrix::zeros(outs[0].nrows(), outs[0].nrows());
        for (w, o) in weights.iter().zip(outs) {
            avg += o.scale(*w);
        }
        let target = LogTarget::new(&avg);
        let mut total = 0.0;
        for (w, o) in weights.iter_mut().zip(outs) {
            *w *= target.relative_entropy(o).min(50.0).exp();
            total += *w;
        }
        weights.iter_mut().for_each(|w| *w /= total);
    }
}

/// Maximizes the Holevo quantity over ensembles of at most `cap` pure
/// states (default `d²`), alternating Blahut–Arimoto weight updates with
/// per-state direct search. The result is a lower bound on `χ*`.
pub fn holevo_ensemble_opt<C: Channel + Sync + ?Sized>(ch: &C, settings: &OptimizerSettings) -> Result<HolevoResult> {
    holevo_ensemble_opt_with_cap(ch, ch.in_dim() * ch.in_dim(), settings)
}

pub fn holevo_ensemble_opt_with_cap<C: Channel + Sync + ?Sized>(
    ch: &C,
    cap: usize,
    settings: &OptimizerSettings,
) -> Result<HolevoResult> {
    settings.validate()?;
    let d = ch.in_dim();
    if d > MAX_ENSEMBLE_DIM {
        return Err(Error::InvalidParameter(format!(
            "ensemble search supports input dimension <= {MAX_ENSEMBLE_DIM}, got {d}"
        )));
    }
    if cap < 1 {
        return Err(Error::InvalidParameter("ensemble cap must be >= 1".into()));
    }
    let init = gaussian_params(d);
    // Each restart is one alternating ascent; the multistart helper supplies
    // seeding and the deterministic reduction.
    let run = |rng: &mut ChaCha8Rng| -> (f64, Vec<f64>, Vec<Vec<f64>>) {
        let mut params: Vec<Vec<f64>> = (0..cap).map(|_| init(rng)).collect();
        let mut outs: Vec<ComplexMatrix> = params.iter().map(|x| ch.apply_pure(&unit_vector(x))).collect();
        let mut weights = vec![1.0 / cap as f64; cap];
        let mut chi = holevo_of_outputs(&weights, &outs);
        for _ in 0..60 {
            blahut_arimoto(&mut weights, &outs, 50);
            for i in 0..cap {
                if weights[i] < 1e-8 {
                    continue;
                }
                let f = |x: &[f64]| {
                    let mut trial = outs.clone();
                    trial[i] = ch.apply_pure(&unit_vector(x));
                    -holevo_of_outputs(&weights, &trial)
                };
                let m = nelder_mead(&f, &params[i], STEP * 0.5, 200, settings.tolerance * 1e-2);
                params[i] = m.x;
                outs[i] = ch.apply_pure(&unit_vector(&params[i]));
            }
            let next = holevo_of_outputs(&weights, &outs);
            let done = next - chi < settings.tolerance;
            chi = chi.max(next);
            if done {
                break;
            }
        }
        blahut_arimoto(&mut weights, &outs, 200);
        (holevo_of_outputs(&weights, &outs), weights, params)
    };

    use rayon::prelude::*;
    let (chi, weights, params) = (0..settings.restarts)
        .into_par_iter()
        .map(|idx| (idx, run(&mut crate::random::trial_rng(settings.seed, idx as u64))))
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(b.0.cmp(&a.0)))
        .map(|(_, r)| r)
        .expect("at least one restart");

    let kept: Vec<(f64, DensityMatrix)> = weights
        .iter()
        .zip(&params)
        .filter(|(w, _)| **w > 1e-12)
        .map(|(w, x)| (*w, pure_state(&unit_vector(x))))
        .collect();
    let total: f64 = kept.iter().map(|k| k.0).sum();
    let ensemble = Ensemble::new(
        kept.into_iter()
            .map(|(w, s)| EnsembleItem { weight: w / total, state: s })
            .collect(),
    )?;
    Ok(HolevoResult { value: chi, ensemble })
}

/// `sup_ω S(ch(ω) | ch(ρ))` over pure `ω` for a fixed candidate `ρ`; the
/// infimum of this over `ρ` is `χ*`. Infinite on a support violation.
pub fn opwsw_divergence_radius<C: Channel + Sync + ?Sized>(
    ch: &C,
    candidate_avg: &DensityMatrix,
    settings: &OptimizerSettings,
) -> Result<f64> {
    settings.validate()?;
    if candidate_avg.dim() != ch.in_dim() {
        return Err(Error::DimensionMismatch("candidate state has the wrong dimension".into()));
    }
    let target = LogTarget::new(&ch.apply_matrix(candidate_avg.matrix()));
    divergence_radius_to(ch, &target, settings)
}

pub(crate) fn divergence_radius_to<C: Channel + Sync + ?Sized>(
    ch: &C,
    target: &LogTarget,
    settings: &OptimizerSettings,
) -> Result<f64> {
    let (v, _) = pure_extremum(ch, settings, |out| -target.relative_entropy(out));
    Ok(-v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::GeneralChannel;
    use crate::random::{random_channel, random_density_matrix_with, random_rotation, random_tetrahedron_point};
    use crate::state::{schatten_p_norm, von_neumann_entropy};
    use nalgebra::{Matrix3, Vector3};
    use rand::SeedableRng;

    const LN2: f64 = std::f64::consts::LN_2;

    fn quick() -> OptimizerSettings {
        OptimizerSettings { restarts: 8, ..Default::default() }
    }

    fn binary_entropy(q: f64) -> f64 {
        [q, 1.0 - q].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
    }

    #[test]
    fn m_p_examples() {
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            assert!((m_p(0.0, p).unwrap() - 2f64.powf(-1.0 + 1.0 / p)).abs() < 1e-15);
            assert!((m_p(1.0, p).unwrap() - 1.0).abs() < 1e-15);
            assert!((m_p(-0.4, p).unwrap() - m_p(0.4, p).unwrap()).abs() < 1e-15);
        }
        for x in [-1.0, -0.3, 0.0, 0.8] {
            assert!((m_p(x, 1.0).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((m_p(0.5, 2.0).unwrap() - 0.790_569_415_042_094_8).abs() < 1e-12);
        assert!(matches!(m_p(0.5, 0.5), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn m_p_monotone_in_abs_x() {
        for p in [1.1, 2.0, 4.0] {
            let mut prev = m_p(0.0, p).unwrap();
            for k in 1..=100 {
                let v = m_p(k as f64 / 100.0, p).unwrap();
                assert!(v > prev);
                assert!(v <= 1.0 && v >= 2f64.powf(-1.0 + 1.0 / p));
                prev = v;
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        for p in [1.5, 2.0, 3.0] {
            assert!((nu_p_closed_form(&UnitalQubitChannel::identity(), p).unwrap() - 1.0).abs() < 1e-15);
            let psi = UnitalQubitChannel::phase_damping(0.3).unwrap();
            assert!((nu_p_closed_form(&psi, p).unwrap() - 1.0).abs() < 1e-15);
        }
        let d = UnitalQubitChannel::depolarizing(0.5).unwrap();
        assert!((nu_p_closed_form(&d, 2.0).unwrap() - 0.790_569_415_042_094_8).abs() < 1e-12);
    }

    #[test]
    fn numeric_nu_p_examples() {
        let s = quick();
        assert!((nu_p_numeric(&GeneralChannel::identity(2), 2.0, &s).unwrap().value - 1.0).abs() < 1e-9);
        let psi = UnitalQubitChannel::phase_damping(0.3).unwrap().kraus_from_transfer().unwrap();
        for p in [1.5, 2.0, 3.0] {
            assert!((nu_p_numeric(&psi, p, &s).unwrap().value - 1.0).abs() < 1e-8);
        }
        let d = UnitalQubitChannel::depolarizing(0.5).unwrap().kraus_from_transfer().unwrap();
        let v = nu_p_numeric(&d, 2.0, &s).unwrap().value;
        assert!((v - 0.790_569_42).abs() < 1e-6, "{v}");
        assert!(nu_p_numeric(&d, 0.9, &s).is_err());
    }

    #[test]
    fn numeric_matches_closed_form_on_grid() {
        let s = quick();
        let steps: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.25).collect();
        let mut count = 0;
        for &l3 in steps.iter().filter(|&&x| x >= 0.0) {
            for &l1 in &steps {
                for &l2 in &steps {
                    if l1.abs() > l3 || l2.abs() > l3 || !crate::channels::is_completely_positive([l1, l2, l3]) {
                        continue;
                    }
                    let phi = UnitalQubitChannel::diagonal(l1, l2, l3).unwrap();
                    for p in [1.5, 2.0, 3.0, 5.0] {
                        let exact = nu_p_closed_form(&phi, p).unwrap();
                        let num = nu_p_numeric(&phi, p, &s).unwrap().value;
                        assert!((exact - num).abs() <= 1e-6, "{l1} {l2} {l3} p={p}: {exact} vs {num}");
                    }
                    count += 1;
                }
            }
        }
        assert!(count > 20);
    }

    #[test]
    fn numeric_nu_p_bounds_random_mixed_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let ch = random_channel(2, 2, 3, &mut rng).unwrap();
        let p = 2.5;
        let nu = nu_p_numeric(&ch, p, &quick()).unwrap().value;
        for _ in 0..1000 {
            let rank = 1 + (rand::Rng::random_range(&mut rng, 0..2));
            let rho = random_density_matrix_with(2, rank, &mut rng).unwrap();
            let out = ch.apply(&rho).unwrap();
            assert!(schatten_p_norm(&out, p).unwrap() <= nu + 1e-9);
        }
    }

    #[test]
    fn s_min_examples() {
        let s = quick();
        assert!(s_min(&UnitalQubitChannel::identity(), &s).unwrap().value.abs() < 1e-8);
        let d = UnitalQubitChannel::depolarizing(0.5).unwrap();
        let v = s_min(&d, &s).unwrap().value;
        assert!((v - 0.562_335_14).abs() < 1e-7, "{v}");
        assert!((v - binary_entropy(0.75)).abs() < 1e-8);
        let zero = UnitalQubitChannel::depolarizing(0.0).unwrap();
        assert!((s_min(&zero, &s).unwrap().value - LN2).abs() < 1e-12);
    }

    #[test]
    fn slope_at_one_is_minus_s_min() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let s = quick();
        for _ in 0..3 {
            let ch = random_channel(2, 2, 2, &mut rng).unwrap();
            let slope = nu_p_slope_at_one(&ch, 1e-5, &s).unwrap();
            let smin = s_min(&ch, &s).unwrap().value;
            assert!((slope + smin).abs() < 1e-3, "{slope} vs {smin}");
        }
    }

    #[test]
    fn holevo_examples() {
        let s = quick();
        let id = holevo_unital_qubit(&UnitalQubitChannel::identity(), &s).unwrap();
        assert!((id.value - LN2).abs() < 1e-8);
        let zero = holevo_unital_qubit(&UnitalQubitChannel::depolarizing(0.0).unwrap(), &s).unwrap();
        assert!(zero.value.abs() < 1e-12);
        let half = holevo_unital_qubit(&UnitalQubitChannel::depolarizing(0.5).unwrap(), &s).unwrap();
        assert!((half.value - 0.130_812_04).abs() < 1e-7);
        assert!((half.ensemble.holevo_quantity(&UnitalQubitChannel::depolarizing(0.5).unwrap()) - half.value).abs() < 1e-7);

        let opt = holevo_ensemble_opt(&GeneralChannel::identity(2), &s).unwrap();
        assert!((opt.value - LN2).abs() < 1e-6, "{}", opt.value);
        let zero = holevo_ensemble_opt(&UnitalQubitChannel::depolarizing(0.0).unwrap(), &s).unwrap();
        assert!(zero.value.abs() < 1e-12);
    }

    #[test]
    fn capacity_triangle_for_unital_qubit_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let s = quick();
        for _ in 0..5 {
            let l = random_tetrahedron_point(&mut rng);
            let t = random_rotation(&mut rng) * Matrix3::from_diagonal(&Vector3::from(l)) * random_rotation(&mut rng);
            let phi = UnitalQubitChannel::new(t).unwrap();
            let a = holevo_unital_qubit(&phi, &s).unwrap().value;
            let b = holevo_ensemble_opt(&phi, &s).unwrap().value;
            let c = opwsw_divergence_radius(&phi, &DensityMatrix::maximally_mixed(2), &s).unwrap();
            assert!((a - b).abs() < 1e-4 && (a - c).abs() < 1e-4, "{a} {b} {c}");
        }
    }

    #[test]
    fn opwsw_examples() {
        let s = quick();
        let half = DensityMatrix::maximally_mixed(2);
        let id = opwsw_divergence_radius(&GeneralChannel::identity(2), &half, &s).unwrap();
        assert!((id - LN2).abs() < 1e-8);
        let d = UnitalQubitChannel::depolarizing(0.5).unwrap();
        let at_half = opwsw_divergence_radius(&d, &half, &s).unwrap();
        let shifted = DensityMatrix::from_bloch([0.0, 0.0, 0.2]).unwrap();
        let off = opwsw_divergence_radius(&d, &shifted, &s).unwrap();
        assert!(off >= at_half);
        // A pure candidate through the identity channel leaves room outside its support.
        let pure = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        assert!(opwsw_divergence_radius(&GeneralChannel::identity(2), &pure, &s).unwrap().is_infinite());
    }

    #[test]
    fn ensemble_validation_and_holevo_quantity() {
        let a = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        let b = DensityMatrix::from_bloch([0.0, 0.0, -1.0]).unwrap();
        let e = Ensemble::new(vec![
            EnsembleItem { weight: 0.5, state: a.clone() },
            EnsembleItem { weight: 0.5, state: b },
        ])
        .unwrap();
        assert!((e.holevo_quantity(&GeneralChannel::identity(2)) - LN2).abs() < 1e-12);
        assert!(e.average() == DensityMatrix::maximally_mixed(2));
        assert!(Ensemble::new(vec![EnsembleItem { weight: 0.7, state: a.clone() }]).is_err());
        assert!(Ensemble::new(vec![
            EnsembleItem { weight: 0.5, state: a },
            EnsembleItem { weight: 0.5, state: DensityMatrix::maximally_mixed(3) },
        ])
        .is_err());
        let text = serde_json::to_string(&e).unwrap();
        let back: Ensemble = serde_json::from_str(&text).unwrap();
        assert_eq!(back.items().len(), 2);
    }

    #[test]
    fn fast_spectrum_matches_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..100 {
            let r = random_density_matrix_with(2, 2, &mut rng).unwrap();
            let mut fast = spectrum(r.matrix());
            fast.sort_by(|a, b| b.total_cmp(a));
            let slow = r.spectrum();
            assert!((fast[0] - slow[0]).abs() < 1e-14 && (fast[1] - slow[1]).abs() < 1e-14);
            assert!((entropy(r.matrix()) - von_neumann_entropy(&r)).abs() < 1e-13);
        }
    }
}
