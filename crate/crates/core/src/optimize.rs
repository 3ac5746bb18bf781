//! Derivative-free minimization: Nelder–Mead with deterministic multistart.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::trial_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub max_iters: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { restarts: 32, max_iters: 2000, tolerance: 1e-9, seed: 0 }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::InvalidParameter("restarts must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be > 0".into()));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Nelder–Mead from `x0` with an axis-aligned initial simplex of edge `step`.
/// Stops when the spread of simplex values falls below `tol` or after
/// `max_iters` iterations, then restarts once from the best vertex to
/// recover from a collapsed simplex.
pub fn nelder_mead(f: &impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, max_iters: usize, tol: f64) -> Minimum {
    let mut best = nm_run(f, x0, step, max_iters, tol);
    for _ in 0..2 {
        let again = nm_run(f, &best.x, step * 0.1, max_iters, tol);
        let improved = again.value < best.value - tol;
        let iterations = best.iterations + again.iterations;
        if again.value <= best.value {
            best = Minimum { iterations, ..again };
        } else {
            best.iterations = iterations;
        }
        if !improved {
            break;
        }
    }
    best
}

fn nm_run(f: &impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, max_iters: usize, tol: f64) -> Minimum {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let mut iterations = 0;
    let mut centroid = vec![0.0; n];
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect() };
    while iterations < max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() <= tol {
            break;
        }
        iterations += 1;
        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let xr = point(&centroid, &worst, -1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst, -2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = point(&centroid, &worst, -0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = point(&centroid, &worst, 0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    *x = point(&x_best, x, 0.5);
                    *v = f(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, iterations }
}

/// Best of `settings.restarts` Nelder–Mead runs, each started from
/// `init(rng)` with its own counter-derived stream. Ties in value go to the
/// lower restart index, so the result is independent of scheduling.
pub fn multistart_minimize<F, I>(f: &F, init: &I, step: f64, settings: &OptimizerSettings) -> Minimum
where
    F: Fn(&[f64]) -> f64 + Sync,
    I: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    (0..settings.restarts)
        .into_par_iter()
        .map(|idx| {
            let mut rng = trial_rng(settings.seed, idx as u64);
            let x0 = init(&mut rng);
            (idx, nelder_mead(f, &x0, step, settings.max_iters, settings.tolerance))
        })
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .map(|(_, m)| m)
        .expect("at least one restart")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 0.5;
        let m = nelder_mead(&f, &[0.0, 0.0], 0.5, 2000, 1e-14);
        assert!((m.value - 0.5).abs() < 1e-12);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(&f, &[-1.2, 1.0], 0.5, 5000, 1e-16);
        assert!(m.value < 1e-10, "{m:?}");
    }

    #[test]
    fn multistart_escapes_local_minimum() {
        // Double well with the deeper well at x = 2.
        let f = |x: &[f64]| (x[0] * x[0] - 4.0).powi(2) * (x[0] + 2.0).abs().min(1.0) - x[0] * 0.1;
        let init = |rng: &mut ChaCha8Rng| { let z: f64 = StandardNormal.sample(rng); vec![z * 3.0] };
        let s = OptimizerSettings { restarts: 16, ..Default::default() };
        let m = multistart_minimize(&f, &init, 0.3, &s);
        assert!((m.x[0] - 2.0).abs() < 0.05, "{m:?}");
    }

    #[test]
    fn multistart_is_deterministic() {
        let f = |x: &[f64]| (x[0].sin() + x[1].cos()).powi(2) + 0.01 * (x[0] * x[0] + x[1] * x[1]);
        let init = |rng: &mut ChaCha8Rng| (0..2).map(|_| StandardNormal.sample(rng)).collect::<Vec<f64>>();
        let s = OptimizerSettings { restarts: 8, ..Default::default() };
        assert_eq!(multistart_minimize(&f, &init, 0.3, &s), multistart_minimize(&f, &init, 0.3, &s));
    }

    #[test]
    fn settings_validation() {
        assert!(OptimizerSettings::default().validate().is_ok());
        assert!(OptimizerSettings { restarts: 0, ..Default::default() }.validate().is_err());
        assert!(OptimizerSettings { tolerance: 0.0, ..Default::default() }.validate().is_err());
    }
}
