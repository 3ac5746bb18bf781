//! Seeded random states, unitaries and channels for fuzzing.
//!
//! Pure states are normalized complex Gaussian vectors, i.e. the first column
//! of a Haar unitary obtained from the QR factorization of a Ginibre matrix.
//! Mixed states of rank `r` are `U diag(w) U†` with `U` Haar and `w` drawn
//! from the flat Dirichlet distribution on `r` components.

use nalgebra::{DVector, Matrix3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::channels::{GeneralChannel, UnitalQubitChannel};
use crate::error::{Error, Result};
use crate::matrix::{cr, ComplexMatrix};
use crate::state::DensityMatrix;

/// Recorded in reports next to the seed.
pub const STATE_ENSEMBLE: &str =
    "pure: Haar (normalized complex Gaussian); mixed: U diag(Dirichlet(1..1)) U^dagger, U Haar";

/// Per-trial RNG: one ChaCha stream per trial index so results do not
/// depend on evaluation order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { cr(1.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| gaussian_complex(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v.unscale(n);
        }
    }
}

pub fn random_pure_state_with(dim: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    DensityMatrix::from_pure(&random_unit_vector(dim, rng))
}

pub fn random_density_matrix_with(dim: usize, rank: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidParameter(format!("rank {rank} outside 1..={dim}")));
    }
    let u = haar_unitary(dim, rng);
    let mut weights: Vec<f64> = (0..rank).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (k, w) in weights.iter().enumerate() {
        let col = u.column(k);
        m += (col * col.adjoint()).scale(*w);
    }
    DensityMatrix::new(crate::matrix::symmetrize(&m))
}

pub fn random_pure_state(dim: usize, seed: u64) -> Result<DensityMatrix> {
    random_pure_state_with(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_density_matrix(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_matrix_with(dim, rank, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Positive semidefinite `G G†` with a Ginibre `G`, normalized to unit trace.
pub fn random_psd(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let m = &g * g.adjoint();
    let t = m.trace().re;
    crate::matrix::symmetrize(&m.unscale(t))
}

/// Channel with `n_kraus` Kraus operators read off a Haar-random isometry
/// `C^in → C^out ⊗ C^n_kraus`.
pub fn random_channel(in_dim: usize, out_dim: usize, n_kraus: usize, rng: &mut impl Rng) -> Result<GeneralChannel> {
    if in_dim == 0 || out_dim == 0 || n_kraus == 0 || in_dim > out_dim * n_kraus {
        return Err(Error::InvalidParameter(format!(
            "no isometry from dimension {in_dim} into {out_dim} x {n_kraus}"
        )));
    }
    let u = haar_unitary(out_dim * n_kraus, rng);
    let kraus = (0..n_kraus)
        .map(|k| u.view((k * out_dim, 0), (out_dim, in_dim)).into_owned())
        .collect();
    GeneralChannel::new(kraus)
}

/// Unital qubit channel `R1 diag(λ) R2` with `λ` uniform in the tetrahedron
/// and Haar-induced rotations.
pub fn random_unital_channel(rng: &mut impl Rng) -> Result<UnitalQubitChannel> {
    let l = random_tetrahedron_point(rng);
    UnitalQubitChannel::new(random_rotation(rng) * Matrix3::from_diagonal(&nalgebra::Vector3::from(l)) * random_rotation(rng))
}

/// Rotation of the Bloch ball induced by a Haar-random qubit unitary.
pub fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    crate::rotation::rotation_from_unitary(&haar_unitary(2, rng))
}

/// Uniform point in the tetrahedron of admissible diagonal unital maps.
pub fn random_tetrahedron_point(rng: &mut impl Rng) -> [f64; 3] {
    const CORNERS: [[f64; 3]; 4] = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, -1.0]];
    let w: Vec<f64> = (0..4).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    let mut out = [0.0; 3];
    for (wk, corner) in w.iter().zip(CORNERS.iter()) {
        for i in 0..3 {
            out[i] += wk / total * corner[i];
        }
    }
    out
}
