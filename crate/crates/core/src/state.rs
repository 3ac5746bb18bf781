//! Density matrices and the spectral functionals evaluated on them.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{
    self, check_psd_spectrum, cr, hermitian_deviation, hermitian_eigenvalues, ComplexMatrix, I,
    TOL_HERM,
};

/// Allowed deviation of the trace from one.
pub const TOL_TRACE: f64 = 1e-12;

/// A positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let deviation = hermitian_deviation(&matrix);
        if deviation > TOL_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TOL_TRACE || trace.im.abs() > TOL_TRACE {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        check_psd_spectrum(hermitian_eigenvalues(&matrix).as_slice())?;
        Ok(Self { matrix })
    }

    /// Wraps a matrix the caller has constructed as a state. Debug builds
    /// still validate.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(Self::new(matrix.clone()).is_ok(), "invalid state: {matrix}");
        Self { matrix }
    }

    /// Normalizes and projects onto `v`.
    pub fn from_pure(v: &DVector<Complex64>) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let u = v.unscale(norm);
        Ok(Self::new_unchecked(matrix::symmetrize(&(&u * u.adjoint()))))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: matrix::identity(dim).unscale(dim as f64) }
    }

    /// Qubit state `(I + b·σ)/2`; requires `|b| ≤ 1`.
    pub fn from_bloch(b: [f64; 3]) -> Result<Self> {
        let m = bloch_matrix(b);
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Eigenvalues, descending, with the small negative band clamped to zero.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut v: Vec<f64> = hermitian_eigenvalues(&self.matrix).iter().map(|&x| x.max(0.0)).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn purity(&self) -> f64 {
        matrix::trace_product_re(&self.matrix, &self.matrix)
    }

    /// Bloch vector `(Tr σ1ρ, Tr σ2ρ, Tr σ3ρ)` of a qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch(format!("Bloch vector of a {}-dim state", self.dim())));
        }
        Ok(bloch_of(&self.matrix))
    }

    /// Conjugation `u ρ u†`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("unitary does not match state".into()));
        }
        Self::new(matrix::symmetrize(&(u * &self.matrix * u.adjoint())))
    }

    /// Convex mixture `(1-t) self + t other`.
    pub fn mix(&self, other: &DensityMatrix, t: f64) -> Result<Self> {
        if self.dim() != other.dim() || !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter("mixture of incompatible states".into()));
        }
        Ok(Self::new_unchecked(self.matrix.scale(1.0 - t) + other.matrix.scale(t)))
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::serde_util::matrix::serialize(&self.matrix, s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = crate::serde_util::matrix::deserialize(d)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn bloch_matrix(b: [f64; 3]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            cr((1.0 + b[2]) / 2.0),
            Complex64::new(b[0], -b[1]) / 2.0,
            Complex64::new(b[0], b[1]) / 2.0,
            cr((1.0 - b[2]) / 2.0),
        ],
    )
}

pub(crate) fn bloch_of(m: &ComplexMatrix) -> [f64; 3] {
    [
        2.0 * m[(1, 0)].re,
        2.0 * m[(1, 0)].im,
        (m[(0, 0)] - m[(1, 1)]).re,
    ]
}

/// Which tensor factor of `C^{d1} ⊗ C^{d2}` a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

/// Traces out `traced` and returns the state on the remaining factor.
pub fn partial_trace(rho: &DensityMatrix, dims: (usize, usize), traced: Subsystem) -> Result<DensityMatrix> {
    let (d1, d2) = dims;
    if d1 == 0 || d2 == 0 || d1 * d2 != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "partial trace over {d1}x{d2} of a {}-dim state",
            rho.dim()
        )));
    }
    Ok(DensityMatrix::new_unchecked(partial_trace_matrix(rho.matrix(), dims, traced)))
}

pub(crate) fn partial_trace_matrix(m: &ComplexMatrix, (d1, d2): (usize, usize), traced: Subsystem) -> ComplexMatrix {
    match traced {
        Subsystem::Second => ComplexMatrix::from_fn(d1, d1, |a, b| {
            (0..d2).map(|s| m[(a * d2 + s, b * d2 + s)]).sum()
        }),
        Subsystem::First => ComplexMatrix::from_fn(d2, d2, |s, t| {
            (0..d1).map(|a| m[(a * d2 + s, a * d2 + t)]).sum()
        }),
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// `‖ρ‖_p = (Σ λ_i^p)^{1/p}` over the (clamped) spectrum.
pub fn schatten_p_norm(rho: &DensityMatrix, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(p_norm_of_spectrum(&rho.spectrum(), p))
}

pub(crate) fn p_norm_of_spectrum(values: &[f64], p: f64) -> f64 {
    let s: f64 = values.iter().map(|&x| x.max(0.0).powf(p)).sum();
    s.powf(1.0 / p)
}

/// Von Neumann entropy in nats, with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.spectrum())
}

pub(crate) fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Eigenvalues of `ω` below this are treated as outside its support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// `S(ρ|ω) = Tr ρ(log ρ − log ω)` in nats. Returns `f64::INFINITY` when
/// `ρ` has weight outside the support of `ω`.
pub fn relative_entropy(rho: &DensityMatrix, omega: &DensityMatrix) -> Result<f64> {
    if rho.dim() != omega.dim() {
        return Err(Error::DimensionMismatch("relative entropy of states of different dimension".into()));
    }
    Ok(relative_entropy_matrices(rho.matrix(), omega.matrix()))
}

pub(crate) fn relative_entropy_matrices(rho: &ComplexMatrix, omega: &ComplexMatrix) -> f64 {
    let rho_values = hermitian_eigenvalues(rho);
    let neg_entropy: f64 = rho_values.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum();
    let eig = matrix::eigensystem_unchecked(omega);
    let mut cross = 0.0;
    for k in 0..eig.values.len() {
        let v = eig.vectors.column(k);
        let weight = (v.adjoint() * rho * v)[(0, 0)].re;
        let mu = eig.values[k];
        if mu < SUPPORT_TOL {
            if weight > SUPPORT_TOL {
                return f64::INFINITY;
            }
            continue;
        }
        cross += weight * mu.ln();
    }
    (neg_entropy - cross).max(0.0)
}

/// The decomposition `ρ = X⊗I + Σ Y_k⊗σ_k` of a state on `C^K ⊗ C^2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PauliBlockState {
    pub k: usize,
    #[serde(with = "crate::serde_util::matrix")]
    pub x: ComplexMatrix,
    #[serde(with = "crate::serde_util::matrix")]
    pub y1: ComplexMatrix,
    #[serde(with = "crate::serde_util::matrix")]
    pub y2: ComplexMatrix,
    #[serde(with = "crate::serde_util::matrix")]
    pub y3: ComplexMatrix,
}

/// The four `K×K` blocks `B_st[a,b] = ρ[(a,s),(b,t)]` indexed by the qubit.
pub(crate) fn qubit_blocks(m: &ComplexMatrix, k: usize) -> [[ComplexMatrix; 2]; 2] {
    let block = |s: usize, t: usize| ComplexMatrix::from_fn(k, k, |a, b| m[(a * 2 + s, b * 2 + t)]);
    [[block(0, 0), block(0, 1)], [block(1, 0), block(1, 1)]]
}

/// Inverse of [`qubit_blocks`].
pub(crate) fn from_qubit_blocks(blocks: &[[ComplexMatrix; 2]; 2]) -> ComplexMatrix {
    let k = blocks[0][0].nrows();
    ComplexMatrix::from_fn(2 * k, 2 * k, |i, j| blocks[i % 2][j % 2][(i / 2, j / 2)])
}

impl PauliBlockState {
    pub fn decompose(rho: &DensityMatrix) -> Result<Self> {
        Self::decompose_matrix(rho.matrix())
    }

    pub(crate) fn decompose_matrix(m: &ComplexMatrix) -> Result<Self> {
        let n = m.nrows();
        if n % 2 != 0 || n == 0 {
            return Err(Error::DimensionMismatch(format!("Pauli block form needs even dimension, got {n}")));
        }
        let k = n / 2;
        let [[b00, b01], [b10, b11]] = qubit_blocks(m, k);
        Ok(Self {
            k,
            x: (&b00 + &b11).scale(0.5),
            y3: (&b00 - &b11).scale(0.5),
            y1: (&b01 + &b10).scale(0.5),
            y2: (&b01 - &b10).map(|z| z * I * 0.5),
        })
    }

    /// `X⊗I + Σ Y_k⊗σ_k`.
    pub fn reassemble(&self) -> ComplexMatrix {
        let mut out = self.x.kronecker(&matrix::identity(2));
        out += self.y1.kronecker(&matrix::pauli(1));
        out += self.y2.kronecker(&matrix::pauli(2));
        out += self.y3.kronecker(&matrix::pauli(3));
        out
    }

    /// `X + Y3`, the upper diagonal block.
    pub fn upper(&self) -> ComplexMatrix {
        &self.x + &self.y3
    }

    /// `X − Y3`, the lower diagonal block.
    pub fn lower(&self) -> ComplexMatrix {
        &self.x - &self.y3
    }

    /// `Y1 − iY2`, the upper off-diagonal block.
    pub fn coupling(&self) -> ComplexMatrix {
        &self.y1 - self.y2.map(|z| z * I)
    }
}

/// `r = Tr_1 ρ` for a state on `C^K ⊗ C^2`.
pub fn reduced_qubit(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let n = rho.dim();
    if n % 2 != 0 {
        return Err(Error::DimensionMismatch(format!("odd dimension {n}")));
    }
    partial_trace(rho, (n / 2, 2), Subsystem::First)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{max_abs_diff, pauli, tensor_product};
    use crate::random::{random_density_matrix, random_pure_state};

    #[test]
    fn schatten_norm_examples() {
        let rho = random_density_matrix(3, 3, 1).unwrap();
        assert!((schatten_p_norm(&rho, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let pure = random_pure_state(4, 2).unwrap();
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert!((schatten_p_norm(&pure, p).unwrap() - 1.0).abs() < 1e-12);
        }
        let half = DensityMatrix::maximally_mixed(2);
        let expected = (2.0 * 0.25f64).sqrt();
        assert!((schatten_p_norm(&half, 2.0).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.70710678).abs() < 1e-8);
        assert_eq!(schatten_p_norm(&half, 0.5), Err(Error::InvalidExponent(0.5)));
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&random_pure_state(3, 9).unwrap()) < 1e-12);
        let half = DensityMatrix::maximally_mixed(2);
        assert!((von_neumann_entropy(&half) - 2f64.ln()).abs() < 1e-15);
        let d = DensityMatrix::from_bloch([0.0, 0.0, 0.5]).unwrap();
        let oracle = -0.75 * 0.75f64.ln() - 0.25 * 0.25f64.ln();
        assert!((von_neumann_entropy(&d) - oracle).abs() < 1e-15);
        assert!((oracle - 0.56233514).abs() < 1e-8);
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = random_density_matrix(3, 3, 5).unwrap();
        assert!(relative_entropy(&rho, &rho).unwrap() < 1e-12);

        let zero = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        let half = DensityMatrix::maximally_mixed(2);
        assert!((relative_entropy(&zero, &half).unwrap() - 2f64.ln()).abs() < 1e-12);

        let a = DensityMatrix::from_bloch([0.0, 0.0, 0.8]).unwrap();
        let oracle = 0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln();
        assert!((relative_entropy(&a, &half).unwrap() - oracle).abs() < 1e-12);

        // Support violation.
        let one = DensityMatrix::from_bloch([0.0, 0.0, -1.0]).unwrap();
        assert_eq!(relative_entropy(&half, &one).unwrap(), f64::INFINITY);
        assert!(relative_entropy(&one, &one).unwrap() < 1e-12);
    }

    #[test]
    fn partial_trace_examples() {
        let s = random_density_matrix(2, 2, 1).unwrap();
        let t = random_density_matrix(3, 2, 2).unwrap();
        let st = DensityMatrix::new(tensor_product(s.matrix(), t.matrix())).unwrap();
        let back = partial_trace(&st, (2, 3), Subsystem::Second).unwrap();
        assert!(max_abs_diff(back.matrix(), s.matrix()) < 1e-14);
        let back = partial_trace(&st, (2, 3), Subsystem::First).unwrap();
        assert!(max_abs_diff(back.matrix(), t.matrix()) < 1e-14);

        let bell = DVector::from_vec(vec![cr(1.0), cr(0.0), cr(0.0), cr(1.0)]);
        let bell = DensityMatrix::from_pure(&bell).unwrap();
        let r = partial_trace(&bell, (2, 2), Subsystem::First).unwrap();
        assert!(max_abs_diff(r.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);

        assert!(partial_trace(&bell, (3, 2), Subsystem::First).is_err());
    }

    #[test]
    fn pauli_blocks_of_product_states() {
        let sigma = random_density_matrix(3, 3, 4).unwrap();
        let rho = DensityMatrix::new(tensor_product(sigma.matrix(), DensityMatrix::maximally_mixed(2).matrix())).unwrap();
        let blocks = PauliBlockState::decompose(&rho).unwrap();
        assert!(max_abs_diff(&blocks.x, &sigma.matrix().scale(0.5)) < 1e-15);
        for y in [&blocks.y1, &blocks.y2, &blocks.y3] {
            assert!(y.norm() < 1e-15);
        }

        let zero = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        let rho = DensityMatrix::new(tensor_product(sigma.matrix(), zero.matrix())).unwrap();
        let blocks = PauliBlockState::decompose(&rho).unwrap();
        assert!(max_abs_diff(&blocks.x, &sigma.matrix().scale(0.5)) < 1e-15);
        assert!(max_abs_diff(&blocks.y3, &sigma.matrix().scale(0.5)) < 1e-15);
        assert!(blocks.y1.norm() < 1e-15 && blocks.y2.norm() < 1e-15);
    }

    #[test]
    fn pauli_blocks_reject_odd_dimension() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(PauliBlockState::decompose(&rho).is_err());
    }

    #[test]
    fn pauli_blocks_trace_and_positivity() {
        let rho = random_density_matrix(6, 4, 8).unwrap();
        let b = PauliBlockState::decompose(&rho).unwrap();
        assert!((b.x.trace().re - 0.5).abs() < 1e-14);
        for m in [b.upper(), b.lower()] {
            let e = matrix::hermitian_eigensystem(&m).unwrap();
            assert!(e.values.iter().all(|&x| x > -1e-10));
        }
        for y in [&b.y1, &b.y2, &b.y3] {
            assert!(hermitian_deviation(y) < 1e-14);
        }
        let _ = pauli(1);
    }

    #[test]
    fn rejects_invalid_states() {
        assert!(matches!(DensityMatrix::new(pauli(3)), Err(Error::TraceNotOne { .. })));
        let m = bloch_matrix([0.0, 0.0, 1.5]);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPositive { .. })));
    }
}
