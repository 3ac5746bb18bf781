//! Dense complex matrices, Pauli constants and Hermitian spectral calculus.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, row/column sizes carried by the value.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Max entry deviation from the conjugate transpose tolerated for Hermitian input.
pub const TOL_HERM: f64 = 1e-12;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// The Pauli basis `σ1, σ2, σ3` together with the 2×2 identity.
#[derive(Debug, Clone)]
pub struct PauliMatrices {
    pub identity: ComplexMatrix,
    pub sigma1: ComplexMatrix,
    pub sigma2: ComplexMatrix,
    pub sigma3: ComplexMatrix,
}

impl PauliMatrices {
    pub fn new() -> Self {
        Self {
            identity: identity(2),
            sigma1: pauli(1),
            sigma2: pauli(2),
            sigma3: pauli(3),
        }
    }

    pub fn sigma(&self, k: usize) -> &ComplexMatrix {
        match k {
            1 => &self.sigma1,
            2 => &self.sigma2,
            3 => &self.sigma3,
            _ => &self.identity,
        }
    }
}

impl Default for PauliMatrices {
    fn default() -> Self {
        Self::new()
    }
}

/// `σ_k` for `k = 1, 2, 3`; `k = 0` gives the identity.
pub fn pauli(k: usize) -> ComplexMatrix {
    let z = cr(0.0);
    let o = cr(1.0);
    match k {
        0 => ComplexMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => ComplexMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => ComplexMatrix::from_row_slice(2, 2, &[z, -I, I, z]),
        3 => ComplexMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("Pauli index must be 0..=3, got {k}"),
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Largest entrywise modulus of `a - b`. Shapes must agree.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn unitary_deviation(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(u * u.adjoint()), &identity(u.nrows()))
}

pub fn check_unitary(u: &ComplexMatrix, tol: f64) -> Result<()> {
    let deviation = unitary_deviation(u);
    if deviation > tol {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

pub(crate) fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Spectral decomposition `m = U diag(values) U†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Sorted in descending order.
    pub values: DVector<f64>,
    /// Unitary; column `k` belongs to `values[k]`.
    pub vectors: ComplexMatrix,
}

impl Eigensystem {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diagonal(&self.values.map(cr));
        &self.vectors * d * self.vectors.adjoint()
    }

    /// Applies `f` to the spectrum: `U f(Λ) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = ComplexMatrix::from_diagonal(&self.values.map(|x| cr(f(x))));
        &self.vectors * d * self.vectors.adjoint()
    }
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Each eigenvector is rephased so that its first entry of
/// non-negligible modulus is real and positive, which makes the result
/// deterministic for degenerate inputs.
pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Eigensystem> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigensystem of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let deviation = hermitian_deviation(m);
    if deviation > TOL_HERM {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(eigensystem_unchecked(m))
}

pub(crate) fn eigensystem_unchecked(m: &ComplexMatrix) -> Eigensystem {
    let n = m.nrows();
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        let norm = v.norm();
        if norm > 0.0 {
            v /= cr(norm);
        }
        if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-8) {
            let phase = pivot.conj() / pivot.norm();
            v *= phase;
        }
        vectors.set_column(col, &v);
    }
    Eigensystem { values, vectors }
}

/// Eigenvalues of a Hermitian matrix (unsorted). No validation; callers in
/// hot loops construct their matrices Hermitian by design.
pub(crate) fn hermitian_eigenvalues(m: &ComplexMatrix) -> DVector<f64> {
    SymmetricEigen::new(symmetrize(m)).eigenvalues
}

/// `f(m)` for Hermitian `m` through its spectral decomposition.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    Ok(hermitian_eigensystem(m)?.map(f))
}

/// Principal square root of a positive semidefinite matrix; eigenvalues
/// within the clamping band below zero are treated as zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigensystem(m)?;
    check_psd_spectrum(eig.values.as_slice())?;
    Ok(eig.map(|x| x.max(0.0).sqrt()))
}

/// Eigenvalues below `-PSD_TOL` reject the input; the rest are clamped at zero.
pub const PSD_TOL: f64 = 1e-10;

pub(crate) fn check_psd_spectrum(values: &[f64]) -> Result<()> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(())
}

/// `Tr A^p` for positive semidefinite `A`.
pub fn trace_power(a: &ComplexMatrix, p: f64) -> Result<f64> {
    let deviation = hermitian_deviation(a);
    if deviation > TOL_HERM {
        return Err(Error::NotHermitian { deviation });
    }
    let values = hermitian_eigenvalues(a);
    check_psd_spectrum(values.as_slice())?;
    Ok(values.iter().map(|&x| x.max(0.0).powf(p)).sum())
}

/// Singular values of an arbitrary complex matrix, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Real part of `Tr(a b)`.
pub fn trace_product_re(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        symmetrize(&g)
    }

    #[test]
    fn pauli_algebra() {
        let p = PauliMatrices::new();
        for k in 1..=3 {
            assert!(max_abs_diff(&(p.sigma(k) * p.sigma(k)), &p.identity) < 1e-15);
        }
        let cyc = [(1, 2, 3), (2, 3, 1), (3, 1, 2)];
        for (a, b, d) in cyc {
            let lhs = p.sigma(a) * p.sigma(b);
            let rhs = p.sigma(d).map(|z| z * I);
            assert!(max_abs_diff(&lhs, &rhs) < 1e-15);
        }
    }

    #[test]
    fn kronecker_of_fixed_constants() {
        assert!(max_abs_diff(&tensor_product(&identity(2), &identity(2)), &identity(4)) < 1e-15);
        let zz = tensor_product(&pauli(3), &pauli(3));
        let expected = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![cr(1.0), cr(-1.0), cr(-1.0), cr(1.0)]));
        assert!(max_abs_diff(&zz, &expected) < 1e-15);
    }

    #[test]
    fn kronecker_mixed_product_and_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(2, &mut rng);
        let cm = random_hermitian(2, &mut rng);
        let d = random_hermitian(2, &mut rng);
        let lhs = tensor_product(&a, &b) * tensor_product(&cm, &d);
        let rhs = tensor_product(&(&a * &cm), &(&b * &d));
        assert!(max_abs_diff(&lhs, &rhs) < 1e-14);

        // Brute force: spectrum of A⊗B is the set of pairwise products.
        let ea = hermitian_eigensystem(&a).unwrap().values;
        let eb = hermitian_eigensystem(&b).unwrap().values;
        let mut products: Vec<f64> = ea.iter().flat_map(|x| eb.iter().map(move |y| x * y)).collect();
        products.sort_by(|x, y| y.total_cmp(x));
        let eab = hermitian_eigensystem(&tensor_product(&a, &b)).unwrap().values;
        for (x, y) in products.iter().zip(eab.iter()) {
            assert!((x - y).abs() < 1e-13, "{x} vs {y}");
        }
    }

    #[test]
    fn eigensystem_of_constants() {
        let e = hermitian_eigensystem(&pauli(3)).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, -1.0]);
        let half = identity(2).map(|z| z * 0.5);
        let e = hermitian_eigensystem(&half).unwrap();
        assert!((e.values[0] - 0.5).abs() < 1e-15 && (e.values[1] - 0.5).abs() < 1e-15);
        assert!(unitary_deviation(&e.vectors) < 1e-14);
    }

    #[test]
    fn eigensystem_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=8 {
            let h = random_hermitian(n, &mut rng);
            let e = hermitian_eigensystem(&h).unwrap();
            assert!(max_abs_diff(&e.reconstruct(), &h) < 1e-10);
            assert!(unitary_deviation(&e.vectors) < 1e-10);
            for w in e.values.as_slice().windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn eigensystem_rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[cr(1.0), cr(1.0), cr(0.0), cr(1.0)]);
        assert!(matches!(hermitian_eigensystem(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn trace_power_rejects_negative_spectrum() {
        assert!(matches!(trace_power(&pauli(3), 2.0), Err(Error::NotPositive { .. })));
        let tiny = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![cr(1.0), cr(-1e-12)]));
        assert!((trace_power(&tiny, 2.0).unwrap() - 1.0).abs() < 1e-15);
    }
}
