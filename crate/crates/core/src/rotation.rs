//! The double cover SU(2) → SO(3): qubit unitaries and the rotations they
//! induce on Bloch vectors.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::matrix::{c, pauli, ComplexMatrix, I};

/// `R_ij = ½ Tr(σ_i u σ_j u†)`, the action of `Γ_u` on Bloch vectors.
pub fn rotation_from_unitary(u: &ComplexMatrix) -> Matrix3<f64> {
    let paulis = [pauli(1), pauli(2), pauli(3)];
    let conj: Vec<ComplexMatrix> = paulis.iter().map(|s| u * s * u.adjoint()).collect();
    Matrix3::from_fn(|i, j| 0.5 * crate::matrix::trace_product_re(&paulis[i], &conj[j]))
}

pub fn rotation_deviation(r: &Matrix3<f64>) -> f64 {
    let orth = (r.transpose() * r - Matrix3::identity()).abs().max();
    orth.max((r.determinant() - 1.0).abs())
}

/// Lifts a rotation to a qubit unitary `u` with `u σ_j u† = Σ_i R_ij σ_i`.
/// The sign of `u` is not determined; the lift returned has `Re tr u ≥ 0`.
pub fn su2_from_so3(r: &Matrix3<f64>) -> Result<ComplexMatrix> {
    let dev = rotation_deviation(r);
    if dev > 1e-10 {
        return Err(Error::NotRotation(format!("deviation {dev:e} from SO(3)")));
    }
    Ok(lift_unchecked(r))
}

pub(crate) fn lift_unchecked(r: &Matrix3<f64>) -> ComplexMatrix {
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r));
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    // exp(-iθ n·σ/2) = w I - i (x σ1 + y σ2 + z σ3)
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[c(w, -z), c(-y, -x), c(y, -x), c(w, z)],
    )
}

/// Rotation by `angle` about coordinate axis `axis` (0 = x, 1 = y, 2 = z).
pub fn axis_rotation(axis: usize, angle: f64) -> Matrix3<f64> {
    let unit = match axis {
        0 => Vector3::x_axis(),
        1 => Vector3::y_axis(),
        _ => Vector3::z_axis(),
    };
    *Rotation3::from_axis_angle(&unit, angle).matrix()
}

/// The qubit unitary `exp(iθσ_k)` for `k = 1, 2, 3`.
pub fn pauli_exponential(k: usize, theta: f64) -> ComplexMatrix {
    let s = pauli(k).map(|z| z * I * theta.sin());
    ComplexMatrix::identity(2, 2).map(|z| z * theta.cos()) + s
}

/// `exp[iπ(σ1+σ2+σ3)/(3√3)]`: conjugation by it sends `σ1 → σ3`, `σ2 → σ1`,
/// `σ3 → σ2`.
pub fn permutation_unitary() -> ComplexMatrix {
    let angle = std::f64::consts::PI / 3.0;
    let n = 1.0 / 3f64.sqrt();
    let sum = (pauli(1) + pauli(2) + pauli(3)).map(|z| z * I * (angle.sin() * n));
    ComplexMatrix::identity(2, 2).map(|z| z * angle.cos()) + sum
}

/// Cyclic coordinate permutation that sends `e_axis` to `e_3` (a proper rotation).
pub(crate) fn cyclic_to_z(axis: usize) -> Matrix3<f64> {
    match axis {
        // e1 -> e3, e2 -> e1, e3 -> e2
        0 => Matrix3::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0),
        // e2 -> e3, e3 -> e1, e1 -> e2
        1 => Matrix3::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0),
        _ => Matrix3::identity(),
    }
}

/// Rotation by π about a coordinate axis: flips the signs of the other two
/// coordinates. Realized by conjugation with `σ_{axis+1}`.
pub(crate) fn pi_flip(axis: usize) -> Matrix3<f64> {
    let mut d = Vector3::from_element(-1.0);
    d[axis] = 1.0;
    Matrix3::from_diagonal(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{max_abs_diff, unitary_deviation};
    use crate::random::{haar_unitary, random_rotation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn conjugation_table_error(u: &ComplexMatrix, r: &Matrix3<f64>) -> f64 {
        let mut err: f64 = 0.0;
        for j in 0..3 {
            let lhs = u * pauli(j + 1) * u.adjoint();
            let mut rhs = ComplexMatrix::zeros(2, 2);
            for i in 0..3 {
                rhs += pauli(i + 1).scale(r[(i, j)]);
            }
            err = err.max(max_abs_diff(&lhs, &rhs));
        }
        err
    }

    #[test]
    fn identity_lifts_to_identity() {
        let u = su2_from_so3(&Matrix3::identity()).unwrap();
        assert!(max_abs_diff(&u, &ComplexMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn permutation_lifts_to_v() {
        // x -> z, y -> x, z -> y
        let r = Matrix3::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0);
        let u = su2_from_so3(&r).unwrap();
        let v = permutation_unitary();
        let same = max_abs_diff(&u, &v).min(max_abs_diff(&u, &v.map(|z| -z)));
        assert!(same < 1e-12, "{u} vs {v}");
        let p = [pauli(1), pauli(2), pauli(3)];
        assert!(max_abs_diff(&(&v * &p[0] * v.adjoint()), &p[2]) < 1e-14);
        assert!(max_abs_diff(&(&v * &p[1] * v.adjoint()), &p[0]) < 1e-14);
        assert!(max_abs_diff(&(&v * &p[2] * v.adjoint()), &p[1]) < 1e-14);
        assert!((rotation_from_unitary(&v) - r).abs().max() < 1e-14);
    }

    #[test]
    fn unscaled_exponent_does_not_permute() {
        // exp[i(σ1+σ2+σ3)/√3] is a rotation by 2 rad, not 2π/3.
        let n = 1.0 / 3f64.sqrt();
        let w = ComplexMatrix::identity(2, 2).map(|z| z * 1f64.cos())
            + (pauli(1) + pauli(2) + pauli(3)).map(|z| z * I * (1f64.sin() * n));
        let image = &w * pauli(1) * w.adjoint();
        assert!(max_abs_diff(&image, &pauli(3)) > 0.05);
    }

    #[test]
    fn sigma1_lifts_rotation_by_pi() {
        let r = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
        assert!((rotation_from_unitary(&pauli(1)) - r).abs().max() < 1e-15);
        let u = su2_from_so3(&r).unwrap();
        let s1 = pauli(1).map(|z| z * I);
        let same = [s1.clone(), s1.map(|z| -z), pauli(1), pauli(1).map(|z| -z)]
            .iter()
            .map(|cand| max_abs_diff(&u, cand))
            .fold(f64::INFINITY, f64::min);
        assert!(same < 1e-14);
    }

    #[test]
    fn lift_reproduces_random_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            let r = random_rotation(&mut rng);
            let u = su2_from_so3(&r).unwrap();
            assert!(unitary_deviation(&u) < 1e-12);
            assert!(conjugation_table_error(&u, &r) < 1e-10);
        }
        for k in 0..3 {
            for angle in [0.0, 0.3, std::f64::consts::PI, 2.5] {
                let r = axis_rotation(k, angle);
                assert!(conjugation_table_error(&su2_from_so3(&r).unwrap(), &r) < 1e-10);
            }
            let f = pi_flip(k);
            assert!(conjugation_table_error(&su2_from_so3(&f).unwrap(), &f) < 1e-10);
            let cz = cyclic_to_z(k);
            assert!(conjugation_table_error(&su2_from_so3(&cz).unwrap(), &cz) < 1e-10);
        }
    }

    #[test]
    fn rotation_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = haar_unitary(2, &mut rng);
        let b = haar_unitary(2, &mut rng);
        let lhs = rotation_from_unitary(&(&a * &b));
        let rhs = rotation_from_unitary(&a) * rotation_from_unitary(&b);
        assert!((lhs - rhs).abs().max() < 1e-14);
    }

    #[test]
    fn pauli_exponential_rotates_about_its_axis() {
        let u = pauli_exponential(1, 0.4);
        let r = rotation_from_unitary(&u);
        assert!((r - axis_rotation(0, -0.8)).abs().max() < 1e-14);
    }

    #[test]
    fn rejects_reflections() {
        let r = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(su2_from_so3(&r).is_err());
    }
}
