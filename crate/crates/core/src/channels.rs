//! Channel representations: Kraus lists for arbitrary channels and real 3×3
//! Bloch-vector matrices for unital qubit channels.

use nalgebra::{DVector, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, cr, max_abs_diff, pauli, ComplexMatrix};
use crate::rotation::rotation_from_unitary;
use crate::state::{self, DensityMatrix};

/// Completeness tolerance for `Σ K†K = I`.
pub const TOL_KRAUS: f64 = 1e-10;
/// Slack allowed in the tetrahedron half-space tests.
pub const TOL_CP: f64 = 1e-10;
/// Choi eigenvalues below this are dropped when extracting Kraus operators.
pub const CHOI_CUTOFF: f64 = 1e-12;

/// A linear map on density matrices.
pub trait Channel {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;

    /// Action on an arbitrary `in_dim × in_dim` matrix (no validation).
    fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix;

    /// `(I_k ⊗ self)` acting on a `k·in_dim` square matrix, the channel
    /// acting on the second tensor factor.
    fn apply_extended(&self, m: &ComplexMatrix, k: usize) -> ComplexMatrix;

    /// Output for the pure input `ψψ†`.
    fn apply_pure(&self, psi: &DVector<Complex64>) -> ComplexMatrix {
        self.apply_matrix(&(psi * psi.adjoint()))
    }

    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.in_dim() {
            return Err(Error::DimensionMismatch(format!(
                "channel input dimension {} but state dimension {}",
                self.in_dim(),
                rho.dim()
            )));
        }
        DensityMatrix::new(matrix::symmetrize(&self.apply_matrix(rho.matrix())))
    }
}

/// `(I ⊗ ch)(ρ)` for a state on `C^K ⊗ C^{in_dim}`.
pub fn apply_half_noisy(ch: &impl Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let n = ch.in_dim();
    if rho.dim() % n != 0 {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} is not a multiple of {n}",
            rho.dim()
        )));
    }
    let k = rho.dim() / n;
    DensityMatrix::new(matrix::symmetrize(&ch.apply_extended(rho.matrix(), k)))
}

/// An arbitrary channel in Kraus form `ρ ↦ Σ K_i ρ K_i†`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "KrausData", into = "KrausData")]
pub struct GeneralChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausData {
    pub in_dim: usize,
    pub out_dim: usize,
    #[serde(with = "crate::serde_util::matrix_list")]
    pub kraus: Vec<ComplexMatrix>,
}

impl TryFrom<KrausData> for GeneralChannel {
    type Error = Error;
    fn try_from(d: KrausData) -> Result<Self> {
        let ch = GeneralChannel::new(d.kraus)?;
        if ch.in_dim != d.in_dim || ch.out_dim != d.out_dim {
            return Err(Error::DimensionMismatch("declared dimensions disagree with Kraus shapes".into()));
        }
        Ok(ch)
    }
}

impl From<GeneralChannel> for KrausData {
    fn from(ch: GeneralChannel) -> Self {
        KrausData { in_dim: ch.in_dim, out_dim: ch.out_dim, kraus: ch.kraus }
    }
}

impl GeneralChannel {
    /// Validates shapes and trace preservation.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus list".into()))?;
        let (out_dim, in_dim) = first.shape();
        if kraus.iter().any(|k| k.shape() != (out_dim, in_dim)) {
            return Err(Error::DimensionMismatch("Kraus operators of different shapes".into()));
        }
        let ch = Self { in_dim, out_dim, kraus };
        let deviation = ch.completeness_deviation();
        if deviation > TOL_KRAUS {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self { in_dim: dim, out_dim: dim, kraus: vec![matrix::identity(dim)] }
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Max entry of `|Σ K†K − I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        max_abs_diff(&sum, &matrix::identity(self.in_dim))
    }

    /// `J = Σ_ab E_ab ⊗ Φ(E_ab)` (input factor first).
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let (n, m) = (self.in_dim, self.out_dim);
        let mut j = ComplexMatrix::zeros(n * m, n * m);
        for k in &self.kraus {
            // v = Σ_a |a⟩ ⊗ K|a⟩
            let v = nalgebra::DVector::from_fn(n * m, |idx, _| k[(idx % m, idx / m)]);
            j += &v * v.adjoint();
        }
        j
    }

    /// Kraus set of `a ⊗ b`: all pairwise Kronecker products.
    pub fn tensor(&self, other: &GeneralChannel) -> GeneralChannel {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| a.kronecker(b)))
            .collect();
        GeneralChannel {
            in_dim: self.in_dim * other.in_dim,
            out_dim: self.out_dim * other.out_dim,
            kraus,
        }
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &GeneralChannel, inner: &GeneralChannel) -> Result<GeneralChannel> {
        if inner.out_dim != outer.in_dim {
            return Err(Error::DimensionMismatch("composition of incompatible channels".into()));
        }
        let kraus = outer
            .kraus
            .iter()
            .flat_map(|a| inner.kraus.iter().map(move |b| a * b))
            .collect();
        Ok(GeneralChannel { in_dim: inner.in_dim, out_dim: outer.out_dim, kraus })
    }

}

impl Channel for GeneralChannel {
    fn in_dim(&self) -> usize {
        self.in_dim
    }

    fn out_dim(&self) -> usize {
        self.out_dim
    }

    fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }

    fn apply_pure(&self, psi: &DVector<Complex64>) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            let v = k * psi;
            out += &v * v.adjoint();
        }
        out
    }

    fn apply_extended(&self, m: &ComplexMatrix, k: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(k * self.out_dim, k * self.out_dim);
        let id = matrix::identity(k);
        for kr in &self.kraus {
            let big = id.kronecker(kr);
            out += &big * m * big.adjoint();
        }
        out
    }
}

/// Which of the tetrahedron's face inequalities a diagonal triple violates.
pub fn tetrahedron_violation(l: [f64; 3]) -> Option<String> {
    let [l1, l2, l3] = l;
    if 1.0 + l3 < (l1 + l2).abs() - TOL_CP {
        return Some(format!(
            "1 + λ3 >= |λ1 + λ2| fails for (λ1, λ2, λ3) = ({l1}, {l2}, {l3}): {} < {}",
            1.0 + l3,
            (l1 + l2).abs()
        ));
    }
    if 1.0 - l3 < (l1 - l2).abs() - TOL_CP {
        return Some(format!(
            "1 - λ3 >= |λ1 - λ2| fails for (λ1, λ2, λ3) = ({l1}, {l2}, {l3}): {} < {}",
            1.0 - l3,
            (l1 - l2).abs()
        ));
    }
    None
}

/// Membership of a diagonal triple in the tetrahedron with corners
/// (1,1,1), (1,−1,−1), (−1,−1,1), (−1,1,−1), via its four face half-spaces.
pub fn is_completely_positive(l: [f64; 3]) -> bool {
    tetrahedron_violation(l).is_none()
}

/// `T = R_post · diag(d) · R_pre` with both rotations proper. Diagonal input
/// is returned as-is with identity rotations.
pub(crate) fn signed_svd(t: &Matrix3<f64>) -> (Matrix3<f64>, Vector3<f64>, Matrix3<f64>) {
    let off = (0..3)
        .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| t[(i, j)].abs())
        .fold(0.0, f64::max);
    if off == 0.0 {
        return (Matrix3::identity(), t.diagonal(), Matrix3::identity());
    }
    let svd = t.svd(true, true);
    let mut u = svd.u.expect("requested U");
    let mut v_t = svd.v_t.expect("requested V^T");
    let mut d = svd.singular_values;
    if u.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
        d[2] = -d[2];
    }
    if v_t.determinant() < 0.0 {
        v_t.row_mut(2).neg_mut();
        d[2] = -d[2];
    }
    (u, d, v_t)
}

/// A unital qubit channel stored as its action on Bloch vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct UnitalQubitChannel {
    t: Matrix3<f64>,
}

impl TryFrom<[[f64; 3]; 3]> for UnitalQubitChannel {
    type Error = Error;
    fn try_from(rows: [[f64; 3]; 3]) -> Result<Self> {
        UnitalQubitChannel::new(Matrix3::from_fn(|i, j| rows[i][j]))
    }
}

impl From<UnitalQubitChannel> for [[f64; 3]; 3] {
    fn from(ch: UnitalQubitChannel) -> Self {
        let t = ch.t;
        [0, 1, 2].map(|i| [t[(i, 0)], t[(i, 1)], t[(i, 2)]])
    }
}

impl UnitalQubitChannel {
    /// Validates complete positivity of the Bloch matrix.
    pub fn new(t: Matrix3<f64>) -> Result<Self> {
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite transfer matrix".into()));
        }
        let (_, d, _) = signed_svd(&t);
        if let Some(msg) = tetrahedron_violation([d[0], d[1], d[2]]) {
            return Err(Error::NotCompletelyPositive(msg));
        }
        Ok(Self { t })
    }

    pub fn diagonal(l1: f64, l2: f64, l3: f64) -> Result<Self> {
        Self::new(Matrix3::from_diagonal(&Vector3::new(l1, l2, l3)))
    }

    pub fn identity() -> Self {
        Self { t: Matrix3::identity() }
    }

    /// `Δ_λ`: contracts Bloch vectors by `λ`; admissible for `−1/3 ≤ λ ≤ 1`.
    pub fn depolarizing(lambda: f64) -> Result<Self> {
        Self::diagonal(lambda, lambda, lambda)
    }

    /// `Ψ_λ`: scales off-diagonal entries by `λ`, keeps the diagonal.
    pub fn phase_damping(lambda: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&lambda) {
            return Err(Error::NotCompletelyPositive(format!("phase damping needs |λ| <= 1, got {lambda}")));
        }
        Self::diagonal(lambda, lambda, 1.0)
    }

    /// Two-Pauli channel with diagonal `(2λ−1, λ, λ)`, defined for `1/3 ≤ λ ≤ 1`.
    pub fn two_pauli(lambda: f64) -> Result<Self> {
        if !(1.0 / 3.0 - 1e-15..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "two-Pauli channel needs 1/3 <= λ <= 1, got {lambda}"
            )));
        }
        Self::diagonal(2.0 * lambda - 1.0, lambda, lambda)
    }

    /// Corners of the cross-section at height `λ`, numbered 1 to 4:
    /// (1,λ,λ), (λ,1,λ), (−1,−λ,λ), (−λ,−1,λ).
    pub fn corner_map(index: usize, lambda: f64) -> Result<Self> {
        let d = corner_triple(index, lambda)?;
        Self::diagonal(d[0], d[1], d[2])
    }

    pub fn transfer(&self) -> &Matrix3<f64> {
        &self.t
    }

    pub fn is_diagonal(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| i == j || self.t[(i, j)] == 0.0))
    }

    /// `Γ_u`: conjugation by a qubit unitary.
    pub fn conjugation(u: &ComplexMatrix) -> Result<Self> {
        if u.shape() != (2, 2) {
            return Err(Error::DimensionMismatch("conjugation needs a 2x2 unitary".into()));
        }
        matrix::check_unitary(u, 1e-12)?;
        Ok(Self { t: rotation_from_unitary(u) })
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &Self, inner: &Self) -> Self {
        Self { t: outer.t * inner.t }
    }

    pub(crate) fn from_transfer_unchecked(t: Matrix3<f64>) -> Self {
        Self { t }
    }

    pub fn apply_bloch(&self, b: [f64; 3]) -> [f64; 3] {
        let v = self.t * Vector3::from(b);
        [v[0], v[1], v[2]]
    }

    /// Choi matrix, with the same convention as [`GeneralChannel::choi_matrix`].
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let mut j = ComplexMatrix::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                let mut e = ComplexMatrix::zeros(2, 2);
                e[(a, b)] = cr(1.0);
                let out = self.apply_matrix(&e);
                for s in 0..2 {
                    for t in 0..2 {
                        j[(a * 2 + s, b * 2 + t)] = out[(s, t)];
                    }
                }
            }
        }
        j
    }

    /// Kraus operators from the Choi eigendecomposition (at most four).
    pub fn kraus_from_transfer(&self) -> Result<GeneralChannel> {
        let eig = matrix::hermitian_eigensystem(&matrix::symmetrize(&self.choi_matrix()))?;
        let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -matrix::PSD_TOL {
            return Err(Error::NotCompletelyPositive(format!("Choi matrix eigenvalue {min:e}")));
        }
        let mut kraus = Vec::new();
        for (k, &mu) in eig.values.iter().enumerate() {
            if mu < CHOI_CUTOFF {
                continue;
            }
            let v = eig.vectors.column(k);
            let scale = mu.sqrt();
            kraus.push(ComplexMatrix::from_fn(2, 2, |i, a| v[a * 2 + i] * scale));
        }
        GeneralChannel::new(kraus)
    }
}

pub(crate) fn corner_triple(index: usize, lambda: f64) -> Result<[f64; 3]> {
    let l = lambda;
    match index {
        1 => Ok([1.0, l, l]),
        2 => Ok([l, 1.0, l]),
        3 => Ok([-1.0, -l, l]),
        4 => Ok([-l, -1.0, l]),
        _ => Err(Error::InvalidParameter(format!("corner index must be 1..=4, got {index}"))),
    }
}

impl Channel for UnitalQubitChannel {
    fn in_dim(&self) -> usize {
        2
    }

    fn out_dim(&self) -> usize {
        2
    }

    fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        // m = (m0 I + Σ m_j σ_j)/2 with complex coefficients.
        let m0 = m.trace();
        let mj = [1, 2, 3].map(|j| (pauli(j) * m).trace());
        let mut out = matrix::identity(2).map(|z| z * m0);
        for i in 0..3 {
            let coeff: Complex64 = (0..3).map(|j| mj[j] * self.t[(i, j)]).sum();
            out += pauli(i + 1).map(|z| z * coeff);
        }
        out.unscale(2.0)
    }

    fn apply_extended(&self, m: &ComplexMatrix, k: usize) -> ComplexMatrix {
        let blocks = state::PauliBlockState::decompose_matrix(m).expect("even dimension");
        debug_assert_eq!(blocks.k, k);
        let ys = [&blocks.y1, &blocks.y2, &blocks.y3];
        let mut new_y: Vec<ComplexMatrix> = Vec::with_capacity(3);
        for i in 0..3 {
            let mut acc = ComplexMatrix::zeros(k, k);
            for j in 0..3 {
                acc += ys[j].scale(self.t[(i, j)]);
            }
            new_y.push(acc);
        }
        let out = state::PauliBlockState {
            k,
            x: blocks.x,
            y1: new_y[0].clone(),
            y2: new_y[1].clone(),
            y3: new_y[2].clone(),
        };
        out.reassemble()
    }
}

/// JSON channel description: `{"kind": "kraus" | "unital_qubit", "data": ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum ChannelSpec {
    Kraus(GeneralChannel),
    UnitalQubit(UnitalQubitChannel),
}

impl ChannelSpec {
    pub fn to_general(&self) -> Result<GeneralChannel> {
        match self {
            ChannelSpec::Kraus(g) => Ok(g.clone()),
            ChannelSpec::UnitalQubit(u) => u.kraus_from_transfer(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("channel serializes")
    }
}

impl Channel for ChannelSpec {
    fn in_dim(&self) -> usize {
        match self {
            ChannelSpec::Kraus(g) => g.in_dim(),
            ChannelSpec::UnitalQubit(_) => 2,
        }
    }

    fn out_dim(&self) -> usize {
        match self {
            ChannelSpec::Kraus(g) => g.out_dim(),
            ChannelSpec::UnitalQubit(_) => 2,
        }
    }

    fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        match self {
            ChannelSpec::Kraus(g) => g.apply_matrix(m),
            ChannelSpec::UnitalQubit(u) => u.apply_matrix(m),
        }
    }

    fn apply_extended(&self, m: &ComplexMatrix, k: usize) -> ComplexMatrix {
        match self {
            ChannelSpec::Kraus(g) => g.apply_extended(m, k),
            ChannelSpec::UnitalQubit(u) => u.apply_extended(m, k),
        }
    }

    fn apply_pure(&self, psi: &DVector<Complex64>) -> ComplexMatrix {
        match self {
            ChannelSpec::Kraus(g) => g.apply_pure(psi),
            ChannelSpec::UnitalQubit(u) => u.apply_pure(psi),
        }
    }
}

/// The phase-damping action written out entrywise: diagonal kept,
/// off-diagonal scaled by `λ`.
pub fn phase_damp_entries(r: &ComplexMatrix, lambda: f64) -> ComplexMatrix {
    let mut out = r.clone();
    out[(0, 1)] *= lambda;
    out[(1, 0)] *= lambda;
    out
}
