//! Standard form of unital qubit channels and their decomposition into
//! unitary conjugates of a single phase-damping channel, with the input
//! unitaries chosen so that each conjugated state has zero `σ3` component.
//!
//! All intermediate work is done with 3×3 rotations acting on Bloch vectors.
//! A term `(c, R_w, R_u)` stands for the channel with transfer matrix
//! `R_w · diag(λ, λ, 1) · R_u`, and its trace condition reads `(R_u b)_3 = 0`.
//! Unitaries are lifted from the accumulated rotations only at the end.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::channels::{is_completely_positive, signed_svd, Channel, UnitalQubitChannel};
use crate::error::{Error, Result};
use crate::matrix::{self, max_abs_diff, pauli, ComplexMatrix};
use crate::rotation::{axis_rotation, cyclic_to_z, lift_unchecked, pi_flip, rotation_from_unitary};
use crate::state::{bloch_matrix, DensityMatrix};

/// Acceptance threshold for the decomposition invariants.
pub const TOL_DECOMPOSITION: f64 = 1e-10;
/// Acceptance threshold for the weight sum.
pub const TOL_WEIGHTS: f64 = 1e-12;
/// Terms with weight at or below this are dropped.
const WEIGHT_FLOOR: f64 = 1e-15;
/// Triangles with smaller area are treated as degenerate.
const AREA_FLOOR: f64 = 1e-13;

/// `T = R_post · diag(λ) · R_pre` with `λ3 ≥ max(|λ1|, |λ2|)`.
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub lambdas: [f64; 3],
    pub r_post: Matrix3<f64>,
    pub r_pre: Matrix3<f64>,
    pub u_post: ComplexMatrix,
    pub u_pre: ComplexMatrix,
}

impl StandardForm {
    pub fn diagonal_channel(&self) -> Result<UnitalQubitChannel> {
        let [a, b, c] = self.lambdas;
        UnitalQubitChannel::diagonal(a, b, c)
    }
}

pub fn standard_form(phi: &UnitalQubitChannel) -> Result<StandardForm> {
    let (u, d, v) = signed_svd(phi.transfer());
    if !is_completely_positive([d[0], d[1], d[2]]) {
        return Err(Error::NotCompletelyPositive(format!("singular values {d:?}")));
    }
    let a = d.map(f64::abs);
    let perm = if a[2] >= a[0].max(a[1]) {
        Matrix3::identity()
    } else if a[0] >= a[1] {
        cyclic_to_z(0)
    } else {
        cyclic_to_z(1)
    };
    let mut lam = perm * d;
    let mut flip = Matrix3::identity();
    if lam[2] < 0.0 {
        flip = pi_flip(1);
        lam[0] = -lam[0];
        lam[2] = -lam[2];
    }
    let r_post = u * perm.transpose();
    let r_pre = flip * perm * v;
    Ok(StandardForm {
        lambdas: [lam[0], lam[1], lam[2]],
        u_post: lift_unchecked(&r_post),
        u_pre: lift_unchecked(&r_pre),
        r_post,
        r_pre,
    })
}

/// Corners of the admissible cross-section at height `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vertex {
    /// `(λ, λ)`
    Depolarizing,
    /// `(λ, 2λ−1)`
    TwoPauliY,
    /// `(1−2λ, −λ)`
    TwoPauliXFlipped,
    /// `(−λ, −λ)`
    DepolarizingFlipped,
    /// `(−λ, 1−2λ)`
    TwoPauliYFlipped,
    /// `(2λ−1, λ)`
    TwoPauliX,
    /// `(λ, −λ)`
    SquareMinusY,
    /// `(−λ, λ)`
    SquareMinusX,
}

impl Vertex {
    pub fn point(self, l: f64) -> [f64; 2] {
        match self {
            Vertex::Depolarizing => [l, l],
            Vertex::TwoPauliY => [l, 2.0 * l - 1.0],
            Vertex::TwoPauliXFlipped => [1.0 - 2.0 * l, -l],
            Vertex::DepolarizingFlipped => [-l, -l],
            Vertex::TwoPauliYFlipped => [-l, 1.0 - 2.0 * l],
            Vertex::TwoPauliX => [2.0 * l - 1.0, l],
            Vertex::SquareMinusY => [l, -l],
            Vertex::SquareMinusX => [-l, l],
        }
    }

    /// Cyclically ordered boundary of the cross-section.
    pub fn polygon(l: f64) -> Vec<Vertex> {
        if l >= 1.0 / 3.0 {
            vec![
                Vertex::Depolarizing,
                Vertex::TwoPauliY,
                Vertex::TwoPauliXFlipped,
                Vertex::DepolarizingFlipped,
                Vertex::TwoPauliYFlipped,
                Vertex::TwoPauliX,
            ]
        } else {
            vec![
                Vertex::Depolarizing,
                Vertex::SquareMinusY,
                Vertex::DepolarizingFlipped,
                Vertex::SquareMinusX,
            ]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedVertex {
    pub weight: f64,
    pub vertex: Vertex,
    pub point: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionDecomposition {
    pub lambda: f64,
    pub vertices: Vec<WeightedVertex>,
}

impl CrossSectionDecomposition {
    /// `Σ w_i v_i`.
    pub fn recompose(&self) -> [f64; 2] {
        self.vertices.iter().fold([0.0, 0.0], |acc, v| {
            [acc[0] + v.weight * v.point[0], acc[1] + v.weight * v.point[1]]
        })
    }
}

/// Writes `(λ1, λ2)` as a convex combination of at most three corners of the
/// cross-section at height `λ3`, using a fan triangulation from `(λ, λ)`.
pub fn cross_section_decompose(lambdas: [f64; 3]) -> Result<CrossSectionDecomposition> {
    let [x, y, l] = lambdas;
    if !is_completely_positive(lambdas) {
        return Err(Error::OutsideHull(format!("{lambdas:?} is not completely positive")));
    }
    if l < x.abs().max(y.abs()) - 1e-12 || l > 1.0 + 1e-12 {
        return Err(Error::OutsideHull(format!("{lambdas:?} is not in standard form")));
    }
    let poly = Vertex::polygon(l);
    let pts: Vec<Vector2<f64>> = poly.iter().map(|v| Vector2::from(v.point(l))).collect();
    let p = Vector2::new(x, y);

    let mut best: Option<(f64, [(usize, f64); 3])> = None;
    for i in 1..poly.len() - 1 {
        let (a, b, c) = (pts[0], pts[i], pts[i + 1]);
        let m = Matrix2::from_columns(&[b - a, c - a]);
        if m.determinant().abs() / 2.0 < AREA_FLOOR {
            continue;
        }
        let Some(st) = m.lu().solve(&(p - a)) else { continue };
        let w = [(0, 1.0 - st[0] - st[1]), (i, st[0]), (i + 1, st[1])];
        let min = w.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|(bm, _)| min > *bm) {
            best = Some((min, w));
        }
    }
    let weights: Vec<(usize, f64)> = match best {
        Some((min, w)) => {
            if min < -1e-9 {
                return Err(Error::OutsideHull(format!("({x}, {y}) lies outside the cross-section at height {l}")));
            }
            w.to_vec()
        }
        None => segment_weights(&pts, &p),
    };
    let total: f64 = weights.iter().map(|e| e.1.max(0.0)).sum();
    let vertices = weights
        .into_iter()
        .filter(|e| e.1 > WEIGHT_FLOOR)
        .map(|(i, w)| WeightedVertex { weight: w / total, vertex: poly[i], point: poly[i].point(l) })
        .collect();
    Ok(CrossSectionDecomposition { lambda: l, vertices })
}

/// Closest point on any vertex-to-vertex segment; used when the polygon has
/// collapsed to a segment or a point.
fn segment_weights(pts: &[Vector2<f64>], p: &Vector2<f64>) -> Vec<(usize, f64)> {
    let mut best = (f64::INFINITY, vec![(0, 1.0)]);
    for i in 0..pts.len() {
        for j in i..pts.len() {
            let d = pts[j] - pts[i];
            let len2 = d.norm_squared();
            let t = if len2 > 0.0 { ((p - pts[i]).dot(&d) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let dist = (pts[i] + d * t - p).norm();
            if dist < best.0 {
                best = (dist, if t == 0.0 { vec![(i, 1.0)] } else { vec![(i, 1.0 - t), (j, t)] });
            }
        }
    }
    best.1
}

/// One summand `c · Γ_W ∘ Ψ_λ ∘ Γ_U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionTerm {
    pub c: f64,
    #[serde(with = "crate::serde_util::matrix")]
    pub w: ComplexMatrix,
    #[serde(with = "crate::serde_util::matrix")]
    pub u: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDampingDecomposition {
    pub lambda: f64,
    pub terms: Vec<DecompositionTerm>,
    pub source_state: DensityMatrix,
}

impl PhaseDampingDecomposition {
    /// `Σ c_i Γ_{W_i} ∘ Ψ_λ ∘ Γ_{U_i}` applied to a 2×2 matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let psi = UnitalQubitChannel::from_transfer_unchecked(Matrix3::from_diagonal(&Vector3::new(
            self.lambda,
            self.lambda,
            1.0,
        )));
        let mut out = ComplexMatrix::zeros(2, 2);
        for t in &self.terms {
            let inner = psi.apply_matrix(&(&t.u * m * t.u.adjoint()));
            out += (&t.w * inner * t.w.adjoint()).scale(t.c);
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    c: f64,
    rw: Matrix3<f64>,
    ru: Matrix3<f64>,
}

impl Term {
    fn then_domain(self, g: &Matrix3<f64>) -> Term {
        Term { ru: self.ru * g, ..self }
    }

    fn scaled(self, s: f64) -> Term {
        Term { c: self.c * s, ..self }
    }
}

/// `diag(e)` with `|e_k| = 1` and `|e_i| = λ` elsewhere, written as one term.
/// Needs `b_k = 0`.
fn corner_term(e: [f64; 3], k: usize, lambda: f64) -> Term {
    let rc = cyclic_to_z(k);
    let mut s = [1.0; 3];
    for i in 0..3 {
        if e[i] < 0.0 {
            s[i] = -1.0;
        }
    }
    if s[0] * s[1] * s[2] < 0.0 {
        // Only reachable with λ = 0, where the sign of a zero entry is free.
        let free = (0..3).find(|&i| i != k && e[i] == 0.0).expect("improper corner with nonzero entries");
        s[free] = -s[free];
    }
    debug_assert!(e.iter().enumerate().all(|(i, &x)| {
        let mag = if i == k { 1.0 } else { lambda };
        (s[i] * mag - x).abs() < 1e-12
    }));
    let sm = Matrix3::from_diagonal(&Vector3::from(s));
    Term { c: 1.0, rw: sm * rc.transpose(), ru: rc }
}

/// `diag(x, y, μ)` as a combination of the four rectangle corners at height
/// `μ` (with `|μ| = λ`). Needs `b_1 = b_2 = 0`.
fn rectangle_split(x: f64, y: f64, mu: f64, lambda: f64) -> Vec<Term> {
    let (s, d) = (x + y, x - y);
    let alpha = if 1.0 + mu > 0.0 { (s + 1.0 + mu) / (2.0 * (1.0 + mu)) } else { 0.5 };
    let beta = if 1.0 - mu > 0.0 { (d + 1.0 - mu) / (2.0 * (1.0 - mu)) } else { 0.5 };
    let corners = [
        (alpha * beta, [1.0, mu, mu], 0),
        (alpha * (1.0 - beta), [mu, 1.0, mu], 1),
        ((1.0 - alpha) * (1.0 - beta), [-1.0, -mu, mu], 0),
        ((1.0 - alpha) * beta, [-mu, -1.0, mu], 1),
    ];
    corners
        .into_iter()
        .filter(|(w, _, _)| *w > WEIGHT_FLOOR)
        .map(|(w, e, k)| corner_term(e, k, lambda).scaled(w))
        .collect()
}

/// Rotation `Q` with `Q b ∥ e_3`, taken from the eigenbasis of the state.
fn diagonalizing_rotation(b: &Vector3<f64>) -> Matrix3<f64> {
    let r = bloch_matrix([b[0], b[1], b[2]]);
    let eig = matrix::eigensystem_unchecked(&r);
    rotation_from_unitary(&eig.vectors.adjoint())
}

/// `Δ_m = Qᵀ Δ_m Q` with `Q` diagonalizing the state, then the rectangle split.
fn depolarizing_terms(m: f64, lambda: f64, b: &Vector3<f64>) -> Vec<Term> {
    let q = diagonalizing_rotation(b);
    rectangle_split(m, m, m, lambda)
        .into_iter()
        .map(|t| Term { c: t.c, rw: q.transpose() * t.rw, ru: t.ru * q })
        .collect()
}

/// Angle in `[0, π)` of a rotation about `axis` that zeroes component `target`.
fn zeroing_angle(axis: usize, target: usize, b: &Vector3<f64>) -> f64 {
    let a = b[target];
    let bq = (axis_rotation(axis, std::f64::consts::FRAC_PI_2) * b)[target];
    let mut theta = (-a).atan2(bq);
    if theta < 0.0 {
        theta += std::f64::consts::PI;
    }
    if theta >= std::f64::consts::PI {
        theta -= std::f64::consts::PI;
    }
    theta
}

/// Two-Pauli map with `2λ−1` on `axis` (0 or 1) and `λ` on the other two.
fn two_pauli_terms(axis: usize, lambda: f64, b: &Vector3<f64>, nested: bool) -> Vec<Term> {
    let other = 1 - axis;
    // The map is symmetric under rotations about `axis`.
    let q = axis_rotation(axis, zeroing_angle(axis, other, b));
    let bq = q * b;
    let mut e = [lambda; 3];
    e[axis] = 2.0 * lambda - 1.0;
    let local = if nested {
        rectangle_split(e[0], e[1], lambda, lambda)
    } else {
        let mu = (3.0 * lambda - 1.0) / (2.0 * lambda);
        let mut out = Vec::new();
        if mu > WEIGHT_FLOOR {
            let mut corner = [lambda; 3];
            corner[other] = 1.0;
            out.push(corner_term(corner, other, lambda).scaled(mu));
        }
        if 1.0 - mu > WEIGHT_FLOOR {
            let g = pi_flip(2);
            out.extend(
                two_pauli_terms(other, lambda, &(g * bq), true)
                    .into_iter()
                    .map(|t| t.then_domain(&g).scaled(1.0 - mu)),
            );
        }
        out
    };
    local
        .into_iter()
        .map(|t| Term { c: t.c, rw: q.transpose() * t.rw, ru: t.ru * q })
        .collect()
}

fn vertex_terms(v: Vertex, lambda: f64, b: &Vector3<f64>) -> Vec<Term> {
    let via = |g: Matrix3<f64>, f: &dyn Fn(&Vector3<f64>) -> Vec<Term>| -> Vec<Term> {
        f(&(g * b)).into_iter().map(|t| t.then_domain(&g)).collect()
    };
    match v {
        Vertex::Depolarizing => depolarizing_terms(lambda, lambda, b),
        Vertex::DepolarizingFlipped => via(pi_flip(2), &|bb| depolarizing_terms(lambda, lambda, bb)),
        Vertex::TwoPauliX => two_pauli_terms(0, lambda, b, false),
        Vertex::TwoPauliY => two_pauli_terms(1, lambda, b, false),
        Vertex::TwoPauliXFlipped => via(pi_flip(2), &|bb| two_pauli_terms(0, lambda, bb, false)),
        Vertex::TwoPauliYFlipped => via(pi_flip(2), &|bb| two_pauli_terms(1, lambda, bb, false)),
        Vertex::SquareMinusY => via(pi_flip(1), &|bb| depolarizing_terms(-lambda, lambda, bb)),
        Vertex::SquareMinusX => via(pi_flip(0), &|bb| depolarizing_terms(-lambda, lambda, bb)),
    }
}

/// Decomposes `phi` into terms `c_i Γ_{W_i} ∘ Ψ_λ ∘ Γ_{U_i}` with
/// `λ = λ3` of the standard form and `Tr σ3 U_i r U_i* = 0` for every term.
pub fn lemma1_decompose(phi: &UnitalQubitChannel, r: &DensityMatrix) -> Result<PhaseDampingDecomposition> {
    if r.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("expected a qubit state, got dimension {}", r.dim())));
    }
    let sf = standard_form(phi)?;
    let lambda = sf.lambdas[2];
    let cross = cross_section_decompose(sf.lambdas)?;
    let b = sf.r_pre * Vector3::from(r.bloch_vector()?);
    let mut terms = Vec::new();
    for wv in &cross.vertices {
        for t in vertex_terms(wv.vertex, lambda, &b) {
            let c = t.c * wv.weight;
            if c > WEIGHT_FLOOR {
                terms.push(DecompositionTerm {
                    c,
                    w: lift_unchecked(&(sf.r_post * t.rw)),
                    u: lift_unchecked(&(t.ru * sf.r_pre)),
                });
            }
        }
    }
    Ok(PhaseDampingDecomposition { lambda, terms, source_state: r.clone() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub n_terms: usize,
    pub recomposition_error: f64,
    pub trace_violation: f64,
    pub weight_sum_deviation: f64,
    pub min_weight: f64,
    pub passed: bool,
}

fn state_basis() -> [ComplexMatrix; 4] {
    let half = |k: usize| (matrix::identity(2) + pauli(k)).unscale(2.0);
    [matrix::identity(2).unscale(2.0), half(1), half(2), half(3)]
}

/// Checks weights, recomposition on `{I/2, (I+σ_i)/2}` and the trace condition.
pub fn verify_decomposition(d: &PhaseDampingDecomposition, phi: &UnitalQubitChannel) -> DecompositionReport {
    let recomposition_error = state_basis()
        .iter()
        .map(|s| max_abs_diff(&d.apply_matrix(s), &phi.apply_matrix(s)))
        .fold(0.0, f64::max);
    let sigma3 = pauli(3);
    let r = d.source_state.matrix();
    let trace_violation = d
        .terms
        .iter()
        .map(|t| (&sigma3 * &t.u * r * t.u.adjoint()).trace().norm())
        .fold(0.0, f64::max);
    let weight_sum_deviation = (d.terms.iter().map(|t| t.c).sum::<f64>() - 1.0).abs();
    let min_weight = d.terms.iter().map(|t| t.c).fold(f64::INFINITY, f64::min);
    let unitary = d
        .terms
        .iter()
        .all(|t| matrix::unitary_deviation(&t.u) < 1e-10 && matrix::unitary_deviation(&t.w) < 1e-10);
    DecompositionReport {
        n_terms: d.terms.len(),
        recomposition_error,
        trace_violation,
        weight_sum_deviation,
        min_weight,
        passed: recomposition_error <= TOL_DECOMPOSITION
            && trace_violation <= TOL_DECOMPOSITION
            && weight_sum_deviation <= TOL_WEIGHTS
            && min_weight > 0.0
            && unitary,
    }
}
