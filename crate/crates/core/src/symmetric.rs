//! Permutation-symmetric N-qubit states in the Dicke basis, and D^H under
//! the symmetric classical ansatz: every qubit measured in the same basis
//! `{|+⟩, |−⟩}` and the probability of a pattern depending only on how many
//! `|+⟩` it contains.
//!
//! For the sorted pattern `|+⟩^k |−⟩^(N−k)` the overlap with `|N, j⟩` is
//! `[tʲ] (a₀ + a₁t)^k (b₀ + b₁t)^(N−k) / √C(N, j)`, where `aᵢ = ⟨i|+⟩`
//! and `bᵢ = ⟨i|−⟩`. Every pattern in an orbit has the same overlap
//! magnitude, so the objective only needs `N + 1` overlaps per component.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DiscordError, Result};
use crate::linalg::{hermitian_eig, CMatrix, CVector, C64};
use crate::optim::{self, SimplexOptions};
use crate::states::{DensityMatrix, ProductBasis, PureState, QubitBasisAngles, State};

pub const NORM_TOL: f64 = 1e-10;
/// Largest qubit count for which the full `2^N` expansion is built.
pub const MAX_EXPANSION_QUBITS: usize = 16;

/// Row `n` of Pascal's triangle.
fn binomials(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..=n {
        row[k] = row[k - 1] * (n + 1 - k) as f64 / k as f64;
    }
    row
}

/// A pure state `Σ_m c_m |N, m⟩`, `m` the number of ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPureState {
    n: usize,
    coeffs: Vec<C64>,
}

impl SymmetricPureState {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(DiscordError::Dimension(
                "a symmetric state needs at least one qubit".into(),
            ));
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(DiscordError::Probability(format!(
                "Dicke coefficients have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            n: coeffs.len() - 1,
            coeffs,
        })
    }

    /// Rescales to unit norm first.
    pub fn normalized(coeffs: Vec<C64>) -> Result<Self> {
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(DiscordError::Probability("zero or non-finite coefficient vector".into()));
        }
        Self::new(coeffs.into_iter().map(|c| c / norm).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn to_full(&self) -> Result<PureState> {
        let v = dicke_isometry(self.n)? * CVector::from_column_slice(&self.coeffs);
        PureState::normalized(v, vec![2; self.n])
    }

    /// Projects a full `N`-qubit pure state onto the symmetric subspace;
    /// fails if more than `tol` of its weight lies outside.
    pub fn from_full(psi: &PureState, tol: f64) -> Result<Self> {
        check_qubits(psi.dims())?;
        let n = psi.num_parties();
        let c = dicke_isometry(n)?.adjoint() * psi.amplitudes();
        let kept: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        if 1.0 - kept > tol {
            return Err(DiscordError::Unsupported(format!(
                "state has weight {:.3e} outside the symmetric subspace",
                1.0 - kept
            )));
        }
        Self::normalized(c.iter().copied().collect())
    }
}

/// `|N, m⟩` as a symmetric pure state.
pub fn dicke_state(n: usize, m: usize) -> Result<SymmetricPureState> {
    if n == 0 || m > n {
        return Err(DiscordError::Domain(format!(
            "Dicke index ({n}, {m}) out of range"
        )));
    }
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[m] = C64::new(1.0, 0.0);
    SymmetricPureState::new(coeffs)
}

/// A mixed state `Σ_k λ_k |φ_k⟩⟨φ_k|` with every `|φ_k⟩` in the symmetric
/// subspace, stored through its Dicke-basis spectrum.
#[derive(Debug, Clone)]
pub struct SymmetricMixedState {
    n: usize,
    weights: Vec<f64>,
    vectors: Vec<Vec<C64>>,
}

impl SymmetricMixedState {
    pub fn new(weights: Vec<f64>, vectors: Vec<Vec<C64>>) -> Result<Self> {
        if weights.len() != vectors.len() || vectors.is_empty() {
            return Err(DiscordError::Dimension(
                "need one eigenvector per eigenvalue".into(),
            ));
        }
        let len = vectors[0].len();
        if len < 2 || vectors.iter().any(|v| v.len() != len) {
            return Err(DiscordError::Dimension("inconsistent eigenvector lengths".into()));
        }
        if weights.iter().any(|&w| w < -NORM_TOL) {
            return Err(DiscordError::NotPsd(weights.iter().cloned().fold(0.0, f64::min)));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(DiscordError::Probability(format!(
                "eigenvalues sum to {total}, expected 1"
            )));
        }
        for (i, a) in vectors.iter().enumerate() {
            for (j, b) in vectors.iter().enumerate().skip(i) {
                let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (ip - C64::new(expect, 0.0)).norm() > NORM_TOL {
                    return Err(DiscordError::Domain(format!(
                        "eigenvectors {i} and {j} are not orthonormal"
                    )));
                }
            }
        }
        Ok(Self {
            n: len - 1,
            weights: weights.into_iter().map(|w| w.max(0.0)).collect(),
            vectors,
        })
    }

    /// From an `(N+1) × (N+1)` density matrix in the Dicke basis.
    pub fn from_dicke_matrix(matrix: &CMatrix) -> Result<Self> {
        let eig = hermitian_eig(matrix)?;
        let total: f64 = eig.eigenvalues.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(DiscordError::Probability(format!("trace is {total}, expected 1")));
        }
        let mut weights = Vec::new();
        let mut vectors = Vec::new();
        for (k, &w) in eig.eigenvalues.iter().enumerate().rev() {
            if w < -1e-10 {
                return Err(DiscordError::NotPsd(w));
            }
            if w > 0.0 {
                weights.push(w / total);
                vectors.push(eig.eigenvectors.column(k).iter().copied().collect());
            }
        }
        Self::new(weights, vectors)
    }

    /// Compresses a full `N`-qubit density matrix supported on the
    /// symmetric subspace; fails if more than `tol` of the trace lies outside.
    pub fn from_full(rho: &DensityMatrix, tol: f64) -> Result<Self> {
        check_qubits(rho.dims())?;
        let v = dicke_isometry(rho.num_parties())?;
        let reduced = v.adjoint() * rho.matrix() * &v;
        let kept = reduced.trace().re;
        if 1.0 - kept > tol {
            return Err(DiscordError::Unsupported(format!(
                "state has weight {:.3e} outside the symmetric subspace",
                1.0 - kept
            )));
        }
        Self::from_dicke_matrix(&reduced.unscale(kept))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn dicke_matrix(&self) -> CMatrix {
        let d = self.n + 1;
        let mut m = CMatrix::zeros(d, d);
        for (w, v) in self.weights.iter().zip(&self.vectors) {
            let col = CVector::from_column_slice(v);
            m += (&col * col.adjoint()).scale(*w);
        }
        m
    }

    pub fn to_full(&self) -> Result<DensityMatrix> {
        let v = dicke_isometry(self.n)?;
        DensityMatrix::from_numeric(&v * self.dicke_matrix() * v.adjoint(), vec![2; self.n])
    }
}

fn check_qubits(dims: &[usize]) -> Result<()> {
    if dims.iter().any(|&d| d != 2) {
        return Err(DiscordError::Unsupported(format!(
            "symmetric evaluation needs qubit parties, got {dims:?}"
        )));
    }
    Ok(())
}

/// `2^N × (N+1)` matrix whose columns are the Dicke states.
pub fn dicke_isometry(n: usize) -> Result<CMatrix> {
    if n > MAX_EXPANSION_QUBITS {
        return Err(DiscordError::Resource(format!(
            "full expansion limited to {MAX_EXPANSION_QUBITS} qubits, got {n}"
        )));
    }
    let binom = binomials(n);
    let mut v = CMatrix::zeros(1 << n, n + 1);
    for i in 0..1usize << n {
        let m = i.count_ones() as usize;
        v[(i, m)] = C64::new(1.0 / binom[m].sqrt(), 0.0);
    }
    Ok(v)
}

#[derive(Debug, Clone)]
pub enum SymmetricState {
    Pure(SymmetricPureState),
    Mixed(SymmetricMixedState),
}

impl SymmetricState {
    pub fn num_qubits(&self) -> usize {
        match self {
            SymmetricState::Pure(p) => p.num_qubits(),
            SymmetricState::Mixed(m) => m.num_qubits(),
        }
    }

    /// Tries the symmetric subspace for a general qubit state.
    pub fn from_state(state: &State, tol: f64) -> Result<Self> {
        match state {
            State::Pure(p) => SymmetricPureState::from_full(p, tol).map(Self::Pure),
            State::Mixed(m) => SymmetricMixedState::from_full(m, tol).map(Self::Mixed),
        }
    }

    pub fn to_full(&self) -> Result<State> {
        Ok(match self {
            SymmetricState::Pure(p) => State::Pure(p.to_full()?),
            SymmetricState::Mixed(m) => State::Mixed(m.to_full()?),
        })
    }

    fn components(&self) -> Vec<(f64, &[C64])> {
        match self {
            SymmetricState::Pure(p) => vec![(1.0, p.coeffs())],
            SymmetricState::Mixed(m) => m
                .weights
                .iter()
                .zip(&m.vectors)
                .filter(|(w, _)| **w > crate::engine::SPECTRUM_FLOOR)
                .map(|(w, v)| (w.sqrt(), v.as_slice()))
                .collect(),
        }
    }
}

impl From<SymmetricPureState> for SymmetricState {
    fn from(s: SymmetricPureState) -> Self {
        SymmetricState::Pure(s)
    }
}

impl From<SymmetricMixedState> for SymmetricState {
    fn from(s: SymmetricMixedState) -> Self {
        SymmetricState::Mixed(s)
    }
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_powers(linear: [C64; 2], n: usize) -> Vec<Vec<C64>> {
    let mut pows = Vec::with_capacity(n + 1);
    pows.push(vec![C64::new(1.0, 0.0)]);
    for k in 1..=n {
        let next = poly_mul(&pows[k - 1], &linear);
        pows.push(next);
    }
    pows
}

/// Overlaps of every Dicke state with every sorted pattern:
/// `table[k][j] = ⟨N, j| (|+⟩^k |−⟩^(N−k))`.
fn pattern_table(n: usize, angles: QubitBasisAngles, inv_sqrt_binom: &[f64]) -> Vec<Vec<C64>> {
    let [plus, minus] = angles.vectors();
    let plus_pows = poly_powers(plus, n);
    let minus_pows = poly_powers(minus, n);
    (0..=n)
        .map(|k| {
            let mut row = poly_mul(&plus_pows[k], &minus_pows[n - k]);
            for (j, z) in row.iter_mut().enumerate() {
                *z *= inv_sqrt_binom[j];
            }
            row
        })
        .collect()
}

/// `A_k = ⟨ψ| (|+⟩^k |−⟩^(N−k))` for `k = 0..N`.
pub fn dicke_overlap_amplitudes(s: &SymmetricPureState, theta: f64, phi: f64) -> Vec<C64> {
    let n = s.num_qubits();
    let inv: Vec<f64> = binomials(n).iter().map(|b| 1.0 / b.sqrt()).collect();
    pattern_table(n, QubitBasisAngles::new(theta, phi), &inv)
        .iter()
        .map(|row| row.iter().zip(&s.coeffs).map(|(p, c)| c.conj() * p).sum())
        .collect()
}

/// Prepared objective for repeated `(θ, φ)` evaluations.
pub struct SymmetricObjective<'a> {
    n: usize,
    binom: Vec<f64>,
    inv_sqrt_binom: Vec<f64>,
    components: Vec<(f64, &'a [C64])>,
}

impl<'a> SymmetricObjective<'a> {
    pub fn new(state: &'a SymmetricState) -> Self {
        let n = state.num_qubits();
        let binom = binomials(n);
        let inv_sqrt_binom = binom.iter().map(|b| 1.0 / b.sqrt()).collect();
        Self {
            n,
            binom,
            inv_sqrt_binom,
            components: state.components(),
        }
    }

    /// Per-orbit terms `q_k = Σ_l √λ_l |⟨φ_l|pattern_k⟩|²`.
    pub fn terms(&self, theta: f64, phi: f64) -> Vec<f64> {
        let table = pattern_table(self.n, QubitBasisAngles::new(theta, phi), &self.inv_sqrt_binom);
        table
            .iter()
            .map(|row| {
                self.components
                    .iter()
                    .map(|(w, c)| {
                        let a: C64 = row.iter().zip(c.iter()).map(|(p, c)| c.conj() * p).sum();
                        w * a.norm_sqr()
                    })
                    .sum()
            })
            .collect()
    }

    pub fn affinity(&self, theta: f64, phi: f64) -> f64 {
        self.terms(theta, phi)
            .iter()
            .zip(&self.binom)
            .map(|(q, b)| b * q * q)
            .sum::<f64>()
            .sqrt()
    }

    pub fn orbit_sizes(&self) -> &[f64] {
        &self.binom
    }
}

/// The symmetric nearest classical state: one qubit basis shared by all
/// parties and one probability per orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricSigma {
    pub theta: f64,
    pub phi: f64,
    /// Probability of each single pattern in orbit `k` (`k` plus outcomes).
    pub orbit_probabilities: Vec<f64>,
    /// `C(N, k)`.
    pub orbit_sizes: Vec<f64>,
}

impl SymmetricSigma {
    pub fn total_probability(&self) -> f64 {
        self.orbit_probabilities
            .iter()
            .zip(&self.orbit_sizes)
            .map(|(p, s)| p * s)
            .sum()
    }

    pub fn basis(&self) -> ProductBasis {
        ProductBasis::uniform_qubits(
            self.orbit_sizes.len() - 1,
            QubitBasisAngles::new(self.theta, self.phi),
        )
    }

    /// Probabilities over all `2^N` product-basis outcomes. Bit 0 of a
    /// party's index is `|+⟩`.
    pub fn expand(&self) -> Vec<f64> {
        let n = self.orbit_sizes.len() - 1;
        (0..1usize << n)
            .map(|i| self.orbit_probabilities[n - i.count_ones() as usize])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymmetricScan {
    pub theta_points: usize,
    pub phi_points: usize,
    /// Number of best grid cells refined by the simplex search.
    pub refine_starts: usize,
    pub tolerance: f64,
}

impl Default for SymmetricScan {
    fn default() -> Self {
        Self {
            theta_points: 181,
            phi_points: 90,
            refine_starts: 4,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricDiagnostics {
    pub grid_cells: usize,
    pub best_grid_affinity: f64,
    pub refine_starts: usize,
    pub refinement_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SymmetricResult {
    pub value: f64,
    pub affinity: f64,
    pub sigma: SymmetricSigma,
    pub diagnostics: SymmetricDiagnostics,
}

pub fn dh_symmetric(state: &SymmetricState, scan: &SymmetricScan) -> Result<SymmetricResult> {
    if scan.theta_points < 2 || scan.phi_points < 1 || scan.refine_starts == 0 {
        return Err(DiscordError::Usage(
            "symmetric scan needs ≥ 2 θ points, ≥ 1 φ point and ≥ 1 refinement start".into(),
        ));
    }
    let objective = SymmetricObjective::new(state);
    let (nt, np) = (scan.theta_points, scan.phi_points);
    let cell = |idx: usize| {
        let (i, j) = (idx / np, idx % np);
        (PI * i as f64 / (nt - 1) as f64, 2.0 * PI * j as f64 / np as f64)
    };
    let values: Vec<f64> = (0..nt * np)
        .into_par_iter()
        .map(|idx| {
            let (t, p) = cell(idx);
            objective.affinity(t, p)
        })
        .collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(scan.refine_starts);

    let step = 0.5 * (PI / (nt - 1) as f64).max(2.0 * PI / np as f64);
    let refined: Vec<optim::SimplexOutcome> = order
        .par_iter()
        .map(|&idx| {
            let (t, p) = cell(idx);
            optim::minimize(
                |x| -objective.affinity(x[0], x[1]),
                &[t, p],
                &SimplexOptions {
                    step,
                    f_tol: scan.tolerance,
                    max_iterations: 2000,
                    restarts: 3,
                },
            )
        })
        .collect();

    let best_grid = values[order[0]];
    let (mut best_x, mut best_aff) = {
        let (t, p) = cell(order[0]);
        (vec![t, p], best_grid)
    };
    for out in &refined {
        if -out.value > best_aff {
            best_aff = -out.value;
            best_x = out.x.clone();
        }
    }
    let angles = QubitBasisAngles::new(best_x[0], best_x[1]).canonical();
    let terms = objective.terms(angles.theta, angles.phi);
    let norm: f64 = terms.iter().zip(objective.orbit_sizes()).map(|(q, b)| b * q * q).sum();
    let affinity = norm.sqrt().clamp(0.0, 1.0);
    let sigma = SymmetricSigma {
        theta: angles.theta,
        phi: angles.phi,
        orbit_probabilities: terms.iter().map(|q| q * q / norm).collect(),
        orbit_sizes: objective.orbit_sizes().to_vec(),
    };
    Ok(SymmetricResult {
        value: (1.0 - affinity).clamp(0.0, 1.0),
        affinity,
        sigma,
        diagnostics: SymmetricDiagnostics {
            grid_cells: values.len(),
            best_grid_affinity: best_grid,
            refine_starts: refined.len(),
            refinement_iterations: refined.iter().map(|o| o.iterations).sum(),
        },
    })
}
