//! State representations: pure states, density matrices, Schmidt
//! decompositions, local product bases and completely classical states.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DiscordError, Result};
use crate::linalg::{
    self, c, frobenius, hermitian_eig, hermiticity_defect, is_finite, kron_all, CMatrix, CVector,
    HermitianEig, C64, HERMITIAN_TOL, PSD_TOL,
};

pub const NORM_TOL: f64 = 1e-10;
pub const PROBABILITY_TOL: f64 = 1e-12;

fn check_dims(len: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(DiscordError::Dimension(format!("invalid party dimensions {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if total != len {
        return Err(DiscordError::Dimension(format!(
            "party dimensions {dims:?} describe {total} amplitudes, got {len}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        if !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(DiscordError::Domain("amplitudes must be finite".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(DiscordError::Domain(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Rescales `amplitudes` to unit norm before validating.
    pub fn normalized(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(DiscordError::Domain("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(amplitudes.unscale(norm), dims)
    }

    pub fn from_real(amplitudes: &[f64], dims: Vec<usize>) -> Result<Self> {
        Self::normalized(
            CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|&a| c(a, 0.0))),
            dims,
        )
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.projector(),
            dims: self.dims.clone(),
        }
    }

    /// `(U₁ ⊗ … ⊗ U_N) |ψ⟩`
    pub fn apply_local(&self, unitaries: &[CMatrix]) -> Result<PureState> {
        check_local_ops(&self.dims, unitaries)?;
        let mut flat: Vec<C64> = self.amplitudes.iter().copied().collect();
        for (p, u) in unitaries.iter().enumerate() {
            linalg::apply_local(&mut flat, &self.dims, p, u);
        }
        PureState::normalized(CVector::from_vec(flat), self.dims.clone())
    }
}

fn check_local_ops(dims: &[usize], ops: &[CMatrix]) -> Result<()> {
    if ops.len() != dims.len() || ops.iter().zip(dims).any(|(u, &d)| u.shape() != (d, d)) {
        return Err(DiscordError::Dimension(format!(
            "need one square operator per party for dimensions {dims:?}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(DiscordError::Dimension("density matrix must be square".into()));
        }
        check_dims(matrix.nrows(), &dims)?;
        if !is_finite(&matrix) {
            return Err(DiscordError::Domain("density matrix has non-finite entries".into()));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(DiscordError::Domain(format!(
                "density matrix is not Hermitian (defect {defect:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(DiscordError::Domain(format!("trace is {tr}, expected 1")));
        }
        let eig = hermitian_eig(&matrix)?;
        if eig.eigenvalues[0] < -PSD_TOL {
            return Err(DiscordError::NotPsd(eig.eigenvalues[0]));
        }
        Ok(Self { matrix, dims })
    }

    /// Symmetrizes and rescales to unit trace before validating. Meant for
    /// numerically assembled states that carry round-off.
    pub fn from_numeric(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(DiscordError::Dimension("density matrix must be square".into()));
        }
        let sym = linalg::symmetrize(&matrix);
        let tr = sym.trace().re;
        if !(tr > 0.0) {
            return Err(DiscordError::Domain(format!("trace {tr} is not positive")));
        }
        Self::new(sym.unscale(tr), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self {
            matrix: CMatrix::identity(d, d).unscale(d as f64),
            dims,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn eig(&self) -> HermitianEig {
        hermitian_eig(&self.matrix).expect("validated density matrix")
    }

    pub fn purity(&self) -> f64 {
        frobenius(&self.matrix).powi(2)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = linalg::partial_trace(&self.matrix, &self.dims, keep)?;
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let dims = kept.iter().map(|&p| self.dims[p]).collect();
        DensityMatrix::from_numeric(m, dims)
    }

    /// `(U₁ ⊗ … ⊗ U_N) ρ (U₁ ⊗ … ⊗ U_N)†`
    pub fn apply_local(&self, unitaries: &[CMatrix]) -> Result<DensityMatrix> {
        check_local_ops(&self.dims, unitaries)?;
        let u = kron_all(unitaries);
        DensityMatrix::from_numeric(&u * &self.matrix * u.adjoint(), self.dims.clone())
    }

    /// Returns the pure state if the rank is one within `tol`.
    pub fn as_pure(&self, tol: f64) -> Option<PureState> {
        let eig = self.eig();
        let n = eig.dim();
        if (eig.eigenvalues[n - 1] - 1.0).abs() > tol {
            return None;
        }
        PureState::normalized(eig.eigenvector(n - 1), self.dims.clone()).ok()
    }
}

/// Input accepted by the discord evaluators.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl State {
    pub fn dims(&self) -> &[usize] {
        match self {
            State::Pure(p) => p.dims(),
            State::Mixed(m) => m.dims(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn num_parties(&self) -> usize {
        self.dims().len()
    }

    pub fn is_qubits(&self) -> bool {
        self.dims().iter().all(|&d| d == 2)
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            State::Pure(p) => p.to_density(),
            State::Mixed(m) => m.clone(),
        }
    }

    pub fn apply_local(&self, unitaries: &[CMatrix]) -> Result<State> {
        Ok(match self {
            State::Pure(p) => State::Pure(p.apply_local(unitaries)?),
            State::Mixed(m) => State::Mixed(m.apply_local(unitaries)?),
        })
    }
}

impl From<PureState> for State {
    fn from(p: PureState) -> Self {
        State::Pure(p)
    }
}

impl From<DensityMatrix> for State {
    fn from(m: DensityMatrix) -> Self {
        State::Mixed(m)
    }
}

#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Non-negative, descending.
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<CVector>,
    pub right_vectors: Vec<CVector>,
}

impl SchmidtDecomposition {
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&s| s > tol).count()
    }

    /// `Σ λᵢ⁴`
    pub fn fourth_moment(&self) -> f64 {
        self.coefficients.iter().map(|s| s.powi(4)).sum()
    }

    pub fn reconstruct(&self) -> CVector {
        let da = self.left_vectors.first().map_or(0, |v| v.len());
        let db = self.right_vectors.first().map_or(0, |v| v.len());
        let mut out = CVector::zeros(da * db);
        for ((s, a), b) in self
            .coefficients
            .iter()
            .zip(&self.left_vectors)
            .zip(&self.right_vectors)
        {
            out += linalg::kron_vec(a, b).scale(*s);
        }
        out
    }

    /// Full local unitaries whose leading columns are the Schmidt vectors.
    pub fn local_unitaries(&self) -> (CMatrix, CMatrix) {
        let da = self.left_vectors[0].len();
        let db = self.right_vectors[0].len();
        (
            complete_basis(&self.left_vectors, da),
            complete_basis(&self.right_vectors, db),
        )
    }
}

/// Extends orthonormal `vectors` to a full orthonormal basis of `C^d`
/// (columns of the returned unitary).
pub fn complete_basis(vectors: &[CVector], d: usize) -> CMatrix {
    let mut cols: Vec<CVector> = Vec::with_capacity(d);
    let push = |v: &CVector, cols: &mut Vec<CVector>| {
        let mut w = v.clone();
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for u in cols.iter() {
                let proj = u.dotc(&w);
                w -= u * proj;
            }
        }
        let n = w.norm();
        if n > 1e-8 {
            cols.push(w.unscale(n));
        }
    };
    for v in vectors {
        push(v, &mut cols);
    }
    for e in 0..d {
        if cols.len() == d {
            break;
        }
        let mut unit = CVector::zeros(d);
        unit[e] = c(1.0, 0.0);
        push(&unit, &mut cols);
    }
    CMatrix::from_columns(&cols)
}

pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtDecomposition> {
    if psi.num_parties() != 2 {
        return Err(DiscordError::Arity(psi.num_parties()));
    }
    let (da, db) = (psi.dims()[0], psi.dims()[1]);
    let m = CMatrix::from_fn(da, db, |a, b| psi.amplitudes()[a * db + b]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let coefficients = order.iter().map(|&i| svd.singular_values[i].max(0.0)).collect();
    let left_vectors = order.iter().map(|&i| u.column(i).into_owned()).collect();
    // M = U Σ V† ⇒ ψ = Σ sᵢ uᵢ ⊗ (row i of V†)ᵀ
    let right_vectors = order.iter().map(|&i| vt.row(i).transpose()).collect();
    Ok(SchmidtDecomposition {
        coefficients,
        left_vectors,
        right_vectors,
    })
}

/// Qubit basis chart:
/// `|+⟩ = cos(θ/2)|1⟩ + e^{-iφ} sin(θ/2)|0⟩`,
/// `|−⟩ = e^{iφ} sin(θ/2)|1⟩ − cos(θ/2)|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitBasisAngles {
    pub theta: f64,
    pub phi: f64,
}

impl QubitBasisAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// `[|+⟩, |−⟩]` in `(|0⟩, |1⟩)` components.
    pub fn vectors(&self) -> [[C64; 2]; 2] {
        let (s, co) = (self.theta / 2.0).sin_cos();
        let e = C64::from_polar(1.0, self.phi);
        [[e.conj() * s, c(co, 0.0)], [c(-co, 0.0), e * s]]
    }

    /// Columns `|+⟩`, `|−⟩`.
    pub fn unitary(&self) -> CMatrix {
        let [p, m] = self.vectors();
        CMatrix::from_row_slice(2, 2, &[p[0], m[0], p[1], m[1]])
    }

    /// Same pair of projectors with `θ ∈ [0, π]` and `φ ∈ [0, 2π)`.
    pub fn canonical(&self) -> Self {
        let mut theta = self.theta.rem_euclid(2.0 * PI);
        let mut phi = self.phi;
        if theta > PI {
            theta = 2.0 * PI - theta;
            phi += PI;
        }
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI - 1e-15 {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    /// Chart coordinates of the basis whose first element is `plus`.
    pub fn from_plus_vector(plus: [C64; 2]) -> Self {
        let theta = 2.0 * plus[0].norm().atan2(plus[1].norm());
        let phi = if plus[0].norm() < 1e-14 || plus[1].norm() < 1e-14 {
            0.0
        } else {
            plus[1].arg() - plus[0].arg()
        };
        Self { theta, phi }.canonical()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LocalBasis {
    Qubit(QubitBasisAngles),
    /// Columns are the basis vectors.
    Unitary(CMatrix),
}

impl LocalBasis {
    pub fn dim(&self) -> usize {
        match self {
            LocalBasis::Qubit(_) => 2,
            LocalBasis::Unitary(u) => u.nrows(),
        }
    }

    pub fn unitary(&self) -> CMatrix {
        match self {
            LocalBasis::Qubit(a) => a.unitary(),
            LocalBasis::Unitary(u) => u.clone(),
        }
    }

    /// Angles of the chart if this is (or can be expressed as) a qubit basis.
    pub fn angles(&self) -> Option<QubitBasisAngles> {
        match self {
            LocalBasis::Qubit(a) => Some(*a),
            LocalBasis::Unitary(u) if u.nrows() == 2 => {
                Some(QubitBasisAngles::from_plus_vector([u[(0, 0)], u[(1, 0)]]))
            }
            LocalBasis::Unitary(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductBasis {
    parties: Vec<LocalBasis>,
}

impl ProductBasis {
    pub fn new(parties: Vec<LocalBasis>) -> Result<Self> {
        for p in &parties {
            if let LocalBasis::Unitary(u) = p {
                let d = u.nrows();
                if !u.is_square()
                    || frobenius(&(u.adjoint() * u - CMatrix::identity(d, d))) > 1e-10
                {
                    return Err(DiscordError::Domain("local basis is not unitary".into()));
                }
            }
        }
        Ok(Self { parties })
    }

    pub fn qubits(angles: &[QubitBasisAngles]) -> Self {
        Self {
            parties: angles.iter().map(|&a| LocalBasis::Qubit(a)).collect(),
        }
    }

    /// Qubit bases from a flat `[θ₁, φ₁, θ₂, φ₂, …]` parameter vector.
    pub fn from_flat_angles(params: &[f64]) -> Self {
        Self {
            parties: params
                .chunks_exact(2)
                .map(|p| LocalBasis::Qubit(QubitBasisAngles::new(p[0], p[1])))
                .collect(),
        }
    }

    /// Every party in the same qubit basis.
    pub fn uniform_qubits(n: usize, angles: QubitBasisAngles) -> Self {
        Self::qubits(&vec![angles; n])
    }

    /// Identity unitaries: `|k₁ … k_N⟩` in the standard ordering.
    pub fn computational(dims: &[usize]) -> Self {
        Self {
            parties: dims
                .iter()
                .map(|&d| LocalBasis::Unitary(CMatrix::identity(d, d)))
                .collect(),
        }
    }

    pub fn parties(&self) -> &[LocalBasis] {
        &self.parties
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parties.iter().map(LocalBasis::dim).collect()
    }

    pub fn size(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn local_unitaries(&self) -> Vec<CMatrix> {
        self.parties.iter().map(LocalBasis::unitary).collect()
    }

    pub fn angles(&self) -> Option<Vec<QubitBasisAngles>> {
        self.parties.iter().map(LocalBasis::angles).collect()
    }

    /// Unitary whose column `n` is `|σ_n⟩` (party 1 slowest).
    pub fn full_unitary(&self) -> CMatrix {
        kron_all(&self.local_unitaries())
    }
}

/// The product vectors `|σ_n⟩` in lexicographic order, party 1 slowest.
pub fn basis_vectors(b: &ProductBasis) -> Vec<PureState> {
    let u = b.full_unitary();
    let dims = b.dims();
    (0..u.ncols())
        .map(|n| PureState {
            amplitudes: u.column(n).into_owned(),
            dims: dims.clone(),
        })
        .collect()
}

fn check_probabilities(p: &[f64], expected_len: usize) -> Result<()> {
    if p.len() != expected_len {
        return Err(DiscordError::Probability(format!(
            "table has {} entries, basis has {expected_len}",
            p.len()
        )));
    }
    if let Some(bad) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(DiscordError::Probability(format!("entry {bad} is not a probability")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > PROBABILITY_TOL {
        return Err(DiscordError::Probability(format!("entries sum to {s}")));
    }
    Ok(())
}

/// A completely classical state: a product basis together with a joint
/// probability table over its elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalState {
    pub basis: ProductBasis,
    pub probabilities: Vec<f64>,
}

impl ClassicalState {
    pub fn new(basis: ProductBasis, probabilities: Vec<f64>) -> Result<Self> {
        check_probabilities(&probabilities, basis.size())?;
        Ok(Self {
            basis,
            probabilities,
        })
    }

    pub fn density(&self) -> DensityMatrix {
        classical_state(&self.basis, &self.probabilities).expect("validated classical state")
    }
}

/// `σ = Σ_n p_n |σ_n⟩⟨σ_n|`
pub fn classical_state(b: &ProductBasis, p: &[f64]) -> Result<DensityMatrix> {
    check_probabilities(p, b.size())?;
    let u = b.full_unitary();
    let mut scaled = u.clone();
    for (n, &pn) in p.iter().enumerate() {
        scaled.column_mut(n).scale_mut(pn);
    }
    DensityMatrix::from_numeric(scaled * u.adjoint(), b.dims())
}
