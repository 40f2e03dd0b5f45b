//! Exact evaluators for the analytically solved families.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::engine::Objective;
use crate::error::{DiscordError, Result};
use crate::linalg::{CMatrix, C64};
use crate::random::{random_unitary, rng};
use crate::states::{
    schmidt_decompose, ClassicalState, DensityMatrix, LocalBasis, ProductBasis, PureState,
    QubitBasisAngles, State,
};

/// Qubit unitaries are reported through the angle chart; the chart's `|−⟩`
/// differs from the second column only by a phase, so projectors agree.
pub fn local_basis_from_unitary(u: CMatrix) -> LocalBasis {
    if u.nrows() == 2 {
        LocalBasis::Qubit(QubitBasisAngles::from_plus_vector([u[(0, 0)], u[(1, 0)]]))
    } else {
        LocalBasis::Unitary(u)
    }
}

/// Pure bipartite states: `1 − √(Σᵢ λᵢ⁴)` over the Schmidt coefficients,
/// with the nearest classical state diagonal in the Schmidt product basis.
pub fn dh_pure_bipartite(psi: &PureState) -> Result<(f64, ClassicalState)> {
    let schmidt = schmidt_decompose(psi)?;
    let fourth = schmidt.fourth_moment();
    let (ua, ub) = schmidt.local_unitaries();
    let db = ub.nrows();
    let basis = ProductBasis::new(vec![local_basis_from_unitary(ua), local_basis_from_unitary(ub)])?;
    let mut p = vec![0.0; basis.size()];
    for (i, l) in schmidt.coefficients.iter().enumerate() {
        p[i * db + i] = l.powi(4) / fourth;
    }
    let value = (1.0 - fourth.sqrt()).clamp(0.0, 1.0);
    Ok((value, ClassicalState::new(basis, p)?))
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&v) {
        return Err(DiscordError::Domain(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// Two-qubit Werner state `r|Φ⁺⟩⟨Φ⁺| + (1 − r)I/4`.
pub fn dh_werner_2qubit(r: f64) -> Result<f64> {
    check_range("r", r, 0.0, 1.0)?;
    let inner = 3.0 - r + ((1.0 - r) * (1.0 + 3.0 * r)).sqrt();
    Ok((1.0 - 0.5 * inner.sqrt()).clamp(0.0, 1.0))
}

/// Weights over `Ψ⁺, Ψ⁻, Φ⁺, Φ⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellDiagonalSpec {
    lambdas: [f64; 4],
}

impl BellDiagonalSpec {
    pub fn new(lambdas: [f64; 4]) -> Result<Self> {
        if lambdas.iter().any(|&l| !(l >= -1e-12)) {
            return Err(DiscordError::Probability(format!(
                "Bell weights must be non-negative: {lambdas:?}"
            )));
        }
        let total: f64 = lambdas.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(DiscordError::Probability(format!(
                "Bell weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            lambdas: lambdas.map(|l| l.max(0.0)),
        })
    }

    pub fn lambdas(&self) -> [f64; 4] {
        self.lambdas
    }

    fn roots(&self) -> [f64; 4] {
        self.lambdas.map(f64::sqrt)
    }

    /// `Σ √λᵢ`.
    pub fn h(&self) -> f64 {
        self.roots().iter().sum()
    }

    /// Signed root combinations selecting the x-, y- and z-basis branches.
    pub fn d(&self) -> [f64; 3] {
        let [a, b, c, d] = self.roots();
        [a - b + c - d, -a + b + c - d, a + b - c - d]
    }

    pub fn density(&self) -> DensityMatrix {
        crate::catalog::bell_diagonal(self.lambdas).expect("validated weights")
    }
}

#[derive(Debug, Clone)]
pub struct BellDiagonalOutcome {
    pub value: f64,
    /// 0, 1 or 2 for the x-, y- or z-basis branch.
    pub branch: usize,
    pub nearest: ClassicalState,
}

const BELL_BRANCH_ANGLES: [(f64, f64); 3] = [(PI / 2.0, 0.0), (PI / 2.0, PI / 2.0), (0.0, 0.0)];

/// `1 − ½√(h² + max dₖ²)`. Ties go to the lowest branch.
pub fn dh_bell_diagonal(spec: &BellDiagonalSpec) -> BellDiagonalOutcome {
    let h = spec.h();
    let d = spec.d();
    let mut branch = 0;
    for k in 1..3 {
        if d[k] * d[k] > d[branch] * d[branch] {
            branch = k;
        }
    }
    let dk = d[branch];
    let norm = 4.0 * (h * h + dk * dk);
    let same = (h + dk).powi(2) / norm;
    let mixed = (h - dk).powi(2) / norm;
    let (theta, phi) = BELL_BRANCH_ANGLES[branch];
    let basis = ProductBasis::uniform_qubits(2, QubitBasisAngles::new(theta, phi));
    let nearest =
        ClassicalState::new(basis, vec![same, mixed, mixed, same]).expect("weights sum to one");
    BellDiagonalOutcome {
        value: (1.0 - 0.5 * (h * h + dk * dk).sqrt()).clamp(0.0, 1.0),
        branch,
        nearest,
    }
}

/// A density matrix supported on the diagonal and anti-diagonal of a
/// declared product frame.
#[derive(Debug, Clone)]
pub struct XStateSpec {
    dims: Vec<usize>,
    diagonal: Vec<f64>,
    /// `anti_diagonal[i] = ρ[i, n − 1 − i]`.
    anti_diagonal: Vec<C64>,
}

pub const XSTATE_TOL: f64 = 1e-10;

impl XStateSpec {
    pub fn new(dims: Vec<usize>, diagonal: Vec<f64>, anti_diagonal: Vec<C64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if n % 2 != 0 {
            return Err(DiscordError::Dimension(format!("X form needs an even side, got {n}")));
        }
        if diagonal.len() != n || anti_diagonal.len() != n {
            return Err(DiscordError::Dimension(format!(
                "expected {n} diagonal and anti-diagonal entries, got {} and {}",
                diagonal.len(),
                anti_diagonal.len()
            )));
        }
        let trace: f64 = diagonal.iter().sum();
        if (trace - 1.0).abs() > XSTATE_TOL {
            return Err(DiscordError::Probability(format!("trace is {trace}, expected 1")));
        }
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let (a, b) = (anti_diagonal[i], anti_diagonal[j]);
            if (a - b.conj()).norm() > XSTATE_TOL {
                return Err(DiscordError::Domain(format!(
                    "anti-diagonal entries {i} and {j} are not conjugate"
                )));
            }
            let (p, q) = (diagonal[i], diagonal[j]);
            if p < -XSTATE_TOL || q < -XSTATE_TOL || a.norm_sqr() > p * q + XSTATE_TOL {
                return Err(DiscordError::Domain(format!(
                    "block ({i}, {j}) is not positive semidefinite"
                )));
            }
        }
        Ok(Self {
            dims,
            diagonal,
            anti_diagonal,
        })
    }

    /// Extracts the X entries of `rho`; fails if anything else exceeds `tol`.
    pub fn from_density(rho: &DensityMatrix, tol: f64) -> Result<Self> {
        let n = rho.dim();
        let m = rho.matrix();
        for i in 0..n {
            for j in 0..n {
                if i != j && i + j != n - 1 && m[(i, j)].norm() > tol {
                    return Err(DiscordError::Domain(format!(
                        "entry ({i}, {j}) lies outside the X pattern"
                    )));
                }
            }
        }
        Self::new(
            rho.dims().to_vec(),
            (0..n).map(|i| m[(i, i)].re).collect(),
            (0..n).map(|i| m[(i, n - 1 - i)]).collect(),
        )
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// The matrix in frame coordinates.
    pub fn matrix(&self) -> CMatrix {
        let n = self.diagonal.len();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] += C64::new(self.diagonal[i], 0.0);
            if i != n - 1 - i {
                m[(i, n - 1 - i)] = self.anti_diagonal[i];
            }
        }
        m
    }

    /// The state in computational coordinates for the given frame.
    pub fn density_in(&self, frame: &ProductBasis) -> Result<DensityMatrix> {
        if frame.dims() != self.dims {
            return Err(DiscordError::Dimension(format!(
                "frame dimensions {:?} do not match {:?}",
                frame.dims(),
                self.dims
            )));
        }
        let u = frame.full_unitary();
        DensityMatrix::from_numeric(&u * self.matrix() * u.adjoint(), self.dims.clone())
    }
}

#[derive(Debug, Clone)]
pub struct XStateOutcome {
    pub value: f64,
    pub nearest: ClassicalState,
    pub random_bases_checked: usize,
    /// Smallest value seen over the random product bases.
    pub min_random_value: f64,
    /// Whether the frame value is at or below every random basis value.
    pub frame_is_best: bool,
}

pub const XSTATE_RANDOM_BASES: usize = 100;
const XSTATE_CHECK_SEED: u64 = 0x5d15_c0de;

/// Evaluates on the frame in which the state is X-shaped, then compares
/// against random product bases.
pub fn dh_xstate(spec: &XStateSpec, frame: &ProductBasis) -> Result<XStateOutcome> {
    let rho = spec.density_in(frame)?;
    let state = State::Mixed(rho);
    let objective = Objective::new(&state);
    let terms = objective.terms(frame);
    let norm: f64 = terms.iter().map(|q| q * q).sum();
    let value = (1.0 - norm.sqrt()).clamp(0.0, 1.0);
    let p: Vec<f64> = terms.iter().map(|q| q * q / norm).collect();
    let nearest = ClassicalState::new(frame.clone(), p)?;

    let mut r = rng(XSTATE_CHECK_SEED);
    let mut min_random = f64::INFINITY;
    for _ in 0..XSTATE_RANDOM_BASES {
        let basis = ProductBasis::new(
            spec.dims
                .iter()
                .map(|&d| LocalBasis::Unitary(random_unitary(d, &mut r)))
                .collect(),
        )?;
        min_random = min_random.min((1.0 - objective.affinity(&basis)).clamp(0.0, 1.0));
    }
    Ok(XStateOutcome {
        value,
        nearest,
        random_bases_checked: XSTATE_RANDOM_BASES,
        min_random_value: min_random,
        frame_is_best: value <= min_random + 1e-12,
    })
}

fn check_levels(m: usize) -> Result<()> {
    if m < 2 {
        return Err(DiscordError::Domain(format!("level count must be ≥ 2, got {m}")));
    }
    Ok(())
}

/// `m × m` Werner family parameterized by the swap expectation `x`.
pub fn dh_werner_mlevel(m: usize, x: f64) -> Result<f64> {
    check_levels(m)?;
    check_range("x", x, -1.0, 1.0)?;
    let mf = m as f64;
    let inner = (2.0 + mf + x) / (mf + 1.0)
        + ((mf - 1.0) / (mf + 1.0)).sqrt() * (1.0 - x * x).max(0.0).sqrt();
    Ok((1.0 - FRAC_1_SQRT_2 * inner.sqrt()).clamp(0.0, 1.0))
}

/// The earlier Hellinger-type measure on the Werner family. Related by
/// `D^H = 1 − √(1 − D)`.
pub fn reference_werner_mlevel(m: usize, x: f64) -> Result<f64> {
    check_levels(m)?;
    check_range("x", x, -1.0, 1.0)?;
    let mf = m as f64;
    let inner = (2.0 + mf + x) / (mf + 1.0)
        + ((mf - 1.0) / (mf + 1.0)).sqrt() * (1.0 - x * x).max(0.0).sqrt();
    Ok(1.0 - 0.5 * inner)
}

fn isotropic_affinity_sq(m: usize, x: f64) -> f64 {
    let mf = m as f64;
    let d1 = mf * mf - 1.0;
    let diag = x.sqrt() / mf + (mf - 1.0) / mf * ((1.0 - x) / d1).sqrt();
    mf * diag * diag + (mf * mf - mf) * (1.0 - x) / d1
}

/// `m × m` isotropic family parameterized by the fidelity `x` with the
/// maximally entangled state.
pub fn dh_isotropic_mlevel(m: usize, x: f64) -> Result<f64> {
    check_levels(m)?;
    check_range("x", x, 0.0, 1.0)?;
    Ok((1.0 - isotropic_affinity_sq(m, x).sqrt()).clamp(0.0, 1.0))
}

/// The earlier Hellinger-type measure on the isotropic family, in the form
/// consistent with `D^H = 1 − √(1 − D)`.
pub fn reference_isotropic_mlevel(m: usize, x: f64) -> Result<f64> {
    check_levels(m)?;
    check_range("x", x, 0.0, 1.0)?;
    let mf = m as f64;
    let rational = (mf * mf + mf - 1.0 + 2.0 * x - mf * mf * x) / (mf * (mf + 1.0));
    let cross = 2.0 / mf * ((mf - 1.0) / (mf + 1.0)).sqrt() * (x * (1.0 - x)).sqrt();
    Ok(1.0 - (rational + cross))
}
