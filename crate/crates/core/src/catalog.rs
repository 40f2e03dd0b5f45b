//! Named states used throughout the examples and checks.
//!
//! Kets are written with party 1 leftmost, so `|10⟩` has index 2.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{DiscordError, Result};
use crate::linalg::{real, CMatrix, CVector};
use crate::states::{DensityMatrix, PureState};

/// The four Bell states. `PsiPlus/PsiMinus = (|00⟩ ± |11⟩)/√2`,
/// `PhiPlus/PhiMinus = (|01⟩ ± |10⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bell {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PsiPlus, Bell::PsiMinus, Bell::PhiPlus, Bell::PhiMinus];

    pub fn amplitudes(self) -> [f64; 4] {
        let h = FRAC_1_SQRT_2;
        match self {
            Bell::PsiPlus => [h, 0.0, 0.0, h],
            Bell::PsiMinus => [h, 0.0, 0.0, -h],
            Bell::PhiPlus => [0.0, h, h, 0.0],
            Bell::PhiMinus => [0.0, h, -h, 0.0],
        }
    }

    pub fn state(self) -> PureState {
        PureState::from_real(&self.amplitudes(), vec![2, 2]).expect("normalized")
    }
}

/// Builds an `n`-qubit state from (bit string, amplitude) pairs, then
/// normalizes.
pub fn from_bitstrings(n: usize, terms: &[(&str, f64)]) -> Result<PureState> {
    let mut amps = vec![0.0; 1 << n];
    for (bits, a) in terms {
        if bits.len() != n {
            return Err(DiscordError::Dimension(format!(
                "bit string {bits:?} does not have {n} characters"
            )));
        }
        let idx = usize::from_str_radix(bits, 2)
            .map_err(|_| DiscordError::Parse(format!("invalid bit string {bits:?}")))?;
        amps[idx] += a;
    }
    let v = CVector::from_iterator(amps.len(), amps.into_iter().map(real));
    PureState::normalized(v, vec![2; n])
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz(n: usize) -> PureState {
    let mut amps = vec![0.0; 1 << n];
    amps[0] = FRAC_1_SQRT_2;
    amps[(1 << n) - 1] = FRAC_1_SQRT_2;
    PureState::from_real(&amps, vec![2; n]).expect("normalized")
}

/// Equal superposition of all `n`-bit strings with exactly `k` ones.
pub fn dicke_full(n: usize, k: usize) -> Result<PureState> {
    if k > n {
        return Err(DiscordError::Domain(format!(
            "excitation number {k} exceeds qubit count {n}"
        )));
    }
    let amps: Vec<f64> = (0..1usize << n)
        .map(|i| if i.count_ones() as usize == k { 1.0 } else { 0.0 })
        .collect();
    let v = CVector::from_iterator(amps.len(), amps.into_iter().map(real));
    PureState::normalized(v, vec![2; n])
}

/// Single-excitation Dicke state.
pub fn w_state(n: usize) -> PureState {
    dicke_full(n, 1).expect("k = 1 ≤ n")
}

/// `(|1010⟩ + |0101⟩)/√2`, the cyclic orbit of `1010`.
pub fn ghz1_4() -> PureState {
    from_bitstrings(4, &[("1010", 1.0), ("0101", 1.0)]).expect("valid bit strings")
}

/// `(|1100⟩ + |0110⟩ + |0011⟩ + |1001⟩)/2`, the cyclic orbit of `1100`.
pub fn w2_4() -> PureState {
    from_bitstrings(
        4,
        &[("1100", 1.0), ("0110", 1.0), ("0011", 1.0), ("1001", 1.0)],
    )
    .expect("valid bit strings")
}

/// `(|00⟩ + √3|01⟩ + √3|10⟩ + |11⟩)/(2√2)`; Schmidt coefficients
/// `√(2 ± √3)/2`.
pub fn schmidt_example() -> PureState {
    let s3 = 3f64.sqrt();
    PureState::from_real(&[0.5, s3 / 2.0, s3 / 2.0, 0.5], vec![2, 2]).expect("normalized")
}

fn check_unit(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&v) {
        return Err(DiscordError::Domain(format!(
            "{name} = {v} outside [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// `r |Φ⁺⟩⟨Φ⁺| + (1 − r) I/4`.
pub fn werner_2qubit(r: f64) -> Result<DensityMatrix> {
    check_unit("r", r, 0.0, 1.0)?;
    let v = Bell::PhiPlus.state();
    let m = CMatrix::identity(4, 4).scale((1.0 - r) / 4.0) + v.projector().scale(r);
    DensityMatrix::from_numeric(m, vec![2, 2])
}

/// `Σ λᵢ |Bᵢ⟩⟨Bᵢ|` over `Ψ⁺, Ψ⁻, Φ⁺, Φ⁻`.
pub fn bell_diagonal(lambdas: [f64; 4]) -> Result<DensityMatrix> {
    for (i, &l) in lambdas.iter().enumerate() {
        if !(l >= -1e-12) {
            return Err(DiscordError::Probability(format!(
                "weight {i} is negative: {l}"
            )));
        }
    }
    let total: f64 = lambdas.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(DiscordError::Probability(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    let m = Bell::ALL
        .iter()
        .zip(lambdas)
        .fold(CMatrix::zeros(4, 4), |acc, (b, l)| acc + b.state().projector().scale(l.max(0.0)));
    DensityMatrix::from_numeric(m, vec![2, 2])
}

fn swap_operator(m: usize) -> CMatrix {
    let d = m * m;
    let mut f = CMatrix::zeros(d, d);
    for i in 0..m {
        for j in 0..m {
            f[(i * m + j, j * m + i)] = real(1.0);
        }
    }
    f
}

fn check_levels(m: usize) -> Result<()> {
    if m < 2 {
        return Err(DiscordError::Domain(format!("level count must be ≥ 2, got {m}")));
    }
    Ok(())
}

/// `[(m − x) I + (m x − 1) F] / (m³ − m)` on `m × m` levels with `F` the
/// swap, `x = ⟨F⟩ ∈ [−1, 1]`. At `x = 1/m` this is `I/m²`.
pub fn werner_mlevel(m: usize, x: f64) -> Result<DensityMatrix> {
    check_levels(m)?;
    check_unit("x", x, -1.0, 1.0)?;
    let mf = m as f64;
    let d = m * m;
    let mat = (CMatrix::identity(d, d).scale(mf - x) + swap_operator(m).scale(mf * x - 1.0))
        .unscale(mf * mf * mf - mf);
    DensityMatrix::from_numeric(mat, vec![m, m])
}

/// `Σᵢ |ii⟩ / √m`.
pub fn max_entangled(m: usize) -> PureState {
    let mut amps = vec![0.0; m * m];
    for i in 0..m {
        amps[i * m + i] = 1.0 / (m as f64).sqrt();
    }
    PureState::from_real(&amps, vec![m, m]).expect("normalized")
}

/// `(1 − x)/(m² − 1) · I + (m² x − 1)/(m² − 1) · |Ψ⁺⟩⟨Ψ⁺|`, with `x` the
/// fidelity to the maximally entangled state. At `x = 1/m²` this is `I/m²`.
pub fn isotropic_mlevel(m: usize, x: f64) -> Result<DensityMatrix> {
    check_levels(m)?;
    check_unit("x", x, 0.0, 1.0)?;
    let d = m * m;
    let den = (d - 1) as f64;
    let mat = CMatrix::identity(d, d).scale((1.0 - x) / den)
        + max_entangled(m).projector().scale(((d as f64) * x - 1.0) / den);
    DensityMatrix::from_numeric(mat, vec![m, m])
}
