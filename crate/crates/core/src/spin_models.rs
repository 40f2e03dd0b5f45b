//! Ground states of collective spin models, expressed in the Dicke basis
//! `|N, m⟩` (`m` spins up, `S_z = m − N/2`).

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{DiscordError, Result};
use crate::linalg::{hermitian_eig, lanczos_ground, CMatrix, CVector, C64};
use crate::symmetric::{
    dh_symmetric, SymmetricMixedState, SymmetricPureState, SymmetricResult, SymmetricScan,
    SymmetricState,
};

/// `(S_x, S_y, S_z)` on the `N + 1` dimensional symmetric sector.
pub fn collective_spin(n: usize) -> (CMatrix, CMatrix, CMatrix) {
    let d = n + 1;
    let half = n as f64 / 2.0;
    let mut sp = CMatrix::zeros(d, d);
    for m in 0..n {
        sp[(m + 1, m)] = C64::new((((n - m) * (m + 1)) as f64).sqrt(), 0.0);
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm).scale(0.5);
    let sy = (&sp - &sm) * C64::new(0.0, -0.5);
    let sz = CMatrix::from_diagonal(&DVector::from_fn(d, |m, _| C64::new(m as f64 - half, 0.0)));
    (sx, sy, sz)
}

fn expectation(h: &CMatrix, coeffs: &[C64]) -> f64 {
    let v = CVector::from_column_slice(coeffs);
    (v.adjoint() * h * &v)[(0, 0)].re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct LmgParams {
    pub n: usize,
    /// Coupling; positive is ferromagnetic.
    pub lambda: f64,
    /// Anisotropy in `[0, 1]`.
    pub gamma: f64,
    pub h_z: f64,
}

impl LmgParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(DiscordError::Domain(format!("need at least 2 spins, got {}", self.n)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(DiscordError::Domain(format!("γ = {} outside [0, 1]", self.gamma)));
        }
        if !self.lambda.is_finite() || !self.h_z.is_finite() {
            return Err(DiscordError::Domain("non-finite model parameters".into()));
        }
        if self.lambda == 0.0 {
            return Err(DiscordError::DegenerateModel(
                "λ = 0 leaves only the field term".into(),
            ));
        }
        Ok(())
    }

    /// `−(λ/N)(S_x² + γ S_y²) − h_z S_z`.
    pub fn hamiltonian(&self) -> CMatrix {
        let (sx, sy, sz) = collective_spin(self.n);
        let nf = self.n as f64;
        (&sx * &sx + (&sy * &sy).scale(self.gamma)).scale(-self.lambda / nf) - sz.scale(self.h_z)
    }
}

/// `E_n = −(λ/2)(N/2 + 1) + (λ/N) n² − h_z n` for `n = S_z`.
pub fn lmg_isotropic_energy(p: &LmgParams, sz: f64) -> f64 {
    let nf = p.n as f64;
    -p.lambda / 2.0 * (nf / 2.0 + 1.0) + p.lambda / nf * sz * sz - p.h_z * sz
}

/// Dicke index of the isotropic ground state: the `S_z` minimizing the
/// energy, ties to smaller `|S_z|` and then to positive `S_z`.
pub fn lmg_isotropic_index(p: &LmgParams) -> Result<usize> {
    p.validate()?;
    let half = p.n as f64 / 2.0;
    let key = |m: usize| {
        let sz = m as f64 - half;
        (lmg_isotropic_energy(p, sz), sz.abs(), -sz)
    };
    let mut best = 0;
    for m in 1..=p.n {
        let (e, a, s) = key(m);
        let (eb, ab, sb) = key(best);
        let tol = 1e-12 * eb.abs().max(1.0);
        if e < eb - tol || ((e - eb).abs() <= tol && (a, s) < (ab, sb)) {
            best = m;
        }
    }
    Ok(best)
}

pub fn lmg_ground_isotropic(p: &LmgParams) -> Result<SymmetricPureState> {
    if p.gamma != 1.0 {
        return Err(DiscordError::Domain(format!(
            "isotropic ground state needs γ = 1, got {}",
            p.gamma
        )));
    }
    crate::symmetric::dicke_state(p.n, lmg_isotropic_index(p)?)
}

/// Squeezing parameter `tanh 2x` of the anisotropic ground state, computed
/// for `|h_z|` (negative fields are handled by a global spin flip).
pub fn lmg_tanh_2x(p: &LmgParams) -> Result<f64> {
    p.validate()?;
    let g = p.gamma;
    let h = p.h_z.abs() / p.lambda.abs();
    let t = if p.lambda < 0.0 {
        (1.0 - g) / (1.0 + g + 2.0 * h)
    } else if h > 1.0 {
        -(1.0 - g) / (2.0 * h - 1.0 - g)
    } else if h < 1.0 {
        -(h * h - g) / (2.0 - h * h - g)
    } else {
        return Err(DiscordError::Domain(
            "h_z/λ = 1 is the critical point; the squeezed form is undefined there".into(),
        ));
    };
    if !(t.abs() < 1.0) {
        return Err(DiscordError::Domain(format!("|tanh 2x| = {} ≥ 1", t.abs())));
    }
    Ok(t)
}

/// `Σ_n (−1)ⁿ √((2n−1)!!/(2n)!!) tanhⁿx |N, N−2n⟩`, normalized.
pub fn squeezed_dicke(n: usize, tanh_2x: f64) -> Result<SymmetricPureState> {
    if !(tanh_2x.abs() < 1.0) {
        return Err(DiscordError::Domain(format!("|tanh 2x| = {} ≥ 1", tanh_2x.abs())));
    }
    let t = tanh_2x / (1.0 + (1.0 - tanh_2x * tanh_2x).sqrt());
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    // ratio of double factorials, (−1)!! = 0!! = 1
    let mut ratio = 1.0;
    let mut power = 1.0;
    for k in 0..=n / 2 {
        if k > 0 {
            ratio *= (2 * k - 1) as f64 / (2 * k) as f64;
            power *= -t;
        }
        coeffs[n - 2 * k] = C64::new(power * ratio.sqrt(), 0.0);
    }
    SymmetricPureState::normalized(coeffs)
}

fn flip(state: SymmetricPureState) -> Result<SymmetricPureState> {
    let mut c = state.coeffs().to_vec();
    c.reverse();
    SymmetricPureState::new(c)
}

pub fn lmg_ground_aniso(p: &LmgParams) -> Result<SymmetricPureState> {
    if p.gamma >= 1.0 {
        return Err(DiscordError::Domain(format!(
            "anisotropic ground state needs γ < 1, got {}",
            p.gamma
        )));
    }
    if p.n % 2 != 0 {
        return Err(DiscordError::Domain(format!(
            "anisotropic ground state is defined for even N, got {}",
            p.n
        )));
    }
    let state = squeezed_dicke(p.n, lmg_tanh_2x(p)?)?;
    if p.h_z < 0.0 {
        flip(state)
    } else {
        Ok(state)
    }
}

pub fn lmg_ground(p: &LmgParams) -> Result<SymmetricPureState> {
    if p.gamma == 1.0 {
        lmg_ground_isotropic(p)
    } else {
        lmg_ground_aniso(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct UniaxialParams {
    pub n: usize,
    pub h_x: f64,
    pub h_z: f64,
}

impl UniaxialParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(DiscordError::Domain(format!("need at least 2 spins, got {}", self.n)));
        }
        if !self.h_x.is_finite() || !self.h_z.is_finite() {
            return Err(DiscordError::Domain("non-finite fields".into()));
        }
        Ok(())
    }

    /// `−S_x²/N − h_x S_x − h_z S_z`.
    pub fn hamiltonian(&self) -> CMatrix {
        let (sx, _, sz) = collective_spin(self.n);
        (&sx * &sx).scale(-1.0 / self.n as f64) - sx.scale(self.h_x) - sz.scale(self.h_z)
    }

    /// Mean-field stationarity condition in `s = sin(θ/2)`, `θ` the polar
    /// angle of the classical spin.
    pub fn stationarity(&self, s: f64) -> f64 {
        let c2 = 1.0 - 2.0 * s * s;
        s * self.h_z - self.h_x * c2 / (2.0 * (1.0 - s * s).sqrt()) - s * c2
    }

    pub fn squeezing(&self, s: f64) -> f64 {
        let s2 = s * s;
        let w = (1.0 - s2).powf(1.5);
        let gamma = -(1.0 - 5.0 * s2) / 4.0 + self.h_x * s * (2.0 - s2) / (8.0 * w);
        let delta = self.h_z - (1.0 - 7.0 * s2) / 2.0 + self.h_x * s * (4.0 - 3.0 * s2) / (4.0 * w);
        2.0 * gamma / delta
    }
}

const ROOT_GRID: usize = 20_000;
const ROOT_EDGE: f64 = 1e-9;

/// All roots of the stationarity condition in `(−1, 1)`: sign changes on a
/// fine grid, then bisection to full precision.
pub fn uniaxial_roots(p: &UniaxialParams) -> Vec<f64> {
    let f = |s: f64| p.stationarity(s);
    let lo = -1.0 + ROOT_EDGE;
    let hi = 1.0 - ROOT_EDGE;
    let xs: Vec<f64> = (0..=ROOT_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / ROOT_GRID as f64)
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..ROOT_GRID {
        let (a, b) = (xs[i], xs[i + 1]);
        let (fa, fb) = (fs[i], fs[i + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb < 0.0 {
            let (mut a, mut b, mut fa) = (a, b, fa);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 || (b - a) < 1e-16 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    if fs[ROOT_GRID] == 0.0 {
        roots.push(xs[ROOT_GRID]);
    }
    roots
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniaxialCandidate {
    pub sin_half_angle: f64,
    pub residual: f64,
    pub tanh_2x: f64,
    /// `None` when the squeezing parameter is outside `(−1, 1)`.
    pub energy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct UniaxialGround {
    pub state: SymmetricPureState,
    pub chosen: usize,
    pub candidates: Vec<UniaxialCandidate>,
}

/// `exp(−iθ S_y)` on the symmetric sector.
pub fn rotation_y(n: usize, theta: f64) -> Result<CMatrix> {
    let (_, sy, _) = collective_spin(n);
    let eig = hermitian_eig(&sy)?;
    let v = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&DVector::from_iterator(
        n + 1,
        eig.eigenvalues.iter().map(|w| C64::from_polar(1.0, -theta * w)),
    ));
    Ok(v * phases * v.adjoint())
}

/// Squeezed state around the mean-field direction for every stationary
/// point, keeping the candidate of lowest energy.
pub fn uniaxial_ground(p: &UniaxialParams) -> Result<UniaxialGround> {
    p.validate()?;
    let roots = uniaxial_roots(p);
    if roots.is_empty() {
        return Err(DiscordError::DegenerateModel(
            "mean-field condition has no root in (−1, 1)".into(),
        ));
    }
    let h = p.hamiltonian();
    let mut candidates = Vec::new();
    let mut states = Vec::new();
    for &s in &roots {
        let t = p.squeezing(s);
        let built = if t.is_finite() && t.abs() < 1.0 {
            let theta = 2.0 * s.asin();
            let g = squeezed_dicke(p.n, t)?;
            let rotated = rotation_y(p.n, theta)? * CVector::from_column_slice(g.coeffs());
            let state = SymmetricPureState::normalized(rotated.iter().copied().collect())?;
            let e = expectation(&h, state.coeffs());
            Some((state, e))
        } else {
            None
        };
        candidates.push(UniaxialCandidate {
            sin_half_angle: s,
            residual: p.stationarity(s),
            tanh_2x: t,
            energy: built.as_ref().map(|b| b.1),
        });
        states.push(built.map(|b| b.0));
    }
    let mut chosen: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        let Some(e) = c.energy else { continue };
        match chosen {
            Some(j) if candidates[j].energy.expect("chosen has energy") <= e + 1e-12 => {}
            _ => chosen = Some(i),
        }
    }
    let chosen = chosen.ok_or_else(|| {
        DiscordError::Domain("every stationary point gives |tanh 2x| ≥ 1".into())
    })?;
    Ok(UniaxialGround {
        state: states[chosen].take().expect("chosen state exists"),
        chosen,
        candidates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct DickeParams {
    pub n: usize,
    pub omega: f64,
    pub omega0: f64,
    pub lambda: f64,
    pub fock_cutoff: usize,
}

impl DickeParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(DiscordError::Domain("need at least one atom".into()));
        }
        if !(self.omega > 0.0) || !(self.omega0 > 0.0) {
            return Err(DiscordError::Domain("ω and ω₀ must be positive".into()));
        }
        if !self.lambda.is_finite() {
            return Err(DiscordError::Domain("non-finite coupling".into()));
        }
        if self.fock_cutoff < 1 {
            return Err(DiscordError::Domain("Fock cutoff must be at least 1".into()));
        }
        Ok(())
    }

    pub fn critical_coupling(&self) -> f64 {
        (self.omega * self.omega0).sqrt() / 2.0
    }
}

/// `H = ω₀ J_z + ω a†a + (λ/√N)(a† + a)(J₊ + J₋)` restricted to even total
/// excitation parity `(−1)^(m + n) = 1`, which contains the ground state.
struct DickeSector {
    atoms: usize,
    /// `(m, n)` for every basis state.
    labels: Vec<(usize, usize)>,
    diagonal: Vec<f64>,
    /// Symmetric couplings `(i, j, value)` with `i < j`.
    couplings: Vec<(usize, usize, f64)>,
}

impl DickeSector {
    fn new(p: &DickeParams) -> Self {
        let (na, c) = (p.n, p.fock_cutoff);
        let mut index = vec![usize::MAX; (na + 1) * (c + 1)];
        let mut labels = Vec::new();
        for m in 0..=na {
            for n in 0..=c {
                if (m + n) % 2 == 0 {
                    index[m * (c + 1) + n] = labels.len();
                    labels.push((m, n));
                }
            }
        }
        let half = na as f64 / 2.0;
        let diagonal = labels
            .iter()
            .map(|&(m, n)| p.omega0 * (m as f64 - half) + p.omega * n as f64)
            .collect();
        let g = p.lambda / (na as f64).sqrt();
        let mut couplings = Vec::new();
        for (i, &(m, n)) in labels.iter().enumerate() {
            if m == na {
                continue;
            }
            let jp = (((na - m) * (m + 1)) as f64).sqrt();
            if n < c {
                let j = index[(m + 1) * (c + 1) + n + 1];
                couplings.push((i, j, g * jp * ((n + 1) as f64).sqrt()));
            }
            if n > 0 {
                let j = index[(m + 1) * (c + 1) + n - 1];
                couplings.push((i, j, g * jp * (n as f64).sqrt()));
            }
        }
        Self {
            atoms: na,
            labels,
            diagonal,
            couplings,
        }
    }

    fn dim(&self) -> usize {
        self.labels.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diagonal) {
            *yi = d * xi;
        }
        for &(i, j, v) in &self.couplings {
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
    }

    /// Traces out the field: `ρ[m, m'] = Σ_n ψ(m, n) ψ(m', n)`.
    fn atomic_state(&self, psi: &DVector<f64>, cutoff: usize) -> CMatrix {
        let d = self.atoms + 1;
        let mut grid = vec![vec![0.0; cutoff + 1]; d];
        for (k, &(m, n)) in self.labels.iter().enumerate() {
            grid[m][n] = psi[k];
        }
        CMatrix::from_fn(d, d, |a, b| {
            C64::new(grid[a].iter().zip(&grid[b]).map(|(x, y)| x * y).sum(), 0.0)
        })
    }
}

const LANCZOS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DickeGround {
    pub energy: f64,
    pub atomic: SymmetricMixedState,
    pub mean_photons: f64,
    /// Largest Fock-state population, a truncation indicator.
    pub top_fock_population: f64,
}

/// Ground state at a fixed Fock cutoff, reduced to the atoms.
pub fn dicke_ground(p: &DickeParams) -> Result<DickeGround> {
    p.validate()?;
    let sector = DickeSector::new(p);
    let (energy, psi) = lanczos_ground(sector.dim(), |x, y| sector.apply(x, y), LANCZOS_TOL, 50)?;
    let mut mean_photons = 0.0;
    let mut top = 0.0;
    for (k, &(_, n)) in sector.labels.iter().enumerate() {
        let w = psi[k] * psi[k];
        mean_photons += w * n as f64;
        if n == p.fock_cutoff {
            top += w;
        }
    }
    let rho = sector.atomic_state(&psi, p.fock_cutoff);
    let trace = rho.trace().re;
    let atomic = SymmetricMixedState::from_dicke_matrix(&rho.unscale(trace))?;
    Ok(DickeGround {
        energy,
        atomic,
        mean_photons,
        top_fock_population: top,
    })
}

pub fn dicke_ground_reduced(p: &DickeParams) -> Result<SymmetricMixedState> {
    dicke_ground(p).map(|g| g.atomic)
}

/// Allowed change in D^H when the Fock cutoff is doubled.
pub const CUTOFF_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct DickeDiscord {
    pub value: f64,
    pub result: SymmetricResult,
    pub cutoff: usize,
    /// `|D^H(2c) − D^H(c)|`.
    pub cutoff_delta: f64,
    pub energy: f64,
}

/// D^H of the atomic ground state at cutoff `c`, checked against `2c`.
/// The reported value comes from the larger cutoff.
pub fn dicke_discord(p: &DickeParams, scan: &SymmetricScan) -> Result<DickeDiscord> {
    p.validate()?;
    let coarse = dicke_ground(p)?;
    let doubled = DickeParams {
        fock_cutoff: 2 * p.fock_cutoff,
        ..*p
    };
    let fine = dicke_ground(&doubled)?;
    let a = dh_symmetric(&SymmetricState::Mixed(coarse.atomic), scan)?;
    let b = dh_symmetric(&SymmetricState::Mixed(fine.atomic), scan)?;
    let delta = (a.value - b.value).abs();
    if delta > CUTOFF_TOL {
        return Err(DiscordError::Convergence {
            cutoff: p.fock_cutoff,
            delta,
            suggested: doubled.fock_cutoff,
        });
    }
    Ok(DickeDiscord {
        value: b.value,
        result: b,
        cutoff: p.fock_cutoff,
        cutoff_delta: delta,
        energy: fine.energy,
    })
}

/// Doubles the cutoff from `p.fock_cutoff` until the contract holds or
/// `max_cutoff` would be exceeded.
pub fn dicke_discord_converged(
    p: &DickeParams,
    scan: &SymmetricScan,
    max_cutoff: usize,
) -> Result<DickeDiscord> {
    let mut q = *p;
    loop {
        match dicke_discord(&q, scan) {
            Err(DiscordError::Convergence { suggested, .. }) if 2 * suggested <= max_cutoff => {
                q.fock_cutoff = suggested;
            }
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_symmetric_ground;
    use nalgebra::DMatrix;

    fn exact_ground(h: &CMatrix) -> Vec<C64> {
        let eig = hermitian_eig(h).unwrap();
        eig.eigenvector(0).iter().copied().collect()
    }

    fn fidelity(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm()
    }

    #[test]
    fn collective_spin_algebra() {
        let (sx, sy, sz) = collective_spin(5);
        let comm = &sx * &sy - &sy * &sx;
        let target = sz.scale(1.0) * C64::new(0.0, 1.0);
        assert!((comm - target).norm() < 1e-12);
        let casimir = &sx * &sx + &sy * &sy + &sz * &sz;
        let s = 2.5;
        assert!((casimir - CMatrix::identity(6, 6).scale(s * (s + 1.0))).norm() < 1e-12);
    }

    fn lmg(n: usize, lambda: f64, gamma: f64, h_z: f64) -> LmgParams {
        LmgParams {
            n,
            lambda,
            gamma,
            h_z,
        }
    }

    #[test]
    fn isotropic_index_examples() {
        assert_eq!(lmg_isotropic_index(&lmg(20, 1.0, 1.0, 1.5)).unwrap(), 20);
        assert_eq!(lmg_isotropic_index(&lmg(20, -1.0, 1.0, 0.5)).unwrap(), 20);
        assert_eq!(lmg_isotropic_index(&lmg(20, 1.0, 1.0, 0.5)).unwrap(), 15);
        assert_eq!(lmg_isotropic_index(&lmg(20, 1.0, 1.0, -0.5)).unwrap(), 5);
        assert_eq!(lmg_isotropic_index(&lmg(20, -1.0, 1.0, -0.5)).unwrap(), 0);
        assert!(matches!(
            lmg_isotropic_index(&lmg(20, 0.0, 1.0, 0.5)),
            Err(DiscordError::DegenerateModel(_))
        ));
    }

    #[test]
    fn isotropic_index_is_exact_ground_state() {
        for (lambda, h) in [(1.0, 0.37), (1.0, 0.8), (1.0, 1.3), (-1.0, 0.2), (2.0, -0.9)] {
            let p = lmg(12, lambda, 1.0, h);
            let m = lmg_isotropic_index(&p).unwrap();
            let g = exact_ground(&p.hamiltonian());
            assert!(g[m].norm() > 1.0 - 1e-9, "λ={lambda} h={h}");
        }
    }

    #[test]
    fn tanh_branches() {
        assert!((lmg_tanh_2x(&lmg(20, 1.0, 0.5, 2.0)).unwrap() + 0.2).abs() < 1e-15);
        assert!((lmg_tanh_2x(&lmg(20, -1.0, 0.5, 0.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(lmg_tanh_2x(&lmg(20, 1.0, 0.5, 1.0)).is_err());
        let limit = squeezed_dicke(20, lmg_tanh_2x(&lmg(20, 1.0, 1.0 - 1e-15, 2.0)).unwrap()).unwrap();
        assert!((limit.coeffs()[20].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squeezed_coefficients() {
        let t2 = -0.2;
        let t = t2 / (1.0 + (1.0f64 - t2 * t2).sqrt());
        assert!(((2.0 * t / (1.0 + t * t)) - t2).abs() < 1e-15);
        let s = squeezed_dicke(6, t2).unwrap();
        let c = s.coeffs();
        let c0 = c[6].re;
        assert!((c[4].re / c0 - (-t) * (0.5f64).sqrt()).abs() < 1e-14);
        assert!((c[2].re / c0 - t * t * (3.0f64 / 8.0).sqrt()).abs() < 1e-14);
        assert!(c[5].norm() == 0.0 && c[3].norm() == 0.0);
        let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn aniso_requires_even_n_and_flips_for_negative_field() {
        assert!(lmg_ground_aniso(&lmg(7, 1.0, 0.5, 2.0)).is_err());
        let up = lmg_ground_aniso(&lmg(8, 1.0, 0.5, 2.0)).unwrap();
        let down = lmg_ground_aniso(&lmg(8, 1.0, 0.5, -2.0)).unwrap();
        let mut rev = down.coeffs().to_vec();
        rev.reverse();
        assert_eq!(rev, up.coeffs());
    }

    #[test]
    fn aniso_state_approximates_exact_ground_state() {
        for (lambda, h) in [(1.0, 2.0), (1.0, 3.0), (-1.0, 0.5), (-1.0, 1.0)] {
            let p = lmg(20, lambda, 0.5, h);
            let g = lmg_ground_aniso(&p).unwrap();
            let exact = exact_ground(&p.hamiltonian());
            let f = fidelity(g.coeffs(), &exact);
            assert!(f > 0.99, "λ={lambda} h={h}: fidelity {f}");
        }
    }

    #[test]
    fn uniaxial_roots_examples() {
        let p = UniaxialParams {
            n: 20,
            h_x: 0.0,
            h_z: 2.0,
        };
        let r = uniaxial_roots(&p);
        assert_eq!(r.len(), 1);
        assert!(r[0].abs() < 1e-12);
        assert!((p.squeezing(0.0) + 1.0 / 3.0).abs() < 1e-15);

        let p = UniaxialParams {
            n: 20,
            h_x: 0.0,
            h_z: 0.5,
        };
        let r = uniaxial_roots(&p);
        assert_eq!(r.len(), 3, "{r:?}");
        for (a, b) in r.iter().zip([-0.5, 0.0, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }

        let p = UniaxialParams {
            n: 20,
            h_x: 0.3,
            h_z: 0.5,
        };
        for s in uniaxial_roots(&p) {
            assert!(p.stationarity(s).abs() <= 1e-12);
        }
    }

    #[test]
    fn uniaxial_matches_lmg_without_transverse_field() {
        let u = uniaxial_ground(&UniaxialParams {
            n: 20,
            h_x: 0.0,
            h_z: 2.0,
        })
        .unwrap();
        let l = lmg_ground_aniso(&lmg(20, 1.0, 0.0, 2.0)).unwrap();
        assert!(fidelity(u.state.coeffs(), l.coeffs()) > 1.0 - 1e-12);
    }

    #[test]
    fn uniaxial_picks_lowest_energy_candidate() {
        for (h_x, h_z) in [(0.3, 0.5), (-0.2, 0.5), (0.1, 1.5), (0.5, 0.2)] {
            let p = UniaxialParams { n: 20, h_x, h_z };
            let g = uniaxial_ground(&p).unwrap();
            let e = g.candidates[g.chosen].energy.unwrap();
            for c in &g.candidates {
                if let Some(other) = c.energy {
                    assert!(e <= other + 1e-12);
                }
            }
            let exact = exact_ground(&p.hamiltonian());
            let f = fidelity(g.state.coeffs(), &exact);
            assert!(f > 0.9, "h=({h_x},{h_z}) fidelity {f}");
        }
    }

    fn dense_dicke(p: &DickeParams) -> DMatrix<f64> {
        // full space, both parities
        let (na, c) = (p.n, p.fock_cutoff);
        let d = (na + 1) * (c + 1);
        let idx = |m: usize, n: usize| m * (c + 1) + n;
        let g = p.lambda / (na as f64).sqrt();
        let mut h = DMatrix::zeros(d, d);
        for m in 0..=na {
            for n in 0..=c {
                h[(idx(m, n), idx(m, n))] = p.omega0 * (m as f64 - na as f64 / 2.0) + p.omega * n as f64;
                if m < na {
                    let jp = (((na - m) * (m + 1)) as f64).sqrt();
                    for n2 in [n + 1, n.wrapping_sub(1)] {
                        if n2 <= c {
                            let a = (n.max(n2) as f64).sqrt();
                            h[(idx(m + 1, n2), idx(m, n))] += g * jp * a;
                            h[(idx(m, n), idx(m + 1, n2))] += g * jp * a;
                        }
                    }
                }
            }
        }
        h
    }

    #[test]
    fn dicke_parity_sector_matches_full_space() {
        let p = DickeParams {
            n: 4,
            omega: 1.0,
            omega0: 1.0,
            lambda: 0.7,
            fock_cutoff: 20,
        };
        let (e_full, v) = real_symmetric_ground(dense_dicke(&p));
        let g = dicke_ground(&p).unwrap();
        assert!((g.energy - e_full).abs() < 1e-9);
        let c = p.fock_cutoff;
        let rho = CMatrix::from_fn(5, 5, |a, b| {
            C64::new((0..=c).map(|n| v[a * (c + 1) + n] * v[b * (c + 1) + n]).sum(), 0.0)
        });
        assert!((g.atomic.dicke_matrix() - rho).norm() < 1e-8);
    }

    #[test]
    fn dicke_decoupled_ground_state() {
        let p = DickeParams {
            n: 6,
            omega: 1.0,
            omega0: 1.0,
            lambda: 0.0,
            fock_cutoff: 4,
        };
        let g = dicke_ground(&p).unwrap();
        assert!((g.energy + 3.0).abs() < 1e-12);
        assert!((g.atomic.dicke_matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        let d = dicke_discord(&p, &SymmetricScan::default()).unwrap();
        assert!(d.value < 1e-12);
    }

    #[test]
    fn dicke_small_instance_cutoff_convergence() {
        let p = DickeParams {
            n: 2,
            omega: 1.0,
            omega0: 1.0,
            lambda: 0.3,
            fock_cutoff: 30,
        };
        let a = dicke_ground(&p).unwrap();
        let b = dicke_ground(&DickeParams {
            fock_cutoff: 60,
            ..p
        })
        .unwrap();
        assert!((a.energy - b.energy).abs() < 1e-10);
    }

    #[test]
    fn dicke_reduced_state_is_permutation_invariant() {
        let p = DickeParams {
            n: 4,
            omega: 1.0,
            omega0: 1.0,
            lambda: 0.6,
            fock_cutoff: 30,
        };
        let rho = dicke_ground_reduced(&p).unwrap().to_full().unwrap();
        let m = rho.matrix();
        for (a, b) in [(0usize, 1usize), (1, 2), (2, 3), (0, 3)] {
            let perm = CMatrix::from_fn(16, 16, |i, j| {
                let bit = |x: usize, k: usize| (x >> (3 - k)) & 1;
                let mut s = j;
                if bit(j, a) != bit(j, b) {
                    s ^= (1 << (3 - a)) | (1 << (3 - b));
                }
                C64::new(if i == s { 1.0 } else { 0.0 }, 0.0)
            });
            assert!((&perm * m - m * &perm).norm() < 1e-9);
        }
    }

    #[test]
    fn dicke_cutoff_contract_reports_insufficient_cutoff() {
        let p = DickeParams {
            n: 6,
            omega: 1.0,
            omega0: 1.0,
            lambda: 1.0,
            fock_cutoff: 2,
        };
        match dicke_discord(&p, &SymmetricScan::default()) {
            Err(DiscordError::Convergence { suggested, .. }) => assert_eq!(suggested, 4),
            other => panic!("expected a convergence error, got {other:?}"),
        }
    }
}
