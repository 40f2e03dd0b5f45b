//! Variational core: optimal probabilities for a fixed product basis, D^H at
//! a fixed basis, the grid-seeded multi-start optimizer over qubit bases, and
//! an exhaustive grid oracle.
//!
//! For a state `ρ = Σ_k λ_k |φ_k⟩⟨φ_k|` and product basis `{|σ_n⟩}` define the
//! basis terms `q_n = Σ_k √λ_k |⟨φ_k|σ_n⟩|²`. The best joint distribution on
//! that basis is `p_n = q_n² / Σ q_m²`, the maximal affinity is `√(Σ q_n²)`,
//! and D^H is one minus the affinity maximized over bases.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DiscordError, Result};
use crate::linalg::{CMatrix, C64};
use crate::optim::{self, SimplexOptions};
use crate::random::rng;
use crate::states::{
    ClassicalState, DensityMatrix, ProductBasis, PureState, QubitBasisAngles, State,
};

/// Eigenvalues below this are diagonalization round-off. Their square roots
/// would otherwise leak ~1e-8 of spurious weight into every basis term.
pub const SPECTRUM_FLOOR: f64 = 1e-13;

/// `ρ` prepared for repeated basis evaluations: one eigendecomposition,
/// reused for every candidate basis.
#[derive(Debug, Clone)]
pub struct Objective {
    dims: Vec<usize>,
    /// `(√λ_k, |φ_k⟩)` for every strictly positive eigenvalue.
    components: Vec<(f64, Vec<C64>)>,
}

impl Objective {
    pub fn new(state: &State) -> Self {
        match state {
            State::Pure(p) => Self::from_pure(p),
            State::Mixed(m) => Self::from_density(m),
        }
    }

    pub fn from_pure(p: &PureState) -> Self {
        Self {
            dims: p.dims().to_vec(),
            components: vec![(1.0, p.amplitudes().iter().copied().collect())],
        }
    }

    pub fn from_density(m: &DensityMatrix) -> Self {
        let eig = m.eig();
        let components = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > SPECTRUM_FLOOR)
            .map(|(k, &w)| (w.sqrt(), eig.eigenvectors.column(k).iter().copied().collect()))
            .collect();
        Self {
            dims: m.dims().to_vec(),
            components,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    /// `q_n` for a product basis given by its local unitaries.
    pub fn terms_for_unitaries(&self, unitaries: &[CMatrix]) -> Vec<f64> {
        let size: usize = self.dims.iter().product();
        let adjoints: Vec<CMatrix> = unitaries.iter().map(|u| u.adjoint()).collect();
        let mut q = vec![0.0; size];
        let mut buf = vec![C64::new(0.0, 0.0); size];
        for (w, phi) in &self.components {
            buf.copy_from_slice(phi);
            for (p, ua) in adjoints.iter().enumerate() {
                crate::linalg::apply_local(&mut buf, &self.dims, p, ua);
            }
            for (qn, amp) in q.iter_mut().zip(&buf) {
                *qn += w * amp.norm_sqr();
            }
        }
        q
    }

    pub fn terms(&self, basis: &ProductBasis) -> Vec<f64> {
        self.terms_for_unitaries(&basis.local_unitaries())
    }

    pub fn affinity(&self, basis: &ProductBasis) -> f64 {
        affinity_from_terms(&self.terms(basis))
    }

    /// Affinity for qubit bases given as `[θ₁, φ₁, θ₂, φ₂, …]`. Allocation
    /// light; this is the optimizer's hot path.
    pub fn qubit_affinity(&self, params: &[f64], scratch: &mut QubitScratch) -> f64 {
        let n = self.dims.len();
        debug_assert_eq!(params.len(), 2 * n);
        let size = 1usize << n;
        scratch.q.clear();
        scratch.q.resize(size, 0.0);
        scratch.buf.resize(size, C64::new(0.0, 0.0));
        scratch.locals.clear();
        scratch.locals.extend(
            params
                .chunks_exact(2)
                .map(|a| QubitBasisAngles::new(a[0], a[1]).vectors()),
        );
        for (w, phi) in &self.components {
            scratch.buf.copy_from_slice(phi);
            for (party, [plus, minus]) in scratch.locals.iter().enumerate() {
                let inner = 1usize << (n - 1 - party);
                let stride = inner << 1;
                let mut base = 0;
                while base < size {
                    for i in base..base + inner {
                        let a0 = scratch.buf[i];
                        let a1 = scratch.buf[i + inner];
                        scratch.buf[i] = plus[0].conj() * a0 + plus[1].conj() * a1;
                        scratch.buf[i + inner] = minus[0].conj() * a0 + minus[1].conj() * a1;
                    }
                    base += stride;
                }
            }
            for (qn, amp) in scratch.q.iter_mut().zip(&scratch.buf) {
                *qn += w * amp.norm_sqr();
            }
        }
        affinity_from_terms(&scratch.q)
    }
}

#[derive(Debug, Default)]
pub struct QubitScratch {
    q: Vec<f64>,
    buf: Vec<C64>,
    locals: Vec<[[C64; 2]; 2]>,
}

fn affinity_from_terms(q: &[f64]) -> f64 {
    q.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn probabilities_from_terms(q: &[f64]) -> Vec<f64> {
    let norm: f64 = q.iter().map(|x| x * x).sum();
    assert!(norm > 0.0, "all basis overlaps vanish; basis is not complete");
    let mut p: Vec<f64> = q.iter().map(|x| x * x / norm).collect();
    // push the last bit of round-off into the largest entry so the table
    // sums to one within the classical-state tolerance
    let s: f64 = p.iter().sum();
    if let Some(imax) = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])) {
        p[imax] += 1.0 - s;
        p[imax] = p[imax].max(0.0);
    }
    p
}

fn check_basis(dims: &[usize], basis: &ProductBasis) -> Result<()> {
    if basis.dims() != dims {
        return Err(DiscordError::Dimension(format!(
            "basis dimensions {:?} do not match state dimensions {dims:?}",
            basis.dims()
        )));
    }
    Ok(())
}

/// Optimal table for a pure state: `pᵢ = |⟨ψ|σᵢ⟩|⁴ / Σₙ |⟨ψ|σₙ⟩|⁴`.
pub fn optimal_probs_pure(psi: &PureState, basis: &ProductBasis) -> Result<Vec<f64>> {
    check_basis(psi.dims(), basis)?;
    Ok(probabilities_from_terms(&Objective::from_pure(psi).terms(basis)))
}

/// Optimal table for a mixed state: `pᵢ ∝ (Σ_k √λ_k |⟨φ_k|σᵢ⟩|²)²`.
pub fn optimal_probs_mixed(rho: &DensityMatrix, basis: &ProductBasis) -> Result<Vec<f64>> {
    check_basis(rho.dims(), basis)?;
    Ok(probabilities_from_terms(&Objective::from_density(rho).terms(basis)))
}

pub fn optimal_probs(state: &State, basis: &ProductBasis) -> Result<Vec<f64>> {
    match state {
        State::Pure(p) => optimal_probs_pure(p, basis),
        State::Mixed(m) => optimal_probs_mixed(m, basis),
    }
}

/// D^H restricted to one product basis: `1 − √(Σₙ q_n²)`.
pub fn dh_fixed_basis(state: &State, basis: &ProductBasis) -> Result<f64> {
    check_basis(state.dims(), basis)?;
    Ok((1.0 - Objective::new(state).affinity(basis)).clamp(0.0, 1.0))
}

/// The nearest classical state on a fixed basis.
pub fn nearest_on_basis(state: &State, basis: &ProductBasis) -> Result<ClassicalState> {
    let p = optimal_probs(state, basis)?;
    ClassicalState::new(basis.clone(), p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Grid points per angle axis for the coarse seeding scan.
    pub grid_points: usize,
    /// Number of best grid cells refined by the simplex search.
    pub restarts: usize,
    /// Convergence tolerance on the affinity.
    pub tolerance: f64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Seed for refinement jitter. `0` disables jitter.
    pub seed: u64,
    /// Upper bound on the number of coarse grid cells. Above it the
    /// per-axis density is reduced.
    pub max_grid_cells: usize,
    pub max_iterations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_points: 9,
            restarts: 8,
            tolerance: 1e-9,
            workers: None,
            seed: 0,
            max_grid_cells: 250_000,
            max_iterations: 5000,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(DiscordError::Usage("grid_points must be at least 2".into()));
        }
        if self.restarts == 0 {
            return Err(DiscordError::Usage("restarts must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(DiscordError::Usage("tolerance must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(DiscordError::Usage("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Runs `f` on a dedicated pool when a worker count is given.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| DiscordError::Resource(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerDiagnostics {
    pub grid_points_per_axis: usize,
    pub grid_cells: usize,
    pub best_grid_affinity: f64,
    /// `[θ₁, φ₁, …]` of the best coarse cell.
    pub best_grid_cell: Vec<f64>,
    pub restarts_used: usize,
    pub refinement_iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct DiscordResult {
    pub value: f64,
    pub affinity: f64,
    pub optimal_basis: ProductBasis,
    pub optimal_probabilities: Vec<f64>,
    pub diagnostics: OptimizerDiagnostics,
}

impl DiscordResult {
    pub fn classical_state(&self) -> ClassicalState {
        ClassicalState::new(self.optimal_basis.clone(), self.optimal_probabilities.clone())
            .expect("optimizer tables are normalized")
    }
}

fn theta_axis(n: usize) -> Vec<f64> {
    (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect()
}

/// `n` points on `[0, 2π]`; the endpoint duplicates 0 and is dropped.
fn phi_axis(n: usize) -> Vec<f64> {
    (0..n - 1).map(|j| 2.0 * PI * j as f64 / (n - 1) as f64).collect()
}

struct AngleGrid {
    cells_per_party: Vec<(f64, f64)>,
    parties: usize,
}

impl AngleGrid {
    fn new(points: usize, parties: usize) -> Self {
        let thetas = theta_axis(points);
        let phis = phi_axis(points);
        let cells_per_party = thetas
            .iter()
            .flat_map(|&t| phis.iter().map(move |&p| (t, p)))
            .collect();
        Self {
            cells_per_party,
            parties,
        }
    }

    fn len(&self) -> Option<usize> {
        self.cells_per_party.len().checked_pow(self.parties as u32)
    }

    fn params(&self, mut index: usize, out: &mut Vec<f64>) {
        let m = self.cells_per_party.len();
        out.clear();
        out.resize(2 * self.parties, 0.0);
        for party in (0..self.parties).rev() {
            let (t, p) = self.cells_per_party[index % m];
            out[2 * party] = t;
            out[2 * party + 1] = p;
            index /= m;
        }
    }
}

fn require_qubits(state: &State) -> Result<()> {
    if !state.is_qubits() {
        return Err(DiscordError::Unsupported(format!(
            "basis optimization is implemented for qubit parties only, got dimensions {:?}",
            state.dims()
        )));
    }
    Ok(())
}

/// Maximizes the affinity over qubit product bases: coarse grid, then
/// simplex refinement from the best cells.
pub fn dh_optimize(state: &State, config: &OptimizerConfig) -> Result<DiscordResult> {
    config.validate()?;
    require_qubits(state)?;
    let objective = Objective::new(state);
    with_workers(config.workers, || optimize_prepared(&objective, config))?
}

fn optimize_prepared(objective: &Objective, config: &OptimizerConfig) -> Result<DiscordResult> {
    let parties = objective.dims().len();

    let mut points = config.grid_points.max(3);
    let grid = loop {
        let g = AngleGrid::new(points, parties);
        match g.len() {
            Some(n) if n <= config.max_grid_cells => break Some(g),
            _ if points > 3 => points -= 1,
            _ => break None,
        }
    };

    // Seeds: every cell of the coarse grid, or a fixed pseudo-random sample
    // when even the coarsest grid is over budget.
    let seeds: Vec<Vec<f64>> = match &grid {
        Some(g) => {
            let n = g.len().expect("bounded");
            let values: Vec<f64> = (0..n)
                .into_par_iter()
                .map_init(
                    || (QubitScratch::default(), Vec::new()),
                    |(scratch, params), idx| {
                        g.params(idx, params);
                        objective.qubit_affinity(params, scratch)
                    },
                )
                .collect();
            top_cells(&values, config.restarts)
                .into_iter()
                .map(|idx| {
                    let mut p = Vec::new();
                    g.params(idx, &mut p);
                    p
                })
                .collect()
        }
        None => {
            let mut r = rng(config.seed ^ 0x5eed);
            let samples: Vec<Vec<f64>> = (0..config.max_grid_cells)
                .map(|_| {
                    (0..parties)
                        .flat_map(|_| [r.random::<f64>() * PI, r.random::<f64>() * 2.0 * PI])
                        .collect()
                })
                .collect();
            let values: Vec<f64> = samples
                .par_iter()
                .map_init(QubitScratch::default, |s, p| objective.qubit_affinity(p, s))
                .collect();
            top_cells(&values, config.restarts)
                .into_iter()
                .map(|i| samples[i].clone())
                .collect()
        }
    };
    let grid_cells = grid
        .as_ref()
        .and_then(AngleGrid::len)
        .unwrap_or(config.max_grid_cells);

    let mut scratch = QubitScratch::default();
    let best_grid_cell = seeds[0].clone();
    let best_grid_affinity = objective.qubit_affinity(&best_grid_cell, &mut scratch);

    let step = PI / (points - 1) as f64 / 2.0;
    let refined: Vec<optim::SimplexOutcome> = seeds
        .par_iter()
        .enumerate()
        .map(|(k, x0)| {
            let mut start = x0.clone();
            if config.seed != 0 {
                let mut r = rng(config.seed.wrapping_add(k as u64));
                for x in start.iter_mut() {
                    *x += (r.random::<f64>() - 0.5) * step * 0.5;
                }
            }
            let mut scratch = QubitScratch::default();
            optim::minimize(
                |p| -objective.qubit_affinity(p, &mut scratch),
                &start,
                &SimplexOptions {
                    step,
                    f_tol: config.tolerance * 1e-3,
                    max_iterations: config.max_iterations,
                    restarts: 3,
                },
            )
        })
        .collect();

    let mut best_params = best_grid_cell.clone();
    let mut best_affinity = best_grid_affinity;
    for out in &refined {
        if -out.value > best_affinity {
            best_affinity = -out.value;
            best_params = out.x.clone();
        }
    }

    let angles: Vec<QubitBasisAngles> = best_params
        .chunks_exact(2)
        .map(|a| QubitBasisAngles::new(a[0], a[1]).canonical())
        .collect();
    let basis = ProductBasis::qubits(&angles);
    let terms = objective.terms(&basis);
    let affinity = affinity_from_terms(&terms).clamp(0.0, 1.0);
    let probabilities = probabilities_from_terms(&terms);

    Ok(DiscordResult {
        value: (1.0 - affinity).clamp(0.0, 1.0),
        affinity,
        optimal_basis: basis,
        optimal_probabilities: probabilities,
        diagnostics: OptimizerDiagnostics {
            grid_points_per_axis: points,
            grid_cells,
            best_grid_affinity,
            best_grid_cell,
            restarts_used: refined.len(),
            refinement_iterations: refined.iter().map(|o| o.iterations).sum(),
            evaluations: grid_cells + refined.iter().map(|o| o.evaluations).sum::<usize>(),
        },
    })
}

/// Indices of the `k` largest values; ties go to the lower index.
fn top_cells(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(k.max(1));
    idx
}

pub const BRUTEFORCE_MAX_QUBITS: usize = 4;
pub const BRUTEFORCE_MIN_GRID: usize = 3;

/// Exhaustive minimum of D^H over the Cartesian angle grid with `grid_n`
/// points per axis (`θ ∈ [0, π]`, `φ ∈ [0, 2π]`). An upper bound on D^H.
pub fn dh_bruteforce(state: &State, grid_n: usize) -> Result<f64> {
    bruteforce_search(state, grid_n).map(|r| r.value)
}

/// Like [`dh_bruteforce`], also returning the winning grid basis and its
/// optimal probability table. Ties go to the first cell in grid order.
pub fn bruteforce_search(state: &State, grid_n: usize) -> Result<DiscordResult> {
    require_qubits(state)?;
    if state.num_parties() > BRUTEFORCE_MAX_QUBITS {
        return Err(DiscordError::Resource(format!(
            "brute force supports at most {BRUTEFORCE_MAX_QUBITS} qubits, got {}",
            state.num_parties()
        )));
    }
    if grid_n < BRUTEFORCE_MIN_GRID {
        return Err(DiscordError::Usage(format!(
            "brute force grid needs at least {BRUTEFORCE_MIN_GRID} points per axis"
        )));
    }
    let objective = Objective::new(state);
    let parties = state.num_parties();
    let thetas = theta_axis(grid_n);
    let phis = phi_axis(grid_n);
    let cells: Vec<QubitBasisAngles> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&p| QubitBasisAngles::new(t, p)))
        .collect();
    let per_party: Vec<CMatrix> = cells.iter().map(QubitBasisAngles::unitary).collect();
    let m = per_party.len();
    let total = m.pow(parties as u32);
    let split = |mut idx: usize| {
        let mut out = vec![0; parties];
        for slot in out.iter_mut().rev() {
            *slot = idx % m;
            idx /= m;
        }
        out
    };
    let (best, best_idx) = (0..total)
        .into_par_iter()
        .map(|idx| {
            let locals: Vec<CMatrix> = split(idx).into_iter().map(|k| per_party[k].clone()).collect();
            (affinity_from_terms(&objective.terms_for_unitaries(&locals)), idx)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| match a.0.total_cmp(&b.0) {
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => if a.1 <= b.1 { a } else { b },
            },
        );
    let angles: Vec<QubitBasisAngles> = split(best_idx).into_iter().map(|k| cells[k]).collect();
    let basis = ProductBasis::qubits(&angles);
    let terms = objective.terms(&basis);
    let affinity = best.clamp(0.0, 1.0);
    Ok(DiscordResult {
        value: (1.0 - affinity).clamp(0.0, 1.0),
        affinity,
        optimal_basis: basis,
        optimal_probabilities: probabilities_from_terms(&terms),
        diagnostics: OptimizerDiagnostics {
            grid_points_per_axis: grid_n,
            grid_cells: total,
            best_grid_affinity: best,
            best_grid_cell: angles.iter().flat_map(|a| [a.theta, a.phi]).collect(),
            restarts_used: 0,
            refinement_iterations: 0,
            evaluations: total,
        },
    })
}
