use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use super::{format_number, Settings};
use crate::catalog;
use crate::closed_forms::{
    dh_isotropic_mlevel, dh_pure_bipartite, dh_werner_mlevel, dh_xstate,
    reference_isotropic_mlevel, reference_werner_mlevel, XStateSpec,
};
use crate::engine::{dh_bruteforce, dh_fixed_basis, dh_optimize, with_workers, Objective};
use crate::error::{DiscordError, Result};
use crate::linalg::{CMatrix, C64};
use crate::random::{random_pure, random_simplex, random_unitary, rng};
use crate::states::{LocalBasis, ProductBasis, PureState, State};
use crate::symmetric::{dh_symmetric, dicke_state, SymmetricPureState, SymmetricState};

/// A suite passes when its largest deviation is at most this.
pub const VERIFY_TOL: f64 = 1e-4;

const MULTILEVEL_POINTS: usize = 10;
const RANDOM_BASES: usize = 20;
const BRUTEFORCE_GRID: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Conjecture1,
    Conjecture2,
    Conjecture3,
    Multilevel,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Conjecture1,
        Suite::Conjecture2,
        Suite::Conjecture3,
        Suite::Multilevel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Conjecture1 => "conjecture1",
            Suite::Conjecture2 => "conjecture2",
            Suite::Conjecture3 => "conjecture3",
            Suite::Multilevel => "multilevel",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = DiscordError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| DiscordError::Usage(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Description of the case with the largest deviation.
    pub worst_case: String,
    /// Cases whose deviation exceeds the tolerance.
    pub failures: usize,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} cases={} failures={} max_deviation={:.3e} tolerance={:.0e} {} (worst: {})",
            self.suite,
            self.cases,
            self.failures,
            self.max_deviation,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" },
            self.worst_case
        )
    }
}

#[derive(Default)]
struct Tally {
    cases: usize,
    failures: usize,
    max: f64,
    worst: String,
}

impl Tally {
    fn record(&mut self, deviation: f64, case: impl FnOnce() -> String) {
        self.cases += 1;
        let deviation = if deviation.is_nan() { f64::INFINITY } else { deviation };
        if deviation > VERIFY_TOL {
            self.failures += 1;
        }
        if deviation > self.max || self.worst.is_empty() {
            self.max = self.max.max(deviation);
            self.worst = case();
        }
    }

    fn finish(self, suite: Suite) -> SuiteReport {
        SuiteReport {
            suite,
            cases: self.cases,
            max_deviation: self.max,
            tolerance: VERIFY_TOL,
            passed: self.failures == 0 && self.cases > 0,
            worst_case: self.worst,
            failures: self.failures,
        }
    }
}

/// `1 − √(Σ sᵢ⁴)` from the singular values of the coefficient matrix.
fn svd_closed_form(psi: &PureState) -> f64 {
    let (da, db) = (psi.dims()[0], psi.dims()[1]);
    let m = CMatrix::from_fn(da, db, |i, j| psi.amplitudes()[i * db + j]);
    let s = m.singular_values();
    1.0 - s.iter().map(|x| x.powi(4)).sum::<f64>().sqrt()
}

fn conjecture1(seed: u64, trials: usize, settings: &Settings) -> Result<SuiteReport> {
    const SHAPES: [[usize; 2]; 3] = [[2, 2], [2, 3], [3, 3]];
    let mut r = rng(seed);
    let mut t = Tally::default();
    for k in 0..trials {
        let dims = SHAPES[k % SHAPES.len()];
        let psi = PureState::new(random_pure(dims[0] * dims[1], &mut r), dims.to_vec())?;
        let (closed, _) = dh_pure_bipartite(&psi)?;
        let mut dev = (closed - svd_closed_form(&psi)).abs();
        let state = State::Pure(psi);
        if dims == [2, 2] {
            let opt = dh_optimize(&state, &settings.optimizer)?.value;
            let brute = dh_bruteforce(&state, BRUTEFORCE_GRID)?;
            dev = dev.max((closed - opt).abs()).max(closed - brute);
        } else {
            let objective = Objective::new(&state);
            for _ in 0..RANDOM_BASES {
                let basis = ProductBasis::new(
                    dims.iter()
                        .map(|&d| LocalBasis::Unitary(random_unitary(d, &mut r)))
                        .collect(),
                )?;
                dev = dev.max(closed - (1.0 - objective.affinity(&basis)));
            }
        }
        t.record(dev, || format!("trial {k}, dims {dims:?}, closed form {}", format_number(closed)));
    }
    Ok(t.finish(Suite::Conjecture1))
}

/// A random two-qubit X-state: random diagonal, anti-diagonal coherences
/// of random phase up to the positivity bound.
fn random_xstate(r: &mut impl Rng) -> Result<XStateSpec> {
    let diag = random_simplex(4, r);
    let mut anti = vec![C64::new(0.0, 0.0); 4];
    for i in 0..2 {
        let j = 3 - i;
        let magnitude = (diag[i] * diag[j]).sqrt() * r.random::<f64>();
        anti[i] = C64::from_polar(magnitude, r.random::<f64>() * std::f64::consts::TAU);
        anti[j] = anti[i].conj();
    }
    XStateSpec::new(vec![2, 2], diag, anti)
}

fn conjecture2(seed: u64, trials: usize, settings: &Settings) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut t = Tally::default();
    let frame = ProductBasis::computational(&[2, 2]);
    for k in 0..trials {
        let spec = random_xstate(&mut r)?;
        let closed = dh_xstate(&spec, &frame)?.value;
        let state = State::Mixed(spec.density_in(&frame)?);
        let opt = dh_optimize(&state, &settings.optimizer)?.value;
        t.record((closed - opt).abs(), || {
            format!(
                "trial {k}, X-frame value {} vs optimizer {}",
                format_number(closed),
                format_number(opt)
            )
        });
    }
    Ok(t.finish(Suite::Conjecture2))
}

fn conjecture3(seed: u64, trials: usize, settings: &Settings) -> Result<SuiteReport> {
    let mut cases: Vec<(String, SymmetricPureState)> = vec![
        ("GHZ3".into(), SymmetricPureState::from_full(&catalog::ghz(3), 1e-10)?),
        ("W3".into(), dicke_state(3, 1)?),
        ("Dicke(4,2)".into(), dicke_state(4, 2)?),
    ];
    let mut r = rng(seed);
    for k in 0..trials {
        let n = 2 + k % 2;
        let v = random_pure(n + 1, &mut r);
        cases.push((
            format!("random symmetric {n}-qubit state {k}"),
            SymmetricPureState::normalized(v.iter().copied().collect())?,
        ));
    }
    let mut t = Tally::default();
    for (name, s) in cases {
        let full = State::Pure(s.to_full()?);
        let sym = dh_symmetric(&SymmetricState::Pure(s), &settings.symmetric)?.value;
        let opt = dh_optimize(&full, &settings.optimizer)?.value;
        t.record((sym - opt).abs(), || {
            format!("{name}: symmetric {} vs optimizer {}", format_number(sym), format_number(opt))
        });
    }
    Ok(t.finish(Suite::Conjecture3))
}

fn multilevel() -> Result<SuiteReport> {
    let mut t = Tally::default();
    for m in [2usize, 3] {
        let basis = ProductBasis::computational(&[m, m]);
        for i in 0..MULTILEVEL_POINTS {
            let u = i as f64 / (MULTILEVEL_POINTS - 1) as f64;
            let x = 2.0 * u - 1.0;
            let formula = dh_werner_mlevel(m, x)?;
            let direct = dh_fixed_basis(&catalog::werner_mlevel(m, x)?.into(), &basis)?;
            let reference = reference_werner_mlevel(m, x)?;
            let dev = (formula - direct).abs().max((formula - (1.0 - (1.0 - reference).sqrt())).abs());
            t.record(dev, || format!("Werner m={m}, x={}", format_number(x)));

            let formula = dh_isotropic_mlevel(m, u)?;
            let direct = dh_fixed_basis(&catalog::isotropic_mlevel(m, u)?.into(), &basis)?;
            let reference = reference_isotropic_mlevel(m, u)?;
            let dev = (formula - direct).abs().max((formula - (1.0 - (1.0 - reference).sqrt())).abs());
            t.record(dev, || format!("isotropic m={m}, x={}", format_number(u)));
        }
    }
    Ok(t.finish(Suite::Multilevel))
}

/// Runs one suite. `trials` sets the number of random cases; the
/// multilevel suite uses a fixed grid and ignores it.
pub fn run_verify(suite: Suite, seed: u64, trials: usize, settings: &Settings) -> Result<SuiteReport> {
    settings.validate()?;
    with_workers(settings.optimizer.workers, || match suite {
        Suite::Conjecture1 => conjecture1(seed, trials, settings),
        Suite::Conjecture2 => conjecture2(seed, trials, settings),
        Suite::Conjecture3 => conjecture3(seed, trials, settings),
        Suite::Multilevel => multilevel(),
    })?
}
