use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::{round_sig, Settings};
use crate::catalog::{self, Bell};
use crate::closed_forms::{
    dh_bell_diagonal, dh_isotropic_mlevel, dh_pure_bipartite, dh_werner_2qubit, dh_werner_mlevel,
    dh_xstate, BellDiagonalSpec, XStateSpec,
};
use crate::engine::{bruteforce_search, dh_optimize, nearest_on_basis, DiscordResult};
use crate::error::{DiscordError, Result};
use crate::linalg::frobenius;
use crate::states::{ClassicalState, DensityMatrix, LocalBasis, ProductBasis, PureState, State};
use crate::symmetric::{dh_symmetric, SymmetricState};

/// Tolerance for recognizing a state as a member of a named family.
pub const FAMILY_TOL: f64 = 1e-8;
/// `auto` cross-checks against the optimizer up to this many qubits.
pub const CROSS_CHECK_MAX_QUBITS: usize = 3;
/// Cross-check deviations above this are reported as a warning.
pub const CROSS_CHECK_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Auto,
    Optimize,
    Bruteforce,
    PureBipartite,
    Werner,
    BellDiagonal,
    Xstate,
    Symmetric,
    WernerMlevel,
    Isotropic,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Auto,
        Method::Optimize,
        Method::Bruteforce,
        Method::PureBipartite,
        Method::Werner,
        Method::BellDiagonal,
        Method::Xstate,
        Method::Symmetric,
        Method::WernerMlevel,
        Method::Isotropic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Optimize => "optimize",
            Method::Bruteforce => "bruteforce",
            Method::PureBipartite => "pure-bipartite",
            Method::Werner => "werner",
            Method::BellDiagonal => "bell-diagonal",
            Method::Xstate => "xstate",
            Method::Symmetric => "symmetric",
            Method::WernerMlevel => "werner-mlevel",
            Method::Isotropic => "isotropic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = DiscordError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| DiscordError::Usage(format!("unknown method {s:?}")))
    }
}

/// What to evaluate: a state, family parameters, or both (in which case the
/// state must belong to the family with those parameters).
#[derive(Debug, Clone, Default)]
pub struct DiscordRequest {
    pub state: Option<State>,
    /// Two-qubit Werner mixing weight.
    pub r: Option<f64>,
    /// Bell-diagonal weights over `Ψ⁺, Ψ⁻, Φ⁺, Φ⁻`.
    pub lambdas: Option<[f64; 4]>,
    /// Level count for the multilevel families.
    pub levels: Option<usize>,
    /// Multilevel family parameter.
    pub x: Option<f64>,
}

impl DiscordRequest {
    pub fn from_state(state: State) -> Self {
        Self {
            state: Some(state),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BasisEntry {
    Qubit { theta: f64, phi: f64 },
    /// Columns are the basis vectors; entries are `[re, im]`.
    Unitary { unitary: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscordReport {
    pub value: f64,
    pub method: String,
    pub basis: Vec<BasisEntry>,
    pub probabilities: Vec<f64>,
    pub diagnostics: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl DiscordReport {
    /// Pretty JSON with every number rounded to the output precision.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        round_value(&mut v);
        serde_json::to_string_pretty(&v).expect("value serializes")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(r) = serde_json::Number::from_f64(round_sig(f)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

fn basis_entries(basis: &ProductBasis) -> Vec<BasisEntry> {
    basis
        .parties()
        .iter()
        .map(|b| match b {
            LocalBasis::Qubit(a) => BasisEntry::Qubit {
                theta: a.theta,
                phi: a.phi,
            },
            LocalBasis::Unitary(u) => BasisEntry::Unitary {
                unitary: (0..u.nrows())
                    .map(|i| (0..u.ncols()).map(|j| [u[(i, j)].re, u[(i, j)].im]).collect())
                    .collect(),
            },
        })
        .collect()
}

fn report(method: Method, value: f64, nearest: &ClassicalState, diagnostics: Map<String, Value>) -> DiscordReport {
    DiscordReport {
        value,
        method: method.name().to_string(),
        basis: basis_entries(&nearest.basis),
        probabilities: nearest.probabilities.clone(),
        diagnostics,
        warning: None,
    }
}

fn optimizer_report(method: Method, r: &DiscordResult) -> DiscordReport {
    let diagnostics = match serde_json::to_value(&r.diagnostics).expect("diagnostics serialize") {
        Value::Object(mut m) => {
            m.insert("affinity".into(), json!(r.affinity));
            m
        }
        _ => unreachable!("struct serializes to an object"),
    };
    report(method, r.value, &r.classical_state(), diagnostics)
}

fn usage(method: Method, why: impl fmt::Display) -> DiscordError {
    DiscordError::Usage(format!("method {method} does not apply: {why}"))
}

fn need_state(method: Method, req: &DiscordRequest) -> Result<&State> {
    req.state
        .as_ref()
        .ok_or_else(|| usage(method, "a state file is required"))
}

fn pure_bipartite_of(state: &State) -> Option<PureState> {
    if state.num_parties() != 2 {
        return None;
    }
    match state {
        State::Pure(p) => Some(p.clone()),
        State::Mixed(m) => m.as_pure(FAMILY_TOL),
    }
}

fn is_two_qubits(state: &State) -> bool {
    state.dims() == [2, 2]
}

/// Bell weights of `rho` when it is diagonal in the Bell basis.
fn bell_weights_of(rho: &DensityMatrix) -> Option<[f64; 4]> {
    if rho.dims() != [2, 2] {
        return None;
    }
    let mut w = [0.0; 4];
    for (slot, b) in w.iter_mut().zip(Bell::ALL) {
        let v = b.state();
        *slot = (v.amplitudes().adjoint() * rho.matrix() * v.amplitudes())[(0, 0)].re;
    }
    let rebuilt = catalog::bell_diagonal(w.map(|x| x.max(0.0))).ok()?;
    (frobenius(&(rebuilt.matrix() - rho.matrix())) <= FAMILY_TOL).then_some(w.map(|x| x.max(0.0)))
}

fn werner_r_of(rho: &DensityMatrix) -> Option<f64> {
    let w = bell_weights_of(rho)?;
    let r = (4.0 * w[2] - 1.0) / 3.0;
    let rebuilt = catalog::werner_2qubit(r.clamp(0.0, 1.0)).ok()?;
    (frobenius(&(rebuilt.matrix() - rho.matrix())) <= FAMILY_TOL).then_some(r.clamp(0.0, 1.0))
}

fn square_levels(rho: &DensityMatrix) -> Option<usize> {
    match rho.dims() {
        [a, b] if a == b => Some(*a),
        _ => None,
    }
}

fn werner_mlevel_of(rho: &DensityMatrix) -> Option<(usize, f64)> {
    let m = square_levels(rho)?;
    let mat = rho.matrix();
    let x: f64 = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| mat[(i * m + j, j * m + i)].re)
        .sum();
    let x = x.clamp(-1.0, 1.0);
    let rebuilt = catalog::werner_mlevel(m, x).ok()?;
    (frobenius(&(rebuilt.matrix() - mat)) <= FAMILY_TOL).then_some((m, x))
}

fn isotropic_of(rho: &DensityMatrix) -> Option<(usize, f64)> {
    let m = square_levels(rho)?;
    let v = catalog::max_entangled(m);
    let x = (v.amplitudes().adjoint() * rho.matrix() * v.amplitudes())[(0, 0)]
        .re
        .clamp(0.0, 1.0);
    let rebuilt = catalog::isotropic_mlevel(m, x).ok()?;
    (frobenius(&(rebuilt.matrix() - rho.matrix())) <= FAMILY_TOL).then_some((m, x))
}

fn xstate_of(rho: &DensityMatrix) -> Option<XStateSpec> {
    XStateSpec::from_density(rho, FAMILY_TOL).ok()
}

fn symmetric_of(state: &State) -> Option<SymmetricState> {
    if !state.is_qubits() || state.num_parties() < 2 {
        return None;
    }
    SymmetricState::from_state(state, FAMILY_TOL).ok()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FAMILY_TOL
}

fn eval_pure_bipartite(req: &DiscordRequest) -> Result<DiscordReport> {
    let m = Method::PureBipartite;
    let state = need_state(m, req)?;
    let psi = pure_bipartite_of(state)
        .ok_or_else(|| usage(m, "the state must be a pure state of two parties"))?;
    let (value, nearest) = dh_pure_bipartite(&psi)?;
    let schmidt = crate::states::schmidt_decompose(&psi)?;
    let mut d = Map::new();
    d.insert("schmidt_coefficients".into(), json!(schmidt.coefficients));
    Ok(report(m, value, &nearest, d))
}

fn eval_werner(req: &DiscordRequest) -> Result<DiscordReport> {
    let m = Method::Werner;
    let from_state = match &req.state {
        Some(s) => {
            if !is_two_qubits(s) {
                return Err(usage(m, "the state must be a two-qubit Werner state"));
            }
            Some(werner_r_of(&s.density()).ok_or_else(|| {
                usage(m, "the state is not of the form r|Φ⁺⟩⟨Φ⁺| + (1 − r)I/4")
            })?)
        }
        None => None,
    };
    let r = match (req.r, from_state) {
        (Some(a), Some(b)) if !close(a, b) => {
            return Err(usage(m, format!("the state has r = {b}, not {a}")))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(usage(m, "give --r or a Werner state file")),
    };
    let value = dh_werner_2qubit(r)?;
    let lambdas = [(1.0 - r) / 4.0, (1.0 - r) / 4.0, (1.0 + 3.0 * r) / 4.0, (1.0 - r) / 4.0];
    let outcome = dh_bell_diagonal(&BellDiagonalSpec::new(lambdas)?);
    let mut d = Map::new();
    d.insert("r".into(), json!(r));
    d.insert("bell_branch".into(), json!(outcome.branch));
    Ok(report(m, value, &outcome.nearest, d))
}

fn eval_bell_diagonal(req: &DiscordRequest) -> Result<DiscordReport> {
    let m = Method::BellDiagonal;
    let from_state = match &req.state {
        Some(s) => {
            if !is_two_qubits(s) {
                return Err(usage(m, "the state must be a two-qubit Bell-diagonal state"));
            }
            Some(
                bell_weights_of(&s.density())
                    .ok_or_else(|| usage(m, "the state is not diagonal in the Bell basis"))?,
            )
        }
        None => None,
    };
    let lambdas = match (req.lambdas, from_state) {
        (Some(a), Some(b)) if a.iter().zip(&b).any(|(x, y)| !close(*x, *y)) => {
            return Err(usage(m, format!("the state has Bell weights {b:?}, not {a:?}")))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(usage(m, "give --lambdas or a Bell-diagonal state file")),
    };
    let spec = BellDiagonalSpec::new(lambdas)?;
    let outcome = dh_bell_diagonal(&spec);
    let mut d = Map::new();
    d.insert("lambdas".into(), json!(spec.lambdas()));
    d.insert("h".into(), json!(spec.h()));
    d.insert("d".into(), json!(spec.d()));
    d.insert("branch".into(), json!(outcome.branch));
    Ok(report(m, outcome.value, &outcome.nearest, d))
}

fn eval_xstate(req: &DiscordRequest) -> Result<DiscordReport> {
    let m = Method::Xstate;
    let state = need_state(m, req)?;
    let rho = state.density();
    let spec = xstate_of(&rho).ok_or_else(|| {
        usage(m, "the state is not X-shaped in the computational basis")
    })?;
    let frame = ProductBasis::computational(state.dims());
    let outcome = dh_xstate(&spec, &frame)?;
    let mut d = Map::new();
    d.insert("frame".into(), json!("computational"));
    d.insert("random_bases_checked".into(), json!(outcome.random_bases_checked));
    d.insert("min_random_value".into(), json!(outcome.min_random_value));
    d.insert("frame_is_best".into(), json!(outcome.frame_is_best));
    Ok(report(m, outcome.value, &outcome.nearest, d))
}

fn eval_symmetric(req: &DiscordRequest, settings: &Settings) -> Result<DiscordReport> {
    let m = Method::Symmetric;
    let state = need_state(m, req)?;
    let sym = symmetric_of(state).ok_or_else(|| {
        usage(m, "the state must be a qubit state supported on the symmetric subspace")
    })?;
    let result = dh_symmetric(&sym, &settings.symmetric)?;
    let nearest = ClassicalState::new(result.sigma.basis(), result.sigma.expand())?;
    let mut d = match serde_json::to_value(&result.diagnostics).expect("diagnostics serialize") {
        Value::Object(o) => o,
        _ => unreachable!("struct serializes to an object"),
    };
    d.insert("affinity".into(), json!(result.affinity));
    d.insert("orbit_probabilities".into(), json!(result.sigma.orbit_probabilities));
    Ok(report(m, result.value, &nearest, d))
}

fn eval_multilevel(req: &DiscordRequest, method: Method) -> Result<DiscordReport> {
    let (detect, build, formula): (
        fn(&DensityMatrix) -> Option<(usize, f64)>,
        fn(usize, f64) -> Result<DensityMatrix>,
        fn(usize, f64) -> Result<f64>,
    ) = match method {
        Method::WernerMlevel => (werner_mlevel_of, catalog::werner_mlevel, dh_werner_mlevel),
        _ => (isotropic_of, catalog::isotropic_mlevel, dh_isotropic_mlevel),
    };
    let from_state = match &req.state {
        Some(s) => Some(
            detect(&s.density())
                .ok_or_else(|| usage(method, "the state is not a member of this family"))?,
        ),
        None => None,
    };
    let (levels, x) = match (req.levels, req.x, from_state) {
        (lv, x, Some((sm, sx))) => {
            if lv.is_some_and(|l| l != sm) || x.is_some_and(|x| !close(x, sx)) {
                return Err(usage(
                    method,
                    format!("the state has m = {sm}, x = {sx}, which differs from the flags"),
                ));
            }
            (sm, sx)
        }
        (Some(l), Some(x), None) => (l, x),
        _ => return Err(usage(method, "give --levels and --x, or a state file")),
    };
    let value = formula(levels, x)?;
    let rho = build(levels, x)?;
    let state = State::Mixed(rho);
    let nearest = nearest_on_basis(&state, &ProductBasis::computational(&[levels, levels]))?;
    let mut d = Map::new();
    d.insert("levels".into(), json!(levels));
    d.insert("x".into(), json!(x));
    Ok(report(method, value, &nearest, d))
}

fn eval_optimize(req: &DiscordRequest, settings: &Settings) -> Result<DiscordReport> {
    let m = Method::Optimize;
    let state = need_state(m, req)?;
    if !state.is_qubits() {
        return Err(usage(m, "the optimizer needs every party to be a qubit"));
    }
    Ok(optimizer_report(m, &dh_optimize(state, &settings.optimizer)?))
}

fn eval_bruteforce(req: &DiscordRequest, settings: &Settings) -> Result<DiscordReport> {
    let m = Method::Bruteforce;
    let state = need_state(m, req)?;
    if !state.is_qubits() {
        return Err(usage(m, "brute force needs every party to be a qubit"));
    }
    Ok(optimizer_report(m, &bruteforce_search(state, settings.bruteforce_grid)?))
}

/// The most specific evaluator that applies to `state`.
pub fn auto_method(state: &State) -> Method {
    if pure_bipartite_of(state).is_some() {
        return Method::PureBipartite;
    }
    if let State::Mixed(rho) = state {
        if bell_weights_of(rho).is_some() {
            return Method::BellDiagonal;
        }
        if !state.is_qubits() {
            if isotropic_of(rho).is_some() {
                return Method::Isotropic;
            }
            if werner_mlevel_of(rho).is_some() {
                return Method::WernerMlevel;
            }
        }
        if state.num_parties() == 2 && xstate_of(rho).is_some() {
            return Method::Xstate;
        }
    }
    if symmetric_of(state).is_some() {
        return Method::Symmetric;
    }
    Method::Optimize
}

fn eval_auto(req: &DiscordRequest, settings: &Settings) -> Result<DiscordReport> {
    let state = need_state(Method::Auto, req)?;
    let chosen = auto_method(state);
    let mut out = evaluate(&DiscordRequest::from_state(state.clone()), chosen, settings)?;
    out.diagnostics.insert("auto_selected".into(), json!(chosen.name()));
    if chosen != Method::Optimize && state.is_qubits() && state.num_parties() <= CROSS_CHECK_MAX_QUBITS {
        let check = dh_optimize(state, &settings.optimizer)?;
        let delta = (out.value - check.value).abs();
        out.diagnostics.insert(
            "cross_check".into(),
            json!({ "method": "optimize", "value": check.value, "delta": delta }),
        );
        if delta > CROSS_CHECK_TOL {
            out.warning = Some(format!(
                "{} gives {} but the optimizer finds {}; deviation {delta:e} exceeds {CROSS_CHECK_TOL:e}",
                chosen, out.value, check.value
            ));
        }
    }
    Ok(out)
}

fn evaluate(req: &DiscordRequest, method: Method, settings: &Settings) -> Result<DiscordReport> {
    match method {
        Method::Auto => eval_auto(req, settings),
        Method::Optimize => eval_optimize(req, settings),
        Method::Bruteforce => eval_bruteforce(req, settings),
        Method::PureBipartite => eval_pure_bipartite(req),
        Method::Werner => eval_werner(req),
        Method::BellDiagonal => eval_bell_diagonal(req),
        Method::Xstate => eval_xstate(req),
        Method::Symmetric => eval_symmetric(req, settings),
        Method::WernerMlevel | Method::Isotropic => eval_multilevel(req, method),
    }
}

/// Evaluates D^H with the requested method. The optimizer's worker count
/// also bounds the parallelism of the other evaluators.
pub fn run_discord(req: &DiscordRequest, method: Method, settings: &Settings) -> Result<DiscordReport> {
    settings.validate()?;
    crate::engine::with_workers(settings.optimizer.workers, || evaluate(req, method, settings))?
}
