use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::ExitCode;
use std::time::Duration;

use rand::Rng;

use hellinger_discord::app::{
    render_csv, run_discord, run_scan, DiscordRequest, Method, Model, ScanSpec, Settings,
};
use hellinger_discord::catalog;
use hellinger_discord::closed_forms::{
    dh_bell_diagonal, dh_isotropic_mlevel, dh_pure_bipartite, dh_werner_2qubit,
    dh_werner_mlevel, reference_isotropic_mlevel, reference_werner_mlevel, BellDiagonalSpec,
};
use hellinger_discord::engine::{dh_bruteforce, dh_fixed_basis, dh_optimize, OptimizerConfig};
use hellinger_discord::linalg::CMatrix;
use hellinger_discord::random::{random_density, random_pure, random_simplex, random_unitary, rng};
use hellinger_discord::spin_models::{dicke_discord_converged, lmg_ground, DickeParams, LmgParams};
use hellinger_discord::states::{
    classical_state, DensityMatrix, LocalBasis, ProductBasis, PureState, QubitBasisAngles, State,
};
use hellinger_discord::symmetric::{dh_symmetric, dicke_state, SymmetricScan, SymmetricState};

use hellinger_discord_tests::Criterion;

const SEED: u64 = 20_240_601;
const BRUTEFORCE_GRID: usize = 13;

fn optimizer() -> OptimizerConfig {
    OptimizerConfig::default()
}

fn optimized(state: &State) -> hellinger_discord::Result<f64> {
    dh_optimize(state, &optimizer()).map(|r| r.value)
}

fn schmidt_oracle(psi: &PureState) -> f64 {
    let (d1, d2) = (psi.dims()[0], psi.dims()[1]);
    let amps = psi.amplitudes();
    let m = CMatrix::from_fn(d1, d2, |i, j| amps[i * d2 + j]);
    let s4: f64 = m.singular_values().iter().map(|s| s.powi(4)).sum();
    1.0 - s4.sqrt()
}

fn random_qubit_angles(r: &mut impl Rng) -> QubitBasisAngles {
    QubitBasisAngles::new(PI * r.random::<f64>(), 2.0 * PI * r.random::<f64>())
}

fn random_local_basis(dims: &[usize], r: &mut impl Rng) -> ProductBasis {
    let parties = dims
        .iter()
        .map(|&d| LocalBasis::Unitary(random_unitary(d, r)))
        .collect();
    ProductBasis::new(parties).expect("unitaries of the right size")
}

fn conjecture1_suite() -> bool {
    let mut c = Criterion::new(1, "pure bipartite closed form");
    let mut r = rng(SEED);
    let shapes = [[2usize, 2], [2, 3], [3, 3]];
    let mut optimizer_cases = 0;
    for i in 0..100 {
        let dims = shapes[i % 3];
        let psi = PureState::new(random_pure(dims[0] * dims[1], &mut r), dims.to_vec())
            .expect("normalized");
        let label = format!("state {i} ({}x{})", dims[0], dims[1]);
        let Some((closed, nearest)) = c.ok(&label, dh_pure_bipartite(&psi)) else {
            continue;
        };
        c.within(format!("{label} vs SVD"), closed, schmidt_oracle(&psi), 1e-12);
        let state = State::from(psi);
        if let Some(at) = c.ok(&label, dh_fixed_basis(&state, &nearest.basis)) {
            c.within(format!("{label} attained on its basis"), at, closed, 1e-12);
        }
        if dims == [2, 2] {
            optimizer_cases += 1;
            if let Some(opt) = c.ok(&label, optimized(&state)) {
                c.within(format!("{label} vs optimizer"), opt, closed, 1e-5);
            }
        } else {
            let basis = random_local_basis(&dims, &mut r);
            if let Some(upper) = c.ok(&label, dh_fixed_basis(&state, &basis)) {
                c.check(
                    format!("{label} random basis"),
                    upper >= closed - 1e-12,
                    format!("random basis gives {upper:.9} below the closed form {closed:.9}"),
                );
            }
        }
    }
    c.note(format!("100 states, {optimizer_cases} optimizer cases"));
    c.within_time(Duration::from_secs(60));
    c.finish()
}

fn worked_example() -> bool {
    let mut c = Criterion::new(2, "two-qubit worked example");
    let exact = 1.0 - (7.0f64 / 8.0).sqrt();
    let psi = catalog::schmidt_example();
    let state = State::from(psi.clone());
    let closed = c.ok("closed form", dh_pure_bipartite(&psi)).map(|x| x.0);
    let opt = c.ok("optimizer", optimized(&state));
    let brute = c.ok("brute force", dh_bruteforce(&state, BRUTEFORCE_GRID));
    if let (Some(a), Some(b), Some(g)) = (closed, opt, brute) {
        c.within("closed form vs exact", a, exact, 1e-12);
        c.within("closed form vs optimizer", a, b, 1e-5);
        c.within("closed form vs brute force", a, g, 1e-5);
        c.within("optimizer vs brute force", b, g, 1e-5);
        c.note(format!("value {a:.9}"));
    }
    c.finish()
}

fn werner_curve() -> bool {
    let mut c = Criterion::new(3, "two-qubit Werner curve");
    if let Some(v) = c.ok("r = 0", dh_werner_2qubit(0.0)) {
        c.check("r = 0", v == 0.0, format!("got {v:e}, want exactly 0"));
    }
    if let Some(v) = c.ok("r = 1", dh_werner_2qubit(1.0)) {
        c.within("r = 1", v, 1.0 - FRAC_1_SQRT_2, 1e-12);
    }
    for r in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let label = format!("r = {r}");
        let formula = c.ok(&label, dh_werner_2qubit(r));
        let opt = c
            .ok(&label, catalog::werner_2qubit(r))
            .and_then(|rho| c.ok(&label, optimized(&rho.into())));
        if let (Some(f), Some(o)) = (formula, opt) {
            c.within(format!("{label} optimizer"), o, f, 1e-5);
        }
    }
    c.finish()
}

fn bell_diagonal() -> bool {
    let mut c = Criterion::new(4, "Bell-diagonal formula");
    let mut r = rng(SEED + 4);
    for i in 0..50 {
        let p = random_simplex(4, &mut r);
        let label = format!("spectrum {i}");
        let Some(spec) = c.ok(&label, BellDiagonalSpec::new([p[0], p[1], p[2], p[3]])) else {
            continue;
        };
        let formula = dh_bell_diagonal(&spec).value;
        if let Some(o) = c.ok(&label, optimized(&spec.density().into())) {
            c.within(&label, o, formula, 1e-5);
        }
    }
    for k in 0..=20 {
        let w = k as f64 / 20.0;
        let label = format!("Werner r = {w}");
        let a = (1.0 - w) / 4.0;
        let via_bell = BellDiagonalSpec::new([a, a, (1.0 + 3.0 * w) / 4.0, a])
            .map(|s| dh_bell_diagonal(&s).value);
        if let (Some(bell), Some(direct)) = (c.ok(&label, via_bell), c.ok(&label, dh_werner_2qubit(w))) {
            c.within(&label, bell, direct, 1e-12);
        }
        if let (Some(m1), Some(m2)) = (
            c.ok(&label, catalog::werner_2qubit(w)),
            c.ok(&label, catalog::bell_diagonal([a, a, (1.0 + 3.0 * w) / 4.0, a])),
        ) {
            let gap = (m1.matrix() - m2.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            c.within(format!("{label} matrices"), gap, 0.0, 1e-12);
        }
    }
    c.note("50 spectra");
    c.finish()
}

fn multipartite_anchors() -> bool {
    let mut c = Criterion::new(5, "multipartite anchors");
    let dicke42 = dicke_state(4, 2)
        .and_then(|s| s.to_full())
        .expect("valid Dicke state");
    let cases: [(&str, PureState, f64); 5] = [
        ("GHZ3", catalog::ghz(3), 0.292893),
        ("W3", catalog::w_state(3), 0.422650),
        ("GHZ1(4)", catalog::ghz1_4(), 0.292893),
        ("W2(4)", catalog::w2_4(), 0.500000),
        ("Dicke(4,2)", dicke42, 0.459936),
    ];
    let mut symmetric_paths = 0;
    for (name, psi, want) in cases {
        let state = State::from(psi);
        if let Some(v) = c.ok(name, optimized(&state)) {
            c.within(format!("{name} general"), v, want, 1e-4);
        }
        if let Ok(sym) = SymmetricState::from_state(&state, 1e-10) {
            symmetric_paths += 1;
            if let Some(v) = c.ok(name, dh_symmetric(&sym, &SymmetricScan::default())) {
                c.within(format!("{name} symmetric"), v.value, want, 1e-4);
            }
        }
    }
    c.note(format!("{symmetric_paths} symmetric paths"));
    c.finish()
}

fn multilevel() -> bool {
    let mut c = Criterion::new(6, "multilevel families");
    for k in 0..=10 {
        let x = -1.0 + 0.2 * k as f64;
        let label = format!("Werner m=2 x={x:.1}");
        let formula = c.ok(&label, dh_werner_mlevel(2, x));
        let brute = c
            .ok(&label, catalog::werner_mlevel(2, x))
            .and_then(|rho| c.ok(&label, dh_bruteforce(&rho.into(), BRUTEFORCE_GRID)));
        if let (Some(f), Some(b)) = (formula, brute) {
            c.within(&label, b, f, 1e-4);
        }
        let u = 0.1 * k as f64;
        let label = format!("isotropic m=2 x={u:.1}");
        let formula = c.ok(&label, dh_isotropic_mlevel(2, u));
        let brute = c
            .ok(&label, catalog::isotropic_mlevel(2, u))
            .and_then(|rho| c.ok(&label, dh_bruteforce(&rho.into(), BRUTEFORCE_GRID)));
        if let (Some(f), Some(b)) = (formula, brute) {
            c.within(&label, b, f, 1e-4);
        }
    }
    for m in 2..=6usize {
        let mf = m as f64;
        if let Some(v) = c.ok(format!("m={m}"), dh_isotropic_mlevel(m, 1.0)) {
            c.within(format!("isotropic m={m} x=1"), v, 1.0 - 1.0 / mf.sqrt(), 1e-10);
        }
        if let Some(v) = c.ok(format!("m={m}"), dh_isotropic_mlevel(m, 1.0 / (mf * mf))) {
            c.within(format!("isotropic m={m} maximally mixed"), v, 0.0, 1e-10);
        }
        if let Some(v) = c.ok(format!("m={m}"), dh_werner_mlevel(m, 1.0 / mf)) {
            c.within(format!("Werner m={m} maximally mixed"), v, 0.0, 1e-10);
        }
        for k in 1..20 {
            let t = k as f64 / 20.0;
            relation(&mut c, &format!("Werner m={m} x={:.2}", 2.0 * t - 1.0), || {
                Ok((dh_werner_mlevel(m, 2.0 * t - 1.0)?, reference_werner_mlevel(m, 2.0 * t - 1.0)?))
            });
            relation(&mut c, &format!("isotropic m={m} x={t:.2}"), || {
                Ok((dh_isotropic_mlevel(m, t)?, reference_isotropic_mlevel(m, t)?))
            });
        }
    }
    c.finish()
}

/// `D^H = 1 − √(1 − D)` and `D^H < D` wherever `D > 0`.
fn relation(c: &mut Criterion, label: &str, f: impl FnOnce() -> hellinger_discord::Result<(f64, f64)>) {
    let Some((dh, reference)) = c.ok(label, f()) else {
        return;
    };
    c.within(format!("{label} relation"), dh, 1.0 - (1.0 - reference).sqrt(), 1e-10);
    if reference > 1e-12 {
        c.check(
            format!("{label} ordering"),
            dh < reference,
            format!("D^H = {dh:.3e} is not below {reference:.3e}"),
        );
    }
}

fn lmg() -> bool {
    let mut c = Criterion::new(7, "isotropic LMG at N=20");
    let eval = |h_z: f64| -> hellinger_discord::Result<f64> {
        let p = LmgParams {
            n: 20,
            lambda: 1.0,
            gamma: 1.0,
            h_z,
        };
        let ground = lmg_ground(&p)?;
        Ok(dh_symmetric(&ground.into(), &SymmetricScan::default())?.value)
    };
    for h in [1.2, 1.5, 2.0] {
        if let Some(v) = c.ok(format!("h_z = {h}"), eval(h)) {
            c.check(format!("h_z = {h}"), v <= 1e-8, format!("D^H = {v:.3e} above 1e-8"));
        }
    }
    for h in [0.2, 0.5, 0.8] {
        if let Some(v) = c.ok(format!("h_z = {h}"), eval(h)) {
            c.check(format!("h_z = {h}"), v >= 1e-3, format!("D^H = {v:.3e} below 1e-3"));
            c.note(format!("D^H({h}) = {v:.4}"));
        }
    }
    c.finish()
}

fn dicke() -> bool {
    let mut c = Criterion::new(8, "Dicke model at N=20");
    let settings = Settings::default();
    let eval = |lambda: f64| {
        let p = DickeParams {
            n: 20,
            omega: 1.0,
            omega0: 1.0,
            lambda,
            fock_cutoff: settings.dicke.fock_cutoff,
        };
        dicke_discord_converged(&p, &settings.symmetric, settings.dicke.max_fock_cutoff).map(|d| d.value)
    };
    if let Some(v) = c.ok("λ = 0.1", eval(0.1)) {
        c.check("λ = 0.1", v <= 1e-4, format!("D^H = {v:.3e} above 1e-4"));
        c.note(format!("D^H(0.1) = {v:.3e}"));
    }
    if let (Some(lo), Some(hi)) = (c.ok("λ = 0.3", eval(0.3)), c.ok("λ = 0.9", eval(0.9))) {
        c.check("λ = 0.9 vs 0.3", hi >= 10.0 * lo, format!("ratio {:.2} below 10", hi / lo));
        c.note(format!("D^H(0.9)/D^H(0.3) = {:.1}", hi / lo));
    }

    let mut spec = ScanSpec::for_model(Model::Dicke);
    spec.fixed.n = 20;
    spec.fixed.omega = 1.0;
    spec.fixed.omega0 = 1.0;
    spec.param = "lambda".into();
    spec.start = 0.0;
    spec.stop = 1.0;
    spec.points = 40;
    if let Some(rows) = c.ok("scan", run_scan(&spec, &settings)) {
        let values: Vec<Option<f64>> = rows.iter().map(|r| r.dh).collect();
        let failed = rows.iter().filter(|r| r.error.is_some()).count();
        c.check("scan rows", failed == 0, format!("{failed} rows failed"));
        if failed == 0 {
            let (mut best, mut at) = (f64::NEG_INFINITY, f64::NAN);
            for w in rows.windows(2) {
                let slope = (w[1].dh.unwrap() - w[0].dh.unwrap()) / (w[1].param - w[0].param);
                if slope > best {
                    best = slope;
                    at = 0.5 * (w[0].param + w[1].param);
                }
            }
            c.check(
                "derivative maximum",
                (at - 0.5).abs() <= 0.15,
                format!("steepest rise at λ = {at:.3}, outside 0.5 ± 0.15"),
            );
            c.note(format!("steepest rise at λ = {at:.3}"));
        }
        c.check("scan points", values.len() == 40, format!("{} rows", values.len()));
    }
    c.within_time(Duration::from_secs(600));
    c.finish()
}

fn random_two_or_three_qubit(i: usize, r: &mut impl Rng) -> State {
    match i % 3 {
        0 => DensityMatrix::from_numeric(random_density(4, 4, r), vec![2, 2])
            .expect("valid density")
            .into(),
        1 => DensityMatrix::from_numeric(random_density(4, 2, r), vec![2, 2])
            .expect("valid density")
            .into(),
        _ => PureState::new(random_pure(8, r), vec![2, 2, 2])
            .expect("normalized")
            .into(),
    }
}

fn properties() -> bool {
    let mut c = Criterion::new(9, "property suite");
    let mut r = rng(SEED + 9);
    let in_range = |c: &mut Criterion, label: &str, v: f64| {
        c.check(label, (0.0..=1.0).contains(&v), format!("D^H = {v} outside [0, 1]"));
    };

    for i in 0..12 {
        let state = random_two_or_three_qubit(i, &mut r);
        let label = format!("invariance case {i}");
        let us: Vec<CMatrix> = (0..state.num_parties()).map(|_| random_unitary(2, &mut r)).collect();
        let moved = c.ok(&label, state.apply_local(&us));
        if let (Some(a), Some(b)) = (c.ok(&label, optimized(&state)), moved.and_then(|m| c.ok(&label, optimized(&m)))) {
            c.within(&label, b, a, 1e-5);
            in_range(&mut c, &label, a);
            c.check(format!("{label} nonzero"), a > 1e-3, format!("generic state gave D^H = {a:.3e}"));
        }
    }

    for i in 0..12 {
        let n = 2 + i % 2;
        let angles: Vec<QubitBasisAngles> = (0..n).map(|_| random_qubit_angles(&mut r)).collect();
        let basis = ProductBasis::qubits(&angles);
        let p = random_simplex(1 << n, &mut r);
        let label = format!("classical case {i} ({n} qubits)");
        if let Some(rho) = c.ok(&label, classical_state(&basis, &p)) {
            if let Some(v) = c.ok(&label, optimized(&rho.into())) {
                c.within(&label, v, 0.0, 1e-6);
                in_range(&mut c, &label, v);
            }
        }
    }
    for bell in [catalog::Bell::PsiPlus, catalog::Bell::PhiMinus] {
        let label = format!("{bell:?}");
        if let Some(v) = c.ok(&label, optimized(&bell.state().into())) {
            c.within(&label, v, 1.0 - FRAC_1_SQRT_2, 1e-5);
        }
    }
    let mixed = State::from(DensityMatrix::maximally_mixed(vec![2, 2, 2]));
    if let Some(v) = c.ok("maximally mixed", optimized(&mixed)) {
        c.within("maximally mixed", v, 0.0, 1e-6);
    }

    let settings = Settings::default();
    let request = DiscordRequest {
        state: Some(catalog::w_state(3).into()),
        r: None,
        lambdas: None,
        levels: None,
        x: None,
    };
    let first = c.ok("rerun", run_discord(&request, Method::Auto, &settings)).map(|r| r.to_json());
    let mut single = settings.clone();
    single.optimizer.workers = Some(1);
    let second = c.ok("rerun", run_discord(&request, Method::Auto, &single)).map(|r| r.to_json());
    c.check("discord rerun", first.is_some() && first == second, "JSON output differs between runs");

    let mut spec = ScanSpec::for_model(Model::LmgIso);
    spec.fixed.n = 12;
    spec.points = 12;
    let csv_a = c.ok("scan rerun", run_scan(&spec, &settings)).map(|r| render_csv(&r));
    let mut three = settings.clone();
    three.optimizer.workers = Some(3);
    let csv_b = c.ok("scan rerun", run_scan(&spec, &three)).map(|r| render_csv(&r));
    c.check("scan rerun", csv_a.is_some() && csv_a == csv_b, "CSV output differs between runs");

    c.finish()
}

fn main() -> ExitCode {
    let results = [
        conjecture1_suite(),
        worked_example(),
        werner_curve(),
        bell_diagonal(),
        multipartite_anchors(),
        multilevel(),
        lmg(),
        dicke(),
        properties(),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed} of {} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
