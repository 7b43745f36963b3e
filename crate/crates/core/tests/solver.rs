//! Contraction constant, Picard iteration of the mild map, the
//! initial-value variant and the asymptotic gap.

use std::f64::consts::PI;

use fracaaa::error::Error;
use fracaaa::forcing::{make_example1_forcing, AaaForcing, AdditiveTerm, Realization};
use fracaaa::grid::{norm2, FracOrder, Path, TimeGrid};
use fracaaa::memory::Kernel;
use fracaaa::mlf::{kernel_integral_identity, ml_eval_real, SectorType};
use fracaaa::operator::{
    apply_family, certificate_horizon, make_dirichlet_laplacian, operator_decay_constant, BasisTag,
    SpectralOperator, StateVector,
};
use fracaaa::scenario::random_path;
use fracaaa::solver::{
    asymptotic_gap, contraction_constant, example1_condition, fit_gap_envelope, ivp_solve, picard_solve, MildMap,
    MildProblem, NonlocalCondition, PicardOptions, ProductWeights, SecondArg, Verdict,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn a15() -> FracOrder {
    FracOrder::solver(1.5).unwrap()
}

fn single_mode(mu: f64) -> SpectralOperator {
    let theta = PI / 8.0;
    let sector = SectorType::negative_type(mu, theta, 1.0 / theta.sin()).unwrap();
    SpectralOperator::diagonal(vec![mu], sector, BasisTag::AbstractDiagonal).unwrap()
}

fn cm_of(op: &SpectralOperator, alpha: FracOrder) -> f64 {
    operator_decay_constant(op, alpha, certificate_horizon(op, alpha, 1e3)).unwrap()
}

fn source(amplitude: f64, frequency: f64) -> AdditiveTerm {
    AdditiveTerm {
        amplitude,
        frequency,
        phase: 0.0,
        mode: 1,
    }
}

fn no_memory() -> SecondArg {
    SecondArg::Memory { kernel: Kernel::zero() }
}

#[test]
fn lambda_examples() {
    let a = a15();
    let zero = contraction_constant(1.0, a, -2.0, 0.0, 1.0).unwrap();
    assert_eq!(zero.lambda, 0.0);
    assert_eq!(zero.verdict, Verdict::Contractive);

    let base = contraction_constant(1.0, a, -2.0, 0.1, 1.0).unwrap();
    let want = 2f64.powf(-2.0 / 3.0) * PI / (1.5 * (2.0 * PI / 3.0).sin()) * 0.1 * 2.0;
    assert!((base.lambda - want).abs() <= 1e-15);
    assert!((base.lambda - 0.305).abs() < 1e-3);
    let via_identity = kernel_integral_identity(1.5, -2.0).unwrap() * 0.1 * 2.0;
    assert!((base.lambda - via_identity).abs() <= 1e-12 * base.lambda);

    let doubled_l = contraction_constant(1.0, a, -2.0, 0.2, 1.0).unwrap();
    assert!((doubled_l.lambda - 2.0 * base.lambda).abs() <= 1e-15);
    // 1 + k_l1: 2 -> 4
    let doubled_k = contraction_constant(1.0, a, -2.0, 0.1, 3.0).unwrap();
    assert!((doubled_k.lambda - 2.0 * base.lambda).abs() <= 1e-15);

    let big = contraction_constant(10.0, a, -2.0, 1.0, 1.0).unwrap();
    assert_eq!(big.verdict, Verdict::NotContractive);
}

#[test]
fn lambda_argument_errors() {
    for alpha in [1.0, 2.0] {
        assert!(contraction_constant(1.0, FracOrder::new(alpha).unwrap(), -2.0, 0.1, 1.0).is_err());
    }
    assert!(contraction_constant(1.0, a15(), 0.0, 0.1, 1.0).is_err());
    assert!(contraction_constant(0.0, a15(), -1.0, 0.1, 1.0).is_err());
    assert!(contraction_constant(1.0, a15(), -1.0, -0.1, 1.0).is_err());
}

#[test]
fn example_condition_is_reported_for_both_vertices() {
    let r = contraction_constant(2.0, a15(), -101.0, 1.0, 1.0)
        .unwrap()
        .with_example1(0.2, 100.0)
        .unwrap();
    let conds = r.example1_conditions.as_ref().unwrap();
    assert_eq!(conds.len(), 2);
    assert_eq!(conds[0].mu, 100.0);
    assert_eq!(conds[1].mu, 101.0);
    assert_eq!(r.example1_condition_value.unwrap(), conds[0].rhs - conds[0].lhs);
    let c = example1_condition(2.0, a15(), 0.2, 100.0).unwrap();
    let rhs = 1.5 * (PI / 1.5).sin() / (3.0 * 2.0 * 100f64.powf(-1.0 / 1.5) * PI);
    assert!((c.rhs - rhs).abs() < 1e-14);
    assert_eq!(c.lhs, 1.2);
    assert_eq!(c.holds, 1.2 < rhs);
}

/// Fixed point of a state-independent scalar problem.
fn solve_source(op: &SpectralOperator, f: &AaaForcing, window: TimeGrid, history: f64) -> (Path, f64) {
    let problem = MildProblem {
        op,
        alpha: a15(),
        forcing: f,
        second_arg: no_memory(),
        cm: cm_of(op, a15()),
    };
    let map = MildMap::new(problem, window, history).unwrap();
    let r = picard_solve(&map, &PicardOptions::default(), None).unwrap();
    assert!(r.converged);
    assert_eq!(r.contraction.lambda, 0.0);
    (r.fixed_point, r.truncation_budget.tail_error_bound)
}

#[test]
fn constant_source_has_vanishing_response() {
    // the symbol's Laplace transform l^{a-1}/(l^a + 1) vanishes at l = 0
    let op = single_mode(-1.0);
    let f = AaaForcing::zero().with_additive(vec![source(1.0, 0.0)]);
    let window = TimeGrid::spanning(0.0, 10.0, 0.02).unwrap();
    let (u, tail) = solve_source(&op, &f, window, 400.0);
    let sup = u.sup_norm();
    assert!(sup <= tail, "{sup} > {tail}");
    assert!(sup < 0.05, "{sup}");
}

fn harmonic_oracle(alpha: f64, nu: f64, t: f64) -> f64 {
    let l = Complex64::new(0.0, nu);
    let h = l.powf(alpha - 1.0) / (l.powf(alpha) + 1.0);
    (Complex64::new(0.0, nu * t).exp() * h).re
}

#[test]
fn harmonic_source_matches_the_symbol_at_i_nu() {
    let op = single_mode(-1.0);
    for nu in [1.0, 1.3] {
        let f = AaaForcing::zero().with_additive(vec![source(1.0, nu)]);
        let window = TimeGrid::spanning(0.0, 10.0, 0.02).unwrap();
        let (u, _) = solve_source(&op, &f, window, 400.0);
        let err = (0..u.len())
            .map(|j| (u.scalar(j) - harmonic_oracle(1.5, nu, window.t(j))).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-4, "nu {nu}: {err}");
    }
}

#[test]
fn harmonic_error_is_second_order_in_the_step() {
    let op = single_mode(-1.0);
    let f = AaaForcing::zero().with_additive(vec![source(1.0, 1.3)]);
    let err = |dt: f64| {
        let window = TimeGrid::spanning(0.0, 4.0, dt).unwrap();
        let (u, _) = solve_source(&op, &f, window, 400.0);
        (0..u.len())
            .map(|j| (u.scalar(j) - harmonic_oracle(1.5, 1.3, window.t(j))).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.08), err(0.04));
    // part of the error is the history truncation, so allow some slack
    assert!(e1 / e2 > 3.0, "{e1} {e2}");
}

#[test]
fn product_weights_integrate_hats() {
    let op = make_dirichlet_laplacian(1.0, 2).unwrap();
    let pw = ProductWeights::new(&op, a15(), 0.05, 200).unwrap();
    assert_eq!((pw.modes(), pw.cells(), pw.dt()), (2, 200, 0.05));
    // sum of lag weights reproduces int_0^{L dt} S_k
    for (k, mu) in [(0usize, -2.0f64), (1, -5.0)] {
        let w = pw.lag_weights(k, 201);
        let total: f64 = w.iter().sum();
        let direct = quadrature::double_exponential::integrate(
            |s: f64| ml_eval_real(1.5, mu * s.powf(1.5)).unwrap(),
            0.0,
            10.0,
            1e-13,
        )
        .integral;
        assert!((total - direct).abs() < 1e-10, "mode {k}: {total} vs {direct}");
        // a truncated table keeps only a half hat at its end
        let short = pw.lag_weights(k, 11);
        assert_eq!(short[..10], w[..10]);
        assert!(short[10] < w[10]);
    }
}

#[test]
fn zero_forcing_gives_zero_in_one_iteration() {
    let op = make_dirichlet_laplacian(1.0, 3).unwrap();
    let f = AaaForcing::zero();
    let problem = MildProblem {
        op: &op,
        alpha: a15(),
        forcing: &f,
        second_arg: SecondArg::Memory {
            kernel: Kernel::exponential(1.0, 1.0).unwrap(),
        },
        cm: cm_of(&op, a15()),
    };
    let map = MildMap::new(problem, TimeGrid::spanning(-5.0, 5.0, 0.1).unwrap(), 10.0).unwrap();
    let r = picard_solve(&map, &PicardOptions::default(), None).unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.path().sup_norm(), 0.0);
}

struct Instance {
    op: SpectralOperator,
    forcing: AaaForcing,
    cm: f64,
}

/// A reduced Example-1 instance: four modes, shift 100, additive source.
fn example1_instance(beta: f64) -> Instance {
    let op = make_dirichlet_laplacian(100.0, 4).unwrap();
    let forcing = make_example1_forcing(beta).with_additive(vec![source(1.0, 1.0), source(1.0, 2f64.sqrt())]);
    let cm = cm_of(&op, a15());
    Instance { op, forcing, cm }
}

fn example1_map(inst: &Instance, second_arg: SecondArg, window: TimeGrid) -> MildMap<'_> {
    let problem = MildProblem {
        op: &inst.op,
        alpha: a15(),
        forcing: &inst.forcing,
        second_arg,
        cm: inst.cm,
    };
    MildMap::new(problem, window, 40.0).unwrap()
}

fn memory() -> SecondArg {
    SecondArg::Memory {
        kernel: Kernel::exponential(1.0, 1.0).unwrap(),
    }
}

#[test]
fn example1_iteration_contracts_and_is_unique() {
    let inst = example1_instance(0.2);
    let window = TimeGrid::spanning(-10.0, 60.0, 0.1).unwrap();
    let map = example1_map(&inst, memory(), window);
    let opts = PicardOptions::default();
    let r = picard_solve(&map, &opts, None).unwrap();
    assert_eq!(r.contraction.verdict, Verdict::Contractive);
    assert!(r.converged);
    assert!(r.empirical_ratio <= r.contraction.lambda + 0.1, "{} vs {}", r.empirical_ratio, r.contraction.lambda);
    assert!(r.residual <= opts.tol + r.truncation_budget.tail_error_bound);
    assert!(r.iterate_deltas.iter().all(|&d| d > 0.0));
    assert!(r.truncation_budget.total() >= r.truncation_budget.tail_error_bound);

    for seed in [1, 2] {
        let guess = random_path(window, 4, 1.0, seed);
        let other = picard_solve(&map, &opts, Some(&guess)).unwrap();
        let gap = r.path().combine(1.0, other.path(), -1.0).unwrap().sup_norm();
        assert!(gap <= 10.0 * opts.tol, "seed {seed}: {gap}");
    }
}

#[test]
fn delay_variant_converges() {
    let inst = example1_instance(0.2);
    let window = TimeGrid::spanning(-10.0, 40.0, 0.1).unwrap();
    let map = example1_map(&inst, SecondArg::Delay { tau: 1.0 }, window);
    let r = picard_solve(&map, &PicardOptions::default(), None).unwrap();
    assert!(r.converged);
    assert!(r.contraction.lambda < 1.0);
    // phi is u shifted by tau, up to the frozen pre-history
    let u = r.path();
    let phi = map.second_argument(u).unwrap();
    for j in (20..u.len()).step_by(50) {
        let want = u.sample(window.t(j) - 1.0).unwrap();
        for (a, b) in phi.at(j).iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn non_contractive_instances_still_run() {
    let mut inst = example1_instance(0.2);
    inst.cm = 1e3;
    let window = TimeGrid::spanning(0.0, 10.0, 0.1).unwrap();
    let map = example1_map(&inst, memory(), window);
    let opts = PicardOptions {
        max_iter: 8,
        ..PicardOptions::default()
    };
    let r = picard_solve(&map, &opts, None).unwrap();
    assert_eq!(r.contraction.verdict, Verdict::NotContractive);
    assert!(r.contraction.lambda >= 1.0);
    assert!(r.empirical_ratio.is_finite());
}

#[test]
fn tail_budget_limit_is_enforced() {
    let inst = example1_instance(0.2);
    let window = TimeGrid::spanning(0.0, 10.0, 0.1).unwrap();
    let map = example1_map(&inst, memory(), window);
    let opts = PicardOptions {
        max_tail_error: Some(1e-12),
        ..PicardOptions::default()
    };
    assert!(matches!(picard_solve(&map, &opts, None), Err(Error::Budget(_))));
    let bad_guess = Path::zeros(TimeGrid::spanning(0.0, 5.0, 0.1).unwrap(), 4);
    assert!(picard_solve(&map, &PicardOptions::default(), Some(&bad_guess)).is_err());
}

fn ivp_grid() -> TimeGrid {
    TimeGrid::spanning(0.0, 20.0, 0.05).unwrap()
}

#[test]
fn pure_relaxation() {
    let op = make_dirichlet_laplacian(1.0, 3).unwrap();
    let g = ivp_grid();
    let u0 = StateVector::new(vec![1.0, -0.5, 0.25]).unwrap();
    let zero = Path::zeros(g, 3);
    let conds = [
        NonlocalCondition {
            points: vec![],
            u0: u0.clone(),
        },
        // g(u) = u(1) vanishes on the zero path
        NonlocalCondition {
            points: vec![(1.0, 1.0)],
            u0: u0.clone(),
        },
    ];
    for cond in &conds {
        let v = ivp_solve(&op, a15(), &zero, cond, &zero).unwrap();
        for j in (0..g.len()).step_by(40) {
            let want = apply_family(&op, a15(), g.t(j), &u0).unwrap();
            for (x, y) in v.at(j).iter().zip(&want.coeffs) {
                assert!((x - y).abs() < 1e-14);
            }
        }
        // the gap to the zero path is |S(t) u0|, within the certified bound
        let gap = asymptotic_gap(&v, &zero).unwrap();
        let cm = cm_of(&op, a15());
        for j in 0..g.len() {
            let t = g.t(j);
            assert!(gap.scalar(j) <= cm / (1.0 + 2.0 * t.powf(1.5)) * u0.norm() * (1.0 + 1e-9));
        }
        let env = fit_gap_envelope(&gap, a15(), op.omega(), cm, u0.norm()).unwrap();
        assert!(env.dominated && env.c_fit <= env.c_transient * (1.0 + 1e-9));
    }
}

#[test]
fn duhamel_term_matches_quadrature() {
    let op = single_mode(-1.0);
    let cond = NonlocalCondition {
        points: vec![],
        u0: StateVector::new(vec![0.0]).unwrap(),
    };
    let exact = |t: f64| {
        quadrature::double_exponential::integrate(
            |s: f64| ml_eval_real(1.5, -(t - s).powf(1.5)).unwrap() * s.cos(),
            0.0,
            t,
            1e-13,
        )
        .integral
    };
    let err = |dt: f64| {
        let g = TimeGrid::spanning(0.0, 20.0, dt).unwrap();
        let f = Path::from_fn(g, f64::cos).unwrap();
        let v = ivp_solve(&op, a15(), &f, &cond, &f).unwrap();
        assert_eq!(v.scalar(0), 0.0);
        [0.5, 3.0, 11.0, 20.0]
            .iter()
            .map(|&t| (v.scalar(g.nearest(t).unwrap()) - exact(t)).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.1), err(0.05));
    // product trapezoid: |f''| dt^2 / 8 times the integral of |S|
    assert!(e2 <= 0.05 * 0.05, "{e2}");
    assert!(e1 / e2 > 3.5, "{e1} {e2}");
}

#[test]
fn ivp_argument_errors() {
    let op = single_mode(-1.0);
    let late = Path::zeros(TimeGrid::new(1.0, 0.1, 10).unwrap(), 1);
    let cond = NonlocalCondition {
        points: vec![(50.0, 1.0)],
        u0: StateVector::new(vec![1.0]).unwrap(),
    };
    assert!(ivp_solve(&op, a15(), &late, &cond, &late).is_err());
    let ok = Path::zeros(TimeGrid::new(0.0, 0.1, 10).unwrap(), 1);
    assert!(matches!(ivp_solve(&op, a15(), &ok, &cond, &ok), Err(Error::Coverage { .. })));
}

#[test]
fn solution_and_initial_value_variant_merge() {
    let inst = example1_instance(0.2);
    let dt = 0.1;
    let window = TimeGrid::spanning(-20.0, 60.0, dt).unwrap();
    let map = example1_map(&inst, memory(), window);
    let r = picard_solve(&map, &PicardOptions::default(), None).unwrap();
    let u = r.path();
    let j0 = window.nearest(0.0).unwrap();
    let fpath = map.forcing_path(u).unwrap().slice(j0, window.len()).unwrap();
    let ivp = TimeGrid::new(0.0, dt, fpath.len()).unwrap();
    let fpath = Path::new(ivp, 4, fpath.into_values()).unwrap();
    // u0 = g(u): the transient vanishes and v only misses the history before 0
    let at_one = u.sample(1.0).unwrap();
    let cond = NonlocalCondition {
        points: vec![(1.0, 1.0)],
        u0: StateVector::new(at_one).unwrap(),
    };
    assert!(norm2(&cond.transient(u).unwrap()) < 1e-15);
    let v = ivp_solve(&inst.op, a15(), &fpath, &cond, u).unwrap();
    let gap = asymptotic_gap(&v, u).unwrap();
    assert!((gap.scalar(0) - norm2(u.at(j0))).abs() < 1e-12);
    let g1 = gap.sample(1.0).unwrap()[0];
    let g50 = gap.sample(50.0).unwrap()[0];
    assert!(g50 <= 0.05 * g1, "{g1} {g50}");
    // with no transient the gap is the history before 0 seen from t; past
    // the history length the whole-line solution itself is truncated, so
    // the gap is only resolved down to the tail budget
    let early = gap.slice(0, gap.grid().nearest(10.0).unwrap()).unwrap();
    let env = fit_gap_envelope(&early, a15(), inst.op.omega(), inst.cm, 0.0).unwrap();
    let tail = r.truncation_budget.tail_error_bound;
    for j in 0..gap.len() {
        let t = gap.grid().t(j);
        let bound = env.c_fit / (1.0 + inst.op.omega().abs() * t.powf(1.5)) + tail;
        assert!(gap.scalar(j) <= bound, "t {t}: {} > {bound}", gap.scalar(j));
    }
}

#[test]
fn identical_paths_have_zero_gap() {
    let p = random_path(TimeGrid::spanning(0.0, 5.0, 0.1).unwrap(), 3, 1.0, 4);
    assert_eq!(asymptotic_gap(&p, &p).unwrap().sup_norm(), 0.0);
    let other = Path::zeros(TimeGrid::spanning(0.0, 5.0, 0.2).unwrap(), 3);
    assert!(asymptotic_gap(&other, &p).is_err());
}

#[test]
fn result_json_has_the_documented_fields() {
    let op = single_mode(-1.0);
    let f = AaaForcing::zero()
        .with_additive(vec![source(1.0, 1.0)])
        .with_realization(Realization::Pointwise);
    let problem = MildProblem {
        op: &op,
        alpha: a15(),
        forcing: &f,
        second_arg: no_memory(),
        cm: 2.0226,
    };
    let map = MildMap::new(problem, TimeGrid::spanning(0.0, 2.0, 0.1).unwrap(), 20.0).unwrap();
    let r = picard_solve(&map, &PicardOptions::default(), None).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for key in ["residual", "iterate_deltas", "empirical_ratio", "iterations", "truncation_budget", "contraction"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    for key in ["Lambda", "factors", "verdict"] {
        assert!(v["contraction"].get(key).is_some(), "{key}");
    }
    for key in ["history_T", "tail_error_bound"] {
        assert!(v["truncation_budget"].get(key).is_some(), "{key}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn response_is_linear_in_the_source(a in -2.0f64..2.0, b in -2.0f64..2.0, nu in 0.2f64..3.0) {
        let op = make_dirichlet_laplacian(1.0, 2).unwrap();
        let window = TimeGrid::spanning(0.0, 3.0, 0.1).unwrap();
        let solve = |terms: Vec<AdditiveTerm>| {
            let f = AaaForcing::zero().with_additive(terms);
            solve_source(&op, &f, window, 20.0).0
        };
        let ua = solve(vec![source(a, nu)]);
        let ub = solve(vec![AdditiveTerm { mode: 2, ..source(b, 1.0) }]);
        let both = solve(vec![source(a, nu), AdditiveTerm { mode: 2, ..source(b, 1.0) }]);
        let sum = ua.combine(1.0, &ub, 1.0).unwrap();
        let d = both.combine(1.0, &sum, -1.0).unwrap().sup_norm();
        prop_assert!(d <= 1e-13 * (1.0 + both.sup_norm()));
    }

    #[test]
    fn lambda_is_the_identity_times_the_factors(
        cm in 0.5f64..5.0,
        alpha in 1.05f64..1.95,
        omega in -100.0f64..-0.01,
        l_f in 0.0f64..3.0,
        k in 0.0f64..3.0,
    ) {
        let r = contraction_constant(cm, FracOrder::new(alpha).unwrap(), omega, l_f, k).unwrap();
        let via = cm * l_f * (1.0 + k) * kernel_integral_identity(alpha, omega).unwrap();
        prop_assert!((r.lambda - via).abs() <= 1e-12 * via.max(1e-300));
        prop_assert_eq!(r.verdict == Verdict::Contractive, r.lambda < 1.0);
    }
}

