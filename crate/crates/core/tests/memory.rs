//! The history convolution `Ku` and its truncation control.

use fracaaa::error::Error;
use fracaaa::grid::{Path, TimeGrid};
use fracaaa::memory::{convolve_history, HistoryConvolver, Kernel};
use proptest::prelude::*;

fn exp11() -> Kernel {
    Kernel::exponential(1.0, 1.0).unwrap()
}

#[test]
fn l1_norm_examples() {
    assert_eq!(exp11().l1_norm().unwrap(), 1.0);
    assert_eq!(Kernel::zero().l1_norm().unwrap(), 0.0);
    assert_eq!(Kernel::exponential(2.0, 3.0).unwrap().l1_norm().unwrap(), 1.5);
    assert_eq!(Kernel::exponential(2.0, -3.0).unwrap().l1_norm().unwrap(), 1.5);
    // a sampled e^{-tau} converges to the closed form
    let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.01).collect();
    let values: Vec<f64> = grid.iter().map(|t| (-t).exp()).collect();
    let k = Kernel::sampled(grid, values).unwrap();
    assert!((k.l1_norm().unwrap() - 1.0).abs() < 1e-4);
}

#[test]
fn non_integrable_kernels_are_rejected() {
    assert!(matches!(Kernel::exponential(0.0, 1.0), Err(Error::NonIntegrable(_))));
    assert!(matches!(Kernel::exponential(-1.0, 1.0), Err(Error::NonIntegrable(_))));
    let flat = Kernel::sampled(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 1.0]);
    assert!(matches!(flat, Err(Error::NonIntegrable(_))));
    assert!(Kernel::sampled(vec![0.5, 1.0], vec![1.0, 0.0]).is_err());
    assert!(Kernel::sampled(vec![0.0, 1.0], vec![1.0]).is_err());
}

#[test]
fn tail_bound_examples() {
    let k = exp11();
    assert_eq!(k.tail_bound(0.0).unwrap(), k.l1_norm().unwrap());
    assert!((k.tail_bound(100f64.ln()).unwrap() - 0.01).abs() < 1e-15);
    let mut prev = f64::INFINITY;
    for t in [0.0, 1.0, 5.0, 20.0, 40.0, 80.0] {
        let b = k.tail_bound(t).unwrap();
        assert!(b < prev);
        prev = b;
    }
    assert!(prev < 1e-30);
    assert!(k.tail_bound(-1.0).is_err());
    let h = k.history_for(1e-10).unwrap();
    assert!((k.tail_bound(h).unwrap() - 1e-10).abs() < 1e-20);
}

#[test]
fn sampled_tail_is_monotone() {
    let k = Kernel::sampled(vec![0.0, 1.0, 3.0, 6.0], vec![2.0, 1.0, 0.5, 0.0]).unwrap();
    let mut prev = f64::INFINITY;
    for t in [0.0, 0.5, 1.0, 2.0, 4.0, 6.0, 7.0] {
        let b = k.tail_bound(t).unwrap();
        assert!(b <= prev);
        prev = b;
    }
    assert_eq!(prev, 0.0);
    assert!((k.tail_bound(0.0).unwrap() - (1.5 + 1.5 + 0.75)).abs() < 1e-15);
}

fn constant_path(c: f64, dt: f64) -> Path {
    Path::from_fn(TimeGrid::spanning(-50.0, 10.0, dt).unwrap(), |_| c).unwrap()
}

#[test]
fn convolution_of_zero_and_constants() {
    let dt = 0.01;
    let zero = constant_path(0.0, dt);
    let j = zero.len() - 1;
    assert_eq!(convolve_history(&exp11(), &zero, j, 40.0).unwrap(), vec![0.0]);
    let c = 2.5;
    let u = constant_path(c, dt);
    let got = convolve_history(&exp11(), &u, j, 40.0).unwrap()[0];
    let want = c * (1.0 - (-40f64).exp());
    // trapezoidal error of int e^{-s} is dt^2/12 relative
    assert!((got - want).abs() <= c * dt * dt / 10.0, "{got} vs {want}");
}

#[test]
fn convolution_of_a_harmonic() {
    // K e^{i nu s} = e^{i nu t} / (1 + i nu) for k = e^{-tau}
    let nu = 1.7;
    let dt = 0.005;
    let g = TimeGrid::spanning(-60.0, 5.0, dt).unwrap();
    let u = Path::from_vec_fn(g, 2, |s| vec![(nu * s).cos(), (nu * s).sin()]).unwrap();
    let j = u.len() - 1;
    let t = g.t(j);
    let got = convolve_history(&exp11(), &u, j, 50.0).unwrap();
    let d = 1.0 + nu * nu;
    let (re, im) = ((1.0) / d, -nu / d);
    let want = [re * (nu * t).cos() - im * (nu * t).sin(), re * (nu * t).sin() + im * (nu * t).cos()];
    for i in 0..2 {
        assert!((got[i] - want[i]).abs() < 1e-5, "{got:?} vs {want:?}");
    }
}

#[test]
fn coverage_errors_report_the_missing_length() {
    let u = constant_path(1.0, 0.5);
    match convolve_history(&exp11(), &u, 10, 40.0) {
        Err(Error::Coverage { extend_by, .. }) => assert!((extend_by - 35.0).abs() < 1e-9, "{extend_by}"),
        other => panic!("{other:?}"),
    }
    assert!(convolve_history(&exp11(), &u, u.len(), 1.0).is_err());
}

#[test]
fn recursive_convolver_matches_direct_sum() {
    let dt = 0.02;
    let g = TimeGrid::spanning(-60.0, 20.0, dt).unwrap();
    let u = Path::from_vec_fn(g, 2, |s| vec![(0.7 * s).sin(), 1.0 / (1.0 + s * s)]).unwrap();
    for kernel in [
        exp11(),
        Kernel::exponential(0.5, -2.0).unwrap(),
        Kernel::sampled(vec![0.0, 1.0, 2.0, 4.0], vec![1.0, 0.6, 0.2, 0.0]).unwrap(),
    ] {
        let conv = HistoryConvolver::new(&kernel, dt).unwrap();
        let all = conv.apply(u.values(), 2);
        let history = kernel.history_for(1e-13).unwrap().min(59.0);
        for j in (3000..u.len()).step_by(97) {
            let direct = convolve_history(&kernel, &u, j, history).unwrap();
            for d in 0..2 {
                assert!((all[j * 2 + d] - direct[d]).abs() < 1e-11, "{kernel:?} j {j}");
            }
        }
    }
}

#[test]
fn shifting_the_input_shifts_the_output() {
    let dt = 0.05;
    let g = TimeGrid::spanning(0.0, 80.0, dt).unwrap();
    let f = |s: f64| (0.9 * s).cos() + 0.3 * (2.1 * s).sin();
    let u = Path::from_fn(g, f).unwrap();
    let v = Path::from_fn(g, |s| f(s + dt)).unwrap();
    let k = exp11();
    for j in (900..g.len() - 1).step_by(37) {
        let a = convolve_history(&k, &u, j + 1, 40.0).unwrap()[0];
        let b = convolve_history(&k, &v, j, 40.0).unwrap()[0];
        assert!((a - b).abs() < 1e-13, "j {j}");
    }
}

#[test]
fn kernel_json_layout() {
    let v = serde_json::to_value(Kernel::exponential(2.0, 3.0).unwrap()).unwrap();
    assert_eq!(v, serde_json::json!({"form": "exponential", "rate": 2.0, "scale": 3.0}));
    let s: Kernel = serde_json::from_str(r#"{"form":"sampled","grid":[0,1],"values":[1,0]}"#).unwrap();
    assert_eq!(s.eval(0.5), 0.5);
    assert!(serde_json::from_str::<Kernel>(r#"{"form":"exponential","rate":1,"scale":1,"x":0}"#).is_err());
}

fn random_path(g: TimeGrid, coeffs: &[f64]) -> Path {
    Path::from_fn(g, |s| {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * ((i as f64 + 1.0) * 0.37 * s + i as f64).sin())
            .sum()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn convolution_is_linear(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        cu in prop::collection::vec(-1.0f64..1.0, 4),
        cv in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let g = TimeGrid::spanning(-45.0, 5.0, 0.05).unwrap();
        let u = random_path(g, &cu);
        let v = random_path(g, &cv);
        let mix = u.combine(a, &v, b).unwrap();
        let k = Kernel::exponential(0.8, 1.3).unwrap();
        for j in [900, 950, g.len() - 1] {
            let lhs = convolve_history(&k, &mix, j, 40.0).unwrap()[0];
            let rhs = a * convolve_history(&k, &u, j, 40.0).unwrap()[0] + b * convolve_history(&k, &v, j, 40.0).unwrap()[0];
            prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn convolution_is_lipschitz_with_the_l1_norm(
        cu in prop::collection::vec(-2.0f64..2.0, 4),
        cv in prop::collection::vec(-2.0f64..2.0, 4),
        rate in 0.3f64..3.0,
        scale in -2.0f64..2.0,
    ) {
        let g = TimeGrid::spanning(-100.0, 5.0, 0.02).unwrap();
        let u = random_path(g, &cu);
        let v = random_path(g, &cv);
        let k = Kernel::exponential(rate, scale).unwrap();
        let history = k.history_for(1e-12).unwrap();
        let conv = HistoryConvolver::new(&k, g.dt()).unwrap();
        let ku = conv.apply(u.values(), 1);
        let kv = conv.apply(v.values(), 1);
        let start = (history / g.dt()).ceil() as usize;
        let diff = (start..g.len()).map(|j| (ku[j] - kv[j]).abs()).fold(0.0, f64::max);
        let sup = u.combine(1.0, &v, -1.0).unwrap().sup_norm();
        // trapezoidal weights sum to the l1 norm up to O(rate^2 dt^2)
        let slack = k.l1_norm().unwrap() * (rate * g.dt()).powi(2) / 10.0 * sup + 1e-12;
        prop_assert!(diff <= k.l1_norm().unwrap() * sup + slack, "{} > {}", diff, k.l1_norm().unwrap() * sup);
    }
}
