//! Forcing terms: evaluation, split into almost automorphic and decaying
//! parts, Lipschitz and growth certificates, delayed arguments.

use std::f64::consts::{PI, SQRT_2};

use fracaaa::forcing::{
    estimate_lipschitz, eval_forcing, make_example1_forcing, point_delay_eval, AaaForcing, AdditiveTerm, Coupling,
    DecayPart, Multiplier, Nonlinearity, Realization, SineTransform,
};
use fracaaa::grid::{norm2, Path, TimeGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scalar(f: AaaForcing) -> AaaForcing {
    f.with_realization(Realization::Pointwise)
}

fn source(amplitude: f64, frequency: f64) -> AdditiveTerm {
    AdditiveTerm {
        amplitude,
        frequency,
        phase: 0.0,
        mode: 1,
    }
}

#[test]
fn example1_by_substitution() {
    let f = scalar(make_example1_forcing(1.0));
    let v = eval_forcing(&f, 0.0, &[1.0], &[0.0]).unwrap()[0];
    assert!((v - (2.0 + 1f64.sin())).abs() < 1e-15);
    let t: f64 = 0.7;
    let (u, phi): (f64, f64) = (0.4, -1.3);
    let want = 0.3 * u * (t.cos() + (SQRT_2 * t).cos()) + 0.3 * (-t).exp() * u.sin() + phi.sin();
    let got = eval_forcing(&scalar(make_example1_forcing(0.3)), t, &[u], &[phi]).unwrap()[0];
    assert!((got - want).abs() < 1e-15);
}

#[test]
fn lipschitz_constants_follow_the_termwise_bound() {
    for beta in [0.0, 0.1, 0.2, 0.5, -1.0] {
        let f = make_example1_forcing(beta);
        assert_eq!(f.lipschitz_l(), (3.0 * beta.abs()).max(1.0));
    }
    let zero_beta = scalar(make_example1_forcing(0.0));
    for (u, phi) in [(0.3f64, 1.1f64), (-2.0, 0.5)] {
        let v = eval_forcing(&zero_beta, 3.0, &[u], &[phi]).unwrap()[0];
        assert_eq!(v, phi.sin());
    }
}

#[test]
fn origin_maps_to_zero() {
    for f in [make_example1_forcing(0.7), scalar(make_example1_forcing(-0.2))] {
        for t in [-5.0, 0.0, 1.0, 100.0] {
            let dim = 4;
            let v = eval_forcing(&f, t, &vec![0.0; dim], &vec![0.0; dim]).unwrap();
            assert!(v.iter().all(|x| x.abs() < 1e-15));
        }
    }
    let z = AaaForcing::zero();
    assert_eq!(eval_forcing(&z, 2.0, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), vec![0.0, 0.0]);
}

#[test]
fn decay_part_vanishes_at_large_times() {
    let f = make_example1_forcing(0.5);
    let ev = f.evaluator(6).unwrap();
    let u = [0.5, -0.2, 0.1, 0.0, 0.3, -0.4];
    let mut out = vec![0.0; 6];
    let mut prev = f64::INFINITY;
    for t in [0.0, 1.0, 5.0, 10.0, 40.0] {
        ev.decay_part(t, &u, &mut out);
        let n = norm2(&out);
        assert!(n <= f.decay_envelope(t) * norm2(&u) * (1.0 + 1e-12) + 1e-300);
        assert!(n <= prev);
        prev = n;
    }
    assert!(prev < 1e-16);
    // what is left is the almost automorphic part
    let full = ev.eval(60.0, &u, &u).unwrap();
    let mut aa = vec![0.0; 6];
    ev.aa_part(60.0, &u, &u, &mut aa);
    assert!(full.iter().zip(&aa).all(|(a, b)| (a - b).abs() < 1e-20));
}

#[test]
fn aa_part_depends_on_time_only_through_the_phases() {
    let f = scalar(make_example1_forcing(0.4)).with_additive(vec![source(1.0, 2.0)]);
    let ev = f.evaluator(1).unwrap();
    let (u, phi) = ([0.8], [0.3]);
    let mut out = [0.0];
    for (t, s) in [(0.3f64, 2.0 * PI), (1.0, 5.0)] {
        ev.aa_part(t + s, &u, &phi, &mut out);
        let want = 0.4 * u[0] * ((t + s).cos() + (SQRT_2 * (t + s)).cos()) + ((2.0 * (t + s)).cos()) + phi[0].sin();
        assert!((out[0] - want).abs() < 1e-14);
    }
}

#[test]
fn shape_mismatch_is_an_input_error() {
    let f = make_example1_forcing(0.1);
    assert!(eval_forcing(&f, 0.0, &[1.0, 2.0], &[1.0]).is_err());
    assert!(f.evaluator(3).unwrap().eval(0.0, &[1.0], &[1.0]).is_err());
    let bad = AaaForcing::zero().with_additive(vec![AdditiveTerm { mode: 3, ..source(1.0, 1.0) }]);
    assert!(bad.evaluator(2).is_err());
}

#[test]
fn empirical_lipschitz_examples() {
    let constant = AaaForcing::zero().with_additive(vec![source(2.0, 0.0)]);
    assert_eq!(estimate_lipschitz(&constant, 1, 1.0, 500, 1).unwrap(), 0.0);

    let f = make_example1_forcing(0.1);
    let est = estimate_lipschitz(&f, 6, 2.0, 3000, 2).unwrap();
    assert!(est <= 1.0 * (1.0 + 1e-6), "{est}");
    assert!(est > 0.5);

    let beta = 0.3;
    let linear = AaaForcing {
        multipliers: vec![
            Multiplier {
                amplitude: beta,
                frequency: 1.0,
            },
            Multiplier {
                amplitude: beta,
                frequency: SQRT_2,
            },
        ],
        ..AaaForcing::zero()
    };
    let coarse = estimate_lipschitz(&linear, 1, 1.0, 300, 3).unwrap();
    let fine = estimate_lipschitz(&linear, 1, 1.0, 30000, 3).unwrap();
    assert!(fine >= coarse);
    assert!(fine <= 2.0 * beta * (1.0 + 1e-6));
    assert!(fine >= 0.98 * 2.0 * beta, "{fine}");
}

#[test]
fn shipped_forcings_respect_their_certificates() {
    let shipped = [
        make_example1_forcing(0.2),
        make_example1_forcing(0.2).with_additive(vec![source(1.0, 1.0), source(1.0, SQRT_2)]),
        scalar(make_example1_forcing(0.5)),
    ];
    for (i, f) in shipped.iter().enumerate() {
        let dim = if f.realization == Realization::Pointwise { 1 } else { 8 };
        let est = estimate_lipschitz(f, dim, 3.0, 4000, 10 + i as u64).unwrap();
        assert!(est <= f.lipschitz_l() * (1.0 + 1e-6), "forcing {i}: {est} > {}", f.lipschitz_l());
    }
}

#[test]
fn growth_bound_holds_on_random_samples() {
    let f = make_example1_forcing(0.2).with_additive(vec![source(1.0, 1.0), source(0.5, SQRT_2)]);
    let w = f.growth_bound();
    let ev = f.evaluator(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let t = rng.gen_range(-100.0..100.0);
        let r = rng.gen_range(0.0..10.0);
        let u: Vec<f64> = (0..8).map(|_| rng.gen_range(-r..=r)).collect();
        let phi: Vec<f64> = (0..8).map(|_| rng.gen_range(-r..=r)).collect();
        let v = ev.eval(t, &u, &phi).unwrap();
        assert!(norm2(&v) <= w.eval(norm2(&u) + norm2(&phi)) * (1.0 + 1e-12));
    }
}

#[test]
fn sine_transform_is_inverted_on_the_modes() {
    let tr = SineTransform::new(6, 24);
    let coeffs = [0.3, -1.0, 0.5, 2.0, 0.0, -0.7];
    let mut vals = vec![0.0; 24];
    tr.synthesize(&coeffs, &mut vals);
    let mut back = [0.0; 6];
    tr.analyze(&vals, &mut back);
    for (a, b) in coeffs.iter().zip(&back) {
        assert!((a - b).abs() < 1e-13);
    }
    // values at the nodes are the Dirichlet modes sqrt(2/pi) sin(k x)
    let x = tr.nodes()[5];
    let want: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * (2.0 / PI).sqrt() * ((k + 1) as f64 * x).sin())
        .sum();
    assert!((vals[5] - want).abs() < 1e-13);
}

#[test]
fn collocation_agrees_with_pointwise_on_one_mode_of_small_amplitude() {
    // sin(eps v) ~ eps v, so both realizations are nearly linear
    let eps = 1e-4;
    let f = AaaForcing {
        coupling: Coupling {
            scale: 1.0,
            nonlinearity: Nonlinearity::Sine,
        },
        ..AaaForcing::zero()
    }
    .with_realization(Realization::SineCollocation { oversampling: 4 });
    let v = eval_forcing(&f, 0.0, &[0.0, 0.0, 0.0], &[eps, 0.0, 0.0]).unwrap();
    assert!((v[0] - eps).abs() < 1e-11);
    assert!(v[1].abs() < 1e-11 && v[2].abs() < 1e-11);
}

#[test]
fn delayed_lookup() {
    let g = TimeGrid::spanning(-10.0, 10.0, 0.05).unwrap();
    let affine = Path::from_fn(g, |s| s).unwrap();
    assert!((point_delay_eval(&affine, 3.3, 1.0).unwrap()[0] - 2.3).abs() < 1e-13);
    assert_eq!(point_delay_eval(&affine, 2.0, 0.0).unwrap()[0], affine.sample(2.0).unwrap()[0]);
    let sine = Path::from_fn(g, f64::sin).unwrap();
    for t in [0.0f64, 1.234, 5.0, 9.99] {
        let v = point_delay_eval(&sine, t, PI).unwrap()[0];
        assert!((v + t.sin()).abs() <= 0.05 * 0.05 / 8.0 + 1e-14, "t {t}");
    }
    assert!(point_delay_eval(&sine, -8.0, 3.0).is_err());
    assert!(point_delay_eval(&sine, 0.0, -1.0).is_err());
}

#[test]
fn forcing_json_summary() {
    let f = make_example1_forcing(0.2);
    let v = serde_json::to_value(f.summary(Some(0.2))).unwrap();
    for key in ["beta", "frequencies", "envelope_scale", "memory_nonlinearity", "L_f", "W"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["L_f"], 1.0);
    let round: AaaForcing = serde_json::from_value(serde_json::to_value(&f).unwrap()).unwrap();
    assert_eq!(round, f);
    let decay = DecayPart {
        scale: 1.0,
        rate: 0.0,
        nonlinearity: Nonlinearity::Identity,
    };
    assert!(AaaForcing { decay, ..AaaForcing::zero() }.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forcing_is_lipschitz_pairwise(
        beta in -1.0f64..1.0,
        t in -30.0f64..30.0,
        u in prop::collection::vec(-3.0f64..3.0, 5),
        v in prop::collection::vec(-3.0f64..3.0, 5),
        p in prop::collection::vec(-3.0f64..3.0, 5),
        q in prop::collection::vec(-3.0f64..3.0, 5),
    ) {
        let f = make_example1_forcing(beta);
        let ev = f.evaluator(5).unwrap();
        let a = ev.eval(t, &u, &p).unwrap();
        let b = ev.eval(t, &v, &q).unwrap();
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let du: Vec<f64> = u.iter().zip(&v).map(|(x, y)| x - y).collect();
        let dp: Vec<f64> = p.iter().zip(&q).map(|(x, y)| x - y).collect();
        prop_assert!(norm2(&diff) <= f.lipschitz_l() * (norm2(&du) + norm2(&dp)) * (1.0 + 1e-12) + 1e-14);
    }
}
