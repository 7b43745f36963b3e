//! Solutions with a nonlocal initial condition `u(0) + g(u) = u0` merge with
//! the whole-line mild solution: the gap decays like `1/(1 + |w| t^a)`.
//!
//! ```text
//! cargo run --release --example nonlocal_initial_value
//! ```

use std::f64::consts::SQRT_2;

use fracaaa::forcing::{make_example1_forcing, AdditiveTerm};
use fracaaa::grid::{norm2, FracOrder, Path, TimeGrid};
use fracaaa::memory::Kernel;
use fracaaa::operator::{certificate_horizon, make_dirichlet_laplacian, operator_decay_constant, StateVector};
use fracaaa::solver::{
    asymptotic_gap, fit_gap_envelope, ivp_solve, picard_solve, MildMap, MildProblem, NonlocalCondition,
    PicardOptions, SecondArg,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha = FracOrder::solver(1.5)?;
    let n = 4;
    let op = make_dirichlet_laplacian(100.0, n)?;
    let cm = operator_decay_constant(&op, alpha, certificate_horizon(&op, alpha, 1e3))?;
    let source = |frequency| AdditiveTerm {
        amplitude: 1.0,
        frequency,
        phase: 0.0,
        mode: 1,
    };
    let forcing = make_example1_forcing(0.2).with_additive(vec![source(1.0), source(SQRT_2)]);
    let problem = MildProblem {
        op: &op,
        alpha,
        forcing: &forcing,
        second_arg: SecondArg::Memory {
            kernel: Kernel::exponential(1.0, 1.0)?,
        },
        cm,
    };
    let dt = 0.05;
    let window = TimeGrid::spanning(-20.0, 60.0, dt)?;
    let map = MildMap::new(problem, window, 40.0)?;
    let u = picard_solve(&map, &PicardOptions::default(), None)?.fixed_point;

    // forcing samples along u on [0, 50]
    let f = map.forcing_path(&u)?;
    let (j0, j1) = (window.nearest(0.0).expect("node"), window.nearest(50.0).expect("node"));
    let f = f.slice(j0, j1 + 1)?;
    let f = Path::new(TimeGrid::new(0.0, dt, f.len())?, n, f.into_values())?;

    let cond = NonlocalCondition {
        points: vec![(1.0, 0.5)],
        u0: StateVector::basis(n, 0),
    };
    let v = ivp_solve(&op, alpha, &f, &cond, &u)?;
    let gap = asymptotic_gap(&v, &u)?;
    let transient = norm2(&cond.transient(&u)?);
    let env = fit_gap_envelope(&gap, alpha, op.omega(), cm, transient)?;
    println!("|u0 - g(u)| = {transient:.4}");
    println!("{:>6} {:>12} {:>14}", "t", "|v - u|", "(1+|w|t^a)|v-u|");
    for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
        let g = gap.sample(t)?[0];
        println!("{t:>6} {g:>12.4e} {:>14.4e}", g * (1.0 + op.omega().abs() * f64::powf(t, 1.5)));
    }
    println!(
        "envelope: c_early {:.3}, c_late {:.3}, dominated {}",
        env.c_early, env.c_late, env.dominated
    );
    Ok(())
}
