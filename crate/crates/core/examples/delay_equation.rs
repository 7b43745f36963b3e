//! The point-delay variant: the second argument of the forcing is
//! `u(t - tau)` instead of a memory convolution. The generator has
//! eigenvalues `-k^2 - p`.
//!
//! ```text
//! cargo run --release --example delay_equation
//! ```

use std::f64::consts::SQRT_2;

use fracaaa::forcing::{make_example1_forcing, AdditiveTerm};
use fracaaa::grid::{FracOrder, TimeGrid};
use fracaaa::operator::{certificate_horizon, make_dirichlet_laplacian, operator_decay_constant};
use fracaaa::solver::{picard_solve, MildMap, MildProblem, PicardOptions, SecondArg};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha = FracOrder::solver(1.5)?;
    let p = 100.0;
    let op = make_dirichlet_laplacian(p, 6)?;
    let cm = operator_decay_constant(&op, alpha, certificate_horizon(&op, alpha, 1e3))?;
    let source = |frequency| AdditiveTerm {
        amplitude: 1.0,
        frequency,
        phase: 0.0,
        mode: 1,
    };
    let forcing = make_example1_forcing(0.2).with_additive(vec![source(1.0), source(SQRT_2)]);
    let window = TimeGrid::spanning(-10.0, 60.0, 0.05)?;
    println!("{:>5} {:>8} {:>6} {:>10} {:>10}", "tau", "Lambda", "iters", "|u|_inf", "u_1(50)");
    for tau in [0.5, 1.0, 2.0, 5.0] {
        let problem = MildProblem {
            op: &op,
            alpha,
            forcing: &forcing,
            second_arg: SecondArg::Delay { tau },
            cm,
        };
        let map = MildMap::new(problem, window, 40.0)?;
        let r = picard_solve(&map, &PicardOptions::default(), None)?;
        println!(
            "{tau:>5} {:>8.4} {:>6} {:>10.5} {:>10.6}",
            r.contraction.lambda,
            r.iterations,
            r.path().sup_norm(),
            r.path().sample(50.0)?[0]
        );
    }
    Ok(())
}
