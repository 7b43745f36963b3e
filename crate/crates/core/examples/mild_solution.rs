//! Whole-line mild solution of
//! `D^a u = A u + f(t, u, Ku)` with the Example-1 nonlinearity
//! `beta u (cos t + cos sqrt2 t) + beta e^{-|t|} sin u + sin(Ku)`,
//! `A` the Dirichlet Laplacian shifted by 100 and `k(tau) = e^{-tau}`.
//! A quasi-periodic source `cos t + cos sqrt2 t` in the first mode keeps the
//! solution away from zero.
//!
//! ```text
//! cargo run --release --example mild_solution
//! ```

use std::f64::consts::SQRT_2;

use fracaaa::forcing::{make_example1_forcing, AdditiveTerm};
use fracaaa::grid::{FracOrder, TimeGrid};
use fracaaa::memory::Kernel;
use fracaaa::operator::{certificate_horizon, make_dirichlet_laplacian, operator_decay_constant};
use fracaaa::scenario::random_path;
use fracaaa::solver::{picard_solve, MildMap, MildProblem, PicardOptions, SecondArg};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha = FracOrder::solver(1.5)?;
    let beta = 0.2;
    let op = make_dirichlet_laplacian(100.0, 8)?;
    let cm = operator_decay_constant(&op, alpha, certificate_horizon(&op, alpha, 1e3))?;
    let source = |frequency| AdditiveTerm {
        amplitude: 1.0,
        frequency,
        phase: 0.0,
        mode: 1,
    };
    let forcing = make_example1_forcing(beta).with_additive(vec![source(1.0), source(SQRT_2)]);
    let problem = MildProblem {
        op: &op,
        alpha,
        forcing: &forcing,
        second_arg: SecondArg::Memory {
            kernel: Kernel::exponential(1.0, 1.0)?,
        },
        cm,
    };
    let report = problem.contraction()?.with_example1(beta, 100.0)?;
    println!("CM = {cm:.4}, Lambda = {:.4} ({:?})", report.lambda, report.verdict);
    for c in report.example1_conditions.iter().flatten() {
        println!("  example condition at |mu| = {}: {:.3} < {:.3} -> {}", c.mu, c.lhs, c.rhs, c.holds);
    }

    let window = TimeGrid::spanning(-20.0, 100.0, 0.05)?;
    let map = MildMap::new(problem, window, 40.0)?;
    let opts = PicardOptions::default();
    let r = picard_solve(&map, &opts, None)?;
    println!(
        "\nPicard: {} iterations, converged {}, empirical ratio {:.3}, residual {:.1e}",
        r.iterations, r.converged, r.empirical_ratio, r.residual
    );
    for (i, d) in r.iterate_deltas.iter().enumerate() {
        println!("  delta {:>2}: {d:.3e}", i + 1);
    }
    let b = &r.truncation_budget;
    println!("budget: tail {:.2e}, quadrature {:.2e}", b.tail_error_bound, b.quadrature_error_estimate);

    let other = picard_solve(&map, &opts, Some(&random_path(window, 8, 1.0, 7)))?;
    let gap = r.path().combine(1.0, other.path(), -1.0)?.sup_norm();
    println!("second solve from a random guess differs by {gap:.2e}");

    println!("\n{:>6} {:>12} {:>12}", "t", "u_1", "u_2");
    for t in [0.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0] {
        let v = r.path().sample(t)?;
        println!("{t:>6} {:>12.6} {:>12.3e}", v[0], v[1]);
    }
    Ok(())
}
