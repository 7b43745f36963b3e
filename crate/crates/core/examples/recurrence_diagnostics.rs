//! Almost-automorphy diagnostics: translates along the shifts `2 pi q_m`
//! with `q_m` the denominators of the convergents of `sqrt 2`, the split
//! into a recurrent profile plus a decaying remainder, and the composition
//! bound for the forcing along a fixed point.
//!
//! ```text
//! cargo run --release --example recurrence_diagnostics
//! ```

use std::f64::consts::SQRT_2;

use fracaaa::aaadiag::{
    composition_closure, decay_split_sup, late_window_profile, sqrt2_convergents, sqrt2_shift_sequence,
    translate_test, ShiftSequence,
};
use fracaaa::forcing::{make_example1_forcing, AdditiveTerm};
use fracaaa::grid::{FracOrder, Path, TimeGrid};
use fracaaa::memory::Kernel;
use fracaaa::operator::{certificate_horizon, make_dirichlet_laplacian, operator_decay_constant};
use fracaaa::solver::{picard_solve, MildMap, MildProblem, PicardOptions, SecondArg};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("convergents of sqrt 2: {:?}", sqrt2_convergents(6));
    let shifts = sqrt2_shift_sequence(5);
    let probe = TimeGrid::spanning(0.0, 20.0, 0.01)?;
    let g = TimeGrid::spanning(-190.0, 210.0, 0.01)?;

    let two_tone = Path::from_fn(g, |t| t.cos() + (SQRT_2 * t).cos())?;
    let decay = Path::from_fn(g, |t| (-t.max(0.0)).exp())?;
    let random = ShiftSequence::user(vec![17.0, 43.5, 88.1, 120.7, 171.3])?;
    for (name, u, s) in [
        ("cos t + cos sqrt2 t, sqrt2 shifts", &two_tone, &shifts),
        ("cos t + cos sqrt2 t, other shifts", &two_tone, &random),
        ("e^-t, sqrt2 shifts", &decay, &shifts),
    ] {
        let r = translate_test(u, s, &probe)?;
        let errs: Vec<String> = r.errors.iter().map(|e| format!("{e:.3}")).collect();
        println!("{name:<36} errors [{}] recurrent {}", errs.join(", "), r.recurrent);
    }

    // the fixed point of a small Example-1 instance
    let alpha = FracOrder::solver(1.5)?;
    let op = make_dirichlet_laplacian(100.0, 4)?;
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
    let window = TimeGrid::spanning(-20.0, 420.0, 0.05)?;
    let map = MildMap::new(problem, window, 40.0)?;
    let u = picard_solve(&map, &PicardOptions::default(), None)?.fixed_point;
    let probe = TimeGrid::spanning(200.0, 236.0, 0.05)?;
    let r = translate_test(&u, &shifts, &probe)?;
    println!("\nfixed point translate errors:\n{}", r.to_csv());

    let (base, cand) = late_window_profile(&u, shifts.max_shift(), 0.0)?;
    for t_split in [0.0, 5.0, 20.0] {
        println!("sup_(t >= {t_split}) |u(t) - u(t + s_5)| = {:.3e}", decay_split_sup(&base, &cand, t_split)?);
    }

    let comp = composition_closure(&map, &u, &shifts, &probe)?;
    println!("\ncomposition, L_f = {}, |k|_1 = {}:", comp.l_f, comp.k_l1);
    for row in &comp.rows {
        println!(
            "  shift {:>8.3}: forcing {:.3e} <= {:.3e} (state {:.3e}, intrinsic {:.3e})",
            row.shift, row.forcing_error, row.bound, row.state_error, row.intrinsic_error
        );
    }
    Ok(())
}
