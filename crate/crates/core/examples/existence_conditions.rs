//! Checks of the existence hypotheses: the contraction constant for
//! Lipschitz forcings, and the growth conditions for forcings bounded by
//! `W(|x|)` in a weighted space with weight `h`.
//!
//! ```text
//! cargo run --release --example existence_conditions
//! ```

use fracaaa::aaadiag::{beta_of_r, check_theorem2, Theorem2Options, WeightFunction};
use fracaaa::forcing::GrowthBound;
use fracaaa::grid::{logspace, FracOrder};
use fracaaa::mlf::kernel_integral_identity;
use fracaaa::solver::{contraction_constant, example1_condition};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha = FracOrder::solver(1.5)?;
    println!("Lambda = CM |w|^(-1/a) pi/(a sin(pi/a)) L_f (1 + |k|_1), CM = 2, |k|_1 = 1");
    for (omega, l_f) in [(-1.0, 0.2), (-4.0, 0.2), (-101.0, 1.0), (-101.0, 3.0)] {
        let r = contraction_constant(2.0, alpha, omega, l_f, 1.0)?;
        println!("  w {omega:>7}  L_f {l_f}: Lambda {:.4} {:?}", r.lambda, r.verdict);
    }
    let c = example1_condition(2.0, alpha, 0.2, 100.0)?;
    println!("example condition 1 + beta < rhs: {:.3} < {:.3} -> {}", c.lhs, c.rhs, c.holds);

    let (a, w, cm) = (1.5, -1.0, 1.0);
    let opts = Theorem2Options::default();
    let xi = logspace(1.0, 1e6, 13);
    let holder = GrowthBound::new(1.0, 1.0, 0.5)?;
    let h = WeightFunction::Polynomial { coeff: 1.0, power: 1.0 };
    let rep = check_theorem2(cm, a, w, &holder, &h, &[0.5, 1.0, 2.0, 5.0, 10.0], &xi, &opts)?;
    println!("\nW = 1 + sqrt(xi), h = 1 + t:");
    println!("  limit condition {}, min xi/beta(xi) {:.3} -> {}", rep.condition_i_ok, rep.condition_iv_min, rep.condition_iv_ok);
    for (r, b) in &rep.beta_samples {
        println!("  beta({r}) = {b:.4}");
    }
    if let Some(hv) = &rep.holder_variant {
        println!("  Hoelder constant gamma/CM finite: {} (window sup {:.3e})", hv.ok, hv.window_sup);
    }

    let ident = kernel_integral_identity(a, w)?;
    let lin = GrowthBound::new(0.0, 1.0, 1.0)?;
    println!("\nW(xi) = xi, h = 1: beta(xi) = CM I xi with I = {ident:.5}");
    println!("  beta(10) = {:.5}", beta_of_r(cm, a, w, &lin, &WeightFunction::one(), 10.0, &opts.t_grid)?);
    for level in [0.9, 0.98, 1.02, 1.1] {
        let rep = check_theorem2(level / ident, a, w, &lin, &WeightFunction::one(), &[1.0], &xi, &opts)?;
        println!("  CM I = {level}: min xi/beta {:.4} -> {}", rep.condition_iv_min, rep.condition_iv_ok);
    }
    Ok(())
}
