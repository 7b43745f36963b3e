//! The shifted Dirichlet Laplacian on `(0, pi)`: sector check, resolvent
//! family `S_a(t)` and the decay constant `CM`.
//!
//! ```text
//! cargo run --release --example sectorial_operator
//! ```

use std::f64::consts::PI;

use fracaaa::grid::FracOrder;
use fracaaa::operator::{
    apply_family, certificate_horizon, make_dirichlet_laplacian, operator_decay_constant, verify_sectorial,
    StateVector,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha = FracOrder::solver(1.5)?;
    let op = make_dirichlet_laplacian(1.0, 6)?;
    println!("eigenvalues {:?}", op.eigenvalues());
    println!("omega {}  theta {:.4}  M {:.4}", op.omega(), op.sector().theta, op.sector().m);

    let theta = op.sector().theta;
    for m in [1.0, 1.0 / theta.sin()] {
        let r = verify_sectorial(&op, op.omega(), theta, m, 25)?;
        println!(
            "resolvent bound with M = {m:.3}: ok = {}, worst ratio {:.4} at {:.3}",
            r.ok, r.worst_ratio, r.witness
        );
    }
    let wrong = verify_sectorial(&op, -20.0, PI / 6.0, 1.0, 9)?;
    println!("vertex -20 (inside the spectrum): ok = {}, ratio {:.2e}", wrong.ok, wrong.worst_ratio);

    let cm = operator_decay_constant(&op, alpha, certificate_horizon(&op, alpha, 1e4))?;
    println!("\nCM = {cm:.5}");
    let x = StateVector::new(vec![1.0, -0.5, 0.25, 0.0, 0.5, -1.0])?;
    println!("{:>6} {:>12} {:>12}", "t", "|S(t)x|", "bound");
    for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
        let y = apply_family(&op, alpha, t, &x)?;
        let bound = cm / (1.0 + op.omega().abs() * f64::powf(t, 1.5)) * x.norm();
        println!("{t:>6} {:>12.5e} {bound:>12.5e}", y.norm());
    }
    Ok(())
}
