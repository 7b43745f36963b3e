//! Caputo and Riemann-Liouville operators on sampled data, checked against
//! the power rule `D^a t^p = Gamma(p+1)/Gamma(p+1-a) t^{p-a}`.
//!
//! ```text
//! cargo run --release --example fractional_calculus
//! ```

use fracaaa::fraccalc::{caputo_derivative, rl_derivative, rl_integral};
use fracaaa::grid::{FracOrder, Path, TimeGrid};
use statrs::function::gamma::gamma;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha = FracOrder::new(1.5)?;
    // t^3 is reproduced to rounding by the Caputo rule, so t^4 shows the order
    let p = 4.0;
    let exact = |t: f64| gamma(p + 1.0) / gamma(p + 1.0 - alpha.value()) * t.powf(p - alpha.value());
    println!("D^1.5 t^4 on [0, 1]: max error");
    println!("{:>8} {:>12} {:>12}", "dt", "Caputo", "RL on t>=1/4");
    let mut prev: Option<(f64, f64)> = None;
    for dt in [0.02, 0.01, 0.005, 0.0025] {
        let f = Path::from_fn(TimeGrid::spanning(0.0, 1.0, dt)?, |t| t.powf(p))?;
        let c = caputo_derivative(&f, alpha)?;
        let r = rl_derivative(&f, alpha)?;
        let err = |d: &Path, from: f64| {
            (0..d.len())
                .filter(|&j| d.grid().t(j) >= from)
                .map(|j| (d.scalar(j) - exact(d.grid().t(j))).abs())
                .fold(0.0, f64::max)
        };
        let (ec, er) = (err(&c, 0.0), err(&r.path, 0.25));
        match prev {
            Some((pc, pr)) => println!(
                "{dt:>8} {ec:>12.3e} {er:>12.3e}   orders {:.2} {:.2}",
                (pc / ec).log2(),
                (pr / er).log2()
            ),
            None => println!("{dt:>8} {ec:>12.3e} {er:>12.3e}"),
        }
        prev = Some((ec, er));
    }

    // I^{1/2} I^{1/2} = I^1
    let f = Path::from_fn(TimeGrid::spanning(0.0, 1.0, 1e-3)?, f64::sin)?;
    let half = FracOrder::new(0.5)?;
    let twice = rl_integral(&rl_integral(&f, half)?, half)?;
    let once = rl_integral(&f, FracOrder::new(1.0)?)?;
    println!("\nsemigroup defect for sin t at dt 1e-3: {:.2e}", twice.combine(1.0, &once, -1.0)?.sup_norm());

    // D^1.5 of a constant is singular at the origin in the RL sense only
    let one = Path::from_fn(TimeGrid::spanning(0.0, 1.0, 0.01)?, |_| 1.0)?;
    let r = rl_derivative(&one, alpha)?;
    println!(
        "RL D^1.5 1: origin flagged singular = {}, value at 1 = {:.4} (exact {:.4}); Caputo gives {:.1e}",
        r.singular_origin,
        r.value(one.len() - 1).unwrap_or(f64::NAN),
        1.0 / gamma(-0.5),
        caputo_derivative(&one, alpha)?.sup_norm()
    );
    Ok(())
}
