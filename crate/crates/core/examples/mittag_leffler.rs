//! Mittag-Leffler values `E_a(-x)` by the direct evaluator and by the
//! hyperbolic contour, plus the decay certificate `C` in
//! `|E_a(mu t^a)| <= C / (1 + |mu| t^a)`.
//!
//! ```text
//! cargo run --release --example mittag_leffler
//! ```

use fracaaa::mlf::{certificate_stability, contour_eval, ml_eval_detailed, HyperbolicContour};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let contour = HyperbolicContour::default();
    println!("{:>5} {:>7} {:>22} {:>10} {:>10}", "alpha", "t", "E_a(-t^a)", "regime", "|diff|");
    for alpha in [1.25, 1.5, 1.75] {
        for t in [0.5f64, 2.0, 8.0, 32.0] {
            let v = ml_eval_detailed(alpha, Complex64::new(-t.powf(alpha), 0.0))?;
            let oracle = contour_eval(alpha, -1.0, t, &contour)?;
            println!(
                "{alpha:>5} {t:>7} {:>22.15e} {:>10} {:>10.2e}",
                v.value.re,
                format!("{:?}", v.regime),
                (v.value - oracle).norm()
            );
        }
    }

    println!("\ndecay certificates, mu = -1");
    for alpha in [1.1, 1.5, 1.9, 2.0] {
        let t_max = 1e4f64.powf(1.0 / alpha);
        let s = certificate_stability(alpha, -1.0, t_max, 2000)?;
        println!(
            "alpha {alpha:<4} C = {:<10.5} refined {:<10.5} change {:>7.2}%  {}",
            s.base.c_est,
            s.refined.c_est,
            100.0 * s.relative_change,
            if s.stable { "stable" } else { "does not stabilize" }
        );
    }
    Ok(())
}
