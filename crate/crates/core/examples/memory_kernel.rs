//! History convolution `Ku(t) = int_0^inf k(tau) u(t - tau) dtau` with an
//! exponential and a sampled kernel.
//!
//! ```text
//! cargo run --release --example memory_kernel
//! ```

use fracaaa::grid::{Path, TimeGrid};
use fracaaa::memory::{convolve_history, HistoryConvolver, Kernel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kernels = [
        ("e^-tau", Kernel::exponential(1.0, 1.0)?),
        ("hat", Kernel::sampled(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.0])?),
    ];
    for (name, k) in &kernels {
        let h = k.history_for(1e-10)?;
        println!("{name}: |k|_1 = {:.4}, tail past 5 = {:.3e}, history for 1e-10 = {h:.2}", k.l1_norm()?, k.tail_bound(5.0)?);
    }

    // K cos(nu .) against the closed form for e^{-tau}: Re(e^{i nu t} / (1 + i nu))
    let nu = 2.0;
    let g = TimeGrid::spanning(-50.0, 10.0, 0.01)?;
    let u = Path::from_fn(g, |s| (nu * s).cos())?;
    let k = &kernels[0].1;
    let conv = HistoryConvolver::new(k, g.dt())?;
    let all = conv.apply(u.values(), 1);
    println!("\n{:>6} {:>12} {:>12} {:>12}", "t", "recursive", "direct", "exact");
    for t in [0.0, 2.5, 5.0, 10.0] {
        let j = g.nearest(t).expect("on grid");
        let direct = convolve_history(k, &u, j, 40.0)?[0];
        let exact = ((nu * t).cos() + nu * (nu * t).sin()) / (1.0 + nu * nu);
        println!("{t:>6} {:>12.8} {direct:>12.8} {exact:>12.8}", all[j]);
    }
    Ok(())
}
