//! The memory operator `Ku(t) = int_{-inf}^t k(t - s) u(s) ds` for kernels
//! in `L^1(0, inf)`, with explicit control of the truncated history.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Path;

/// Relative size below which the last sample of a sampled kernel counts as
/// decayed.
const SAMPLED_TAIL_TOLERANCE: f64 = 1e-3;

/// A memory kernel on `[0, inf)`.
///
/// Sampled kernels are piecewise linear between their (possibly nonuniform)
/// nodes and vanish beyond the last node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kernel {
    Exponential { rate: f64, scale: f64 },
    Sampled { grid: Vec<f64>, values: Vec<f64> },
}

impl Kernel {
    /// `k(tau) = scale e^{-rate tau}`.
    pub fn exponential(rate: f64, scale: f64) -> Result<Self> {
        let k = Kernel::Exponential { rate, scale };
        k.validate()?;
        Ok(k)
    }

    pub fn sampled(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let k = Kernel::Sampled { grid, values };
        k.validate()?;
        Ok(k)
    }

    pub fn zero() -> Self {
        Kernel::Exponential { rate: 1.0, scale: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::Exponential { rate, scale } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(Error::NonIntegrable(format!(
                        "exponential kernel needs a positive rate, got {rate}"
                    )));
                }
                if !scale.is_finite() {
                    return Err(Error::input("kernel scale must be finite"));
                }
            }
            Kernel::Sampled { grid, values } => {
                if grid.len() < 2 || grid.len() != values.len() {
                    return Err(Error::input(format!(
                        "sampled kernel needs matching grid and values with at least two nodes, got {} and {}",
                        grid.len(),
                        values.len()
                    )));
                }
                if grid[0] != 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|g| !g.is_finite()) {
                    return Err(Error::input("sampled kernel grid must start at 0 and increase strictly"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::input("sampled kernel values must be finite"));
                }
                let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let last = values[values.len() - 1].abs();
                if last > SAMPLED_TAIL_TOLERANCE * peak {
                    return Err(Error::NonIntegrable(format!(
                        "sampled kernel has not decayed at its last node ({last:.3e} against peak {peak:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `k(tau)`; zero for negative arguments.
    pub fn eval(&self, tau: f64) -> f64 {
        if tau < 0.0 {
            return 0.0;
        }
        match self {
            Kernel::Exponential { rate, scale } => scale * (-rate * tau).exp(),
            Kernel::Sampled { grid, values } => {
                let last = grid.len() - 1;
                if tau > grid[last] {
                    return 0.0;
                }
                let i = grid.partition_point(|&g| g <= tau).clamp(1, last);
                let (a, b) = (grid[i - 1], grid[i]);
                let w = (tau - a) / (b - a);
                (1.0 - w) * values[i - 1] + w * values[i]
            }
        }
    }

    /// `int_0^inf |k|`; exact for the exponential form, trapezoidal on
    /// `|values|` (an upper bound for the interpolant) otherwise.
    pub fn l1_norm(&self) -> Result<f64> {
        self.validate()?;
        self.tail_bound(0.0)
    }

    /// `int_0^inf k`, the factor by which `K` maps constants.
    pub fn signed_integral(&self) -> f64 {
        match self {
            Kernel::Exponential { rate, scale } => scale / rate,
            Kernel::Sampled { grid, values } => grid
                .windows(2)
                .zip(values.windows(2))
                .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
                .sum(),
        }
    }

    /// Upper bound on `int_T^inf |k|`.
    pub fn tail_bound(&self, horizon: f64) -> Result<f64> {
        if !(horizon >= 0.0) {
            return Err(Error::domain(format!("tail horizon must be nonnegative, got {horizon}")));
        }
        self.validate()?;
        Ok(match self {
            Kernel::Exponential { rate, scale } => (-rate * horizon).exp() * scale.abs() / rate,
            Kernel::Sampled { grid, values } => {
                let mut sum = 0.0;
                for i in 1..grid.len() {
                    let (a, b) = (grid[i - 1], grid[i]);
                    if b <= horizon {
                        continue;
                    }
                    let lo = a.max(horizon);
                    let ka = if lo > a { self.eval(lo) } else { values[i - 1] };
                    sum += 0.5 * (b - lo) * (ka.abs() + values[i].abs());
                }
                sum
            }
        })
    }

    /// Effective length of the kernel: past it the tail is below `1e-16`
    /// of the norm.
    pub fn support_hint(&self) -> f64 {
        match self {
            Kernel::Exponential { rate, .. } => 16.0 * std::f64::consts::LN_10 / rate,
            Kernel::Sampled { grid, .. } => grid[grid.len() - 1],
        }
    }

    /// Smallest history length whose tail bound is at most `tol`.
    pub fn history_for(&self, tol: f64) -> Result<f64> {
        let total = self.l1_norm()?;
        if total <= tol {
            return Ok(0.0);
        }
        match self {
            Kernel::Exponential { rate, scale } => Ok((scale.abs() / (rate * tol)).ln() / rate),
            Kernel::Sampled { grid, .. } => {
                let mut found = grid[grid.len() - 1];
                for &g in grid.iter().rev() {
                    if self.tail_bound(g)? <= tol {
                        found = g;
                    } else {
                        break;
                    }
                }
                Ok(found)
            }
        }
    }
}

/// Trapezoidal approximation of `int_{t_j - T}^{t_j} k(t_j - s) u(s) ds`.
///
/// The error against the full history integral is the quadrature error plus
/// at most `tail_bound(T) * sup |u|`.
pub fn convolve_history(kernel: &Kernel, u: &Path, j: usize, history_t: f64) -> Result<Vec<f64>> {
    kernel.validate()?;
    if j >= u.len() {
        return Err(Error::input(format!("node {j} outside a path of {} nodes", u.len())));
    }
    if !(history_t >= 0.0) {
        return Err(Error::domain(format!("history length must be nonnegative, got {history_t}")));
    }
    let dt = u.grid().dt();
    let cells = (history_t / dt - 1e-9).ceil().max(0.0) as usize;
    if cells > j {
        let missing = (cells - j) as f64 * dt;
        return Err(Error::coverage(
            format!("history of length {history_t} at node {j} reaches before the path start"),
            missing,
        ));
    }
    let mut acc = vec![0.0; u.dim()];
    for m in 0..=cells {
        let w = if m == 0 || m == cells { 0.5 * dt } else { dt };
        let k = kernel.eval(m as f64 * dt) * w;
        if k == 0.0 {
            continue;
        }
        for (a, x) in acc.iter_mut().zip(u.at(j - m)) {
            *a += k * x;
        }
    }
    Ok(acc)
}

/// Evaluates `K` along a whole node sequence whose values before the first
/// node are frozen at the first value.
///
/// Exponential kernels use the recursion
/// `K_j = q K_{j-1} + c dt/2 (q u_{j-1} + u_j)`, `q = e^{-rate dt}`, started
/// from the trapezoidal steady state of the constant pre-history; other
/// kernels sum directly over their support.
#[derive(Debug, Clone)]
pub struct HistoryConvolver {
    dt: f64,
    mode: ConvolverMode,
}

#[derive(Debug, Clone)]
enum ConvolverMode {
    Recursive { q: f64, c: f64 },
    Direct { weights: Vec<f64> },
}

impl HistoryConvolver {
    pub fn new(kernel: &Kernel, dt: f64) -> Result<Self> {
        kernel.validate()?;
        if !(dt > 0.0) {
            return Err(Error::domain("convolution step must be positive"));
        }
        let mode = match kernel {
            Kernel::Exponential { rate, scale } => ConvolverMode::Recursive {
                q: (-rate * dt).exp(),
                c: *scale,
            },
            Kernel::Sampled { .. } => {
                let cells = (kernel.support_hint() / dt).ceil() as usize;
                let weights: Vec<f64> = (0..=cells)
                    .map(|m| {
                        let w = if m == 0 || m == cells { 0.5 * dt } else { dt };
                        w * kernel.eval(m as f64 * dt)
                    })
                    .collect();
                ConvolverMode::Direct { weights }
            }
        };
        Ok(HistoryConvolver { dt, mode })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `K u` at every node of `values` (node-major, `dim` entries per node).
    pub fn apply(&self, values: &[f64], dim: usize) -> Vec<f64> {
        let n = values.len() / dim;
        let mut out = vec![0.0; values.len()];
        if n == 0 {
            return out;
        }
        match &self.mode {
            ConvolverMode::Recursive { q, c } => {
                let h = 0.5 * self.dt * c;
                let steady = h * (1.0 + q) / (1.0 - q);
                for d in 0..dim {
                    out[d] = steady * values[d];
                }
                for j in 1..n {
                    for d in 0..dim {
                        out[j * dim + d] =
                            q * out[(j - 1) * dim + d] + h * (q * values[(j - 1) * dim + d] + values[j * dim + d]);
                    }
                }
            }
            ConvolverMode::Direct { weights } => {
                for j in 0..n {
                    for (m, w) in weights.iter().enumerate() {
                        let src = j.saturating_sub(m);
                        for d in 0..dim {
                            out[j * dim + d] += w * values[src * dim + d];
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    #[test]
    fn exponential_norms() {
        assert_eq!(Kernel::exponential(1.0, 1.0).unwrap().l1_norm().unwrap(), 1.0);
        assert_eq!(Kernel::exponential(2.0, 3.0).unwrap().l1_norm().unwrap(), 1.5);
        assert_eq!(Kernel::zero().l1_norm().unwrap(), 0.0);
        let k = Kernel::exponential(1.0, 1.0).unwrap();
        assert!((k.tail_bound(100f64.ln()).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(k.tail_bound(0.0).unwrap(), k.l1_norm().unwrap());
    }

    #[test]
    fn rejects_invalid_kernels() {
        assert!(matches!(Kernel::exponential(0.0, 1.0), Err(Error::NonIntegrable(_))));
        assert!(matches!(
            Kernel::sampled(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 1.0]),
            Err(Error::NonIntegrable(_))
        ));
        assert!(Kernel::sampled(vec![0.0, 2.0, 1.0], vec![1.0, 0.5, 0.0]).is_err());
    }

    #[test]
    fn sampled_norm_and_tail() {
        // triangle 1 - tau on [0, 1], nonuniform nodes
        let k = Kernel::sampled(vec![0.0, 0.25, 1.0], vec![1.0, 0.75, 0.0]).unwrap();
        assert!((k.l1_norm().unwrap() - 0.5).abs() < 1e-15);
        assert!((k.tail_bound(0.5).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(k.tail_bound(2.0).unwrap(), 0.0);
        assert!((k.eval(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn json_layout() {
        let k = Kernel::exponential(1.0, 2.0).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(s, r#"{"form":"exponential","rate":1.0,"scale":2.0}"#);
        let back: Kernel = serde_json::from_str(r#"{"form":"sampled","grid":[0,1],"values":[1,0]}"#).unwrap();
        assert!(matches!(back, Kernel::Sampled { .. }));
    }

    #[test]
    fn coverage_error_reports_extension() {
        let g = TimeGrid::new(0.0, 0.1, 11).unwrap();
        let u = Path::from_fn(g, |_| 1.0).unwrap();
        let k = Kernel::exponential(1.0, 1.0).unwrap();
        match convolve_history(&k, &u, 5, 1.0) {
            Err(Error::Coverage { extend_by, .. }) => assert!((extend_by - 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn recursion_matches_direct_sum() {
        let dt = 0.05;
        let k = Kernel::exponential(0.8, 1.3).unwrap();
        let conv = HistoryConvolver::new(&k, dt).unwrap();
        let n = 400;
        let vals: Vec<f64> = (0..n).map(|j| (0.3 * j as f64 * dt).sin() + 0.2).collect();
        let out = conv.apply(&vals, 1);
        // direct trapezoid over a long constant pre-history
        let pad = 4000;
        let ext: Vec<f64> = (0..pad).map(|_| vals[0]).chain(vals.iter().copied()).collect();
        for j in [0, 1, 50, 399] {
            let jj = j + pad;
            let mut acc = 0.0;
            for m in 0..=jj {
                let w = if m == 0 || m == jj { 0.5 * dt } else { dt };
                acc += w * k.eval(m as f64 * dt) * ext[jj - m];
            }
            assert!((acc - out[j]).abs() < 1e-12, "node {j}: {acc} vs {}", out[j]);
        }
    }
}
