//! Riemann-Liouville integrals and Caputo / Riemann-Liouville derivatives of
//! sampled scalar functions on uniform grids starting at `t = 0`.
//!
//! The integral `I^a f(t) = (1/Gamma(a)) int_0^t (t-s)^{a-1} f(s) ds` is
//! discretized by product trapezoidal quadrature: `f` is replaced by its
//! piecewise-linear interpolant and the weakly singular weight is integrated
//! exactly on each cell. For `a = 1` this is the cumulative trapezoidal rule.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{FracOrder, Path};

/// Second difference `(m+1)^p - 2 m^p + (m-1)^p`, accurate for large `m`.
fn second_diff_pow(m: f64, p: f64) -> f64 {
    if m < 40.0 {
        return (m + 1.0).powf(p) - 2.0 * m.powf(p) + (m - 1.0).powf(p);
    }
    // m^p * 2 sum_{k>=1} C(p, 2k) m^{-2k}
    let inv2 = 1.0 / (m * m);
    let mut binom = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for k in 1..30 {
        let j = 2.0 * k as f64;
        binom *= (p - j + 2.0) * (p - j + 1.0) / ((j - 1.0) * j);
        pow *= inv2;
        let term = binom * pow;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    2.0 * m.powf(p) * sum
}

/// `(n-1)^p - (n-p) n^{p-1}`, the weight of the first node, for `p = a + 1`.
fn first_weight(n: f64, p: f64) -> f64 {
    if n < 40.0 {
        return (n - 1.0).powf(p) - (n - p) * n.powf(p - 1.0);
    }
    // n^p sum_{k>=2} C(p, k) (-1/n)^k
    let x = -1.0 / n;
    let mut binom = p;
    let mut pow = x;
    let mut sum = 0.0;
    for k in 2..60 {
        let kf = k as f64;
        binom *= (p - kf + 1.0) / kf;
        pow *= x;
        let term = binom * pow;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    n.powf(p) * sum
}

fn check_scalar_from_origin(f: &Path, what: &str) -> Result<()> {
    f.require_scalar(what)?;
    if f.grid().t0() != 0.0 {
        return Err(Error::input(format!(
            "{what} needs a grid starting at t = 0, got t0 = {}",
            f.grid().t0()
        )));
    }
    Ok(())
}

fn integrate_values(values: &[f64], alpha: f64, dt: f64) -> Vec<f64> {
    let n = values.len();
    let p = alpha + 1.0;
    let interior: Vec<f64> = (0..n).map(|m| if m == 0 { 0.0 } else { second_diff_pow(m as f64, p) }).collect();
    let scale = dt.powf(alpha) / gamma(alpha + 2.0);
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate().skip(1) {
        let mut acc = first_weight(i as f64, p) * values[0] + values[i];
        for j in 1..i {
            acc += interior[i - j] * values[j];
        }
        *o = scale * acc;
    }
    out
}

/// `I^a f` on the grid of `f`; the value at `t = 0` is exactly zero.
pub fn rl_integral(f: &Path, alpha: FracOrder) -> Result<Path> {
    check_scalar_from_origin(f, "fractional integral")?;
    let out = integrate_values(f.values(), alpha.value(), f.grid().dt());
    Path::new(*f.grid(), 1, out)
}

fn second_differences(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    let h2 = dt * dt;
    let mut d = vec![0.0; n];
    for j in 1..n - 1 {
        d[j] = (values[j + 1] - 2.0 * values[j] + values[j - 1]) / h2;
    }
    d[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2;
    d[n - 1] = (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / h2;
    d
}

fn check_derivative_args(f: &Path, alpha: FracOrder, what: &str) -> Result<()> {
    if !alpha.in_solver_range() {
        return Err(Error::domain(format!(
            "{what} is implemented for 1 < alpha < 2, got {}",
            alpha.value()
        )));
    }
    check_scalar_from_origin(f, what)?;
    if f.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: f.len(),
        });
    }
    Ok(())
}

/// Caputo derivative `I^{2-a} f''` with `f''` from second-order differences.
pub fn caputo_derivative(f: &Path, alpha: FracOrder) -> Result<Path> {
    check_derivative_args(f, alpha, "Caputo derivative")?;
    let dt = f.grid().dt();
    let d2 = second_differences(f.values(), dt);
    let out = integrate_values(&d2, 2.0 - alpha.value(), dt);
    Path::new(*f.grid(), 1, out)
}

/// Riemann-Liouville derivative with its reliability flag at the origin.
#[derive(Debug, Clone)]
pub struct RlDerivative {
    pub path: Path,
    /// The exact derivative blows up like `t^{-a}` or `t^{1-a}` at `t = 0`
    /// when `f(0) != 0` or `f'(0) != 0`; the sample there is meaningless.
    pub singular_origin: bool,
}

impl RlDerivative {
    /// Sample `j`, or `None` at a singular origin.
    pub fn value(&self, j: usize) -> Option<f64> {
        if j == 0 && self.singular_origin {
            None
        } else {
            Some(self.path.scalar(j))
        }
    }
}

/// Riemann-Liouville derivative `(I^{2-a} f)''`.
pub fn rl_derivative(f: &Path, alpha: FracOrder) -> Result<RlDerivative> {
    check_derivative_args(f, alpha, "Riemann-Liouville derivative")?;
    let dt = f.grid().dt();
    let v = f.values();
    let integral = integrate_values(v, 2.0 - alpha.value(), dt);
    let out = second_differences(&integral, dt);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let slope0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
    let singular_origin = v[0].abs() > 1e-12 * scale || slope0.abs() * f.grid().t_end() > 1e-9 * scale;
    Ok(RlDerivative {
        path: Path::new(*f.grid(), 1, out)?,
        singular_origin,
    })
}
