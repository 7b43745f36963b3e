//! Mittag-Leffler evaluation and the scalar symbol of the resolvent family.
//!
//! For a diagonal generator the family `S_a(t)` acts on an eigenmode with
//! eigenvalue `mu` as multiplication by `E_a(mu t^a)`. Two independent
//! routes are provided:
//!
//! * [`ml_eval`]: Taylor series, the exponential-plus-algebraic asymptotic
//!   expansion, and (where neither is accurate) the exact branch-cut integral
//!   representation, picked by a-priori error estimates;
//! * [`contour_eval`]: trapezoidal quadrature of the inverse Laplace integral
//!   `(1/2 pi i) int e^{lt} l^{a-1} / (l^a - mu) dl` along a hyperbola.
//!
//! The module also produces empirical decay certificates
//! `|E_a(mu t^a)| <= c / (1 + |mu| t^a)` and the closed form of
//! `int_0^inf dt / (1 + |w| t^a)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::grid::{logspace, FracOrder};
use crate::quad;

/// Absolute accuracy requested from each regime (relative once `|E| > 1`).
const TARGET: f64 = 1e-11;
const EPS: f64 = f64::EPSILON;
/// Beyond this value of `|z|^{1/a}` the series loses more than eleven digits
/// to cancellation unless the function itself is exponentially large.
const SERIES_RHO_MAX: f64 = 14.0;

/// Sector data of a sectorial operator: the resolvent exists outside
/// `omega + {l : |arg(-l)| < theta}` and obeys `|(l - A)^{-1}| <= M / |l - omega|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorType {
    pub omega: f64,
    pub theta: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

impl SectorType {
    pub fn new(omega: f64, theta: f64, m: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::domain("sector vertex must be finite"));
        }
        if !(0.0..0.5 * PI).contains(&theta) {
            return Err(Error::domain(format!("sector angle must lie in [0, pi/2), got {theta}")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::domain(format!("resolvent bound M must be positive, got {m}")));
        }
        Ok(SectorType { omega, theta, m })
    }

    /// As [`SectorType::new`], additionally requiring negative type.
    pub fn negative_type(omega: f64, theta: f64, m: f64) -> Result<Self> {
        if !(omega < 0.0) {
            return Err(Error::domain(format!("solver needs a sector of negative type, got omega = {omega}")));
        }
        Self::new(omega, theta, m)
    }

    /// Whether the angle is small enough for the order-`a` problem to be
    /// well posed, i.e. `theta < pi (1 - a/2)`.
    pub fn admits_order(&self, alpha: f64) -> bool {
        self.theta < PI * (1.0 - 0.5 * alpha)
    }
}

/// Evaluation route used by [`ml_eval_detailed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ClosedForm,
    Series,
    Asymptotic,
    BranchCut,
}

/// A Mittag-Leffler value together with the route that produced it.
#[derive(Debug, Clone, Copy)]
pub struct MlValue {
    pub value: Complex64,
    pub regime: Regime,
    pub error_estimate: f64,
    /// `|series - asymptotic|` when both regimes were reliable.
    pub crossover_discrepancy: Option<f64>,
}

struct Attempt {
    value: Complex64,
    error: f64,
}

impl Attempt {
    fn reliable(&self) -> bool {
        self.value.is_finite() && self.error <= TARGET * self.value.norm().max(1.0)
    }
}

/// `E_a(z) = sum_k z^k / Gamma(a k + 1)` for `0 < a <= 2`.
pub fn ml_eval(alpha: f64, z: Complex64) -> Result<Complex64> {
    ml_eval_detailed(alpha, z).map(|v| v.value)
}

/// Real-argument convenience wrapper around [`ml_eval`].
pub fn ml_eval_real(alpha: f64, x: f64) -> Result<f64> {
    ml_eval(alpha, Complex64::new(x, 0.0)).map(|v| v.re)
}

pub fn ml_eval_detailed(alpha: f64, z: Complex64) -> Result<MlValue> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::domain(format!(
            "Mittag-Leffler order must lie in (0, 2], got {alpha}"
        )));
    }
    if !z.is_finite() {
        return Err(Error::domain(format!("argument must be finite, got {z}")));
    }
    if z.norm() == 0.0 {
        return Ok(MlValue {
            value: Complex64::new(1.0, 0.0),
            regime: Regime::ClosedForm,
            error_estimate: 0.0,
            crossover_discrepancy: None,
        });
    }
    if alpha == 1.0 {
        return Ok(MlValue {
            value: z.exp(),
            regime: Regime::ClosedForm,
            error_estimate: EPS * z.exp().norm(),
            crossover_discrepancy: None,
        });
    }

    let rho = z.norm().powf(1.0 / alpha);
    let growing = z.re > 0.0 && z.arg().abs() < 0.5 * alpha * PI;
    let series = if rho <= SERIES_RHO_MAX || (growing && rho < 600.0) {
        Some(series(alpha, z))
    } else {
        None
    };
    let asymptotic = if z.norm() >= 2.0 {
        Some(asymptotic(alpha, z))
    } else {
        None
    };

    match (&series, &asymptotic) {
        (Some(s), Some(a)) if s.reliable() && a.reliable() => {
            let best = if s.error <= a.error { s } else { a };
            return Ok(MlValue {
                value: best.value,
                regime: if s.error <= a.error {
                    Regime::Series
                } else {
                    Regime::Asymptotic
                },
                error_estimate: best.error,
                crossover_discrepancy: Some((s.value - a.value).norm()),
            });
        }
        (Some(s), _) if s.reliable() => {
            return Ok(MlValue {
                value: s.value,
                regime: Regime::Series,
                error_estimate: s.error,
                crossover_discrepancy: None,
            })
        }
        (_, Some(a)) if a.reliable() => {
            return Ok(MlValue {
                value: a.value,
                regime: Regime::Asymptotic,
                error_estimate: a.error,
                crossover_discrepancy: None,
            })
        }
        _ => {}
    }

    let cut = branch_cut(alpha, z);
    if let Some(c) = &cut {
        if c.reliable() {
            return Ok(MlValue {
                value: c.value,
                regime: Regime::BranchCut,
                error_estimate: c.error,
                crossover_discrepancy: None,
            });
        }
    }

    let describe = |name: &str, a: &Option<Attempt>| match a {
        Some(a) => format!("{name}: error estimate {:.3e}", a.error),
        None => format!("{name}: not applicable"),
    };
    Err(Error::Evaluation {
        what: format!("E_{alpha}({z})"),
        detail: [
            describe("series", &series),
            describe("asymptotic", &asymptotic),
            describe("branch cut", &cut),
        ]
        .join("; "),
    })
}

fn series(alpha: f64, z: Complex64) -> Attempt {
    let ln_abs = z.norm().ln();
    let real = z.im == 0.0;
    let negative = z.re < 0.0;
    let arg = z.arg();
    let rho = z.norm().powf(1.0 / alpha);

    let mut sum = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut last = f64::INFINITY;
    for k in 0..4000usize {
        let kf = k as f64;
        let lg = ln_gamma(alpha * kf + 1.0);
        let log_mag = kf * ln_abs - lg;
        let mag = log_mag.exp();
        let term = if real {
            let sign = if negative && k % 2 == 1 { -1.0 } else { 1.0 };
            Complex64::new(sign * mag, 0.0)
        } else {
            Complex64::from_polar(mag, kf * arg)
        };
        sum += term;
        // rounding in the log-magnitude dominates the per-term error
        err += mag * 4.0 * EPS * (kf * ln_abs.abs() + lg.abs() + 2.0);
        last = mag;
        if alpha * kf > rho + 10.0 && mag <= 1e-17 * sum.norm().max(1e-300) {
            break;
        }
        if mag == 0.0 && k > 0 {
            break;
        }
    }
    Attempt {
        value: sum,
        error: err + last,
    }
}

/// `1 / Gamma(1 - x)` through the reflection formula, exact zeros at integers.
fn inv_gamma_one_minus(x: f64) -> (f64, f64) {
    // returns (sign-carrying sin(pi x) / pi, ln Gamma(x)) so that
    // 1/Gamma(1-x) = sin(pi x) Gamma(x) / pi
    let s = if (x - x.round()).abs() < 1e-12 {
        0.0
    } else {
        (PI * x).sin() / PI
    };
    (s, ln_gamma(x))
}

fn poles(alpha: f64, z: Complex64) -> Vec<Complex64> {
    let r = z.norm().powf(1.0 / alpha);
    let arg = z.arg();
    (-1..=1)
        .map(|j| arg + 2.0 * PI * j as f64)
        .filter(|phi| phi.abs() < alpha * PI)
        .map(|phi| Complex64::from_polar(r, phi / alpha))
        .collect()
}

/// Smallest distance of a pole from the negative real axis, in argument.
fn pole_cut_clearance(alpha: f64, z: Complex64) -> f64 {
    let arg = z.arg();
    (-1..=1)
        .map(|j| ((arg + 2.0 * PI * j as f64).abs() - alpha * PI).abs() / alpha)
        .fold(f64::INFINITY, f64::min)
}

fn asymptotic(alpha: f64, z: Complex64) -> Attempt {
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for s in poles(alpha, z) {
        let e = s.exp() / alpha;
        value += e;
        err += EPS * e.norm() * (s.norm() + 1.0);
    }
    // contributions switching on across a Stokes line
    if pole_cut_clearance(alpha, z) < 0.1 {
        err += (-z.norm().powf(1.0 / alpha)).exp() / alpha;
    }

    let ln_abs = z.norm().ln();
    let mut zk_inv = Complex64::new(1.0, 0.0);
    let z_inv = z.inv();
    let mut prev_env = f64::INFINITY;
    let all_integer = (alpha - alpha.round()).abs() < 1e-12;
    let mut omitted = f64::INFINITY;
    for k in 1..400usize {
        let kf = k as f64;
        zk_inv *= z_inv;
        let (sin_over_pi, lg) = inv_gamma_one_minus(alpha * kf);
        // |z|^{-k} Gamma(a k) / pi bounds the k-th term
        let env = (lg - kf * ln_abs).exp() / PI;
        if env > prev_env || env < 1e-20 * value.norm().max(1e-300) {
            omitted = env;
            break;
        }
        value -= zk_inv * (sin_over_pi * lg.exp());
        err += EPS * env * PI * (lg.abs() + 2.0);
        prev_env = env;
    }
    if all_integer {
        omitted = 0.0;
    }
    Attempt {
        value,
        error: err + omitted,
    }
}

/// Poles plus the Hankel-loop integral collapsed onto the negative axis:
/// `E_a(z) = sum_j e^{s_j}/a + (1/2 pi i) int_0^inf e^{-r} [F(r e^{-i pi}) - F(r e^{i pi})] dr`
/// with `F(s) = s^{a-1} / (s^a - z)`.
fn branch_cut(alpha: f64, z: Complex64) -> Option<Attempt> {
    let clearance = pole_cut_clearance(alpha, z);
    if alpha >= 2.0 || clearance < 1e-3 {
        return None;
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for s in poles(alpha, z) {
        let e = s.exp() / alpha;
        value += e;
        err += EPS * e.norm() * (s.norm() + 1.0);
    }
    let up = Complex64::from_polar(1.0, PI * alpha);
    let up_m1 = Complex64::from_polar(1.0, PI * (alpha - 1.0));
    let dn = up.conj();
    let dn_m1 = up_m1.conj();
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let integrand = |r: f64| -> Complex64 {
        if r <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let ra = r.powf(alpha);
        let ra1 = ra / r;
        let f_dn = dn_m1 * ra1 / (dn * ra - z);
        let f_up = up_m1 * ra1 / (up * ra - z);
        (f_dn - f_up) * ((-r).exp()) / two_pi_i
    };
    let rstar = z.norm().powf(1.0 / alpha);
    let mut breaks = vec![0.0];
    let near = (2.0 * clearance).min(0.5);
    for b in [0.5 * rstar, rstar * (1.0 - near), rstar, rstar * (1.0 + near), 2.0 * rstar] {
        if b > 1e-3 && b < 60.0 {
            breaks.push(b);
        }
    }
    breaks.extend([60.0, 80.0]);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let q = quad::integrate_with_breaks(integrand, &breaks, 1e-15, 1e-14);
    value += q.value;
    err += q.error + if q.converged { 0.0 } else { 1.0 };
    Some(Attempt { value, error: err })
}

/// Geometry of the hyperbolic contour `l(u) = sigma (1 - sin(delta - i u))`,
/// `u = k h`, `|k| <= nodes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicContour {
    /// Trapezoidal nodes on each side of the vertex.
    pub nodes: usize,
    /// Opening parameter; the asymptotes make the angle `pi/2 + delta`
    /// with the positive real axis.
    pub delta: f64,
    /// `sigma = scale * nodes / t`.
    pub scale: f64,
    /// Step `h = step / nodes`.
    pub step: f64,
}

impl Default for HyperbolicContour {
    fn default() -> Self {
        HyperbolicContour {
            nodes: 32,
            delta: 1.1721,
            scale: 4.4921,
            step: 1.0818,
        }
    }
}

impl HyperbolicContour {
    fn point(&self, sigma: f64, u: f64) -> (Complex64, Complex64) {
        let w = Complex64::new(-self.delta, u);
        // l = sigma (1 + sin(i u - delta)),  dl/du = i sigma cos(i u - delta)
        let l = sigma * (Complex64::new(1.0, 0.0) + w.sin());
        let dl = Complex64::new(0.0, sigma) * w.cos();
        (l, dl)
    }
}

/// Inverse-Laplace evaluation of `E_a(mu t^a)` on a hyperbolic contour.
///
/// The poles of `l^{a-1}/(l^a - mu)` are removed from the integrand before
/// quadrature and restored through their residues `e^{p t}/a`, so only the
/// branch-cut part is sampled.
pub fn contour_eval(alpha: f64, mu: f64, t: f64, contour: &HyperbolicContour) -> Result<Complex64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("contour evaluation needs t > 0, got {t}")));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::domain(format!("order must lie in (0, 2], got {alpha}")));
    }
    if !mu.is_finite() {
        return Err(Error::domain("mu must be finite"));
    }
    if contour.nodes < 2 || !(contour.step > 0.0) || !(contour.scale > 0.0) {
        return Err(Error::Contour(format!("degenerate contour {contour:?}")));
    }
    if !(contour.delta > 0.0 && contour.delta < 0.5 * PI) {
        return Err(Error::Contour(format!(
            "opening parameter {} puts the contour across the branch cut",
            contour.delta
        )));
    }

    let sigma = contour.scale * contour.nodes as f64 / t;
    let h = contour.step / contour.nodes as f64;
    let a1 = alpha - 1.0;
    // The simple poles of F are split off exactly: the contour integral of
    // e^{lt} / (a (l - p)) is e^{pt}/a or 0 depending on which side p lies,
    // and in both cases the pole and its residue recombine to e^{pt}/a.
    let pole_list: Vec<Complex64> = if mu == 0.0 {
        Vec::new()
    } else {
        poles(alpha, Complex64::new(mu, 0.0))
    };
    let integrand = |u: f64| -> Complex64 {
        let (l, dl) = contour.point(sigma, u);
        let mut f = l.powf(a1) / (l.powf(alpha) - mu);
        for p in &pole_list {
            f -= (l - p).inv() / alpha;
        }
        (l * t).exp() * f * dl
    };
    let n = contour.nodes as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in -n..=n {
        sum += integrand(k as f64 * h);
    }
    let mut value = sum * h / Complex64::new(0.0, 2.0 * PI);
    for p in &pole_list {
        value += (p * t).exp() / alpha;
    }
    if !value.is_finite() {
        return Err(Error::Evaluation {
            what: format!("contour integral for alpha = {alpha}, mu = {mu}, t = {t}"),
            detail: "non-finite quadrature sum".into(),
        });
    }
    Ok(value)
}

/// `E_a(mu t^a)`, the action of `S_a(t)` on an eigenmode with eigenvalue `mu`.
pub fn resolvent_symbol(alpha: FracOrder, mu: f64, t: f64) -> Result<f64> {
    if !alpha.in_solver_range() {
        return Err(Error::domain(format!(
            "resolvent order must lie in (1, 2), got {}",
            alpha.value()
        )));
    }
    if mu > 0.0 || !mu.is_finite() {
        return Err(Error::domain(format!(
            "eigenvalue {mu} lies outside the negative-type regime"
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    if t == 0.0 || mu == 0.0 {
        return Ok(1.0);
    }
    ml_eval_real(alpha.value(), mu * t.powf(alpha.value()))
}

/// Empirical decay constant: `|E_a(mu t^a)| <= c_est / (1 + |mu| t^a)` on a
/// log-spaced grid of `(0, t_max]` (and trivially at `t = 0`). Grid peaks
/// within one percent of the maximum are refined by a local search, so the
/// constant is the maximum over `[0, t_max]` rather than over the samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub alpha: f64,
    pub mu: f64,
    pub c_est: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub grid_points: usize,
    /// Grid time at which the maximum was attained.
    pub t_argmax: f64,
}

impl DecayCertificate {
    pub fn bound(&self, t: f64) -> f64 {
        self.c_est / (1.0 + self.mu.abs() * t.max(0.0).powf(self.alpha))
    }

    /// The sample grid the certificate was computed on.
    pub fn grid(&self) -> Vec<f64> {
        logspace(self.t_min, self.t_max, self.grid_points)
    }
}

/// Decay certificate for `E_a(mu t^a)`. Accepts `1 < a <= 2` so that the
/// `a = 2` boundary can be examined.
pub fn decay_certificate(alpha: f64, mu: f64, t_max: f64, n_samples: usize) -> Result<DecayCertificate> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::domain(format!("certificate order must lie in (1, 2], got {alpha}")));
    }
    if !(mu < 0.0) {
        return Err(Error::domain(format!("certificate needs mu < 0, got {mu}")));
    }
    if n_samples < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: n_samples,
        });
    }
    let x_max = mu.abs() * t_max.powf(alpha);
    if !(x_max >= 1e3) {
        return Err(Error::domain(format!(
            "horizon too short: |mu| t_max^alpha = {x_max:.3e} < 1e3"
        )));
    }
    let t_min = (1e-4 / mu.abs()).powf(1.0 / alpha).min(0.5 * t_max);
    let weighted = |t: f64| -> Result<f64> {
        let x = mu.abs() * t.powf(alpha);
        let e = ml_eval_real(alpha, -x)?;
        if !e.is_finite() {
            return Err(Error::Evaluation {
                what: format!("E_{alpha}({})", -x),
                detail: "non-finite value".into(),
            });
        }
        Ok((1.0 + x) * e.abs())
    };
    let grid = logspace(t_min, t_max, n_samples);
    let samples = grid.iter().map(|&t| weighted(t)).collect::<Result<Vec<f64>>>()?;
    let mut c_est = 1.0;
    let mut t_argmax = 0.0;
    for (&t, &c) in grid.iter().zip(&samples) {
        if c > c_est {
            c_est = c;
            t_argmax = t;
        }
    }
    // Polish every interior grid peak close to the top by golden-section
    // search in log t, so the constant also covers off-grid times.
    let top = c_est;
    for i in 1..n_samples - 1 {
        if samples[i] >= samples[i - 1] && samples[i] >= samples[i + 1] && samples[i] >= 0.99 * top {
            let (t, c) = golden_max(&weighted, grid[i - 1].ln(), grid[i + 1].ln())?;
            if c > c_est {
                c_est = c;
                t_argmax = t;
            }
        }
    }
    Ok(DecayCertificate {
        alpha,
        mu,
        c_est,
        t_min,
        t_max,
        grid_points: n_samples,
        t_argmax,
    })
}

fn golden_max(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1.exp())?;
    let mut f2 = f(x2.exp())?;
    for _ in 0..60 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1.exp())?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2.exp())?;
        }
    }
    Ok(if f1 >= f2 { (x1.exp(), f1) } else { (x2.exp(), f2) })
}

/// Comparison of a certificate with one computed on twice the horizon and
/// twice the number of samples.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CertificateStability {
    pub base: DecayCertificate,
    pub refined: DecayCertificate,
    pub relative_change: f64,
    pub stable: bool,
}

/// Relative change tolerated between a certificate and its refinement.
pub const STABILITY_TOLERANCE: f64 = 0.05;

pub fn certificate_stability(alpha: f64, mu: f64, t_max: f64, n_samples: usize) -> Result<CertificateStability> {
    let base = decay_certificate(alpha, mu, t_max, n_samples)?;
    let refined = decay_certificate(alpha, mu, 2.0 * t_max, 2 * n_samples)?;
    let relative_change = (refined.c_est - base.c_est).abs() / base.c_est;
    Ok(CertificateStability {
        base,
        refined,
        relative_change,
        stable: relative_change <= STABILITY_TOLERANCE,
    })
}

/// `int_0^inf dt / (1 + |w| t^a) = |w|^{-1/a} pi / (a sin(pi/a))`.
pub fn kernel_integral_identity(alpha: f64, omega: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::domain(format!(
            "integral identity needs 1 < alpha < 2, got {alpha}"
        )));
    }
    if !(omega < 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!("integral identity needs omega < 0, got {omega}")));
    }
    Ok(omega.abs().powf(-1.0 / alpha) * PI / (alpha * (PI / alpha).sin()))
}

/// `int_0^T ds / (1 + |w| s^a)` by adaptive quadrature.
pub fn decay_profile_partial(alpha: f64, omega: f64, horizon: f64) -> f64 {
    if horizon <= 0.0 {
        return 0.0;
    }
    let w = omega.abs();
    let f = |s: f64| 1.0 / (1.0 + w * s.powf(alpha));
    let mut breaks = vec![0.0];
    let mut b = 1e-3;
    while b < horizon {
        breaks.push(b);
        b *= 10.0;
    }
    breaks.push(horizon);
    quad::integrate_with_breaks(f, &breaks, 1e-15, 1e-13).value
}

/// `int_T^inf ds / (1 + |w| s^a)`, evaluated directly (no cancellation).
///
/// The substitution `s = T u^{-q}`, `q = 1/(a-1)`, turns the slowly decaying
/// tail into the smooth integrand `T q / (u^{a q} + |w| T^a)` on `(0, 1]`.
pub fn decay_profile_tail(alpha: f64, omega: f64, horizon: f64) -> f64 {
    if horizon <= 0.0 {
        return decay_profile_tail(alpha, omega, 1.0) + decay_profile_partial(alpha, omega, 1.0);
    }
    let w = omega.abs();
    let q = 1.0 / (alpha - 1.0);
    let wt = w * horizon.powf(alpha);
    let f = |u: f64| horizon * q / (u.powf(alpha * q) + wt);
    quad::integrate(f, 0.0, 1.0, 1e-16, 1e-14).value
}

/// The identity's left-hand side by adaptive quadrature on `[0, inf)`.
pub fn kernel_integral_by_quadrature(alpha: f64, omega: f64) -> f64 {
    decay_profile_partial(alpha, omega, 1.0) + decay_profile_tail(alpha, omega, 1.0)
}
