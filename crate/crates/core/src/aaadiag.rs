//! Recurrence diagnostics for sampled paths, the weighted space `C_h`, and
//! checkers for the hypotheses of the non-Lipschitz existence result.
//!
//! Almost automorphy is not decidable from samples. The diagnostics fix a
//! shift sequence in advance (by default `2 pi q_m` with `q_m` the Pell
//! denominators of the convergents of `sqrt 2`) and test convergence of the
//! translates along it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::GrowthBound;
use crate::grid::{logspace, norm2, Path, TimeGrid};
use crate::mlf::{decay_profile_tail, kernel_integral_identity};
use crate::quad;
use crate::solver::MildMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftProvenance {
    DiophantineSqrt2,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSequence {
    shifts: Vec<f64>,
    provenance: ShiftProvenance,
}

impl ShiftSequence {
    pub fn user(shifts: Vec<f64>) -> Result<Self> {
        if shifts.is_empty() || shifts.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::input("shifts must be positive and finite"));
        }
        if shifts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("shifts must be strictly increasing"));
        }
        Ok(ShiftSequence {
            shifts,
            provenance: ShiftProvenance::User,
        })
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn provenance(&self) -> ShiftProvenance {
        self.provenance
    }

    pub fn max_shift(&self) -> f64 {
        *self.shifts.last().expect("nonempty")
    }
}

/// Convergents `p_m / q_m` of `sqrt 2 = [1; 2, 2, ...]`.
pub fn sqrt2_convergents(n: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::with_capacity(n);
    let (mut p0, mut q0, mut p1, mut q1) = (1u64, 0u64, 1u64, 1u64);
    for _ in 0..n {
        out.push((p1, q1));
        let (p2, q2) = (2 * p1 + p0, 2 * q1 + q0);
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    out
}

/// Shifts `2 pi q_m`, `q = 1, 2, 5, 12, 29, ...`.
pub fn sqrt2_shift_sequence(n: usize) -> ShiftSequence {
    ShiftSequence {
        shifts: sqrt2_convergents(n.max(1))
            .into_iter()
            .map(|(_, q)| 2.0 * PI * q as f64)
            .collect(),
        provenance: ShiftProvenance::DiophantineSqrt2,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslateReport {
    pub shifts: Vec<f64>,
    /// `max_probe |u(t + s_m) - u(t)|`.
    pub errors: Vec<f64>,
    /// `max_probe |u(t - s_m) - u(t)|`.
    pub reverse_errors: Vec<f64>,
    /// Sup norm of the path over the probe window and its translates.
    pub scale: f64,
    pub decreasing: bool,
    pub two_sided_ok: bool,
    /// Decreasing both ways with the last error below a tenth of the scale.
    pub recurrent: bool,
    /// The limit candidate `g = u` on the probe grid.
    #[serde(skip)]
    pub limit_candidate: Path,
}

impl TranslateReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("shift,error,reverse_error\n");
        for ((sh, e), r) in self.shifts.iter().zip(&self.errors).zip(&self.reverse_errors) {
            s.push_str(&format!(
                "{},{},{}\n",
                crate::grid::fmt_f64(*sh),
                crate::grid::fmt_f64(*e),
                crate::grid::fmt_f64(*r)
            ));
        }
        s
    }
}

/// Errors below this fraction of the scale count as converged when testing
/// monotonicity.
const FLOOR: f64 = 1e-12;

fn is_decreasing(e: &[f64], scale: f64) -> bool {
    e.windows(2).all(|w| w[1] < w[0] || w[1] <= FLOOR * scale)
}

fn require_cover(u: &Path, lo: f64, hi: f64) -> Result<()> {
    let g = u.grid();
    let tol = 1e-9 * g.dt();
    if lo < g.t0() - tol {
        return Err(Error::coverage(
            format!("path starts at {} but the test needs {lo}", g.t0()),
            g.t0() - lo,
        ));
    }
    if hi > g.t_end() + tol {
        return Err(Error::coverage(
            format!("path ends at {} but the test needs {hi}", g.t_end()),
            hi - g.t_end(),
        ));
    }
    Ok(())
}

fn clamp_sample(u: &Path, t: f64) -> Result<Vec<f64>> {
    let g = u.grid();
    u.sample(t.clamp(g.t0(), g.t_end()))
}

/// Largest `|u(t + shift) - u(t)|` over the probe nodes.
pub fn translate_error(u: &Path, shift: f64, probe: &TimeGrid) -> Result<f64> {
    require_cover(u, probe.t0() + shift.min(0.0), probe.t_end() + shift.max(0.0))?;
    let mut worst = 0.0f64;
    for t in probe.times() {
        let a = clamp_sample(u, t + shift)?;
        let b = clamp_sample(u, t)?;
        worst = worst.max(norm2(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>()));
    }
    Ok(worst)
}

/// Translate test with `u` itself as the limit candidate.
pub fn translate_test(u: &Path, shifts: &ShiftSequence, probe: &TimeGrid) -> Result<TranslateReport> {
    let smax = shifts.max_shift();
    require_cover(u, probe.t0() - smax, probe.t_end() + smax)?;
    let pairs: Vec<(f64, f64)> = shifts
        .shifts()
        .par_iter()
        .map(|&s| Ok((translate_error(u, s, probe)?, translate_error(u, -s, probe)?)))
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let reverse_errors: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut scale = 0.0f64;
    for t in probe.times() {
        for s in [-smax, 0.0, smax] {
            scale = scale.max(norm2(&clamp_sample(u, t + s)?));
        }
    }
    for j in 0..u.len() {
        let t = u.grid().t(j);
        if t >= probe.t0() - smax && t <= probe.t_end() + smax {
            scale = scale.max(norm2(u.at(j)));
        }
    }
    let decreasing = is_decreasing(&errors, scale);
    let two_sided_ok = is_decreasing(&reverse_errors, scale);
    let last = errors.last().copied().unwrap_or(0.0).max(reverse_errors.last().copied().unwrap_or(0.0));
    let limit_candidate = Path::from_vec_fn(*probe, u.dim(), |t| clamp_sample(u, t).unwrap_or_default())?;
    Ok(TranslateReport {
        shifts: shifts.shifts().to_vec(),
        errors,
        reverse_errors,
        scale,
        decreasing,
        two_sided_ok,
        recurrent: decreasing && two_sided_ok && last <= 0.1 * scale,
        limit_candidate,
    })
}

/// `sup_{t_j >= T} |u(t_j) - candidate(t_j)| <= eps` on a shared grid.
pub fn decay_split_test(u: &Path, candidate: &Path, t_split: f64, eps: f64) -> Result<bool> {
    Ok(decay_split_sup(u, candidate, t_split)? <= eps)
}

/// The supremum tested by [`decay_split_test`].
pub fn decay_split_sup(u: &Path, candidate: &Path, t_split: f64) -> Result<f64> {
    u.require_same_shape(candidate)?;
    let g = u.grid();
    if t_split > g.t_end() {
        return Err(Error::coverage(
            format!("split time {t_split} lies beyond the path end {}", g.t_end()),
            t_split - g.t_end(),
        ));
    }
    let mut worst = 0.0f64;
    for j in 0..u.len() {
        if g.t(j) >= t_split - 1e-9 * g.dt() {
            let d: Vec<f64> = u.at(j).iter().zip(candidate.at(j)).map(|(a, b)| a - b).collect();
            worst = worst.max(norm2(&d));
        }
    }
    Ok(worst)
}

/// `u` and its late-window profile `t -> u(t + shift)` on the nodes of `u`
/// from `start` up to where the shifted time leaves the grid.
pub fn late_window_profile(u: &Path, shift: f64, start: f64) -> Result<(Path, Path)> {
    let g = u.grid();
    let first = ((start - g.t0()) / g.dt() - 1e-9).ceil().max(0.0) as usize;
    let last_t = g.t_end() - shift;
    if last_t < start {
        return Err(Error::coverage(
            format!("shift {shift} leaves no room after {start}"),
            start - last_t,
        ));
    }
    let end = (((last_t - g.t0()) / g.dt()) + 1e-9).floor() as usize + 1;
    let base = u.slice(first, end.min(u.len()))?;
    let bg = *base.grid();
    let cand = Path::from_vec_fn(bg, u.dim(), |t| clamp_sample(u, t + shift).unwrap_or_default())?;
    Ok((base, cand))
}

/// A weight `h: R+ -> [1, inf)`, nondecreasing; held at `h(0)` for negative
/// arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightFunction {
    /// `1 + coeff t^power`.
    Polynomial { coeff: f64, power: f64 },
    /// Linear interpolation of samples, held constant past the last one.
    Sampled { grid: Vec<f64>, values: Vec<f64> },
}

impl Default for WeightFunction {
    fn default() -> Self {
        WeightFunction::Polynomial { coeff: 1.0, power: 2.0 }
    }
}

impl WeightFunction {
    pub fn one() -> Self {
        WeightFunction::Polynomial { coeff: 0.0, power: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFunction::Polynomial { coeff, power } => {
                if !(*coeff >= 0.0 && coeff.is_finite()) || !(*power > 0.0 && power.is_finite()) {
                    return Err(Error::Weight(format!(
                        "polynomial weight needs coeff >= 0 and power > 0, got ({coeff}, {power})"
                    )));
                }
            }
            WeightFunction::Sampled { grid, values } => {
                if grid.len() != values.len() || grid.is_empty() {
                    return Err(Error::Weight("sampled weight needs matching nonempty grid and values".into()));
                }
                if grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
                    return Err(Error::Weight("sampled weight grid must be increasing from t >= 0".into()));
                }
                if let Some((t, v)) = grid.iter().zip(values).find(|(_, v)| !(**v >= 1.0)) {
                    return Err(Error::Weight(format!("weight sample h({t}) = {v} is below 1")));
                }
                if values.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Weight("sampled weight must be nondecreasing".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self {
            WeightFunction::Polynomial { coeff, power } => {
                if *coeff == 0.0 {
                    1.0
                } else {
                    1.0 + coeff * t.powf(*power)
                }
            }
            WeightFunction::Sampled { grid, values } => {
                if t <= grid[0] {
                    return values[0];
                }
                let i = grid.partition_point(|&g| g <= t);
                if i >= grid.len() {
                    return values[values.len() - 1];
                }
                let w = (t - grid[i - 1]) / (grid[i] - grid[i - 1]);
                (1.0 - w) * values[i - 1] + w * values[i]
            }
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, WeightFunction::Polynomial { coeff, .. } if *coeff > 0.0)
    }
}

/// `max_j |u(t_j)| / h(t_j)` for a path on `R+`.
pub fn ch_norm(u: &Path, h: &WeightFunction) -> Result<f64> {
    h.validate()?;
    if u.grid().t0() < 0.0 {
        return Err(Error::input("weighted norm needs a path on t >= 0"));
    }
    let mut worst = 0.0f64;
    for j in 0..u.len() {
        let hv = h.eval(u.grid().t(j));
        if !(hv >= 1.0) {
            return Err(Error::Weight(format!("h({}) = {hv} is below 1", u.grid().t(j))));
        }
        worst = worst.max(norm2(u.at(j)) / hv);
    }
    Ok(worst)
}

fn kernel(alpha: f64, omega: f64, s: f64) -> f64 {
    1.0 / (1.0 + omega.abs() * s.powf(alpha))
}

fn breaks_for(t: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    for k in (1..=10).rev() {
        b.push(t * 10f64.powi(-k));
    }
    b.push(0.5 * t);
    for k in 1..=10 {
        b.push(t - t * 10f64.powi(-k));
    }
    b.push(t);
    b.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * t.max(1e-300));
    b
}

/// `int_{-inf}^t q(s) / (1 + |w| (t - s)^a) ds` for `q(s) = q(0)` on `s < 0`,
/// written as `int_0^t q(t - s) k(s) ds + q(0) int_t^inf k`.
fn history_integral(alpha: f64, omega: f64, t: f64, q: impl Fn(f64) -> f64) -> Result<f64> {
    let tail = q(0.0) * if t > 0.0 {
        decay_profile_tail(alpha, omega, t)
    } else {
        kernel_integral_identity(alpha, omega)?
    };
    if t <= 0.0 {
        return Ok(tail);
    }
    let r = quad::integrate_with_breaks(|s: f64| q(t - s) * kernel(alpha, omega, s), &breaks_for(t), 1e-300, 1e-10);
    if !r.value.is_finite() || r.error > 1e-2 * r.value.abs().max(1e-300) {
        return Err(Error::Budget(format!(
            "history integral at t = {t} did not reach 1% accuracy (estimate {:.3e})",
            r.error
        )));
    }
    Ok(r.value + tail)
}

fn check_w(w: &GrowthBound) -> Result<()> {
    GrowthBound::new(w.gamma0, w.gamma1, w.theta).map(|_| ())
}

/// `beta(r) = CM |t -> int_{-inf}^t W(r h(s)) / (1 + |w|(t - s)^a) ds|_h`
/// with the sup taken over `times`.
pub fn beta_of_r(cm: f64, alpha: f64, omega: f64, w: &GrowthBound, h: &WeightFunction, r: f64, times: &[f64]) -> Result<f64> {
    check_w(w)?;
    h.validate()?;
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::input("beta needs a nonempty set of times t >= 0"));
    }
    let vals: Vec<f64> = times
        .par_iter()
        .map(|&t| Ok(history_integral(alpha, omega, t, |s| w.eval(r * h.eval(s)))? / h.eval(t)))
        .collect::<Result<_>>()?;
    Ok(cm * vals.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem2Options {
    /// Times at which the `C_h` sup is sampled.
    pub t_grid: Vec<f64>,
    /// Right end of the window for the limit in condition (i).
    pub limit_horizon: f64,
    pub limit_threshold: f64,
    /// Condition (iv) needs `xi / beta(xi) > 1 + margin` on the tail.
    pub margin: f64,
}

impl Default for Theorem2Options {
    fn default() -> Self {
        let mut t_grid = vec![0.0];
        t_grid.extend(logspace(1e-2, 1e4, 121));
        Theorem2Options {
            t_grid,
            limit_horizon: 1e10,
            limit_threshold: 1e-3,
            margin: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitTrace {
    pub r: f64,
    pub times: Vec<f64>,
    pub normalized: Vec<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderVariant {
    pub gamma0: f64,
    pub gamma1: f64,
    pub theta: f64,
    /// `sup_t int h^theta(s) / (1 + |w|(t - s)^a) ds`, absent when the
    /// integral keeps growing over the window.
    #[serde(rename = "gamma_over_CM")]
    pub gamma_over_cm: Option<f64>,
    /// Largest value reached on the window.
    pub window_sup: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub beta_samples: Vec<(f64, f64)>,
    pub condition_i_ok: bool,
    pub condition_i_trace: Vec<LimitTrace>,
    pub condition_iv_ok: bool,
    /// `(xi, xi / beta(xi))` over the upper half of `xi_grid`.
    pub condition_iv_ratios: Vec<(f64, f64)>,
    pub condition_iv_min: f64,
    pub holder_variant: Option<HolderVariant>,
}

fn limit_trace(alpha: f64, omega: f64, w: &GrowthBound, h: &WeightFunction, r: f64, opts: &Theorem2Options) -> Result<LimitTrace> {
    let times = logspace(1.0, opts.limit_horizon, 41);
    let normalized: Vec<f64> = times
        .iter()
        .map(|&t| Ok(history_integral(alpha, omega, t, |s| w.eval(r * h.eval(s)))? / h.eval(t)))
        .collect::<Result<_>>()?;
    let last_decade_start = opts.limit_horizon / 10.0 * (1.0 - 1e-12);
    let tail: Vec<f64> = times
        .iter()
        .zip(&normalized)
        .filter(|(t, _)| **t >= last_decade_start)
        .map(|(_, v)| *v)
        .collect();
    let last = *normalized.last().expect("nonempty");
    let monotone = tail.windows(2).all(|p| p[1] <= p[0]);
    Ok(LimitTrace {
        r,
        times,
        normalized,
        ok: last < opts.limit_threshold && monotone,
    })
}

/// Checks conditions (i) and (iv) and, for `0 < theta < 1`, the Hoelder
/// variant of the growth hypothesis.
#[allow(clippy::too_many_arguments)]
pub fn check_theorem2(
    cm: f64,
    alpha: f64,
    omega: f64,
    w: &GrowthBound,
    h: &WeightFunction,
    r_grid: &[f64],
    xi_grid: &[f64],
    opts: &Theorem2Options,
) -> Result<HypothesisReport> {
    for (name, g) in [("r_grid", r_grid), ("xi_grid", xi_grid)] {
        if g.is_empty() || g.iter().any(|x| !(*x > 0.0)) || g.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::input(format!("{name} must be positive and increasing")));
        }
    }
    let beta_samples: Vec<(f64, f64)> = r_grid
        .iter()
        .map(|&r| Ok((r, beta_of_r(cm, alpha, omega, w, h, r, &opts.t_grid)?)))
        .collect::<Result<_>>()?;

    let condition_i_trace: Vec<LimitTrace> = r_grid
        .par_iter()
        .map(|&r| limit_trace(alpha, omega, w, h, r, opts))
        .collect::<Result<_>>()?;
    let condition_i_ok = condition_i_trace.iter().all(|t| t.ok);

    let upper = &xi_grid[xi_grid.len() / 2..];
    let condition_iv_ratios: Vec<(f64, f64)> = upper
        .iter()
        .map(|&xi| {
            let b = beta_of_r(cm, alpha, omega, w, h, xi, &opts.t_grid)?;
            Ok((xi, if b > 0.0 { xi / b } else { f64::INFINITY }))
        })
        .collect::<Result<_>>()?;
    let condition_iv_min = condition_iv_ratios.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let condition_iv_ok = condition_iv_min > 1.0 + opts.margin;

    let holder_variant = if w.theta > 0.0 && w.theta < 1.0 {
        let mut times = opts.t_grid.clone();
        times.extend(logspace(1e4, opts.limit_horizon, 25));
        times.sort_by(f64::total_cmp);
        times.dedup();
        let vals: Vec<f64> = times
            .par_iter()
            .map(|&t| history_integral(alpha, omega, t, |s| h.eval(s).powf(w.theta)))
            .collect::<Result<_>>()?;
        let window_sup = vals.iter().copied().fold(0.0, f64::max);
        let n = vals.len();
        // saturated over the last decade of the window
        let decade = times.iter().position(|t| *t >= opts.limit_horizon / 10.0 * (1.0 - 1e-12)).unwrap_or(n - 1);
        let saturated = vals[n - 1] <= vals[decade] * (1.0 + 1e-2);
        let gamma_over_cm = (saturated && !h.is_unbounded()).then_some(window_sup);
        Some(HolderVariant {
            gamma0: w.gamma0,
            gamma1: w.gamma1,
            theta: w.theta,
            gamma_over_cm,
            window_sup,
            ok: gamma_over_cm.is_some(),
        })
    } else {
        None
    };

    Ok(HypothesisReport {
        beta_samples,
        condition_i_ok,
        condition_i_trace,
        condition_iv_ok,
        condition_iv_ratios,
        condition_iv_min,
        holder_variant,
    })
}

/// Translate error of the forcing along a fixed point against the bound
/// from the Lipschitz constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositionRow {
    pub shift: f64,
    /// Measured `max_probe |F(t + s) - F(t)|` for `F(t) = f(t, u(t), phi(t))`.
    pub forcing_error: f64,
    /// Translate error of `u` over the probe extended back by the kernel
    /// horizon.
    pub state_error: f64,
    /// `max_probe |f(t + s, u(t), phi(t)) - f(t, u(t), phi(t))|`.
    pub intrinsic_error: f64,
    /// `L_second * 2 |u|_inf * int_{H'}^inf |k|`.
    pub kernel_tail: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositionReport {
    #[serde(rename = "L_f")]
    pub l_f: f64,
    pub k_l1: f64,
    pub rows: Vec<CompositionRow>,
    pub ok: bool,
}

/// Composition check: the translate error of `t -> f(t, u(t), phi(t))` is at
/// most `L_f (1 + |k|_1) e_u + intrinsic + kernel tail`.
pub fn composition_closure(map: &MildMap<'_>, u: &Path, shifts: &ShiftSequence, probe: &TimeGrid) -> Result<CompositionReport> {
    let p = map.problem();
    let l_f = p.forcing.lipschitz_l();
    let k_l1 = p.second_arg.lipschitz_factor()?;
    let smax = shifts.max_shift();
    require_cover(u, probe.t0() - smax, probe.t_end() + smax)?;
    let fpath = map.forcing_path(u)?;
    let phi = map.second_argument(u)?;
    let ev = p.forcing.evaluator(u.dim())?;

    // how far back the state error is measured
    let room = probe.t0() - u.grid().t0();
    let (back, kernel_tail) = match &p.second_arg {
        crate::solver::SecondArg::Memory { kernel } => {
            let back = kernel.support_hint().min(room);
            (back, kernel.tail_bound(back)? * 2.0 * u.sup_norm() * p.forcing.lipschitz_second())
        }
        crate::solver::SecondArg::Delay { tau } => (tau.min(room), 0.0),
    };
    let n_back = (back / probe.dt()).floor() as usize;
    let extended = TimeGrid::new(probe.t0() - n_back as f64 * probe.dt(), probe.dt(), probe.len() + n_back)?;

    let rows: Vec<CompositionRow> = shifts
        .shifts()
        .iter()
        .map(|&s| {
            let forcing_error = translate_error(&fpath, s, probe)?;
            let state_error = translate_error(u, s, &extended)?;
            let mut intrinsic_error = 0.0f64;
            for t in probe.times() {
                let ut = clamp_sample(u, t)?;
                let pt = clamp_sample(&phi, t)?;
                let a = ev.eval(t + s, &ut, &pt)?;
                let b = ev.eval(t, &ut, &pt)?;
                intrinsic_error = intrinsic_error.max(norm2(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>()));
            }
            let bound = l_f * (1.0 + k_l1) * state_error + intrinsic_error + kernel_tail;
            Ok(CompositionRow {
                shift: s,
                forcing_error,
                state_error,
                intrinsic_error,
                kernel_tail,
                bound,
                ok: forcing_error <= bound * (1.0 + 1e-9) + 1e-14,
            })
        })
        .collect::<Result<_>>()?;
    let ok = rows.iter().all(|r| r.ok);
    Ok(CompositionReport { l_f, k_l1, rows, ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pell_denominators() {
        let q: Vec<u64> = sqrt2_convergents(6).into_iter().map(|c| c.1).collect();
        assert_eq!(q, vec![1, 2, 5, 12, 29, 70]);
        let s = sqrt2_shift_sequence(3);
        assert!((s.shifts()[2] - 10.0 * PI).abs() < 1e-12);
        assert_eq!(s.provenance(), ShiftProvenance::DiophantineSqrt2);
    }

    #[test]
    fn constant_path_has_zero_errors() {
        let g = TimeGrid::new(-50.0, 0.1, 1001).unwrap();
        let u = Path::from_fn(g, |_| 3.0).unwrap();
        let probe = TimeGrid::new(0.0, 0.1, 11).unwrap();
        let r = translate_test(&u, &sqrt2_shift_sequence(2), &probe).unwrap();
        assert!(r.errors.iter().all(|e| *e == 0.0));
        assert!(r.recurrent);
    }

    #[test]
    fn coverage_is_reported() {
        let g = TimeGrid::new(0.0, 0.1, 101).unwrap();
        let u = Path::from_fn(g, f64::sin).unwrap();
        let probe = TimeGrid::new(2.0, 0.1, 11).unwrap();
        let e = translate_test(&u, &sqrt2_shift_sequence(1), &probe).unwrap_err();
        assert!(matches!(e, Error::Coverage { .. }));
    }

    #[test]
    fn weight_validation() {
        assert!(WeightFunction::Sampled {
            grid: vec![0.0, 1.0],
            values: vec![0.5, 2.0]
        }
        .validate()
        .is_err());
        assert!(WeightFunction::Sampled {
            grid: vec![0.0, 1.0],
            values: vec![2.0, 1.5]
        }
        .validate()
        .is_err());
        assert_eq!(WeightFunction::one().eval(7.0), 1.0);
        assert_eq!(WeightFunction::default().eval(2.0), 5.0);
    }

    #[test]
    fn beta_constant_and_linear() {
        let i = kernel_integral_identity(1.5, -1.0).unwrap();
        let times = [0.0, 1.0, 10.0];
        let c = GrowthBound::new(2.0, 0.0, 0.0).unwrap();
        let b = beta_of_r(1.3, 1.5, -1.0, &c, &WeightFunction::default(), 4.0, &times).unwrap();
        assert!((b - 1.3 * 2.0 * i).abs() < 1e-8 * b);
        let lin = GrowthBound::new(0.0, 1.0, 1.0).unwrap();
        let b = beta_of_r(1.3, 1.5, -1.0, &lin, &WeightFunction::one(), 4.0, &times).unwrap();
        assert!((b - 1.3 * 4.0 * i).abs() < 1e-8 * b);
    }
}
