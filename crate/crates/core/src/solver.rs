//! Whole-line mild solutions
//! `u(t) = int_{-inf}^t S_a(t - s) f(s, u(s), phi(s)) ds`
//! by Picard iteration, the contraction constant, the initial-value variant
//! `v(t) = S_a(t)(u_0 - g(u)) + int_0^t S_a(t - s) f ds`, and the gap `v - u`.
//!
//! The map is discretized by product integration: on every cell the forcing
//! is replaced by its linear interpolant and the scalar symbols
//! `E_a(mu_k tau^a)` are integrated against the two hat halves to quadrature
//! accuracy. The scheme is therefore second order in `dt` however fast the
//! symbols decay. The integral over `(-inf, t]` is cut at `t - H`, where `H`
//! is the history length. Before the window start the state is frozen at its
//! first value. The neglected tail is bounded through the decay certificate.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::AaaForcing;
use crate::grid::{norm2, FracOrder, Path, TimeGrid};
use crate::memory::{HistoryConvolver, Kernel};
use crate::mlf::{decay_profile_tail, kernel_integral_identity, ml_eval_real};
use crate::operator::{apply_family, SpectralOperator, StateVector};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Contractive,
    NotContractive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionFactors {
    #[serde(rename = "CM")]
    pub cm: f64,
    pub omega: f64,
    pub alpha: f64,
    #[serde(rename = "L_f")]
    pub l_f: f64,
    pub k_l1: f64,
}

/// The smallness condition `|beta| + 1 < a sin(pi/a) / (3 CM |mu|^{-1/a} pi)`
/// attached to the relaxation-oscillation example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example1Condition {
    pub beta: f64,
    pub mu: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub factors: ContractionFactors,
    pub verdict: Verdict,
    /// `rhs - lhs` of the example condition with `|mu|` equal to the shift;
    /// positive when it holds.
    pub example1_condition_value: Option<f64>,
    /// The condition with `|mu|` equal to the shift and to `1 + shift`, the
    /// two readings of the sector vertex.
    pub example1_conditions: Option<Vec<Example1Condition>>,
}

/// `Lambda = CM |w|^{-1/a} pi / (a sin(pi/a)) L_f (1 + |k|_1)`.
pub fn contraction_constant(cm: f64, alpha: FracOrder, omega: f64, l_f: f64, k_l1: f64) -> Result<ContractionReport> {
    if !alpha.in_solver_range() {
        return Err(Error::domain(format!(
            "contraction constant needs 1 < alpha < 2, got {}",
            alpha.value()
        )));
    }
    if !(cm > 0.0 && cm.is_finite()) {
        return Err(Error::domain(format!("CM must be positive, got {cm}")));
    }
    if !(l_f >= 0.0 && k_l1 >= 0.0) || !(l_f + k_l1).is_finite() {
        return Err(Error::domain("L_f and |k|_1 must be nonnegative and finite"));
    }
    let a = alpha.value();
    let lambda = cm * omega.abs().powf(-1.0 / a) * PI / (a * (PI / a).sin()) * l_f * (1.0 + k_l1);
    // kernel_integral_identity also validates omega < 0
    kernel_integral_identity(a, omega)?;
    Ok(ContractionReport {
        lambda,
        factors: ContractionFactors {
            cm,
            omega,
            alpha: a,
            l_f,
            k_l1,
        },
        verdict: if lambda < 1.0 {
            Verdict::Contractive
        } else {
            Verdict::NotContractive
        },
        example1_condition_value: None,
        example1_conditions: None,
    })
}

/// The example condition for one value of `|mu|`.
pub fn example1_condition(cm: f64, alpha: FracOrder, beta: f64, mu: f64) -> Result<Example1Condition> {
    let a = alpha.value();
    if !alpha.in_solver_range() || !(mu > 0.0) {
        return Err(Error::domain("example condition needs 1 < alpha < 2 and mu > 0"));
    }
    let lhs = beta.abs() + 1.0;
    let rhs = a * (PI / a).sin() / (3.0 * cm * mu.powf(-1.0 / a) * PI);
    Ok(Example1Condition {
        beta,
        mu,
        lhs,
        rhs,
        holds: lhs < rhs,
    })
}

impl ContractionReport {
    /// Attaches the example condition for a Laplacian shifted by `shift`.
    pub fn with_example1(mut self, beta: f64, shift: f64) -> Result<Self> {
        let alpha = FracOrder::solver(self.factors.alpha)?;
        let paper = example1_condition(self.factors.cm, alpha, beta, shift)?;
        self.example1_condition_value = Some(paper.rhs - paper.lhs);
        self.example1_conditions = Some(vec![paper, example1_condition(self.factors.cm, alpha, beta, 1.0 + shift)?]);
        Ok(self)
    }
}

/// Second argument of the forcing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SecondArg {
    /// `phi = Ku`.
    Memory { kernel: Kernel },
    /// `phi(t) = u(t - tau)`.
    Delay { tau: f64 },
}

impl SecondArg {
    /// `|phi - psi|_inf <= factor |u - v|_inf`.
    pub fn lipschitz_factor(&self) -> Result<f64> {
        match self {
            SecondArg::Memory { kernel } => kernel.l1_norm(),
            SecondArg::Delay { .. } => Ok(1.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MildProblem<'a> {
    pub op: &'a SpectralOperator,
    pub alpha: FracOrder,
    pub forcing: &'a AaaForcing,
    pub second_arg: SecondArg,
    /// Decay constant with `|E_a(mu_k t^a)| <= cm / (1 + |omega| t^a)`.
    pub cm: f64,
}

impl MildProblem<'_> {
    pub fn contraction(&self) -> Result<ContractionReport> {
        contraction_constant(
            self.cm,
            self.alpha,
            self.op.omega(),
            self.forcing.lipschitz_l(),
            self.second_arg.lipschitz_factor()?,
        )
    }
}

/// Integrals of each symbol against the falling and rising halves of the
/// hat functions on `[c dt, (c+1) dt]`.
#[derive(Debug, Clone)]
pub struct ProductWeights {
    dt: f64,
    cells: usize,
    modes: usize,
    /// `int_0^dt S_k(c dt + s) (1 - s/dt) ds`, mode-major.
    falling: Vec<f64>,
    /// `int_0^dt S_k(c dt + s) (s/dt) ds`, mode-major.
    rising: Vec<f64>,
}

impl ProductWeights {
    pub fn new(op: &SpectralOperator, alpha: FracOrder, dt: f64, cells: usize) -> Result<Self> {
        if !alpha.in_solver_range() {
            return Err(Error::domain(format!(
                "solver order must lie in (1, 2), got {}",
                alpha.value()
            )));
        }
        let a = alpha.value();
        let modes = op.n_modes();
        let jobs: Vec<(usize, usize)> = (0..modes).flat_map(|k| (0..cells).map(move |c| (k, c))).collect();
        let results: Vec<(f64, f64, bool)> = jobs
            .par_iter()
            .map(|&(k, c)| {
                let mu = op.eigenvalues()[k];
                let t0 = c as f64 * dt;
                let integrand = |s: f64| {
                    let tau = t0 + s;
                    let e = if tau == 0.0 {
                        1.0
                    } else {
                        ml_eval_real(a, mu * tau.powf(a)).unwrap_or(f64::NAN)
                    };
                    let x = s / dt;
                    num_complex::Complex64::new(e * (1.0 - x), e * x)
                };
                let q = quad::integrate(integrand, 0.0, dt, 1e-15 * dt, 1e-12);
                (q.value.re, q.value.im, q.value.is_finite())
            })
            .collect();
        if results.iter().any(|r| !r.2) {
            return Err(Error::Evaluation {
                what: "resolvent symbol table".into(),
                detail: "non-finite cell integral".into(),
            });
        }
        Ok(ProductWeights {
            dt,
            cells,
            modes,
            falling: results.iter().map(|r| r.0).collect(),
            rising: results.iter().map(|r| r.1).collect(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Weights `w[m]` of `int_0^{L dt} S_k(tau) f(t - tau) dtau ~ sum_m w[m] f(t - m dt)`
    /// for `L = len - 1` cells.
    pub fn lag_weights(&self, k: usize, len: usize) -> Vec<f64> {
        assert!(len >= 1 && len - 1 <= self.cells);
        let f = &self.falling[k * self.cells..(k + 1) * self.cells];
        let r = &self.rising[k * self.cells..(k + 1) * self.cells];
        let last = len - 1;
        (0..len)
            .map(|m| {
                let mut w = 0.0;
                if m < last {
                    w += f[m];
                }
                if m > 0 {
                    w += r[m - 1];
                }
                w
            })
            .collect()
    }
}

/// Discretized fixed-point map on a solve window.
#[derive(Debug)]
pub struct MildMap<'a> {
    problem: MildProblem<'a>,
    window: TimeGrid,
    pad: usize,
    /// `weights[k][m]`, `m = 0..=pad`.
    weights: Vec<Vec<f64>>,
    convolver: Option<HistoryConvolver>,
}

/// Forcing and second argument along the padded grid.
struct PaddedForcing {
    /// Mode-major forcing samples on the padded grid.
    g: Vec<Vec<f64>>,
    sup_state: f64,
    sup_second: f64,
    sup_forcing: f64,
    /// Largest second difference of the forcing divided by `dt^2`.
    curvature: f64,
}

impl<'a> MildMap<'a> {
    pub fn new(problem: MildProblem<'a>, window: TimeGrid, history_t: f64) -> Result<Self> {
        if !(history_t > 0.0 && history_t.is_finite()) {
            return Err(Error::domain(format!("history length must be positive, got {history_t}")));
        }
        if problem.op.omega() >= 0.0 {
            return Err(Error::domain("solver needs an operator of negative type"));
        }
        if let SecondArg::Delay { tau } = problem.second_arg {
            if !(tau >= 0.0 && tau.is_finite()) {
                return Err(Error::domain(format!("delay must be nonnegative, got {tau}")));
            }
        }
        problem.forcing.validate()?;
        let dt = window.dt();
        let pad = (history_t / dt - 1e-9).ceil() as usize;
        let table = ProductWeights::new(problem.op, problem.alpha, dt, pad)?;
        let weights = (0..problem.op.n_modes()).map(|k| table.lag_weights(k, pad + 1)).collect();
        let convolver = match &problem.second_arg {
            SecondArg::Memory { kernel } => Some(HistoryConvolver::new(kernel, dt)?),
            SecondArg::Delay { .. } => None,
        };
        Ok(MildMap {
            problem,
            window,
            pad,
            weights,
            convolver,
        })
    }

    pub fn window(&self) -> &TimeGrid {
        &self.window
    }

    pub fn problem(&self) -> &MildProblem<'a> {
        &self.problem
    }

    /// History length actually used, `pad * dt`.
    pub fn history(&self) -> f64 {
        self.pad as f64 * self.window.dt()
    }

    fn dim(&self) -> usize {
        self.problem.op.n_modes()
    }

    fn check_path(&self, u: &Path) -> Result<()> {
        if u.grid() != &self.window || u.dim() != self.dim() {
            return Err(Error::input(format!(
                "path must live on the solve window with {} modes",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Node-major values on the padded grid, frozen before the window.
    fn padded_values(&self, u: &Path) -> Vec<f64> {
        let dim = self.dim();
        let mut v = Vec::with_capacity((self.pad + u.len()) * dim);
        for _ in 0..self.pad {
            v.extend_from_slice(u.at(0));
        }
        v.extend_from_slice(u.values());
        v
    }

    fn padded_second(&self, padded: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        match (&self.problem.second_arg, &self.convolver) {
            (SecondArg::Memory { .. }, Some(conv)) => conv.apply(padded, dim),
            (SecondArg::Delay { tau }, _) => {
                let n = padded.len() / dim;
                let shift = tau / self.window.dt();
                let mut out = vec![0.0; padded.len()];
                for i in 0..n {
                    let x = i as f64 - shift;
                    let (lo, w) = if x <= 0.0 {
                        (0, 0.0)
                    } else {
                        let lo = x.floor() as usize;
                        (lo.min(n - 1), x - lo as f64)
                    };
                    let hi = (lo + 1).min(n - 1);
                    for d in 0..dim {
                        out[i * dim + d] = (1.0 - w) * padded[lo * dim + d] + w * padded[hi * dim + d];
                    }
                }
                out
            }
            _ => unreachable!("memory problems always carry a convolver"),
        }
    }

    fn padded_forcing(&self, u: &Path) -> Result<PaddedForcing> {
        let dim = self.dim();
        let padded = self.padded_values(u);
        let second = self.padded_second(&padded);
        let ev = self.problem.forcing.evaluator(dim)?;
        let n = padded.len() / dim;
        let t0 = self.window.t0() - self.pad as f64 * self.window.dt();
        let dt = self.window.dt();
        let mut g = vec![vec![0.0; n]; dim];
        let mut out = vec![0.0; dim];
        let mut sup_state = 0.0f64;
        let mut sup_second = 0.0f64;
        let mut sup_forcing = 0.0f64;
        for i in 0..n {
            let t = t0 + i as f64 * dt;
            let ui = &padded[i * dim..(i + 1) * dim];
            let pi = &second[i * dim..(i + 1) * dim];
            ev.eval_into(t, ui, pi, &mut out);
            for (k, o) in out.iter().enumerate() {
                g[k][i] = *o;
            }
            sup_state = sup_state.max(norm2(ui));
            sup_second = sup_second.max(norm2(pi));
            sup_forcing = sup_forcing.max(norm2(&out));
        }
        let mut curvature = 0.0f64;
        for i in 1..n.saturating_sub(1) {
            let d2: Vec<f64> = (0..dim).map(|k| g[k][i + 1] - 2.0 * g[k][i] + g[k][i - 1]).collect();
            curvature = curvature.max(norm2(&d2));
        }
        Ok(PaddedForcing {
            g,
            sup_state,
            sup_second,
            sup_forcing,
            curvature: curvature / (dt * dt),
        })
    }

    fn convolve(&self, g: &[Vec<f64>]) -> Result<Path> {
        let dim = self.dim();
        let n = self.window.len();
        let pad = self.pad;
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                (0..dim)
                    .map(|k| {
                        let w = &self.weights[k];
                        let gk = &g[k];
                        let top = j + pad;
                        w.iter().enumerate().map(|(m, wm)| wm * gk[top - m]).sum()
                    })
                    .collect()
            })
            .collect();
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { iteration: 0 });
        }
        Path::new(self.window, dim, values)
    }

    /// `F u` on the window.
    pub fn apply(&self, u: &Path) -> Result<Path> {
        self.check_path(u)?;
        let pf = self.padded_forcing(u)?;
        self.convolve(&pf.g)
    }

    /// `phi` along the window (`Ku` or the delayed state).
    pub fn second_argument(&self, u: &Path) -> Result<Path> {
        self.check_path(u)?;
        let padded = self.padded_values(u);
        let second = self.padded_second(&padded);
        let dim = self.dim();
        Path::new(self.window, dim, second[self.pad * dim..].to_vec())
    }

    /// `t -> f(t, u(t), phi(t))` along the window.
    pub fn forcing_path(&self, u: &Path) -> Result<Path> {
        self.check_path(u)?;
        let pf = self.padded_forcing(u)?;
        let dim = self.dim();
        let n = self.window.len();
        let mut values = Vec::with_capacity(n * dim);
        for j in 0..n {
            for k in 0..dim {
                values.push(pf.g[k][j + self.pad]);
            }
        }
        Path::new(self.window, dim, values)
    }

    /// Error budget of one application of `F` at `u`.
    pub fn budget(&self, u: &Path) -> Result<TruncationBudget> {
        self.check_path(u)?;
        let pf = self.padded_forcing(u)?;
        Ok(self.budget_from(&pf))
    }

    fn budget_from(&self, pf: &PaddedForcing) -> TruncationBudget {
        let p = &self.problem;
        let a = p.alpha.value();
        let omega = p.op.omega();
        let w = p.forcing.growth_bound();
        let forcing_bound = w.eval(pf.sup_state + pf.sup_second).max(pf.sup_forcing);
        let tail = decay_profile_tail(a, omega, self.history());
        let integral = kernel_integral_identity(a, omega).unwrap_or(f64::INFINITY);
        let dt = self.window.dt();
        TruncationBudget {
            history_t: self.history(),
            forcing_bound,
            tail_error_bound: p.cm * forcing_bound * tail,
            quadrature_error_estimate: p.cm * integral * dt * dt / 8.0 * pf.curvature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationBudget {
    #[serde(rename = "history_T")]
    pub history_t: f64,
    /// Bound on `|f|` used for the tail: `max(W(sup|u| + sup|phi|), sup|f|)`.
    pub forcing_bound: f64,
    /// `CM * forcing_bound * int_H^inf ds / (1 + |omega| s^a)`.
    pub tail_error_bound: f64,
    /// Linear-interpolation error of the forcing,
    /// `CM * I(a, omega) * dt^2 / 8 * max |f''|`.
    pub quadrature_error_estimate: f64,
}

impl TruncationBudget {
    pub fn total(&self) -> f64 {
        self.tail_error_bound + self.quadrature_error_estimate
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PicardOptions {
    pub history_t: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Optional ceiling on the tail bound; exceeding it is a budget error.
    pub max_tail_error: Option<f64>,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            history_t: 40.0,
            tol: 1e-10,
            max_iter: 200,
            max_tail_error: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardResult {
    #[serde(skip)]
    pub fixed_point: Path,
    pub residual: f64,
    pub iterate_deltas: Vec<f64>,
    pub empirical_ratio: f64,
    pub iterations: usize,
    pub converged: bool,
    pub contraction: ContractionReport,
    pub truncation_budget: TruncationBudget,
}

impl PicardResult {
    pub fn path(&self) -> &Path {
        &self.fixed_point
    }
}

/// Delta quotients are ignored once the deltas sink to this fraction of the
/// solution size, where rounding dominates.
const RATIO_NOISE_FLOOR: f64 = 1e-13;

/// Picard iteration `u_{n+1} = F u_n` from `initial_guess` (zero if `None`).
///
/// Stops once `|u_{n+1} - u_n|_inf <= tol (1 - L)` where `L` is the largest
/// delta quotient seen after the first one (or the theoretical constant
/// before any quotient is available). This gives an a-posteriori error of at
/// most `tol * L`. `Lambda >= 1` does not abort; the result carries the
/// verdict.
pub fn picard_solve(map: &MildMap<'_>, opts: &PicardOptions, initial_guess: Option<&Path>) -> Result<PicardResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if opts.max_iter == 0 {
        return Err(Error::domain("need at least one iteration"));
    }
    let contraction = map.problem.contraction()?;
    let dim = map.dim();
    let mut u = match initial_guess {
        Some(g) => {
            map.check_path(g)?;
            g.clone()
        }
        None => Path::zeros(map.window, dim),
    };

    let mut deltas = Vec::new();
    let mut ratios: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let next = map.apply(&u).map_err(|e| match e {
            Error::Divergence { .. } => Error::Divergence { iteration: it },
            e => e,
        })?;
        let delta = sup_diff(&next, &u);
        let scale = next.sup_norm();
        u = next;
        if !delta.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        if let Some(&prev) = deltas.last() {
            if prev > RATIO_NOISE_FLOOR * scale && delta > RATIO_NOISE_FLOOR * scale {
                ratios.push(delta / prev);
            }
        }
        deltas.push(delta);
        if delta == 0.0 {
            converged = true;
            break;
        }
        let lambda_est = if ratios.len() >= 2 {
            ratios[1..].iter().copied().fold(0.0, f64::max)
        } else if contraction.lambda < 1.0 {
            contraction.lambda
        } else {
            ratios.first().copied().unwrap_or(1.0)
        };
        let threshold = if lambda_est < 1.0 {
            opts.tol * (1.0 - lambda_est)
        } else {
            opts.tol
        };
        if delta <= threshold {
            converged = true;
            break;
        }
    }

    let pf = map.padded_forcing(&u)?;
    let check = map.convolve(&pf.g)?;
    let residual = sup_diff(&check, &u);
    let budget = map.budget_from(&pf);
    if let Some(limit) = opts.max_tail_error {
        if budget.tail_error_bound > limit {
            return Err(Error::Budget(format!(
                "history length {} leaves a tail bound {:.3e} above the allowed {:.3e}",
                budget.history_t, budget.tail_error_bound, limit
            )));
        }
    }
    let empirical_ratio = if ratios.len() >= 2 {
        ratios[1..].iter().copied().fold(0.0, f64::max)
    } else {
        ratios.first().copied().unwrap_or(0.0)
    };
    Ok(PicardResult {
        fixed_point: u,
        residual,
        iterate_deltas: deltas,
        empirical_ratio,
        iterations,
        converged,
        contraction,
        truncation_budget: budget,
    })
}

fn sup_diff(a: &Path, b: &Path) -> f64 {
    a.values()
        .chunks(a.dim())
        .zip(b.values().chunks(b.dim()))
        .map(|(x, y)| norm2(&x.iter().zip(y).map(|(p, q)| p - q).collect::<Vec<_>>()))
        .fold(0.0, f64::max)
}

/// `u(0) + g(u) = u_0` with `g(u) = sum_i c_i u(tau_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlocalCondition {
    /// `(tau_i, c_i)` pairs.
    pub points: Vec<(f64, f64)>,
    pub u0: StateVector,
}

impl NonlocalCondition {
    /// `g(u)` against a reference path.
    pub fn g(&self, reference: &Path) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; reference.dim()];
        for &(tau, c) in &self.points {
            if !(tau >= 0.0) {
                return Err(Error::domain(format!("nonlocal time must be nonnegative, got {tau}")));
            }
            let s = reference.sample(tau)?;
            for (a, x) in acc.iter_mut().zip(&s) {
                *a += c * x;
            }
        }
        Ok(acc)
    }

    /// `u_0 - g(u)`.
    pub fn transient(&self, reference: &Path) -> Result<Vec<f64>> {
        let g = self.g(reference)?;
        if g.len() != self.u0.coeffs.len() {
            return Err(Error::input("nonlocal condition and reference differ in dimension"));
        }
        Ok(self.u0.coeffs.iter().zip(&g).map(|(a, b)| a - b).collect())
    }
}

/// `v(t) = S_a(t)(u_0 - g(u)) + int_0^t S_a(t - s) f(s) ds` on a grid
/// starting at 0, with `f` given by its samples.
pub fn ivp_solve(
    op: &SpectralOperator,
    alpha: FracOrder,
    f_path: &Path,
    cond: &NonlocalCondition,
    reference: &Path,
) -> Result<Path> {
    let grid = *f_path.grid();
    if grid.t0() != 0.0 {
        return Err(Error::input(format!(
            "initial-value window must start at 0, got {}",
            grid.t0()
        )));
    }
    let dim = op.n_modes();
    if f_path.dim() != dim || cond.u0.coeffs.len() != dim {
        return Err(Error::input("forcing samples and initial value must match the operator's modes"));
    }
    let x = StateVector::new(cond.transient(reference)?)?;
    let n = grid.len();
    let table = ProductWeights::new(op, alpha, grid.dt(), n - 1)?;
    let weights: Vec<Vec<f64>> = (0..dim).map(|k| table.lag_weights(k, n)).collect();
    let fvals = f_path.values();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>> {
            let free = apply_family(op, alpha, grid.t(j), &x)?;
            let mut row = free.coeffs;
            if j > 0 {
                for (k, r) in row.iter_mut().enumerate() {
                    // j cells: hat weights from the table of length j + 1
                    let wk = &weights[k];
                    let mut acc = 0.0;
                    for m in 0..=j {
                        let mut w = wk[m];
                        if m == j {
                            // truncated hat at s = 0
                            w = table.rising_at(k, j - 1);
                        }
                        acc += w * fvals[(j - m) * dim + k];
                    }
                    *r += acc;
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Path::new(grid, dim, rows.into_iter().flatten().collect())
}

impl ProductWeights {
    fn rising_at(&self, k: usize, c: usize) -> f64 {
        self.rising[k * self.cells + c]
    }
}

/// `|v(t_j) - u(t_j)|` per node; `u` may live on a longer grid containing
/// the nodes of `v`.
pub fn asymptotic_gap(v: &Path, u: &Path) -> Result<Path> {
    if v.dim() != u.dim() {
        return Err(Error::input("gap needs paths of equal dimension"));
    }
    let gv = v.grid();
    let gu = u.grid();
    if (gv.dt() - gu.dt()).abs() > 1e-12 * gv.dt() {
        return Err(Error::input("gap needs paths on a common step"));
    }
    let offset = (gv.t0() - gu.t0()) / gu.dt();
    let start = offset.round();
    if (offset - start).abs() > 1e-6 || start < 0.0 || start as usize + gv.len() > gu.len() {
        return Err(Error::input("gap grid is not a subgrid of the reference path"));
    }
    let start = start as usize;
    let values: Vec<f64> = (0..v.len())
        .map(|j| {
            let a = v.at(j);
            let b = u.at(start + j);
            norm2(&a.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>())
        })
        .collect();
    Path::new(*gv, 1, values)
}

/// Envelope fit of a gap against `c / (1 + |omega| t^a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEnvelope {
    /// `max_j gap_j (1 + |omega| t_j^a)`.
    pub c_fit: f64,
    /// The same maximum over the first and second halves of the grid.
    pub c_early: f64,
    pub c_late: f64,
    /// `CM |u_0 - g(u)|`, the size predicted for the transient alone.
    pub c_transient: f64,
    /// The weighted gap does not grow: `c_late <= 1.5 c_early`.
    pub dominated: bool,
}

pub fn fit_gap_envelope(gap: &Path, alpha: FracOrder, omega: f64, cm: f64, transient_norm: f64) -> Result<GapEnvelope> {
    gap.require_scalar("gap envelope")?;
    let a = alpha.value();
    let weighted: Vec<f64> = (0..gap.len())
        .map(|j| gap.scalar(j) * (1.0 + omega.abs() * gap.grid().t(j).max(0.0).powf(a)))
        .collect();
    let half = weighted.len() / 2;
    let max = |s: &[f64]| s.iter().copied().fold(0.0, f64::max);
    let c_early = max(&weighted[..half]);
    let c_late = max(&weighted[half..]);
    Ok(GapEnvelope {
        c_fit: c_early.max(c_late),
        c_early,
        c_late,
        c_transient: cm * transient_norm,
        dominated: c_late.is_finite() && c_late <= 1.5 * c_early,
    })
}
