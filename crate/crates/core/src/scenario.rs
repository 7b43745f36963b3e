//! Configuration-driven scenarios behind the `fracaaa` binary.
//!
//! A scenario is described by one flat JSON document. Every field except
//! `scenario` has a default, and unknown fields are rejected. A run computes
//! everything in memory first and only then writes `report.json` and the CSV
//! traces, so a failed run leaves no partial artifacts behind.

use std::f64::consts::SQRT_2;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::aaadiag::{
    check_theorem2, composition_closure, decay_split_sup, late_window_profile, sqrt2_shift_sequence, translate_test,
    Theorem2Options, WeightFunction,
};
use crate::error::{Error, Result};
use crate::forcing::{make_example1_forcing, AaaForcing, AdditiveTerm, GrowthBound, Realization};
use crate::grid::{logspace, norm2, FracOrder, Path, TimeGrid};
use crate::memory::Kernel;
use crate::mlf::{
    certificate_stability, contour_eval, decay_certificate, kernel_integral_by_quadrature, kernel_integral_identity,
    ml_eval, HyperbolicContour,
};
use crate::operator::{certificate_horizon, dirichlet_laplacian_with, operator_decay_constant, OmegaConvention, StateVector};
use crate::solver::{
    asymptotic_gap, contraction_constant, fit_gap_envelope, ivp_solve, picard_solve, MildMap, MildProblem,
    NonlocalCondition, PicardOptions, SecondArg, Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Example1,
    Example2Delay,
    MlfValidate,
    IdentityCheck,
    ContractionCheck,
    Theorem2Check,
    AsymptoticGap,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Example1 => "example1",
            ScenarioKind::Example2Delay => "example2_delay",
            ScenarioKind::MlfValidate => "mlf_validate",
            ScenarioKind::IdentityCheck => "identity_check",
            ScenarioKind::ContractionCheck => "contraction_check",
            ScenarioKind::Theorem2Check => "theorem2_check",
            ScenarioKind::AsymptoticGap => "asymptotic_gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub alpha: f64,
    pub beta: f64,
    pub mu_shift: f64,
    pub n_modes: usize,
    pub omega_convention: OmegaConvention,
    pub dt: f64,
    pub window: [f64; 2],
    pub history_t: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_tail_error: Option<f64>,
    pub kernel: Kernel,
    pub delay_tau: f64,
    /// Amplitude of the state-independent source `cos(nu t)` in mode 1, one
    /// term per entry of `source_frequencies`.
    pub source_amplitude: f64,
    pub source_frequencies: Vec<f64>,
    /// Replace the forcing by zero.
    pub zero_forcing: bool,
    /// Initial value; defaults to the first mode (zero with `zero_forcing`).
    pub u0: Option<Vec<f64>>,
    /// `(tau_i, c_i)` of `g(u) = sum c_i u(tau_i)`.
    pub nonlocal: Vec<(f64, f64)>,
    pub gap_horizon: f64,
    pub shifts_n: usize,
    pub probe: [f64; 2],
    pub split_t: f64,
    pub split_eps: f64,
    /// Decay constant; computed from certificates when absent.
    pub cm: Option<f64>,
    /// Sector vertex for the scalar checkers; `-1 - mu_shift` when absent.
    pub omega: Option<f64>,
    pub l_f: Option<f64>,
    pub k_l1: Option<f64>,
    pub weight: WeightFunction,
    pub growth: GrowthBound,
    pub r_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    pub margin: f64,
    pub limit_threshold: f64,
    pub ml_alphas: Vec<f64>,
    pub ml_mus: Vec<f64>,
    pub ml_ts: Vec<f64>,
    pub identity_alphas: Vec<f64>,
    pub identity_omegas: Vec<f64>,
    pub certificate_samples: usize,
    pub output_dir: Option<String>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: ScenarioKind::Example1,
            alpha: 1.5,
            beta: 0.2,
            mu_shift: 100.0,
            n_modes: 8,
            omega_convention: OmegaConvention::SpectrumTop,
            dt: 0.05,
            window: [-20.0, 420.0],
            history_t: 40.0,
            tol: 1e-10,
            max_iter: 200,
            max_tail_error: None,
            kernel: Kernel::Exponential { rate: 1.0, scale: 1.0 },
            delay_tau: 1.0,
            source_amplitude: 1.0,
            source_frequencies: vec![1.0, SQRT_2],
            zero_forcing: false,
            u0: None,
            nonlocal: vec![(1.0, 0.5)],
            gap_horizon: 50.0,
            shifts_n: 5,
            probe: [200.0, 236.0],
            split_t: 20.0,
            split_eps: 1e-2,
            cm: None,
            omega: None,
            l_f: None,
            k_l1: None,
            weight: WeightFunction::default(),
            growth: GrowthBound {
                gamma0: 1.0,
                gamma1: 1.0,
                theta: 0.5,
            },
            r_grid: vec![0.5, 1.0, 2.0, 5.0, 10.0],
            xi_grid: logspace(1.0, 1e6, 13),
            margin: 0.01,
            limit_threshold: 1e-3,
            ml_alphas: vec![1.1, 1.25, 1.5, 1.75, 1.9],
            ml_mus: vec![-0.5, -1.0, -4.0],
            ml_ts: logspace(0.1, 50.0, 25),
            identity_alphas: vec![1.25, 1.5, 1.75],
            identity_omegas: vec![-0.5, -1.0, -4.0],
            certificate_samples: 2000,
            output_dir: None,
            seed: 0,
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ScenarioConfig {
    /// Parses a config document; `scenario` is mandatory.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        if value.get("scenario").is_none() {
            return Err(cfg_err("missing field `scenario`"));
        }
        let cfg: ScenarioConfig = serde_json::from_value(value)?;
        Ok(cfg)
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Range checks with actionable messages.
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(cfg_err(format!("`{name}` must be finite")))
            }
        };
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("mu_shift", self.mu_shift),
            ("dt", self.dt),
            ("history_t", self.history_t),
            ("tol", self.tol),
            ("delay_tau", self.delay_tau),
            ("source_amplitude", self.source_amplitude),
            ("gap_horizon", self.gap_horizon),
            ("split_t", self.split_t),
            ("split_eps", self.split_eps),
            ("margin", self.margin),
            ("limit_threshold", self.limit_threshold),
        ] {
            finite(name, v)?;
        }
        let mil = matches!(
            self.scenario,
            ScenarioKind::Example1 | ScenarioKind::Example2Delay | ScenarioKind::AsymptoticGap
        );
        if matches!(
            self.scenario,
            ScenarioKind::Example1
                | ScenarioKind::Example2Delay
                | ScenarioKind::AsymptoticGap
                | ScenarioKind::ContractionCheck
                | ScenarioKind::Theorem2Check
        ) && !(self.alpha > 1.0 && self.alpha < 2.0)
        {
            return Err(cfg_err(format!("`alpha` must lie in (1, 2), got {}", self.alpha)));
        }
        if !(self.mu_shift > 0.0) {
            return Err(cfg_err(format!("`mu_shift` must be positive, got {}", self.mu_shift)));
        }
        if self.n_modes == 0 || self.n_modes > 64 {
            return Err(cfg_err(format!("`n_modes` must lie in 1..=64, got {}", self.n_modes)));
        }
        if let Some(o) = self.omega {
            if !(o < 0.0 && o.is_finite()) {
                return Err(cfg_err(format!("`omega` must be negative, got {o}")));
            }
        }
        if let Some(c) = self.cm {
            if !(c > 0.0 && c.is_finite()) {
                return Err(cfg_err(format!("`cm` must be positive, got {c}")));
            }
        }
        for (name, v) in [("l_f", self.l_f), ("k_l1", self.k_l1)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(cfg_err(format!("`{name}` must be nonnegative, got {v}")));
                }
            }
        }
        if mil {
            if !(self.dt > 0.0) {
                return Err(cfg_err("`dt` must be positive"));
            }
            if !(self.window[0] < self.window[1]) {
                return Err(cfg_err("`window` must be [start, end] with start < end"));
            }
            let nodes = (self.window[1] - self.window[0]) / self.dt;
            if nodes > 2e5 {
                return Err(cfg_err(format!("window holds {nodes:.0} nodes; at most 2e5 are supported")));
            }
            if !(self.window[0] <= 0.0 && self.window[1] >= self.gap_horizon) {
                return Err(cfg_err("`window` must contain [0, gap_horizon]"));
            }
            let k = -self.window[0] / self.dt;
            if (k - k.round()).abs() > 1e-6 {
                return Err(cfg_err("`window[0]` must be a multiple of `dt` so that t = 0 is a node"));
            }
            if !(self.gap_horizon > 1.0) {
                return Err(cfg_err("`gap_horizon` must exceed 1"));
            }
            if !(self.history_t > 0.0) {
                return Err(cfg_err("`history_t` must be positive"));
            }
            if !(self.tol > 0.0) || self.max_iter == 0 {
                return Err(cfg_err("`tol` must be positive and `max_iter` at least 1"));
            }
            if self.shifts_n == 0 {
                return Err(cfg_err("`shifts_n` must be at least 1"));
            }
            if !(self.probe[0] < self.probe[1]) {
                return Err(cfg_err("`probe` must be [start, end] with start < end"));
            }
            let smax = sqrt2_shift_sequence(self.shifts_n).max_shift();
            if self.scenario != ScenarioKind::AsymptoticGap
                && (self.probe[0] - smax < self.window[0] || self.probe[1] + smax > self.window[1])
            {
                return Err(cfg_err(format!(
                    "`probe` shifted by +-{smax:.3} must stay inside `window`"
                )));
            }
            if !(self.split_eps > 0.0) || self.split_t < 0.0 || self.split_t > self.window[1] {
                return Err(cfg_err("`split_t` must lie in the window and `split_eps` be positive"));
            }
            if self.scenario == ScenarioKind::Example2Delay && !(self.delay_tau > 0.0) {
                return Err(cfg_err("`delay_tau` must be positive"));
            }
            self.kernel.validate().map_err(|e| cfg_err(format!("`kernel`: {e}")))?;
            if let Some(u0) = &self.u0 {
                if u0.len() != self.n_modes || u0.iter().any(|v| !v.is_finite()) {
                    return Err(cfg_err(format!("`u0` needs {} finite entries", self.n_modes)));
                }
            }
            for &(tau, c) in &self.nonlocal {
                if !(tau >= 0.0 && tau <= self.window[1] && c.is_finite()) {
                    return Err(cfg_err(format!("nonlocal point ({tau}, {c}) must lie in [0, window end]")));
                }
            }
            if self.source_frequencies.iter().any(|f| !f.is_finite()) {
                return Err(cfg_err("`source_frequencies` must be finite"));
            }
        }
        if self.scenario == ScenarioKind::Theorem2Check {
            GrowthBound::new(self.growth.gamma0, self.growth.gamma1, self.growth.theta)
                .map_err(|e| cfg_err(format!("`growth`: {e}")))?;
            self.weight.validate().map_err(|e| cfg_err(format!("`weight`: {e}")))?;
            for (name, g) in [("r_grid", &self.r_grid), ("xi_grid", &self.xi_grid)] {
                if g.is_empty() || g.iter().any(|x| !(*x > 0.0)) || g.windows(2).any(|p| p[1] <= p[0]) {
                    return Err(cfg_err(format!("`{name}` must be positive and increasing")));
                }
            }
            if !(self.margin >= 0.0) || !(self.limit_threshold > 0.0) {
                return Err(cfg_err("`margin` must be >= 0 and `limit_threshold` > 0"));
            }
        }
        if self.scenario == ScenarioKind::MlfValidate {
            if self.ml_alphas.iter().any(|a| !(*a > 1.0 && *a < 2.0)) {
                return Err(cfg_err("`ml_alphas` must lie in (1, 2)"));
            }
            if self.ml_mus.iter().any(|m| !(*m < 0.0 && m.is_finite())) {
                return Err(cfg_err("`ml_mus` must be negative"));
            }
            if self.ml_ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                return Err(cfg_err("`ml_ts` must be positive"));
            }
            if self.certificate_samples < 2 {
                return Err(cfg_err("`certificate_samples` must be at least 2"));
            }
        }
        if self.scenario == ScenarioKind::IdentityCheck
            && (self.identity_alphas.iter().any(|a| !(*a > 1.0 && *a < 2.0))
                || self.identity_omegas.iter().any(|o| !(*o < 0.0 && o.is_finite())))
        {
            return Err(cfg_err("`identity_alphas` must lie in (1, 2) and `identity_omegas` be negative"));
        }
        Ok(())
    }

    fn omega_or_default(&self) -> f64 {
        self.omega.unwrap_or(-1.0 - self.mu_shift)
    }
}

/// Results of a run, held in memory until written.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub report: Value,
    /// `(file name, contents)` of the CSV traces.
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    /// Overall verdict recorded in the report.
    pub fn passed(&self) -> bool {
        self.report["passed"].as_bool().unwrap_or(false)
    }

    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }
}

fn checks_value(checks: &[(&str, bool)]) -> (Value, bool) {
    let mut map = serde_json::Map::new();
    for (k, v) in checks {
        map.insert((*k).to_string(), Value::Bool(*v));
    }
    (Value::Object(map), checks.iter().all(|c| c.1))
}

/// Runs a validated scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Artifacts> {
    cfg.validate()?;
    let name = cfg.scenario.name();
    let (results, checks, files) = match cfg.scenario {
        ScenarioKind::Example1 => run_mild(cfg, false, true),
        ScenarioKind::Example2Delay => run_mild(cfg, true, true),
        ScenarioKind::AsymptoticGap => run_mild(cfg, false, false),
        ScenarioKind::MlfValidate => run_mlf(cfg),
        ScenarioKind::IdentityCheck => run_identity(cfg),
        ScenarioKind::ContractionCheck => run_contraction(cfg),
        ScenarioKind::Theorem2Check => run_theorem2(cfg),
    }
    .map_err(|e| e.context(format!("scenario {name}")))?;
    let (checks, passed) = checks_value(&checks);
    let report = json!({
        "scenario": name,
        "config": serde_json::to_value(cfg)?,
        "passed": passed,
        "checks": checks,
        "results": results,
    });
    Ok(Artifacts { report, files })
}

/// Writes `report.json` and the traces into `dir`, removing whatever was
/// written if any write fails.
pub fn write_artifacts(artifacts: &Artifacts, dir: &FsPath) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut all = vec![("report.json".to_string(), artifacts.report_json())];
    all.extend(artifacts.files.iter().cloned());
    for (name, contents) in &all {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            return Err(e.into());
        }
        written.push(path);
    }
    Ok(written)
}

type Outcome = (Value, Vec<(&'static str, bool)>, Vec<(String, String)>);

fn build_forcing(cfg: &ScenarioConfig) -> AaaForcing {
    if cfg.zero_forcing {
        return AaaForcing::zero().with_realization(Realization::SineCollocation { oversampling: 4 });
    }
    let terms = if cfg.source_amplitude == 0.0 {
        Vec::new()
    } else {
        cfg.source_frequencies
            .iter()
            .map(|&frequency| AdditiveTerm {
                amplitude: cfg.source_amplitude,
                frequency,
                phase: 0.0,
                mode: 1,
            })
            .collect()
    };
    make_example1_forcing(cfg.beta).with_additive(terms)
}

/// A bounded random path on the window, one uniform value per node and mode.
pub fn random_path(grid: TimeGrid, dim: usize, amplitude: f64, seed: u64) -> Path {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len() * dim).map(|_| amplitude * rng.gen_range(-1.0..=1.0)).collect();
    Path::new(grid, dim, values).expect("shape matches")
}

fn run_mild(cfg: &ScenarioConfig, delay: bool, diagnostics: bool) -> Result<Outcome> {
    let op = dirichlet_laplacian_with(cfg.mu_shift, cfg.n_modes, cfg.omega_convention)?;
    let alpha = FracOrder::solver(cfg.alpha)?;
    let cm = match cfg.cm {
        Some(c) => c,
        None => operator_decay_constant(&op, alpha, certificate_horizon(&op, alpha, 1e3))?,
    };
    let forcing = build_forcing(cfg);
    let second_arg = if delay {
        SecondArg::Delay { tau: cfg.delay_tau }
    } else {
        SecondArg::Memory {
            kernel: cfg.kernel.clone(),
        }
    };
    let problem = MildProblem {
        op: &op,
        alpha,
        forcing: &forcing,
        second_arg,
        cm,
    };
    let contraction = problem.contraction()?.with_example1(cfg.beta, cfg.mu_shift)?;
    let window = TimeGrid::spanning(cfg.window[0], cfg.window[1], cfg.dt)?;
    let map = MildMap::new(problem, window, cfg.history_t)?;
    let opts = PicardOptions {
        history_t: cfg.history_t,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        max_tail_error: cfg.max_tail_error,
    };
    let result = picard_solve(&map, &opts, None)?;
    let u = result.path();

    // second solve from a random bounded guess
    let guess = random_path(window, cfg.n_modes, 1.0, cfg.seed);
    let other = picard_solve(&map, &opts, Some(&guess))?;
    let uniqueness_gap = u.combine(1.0, other.path(), -1.0)?.sup_norm();

    // initial-value variant on [0, gap_horizon]
    let j0 = window
        .nearest(0.0)
        .ok_or_else(|| Error::input("window does not contain t = 0"))?;
    let j1 = window
        .nearest(cfg.gap_horizon)
        .ok_or_else(|| Error::input("window does not contain the gap horizon"))?;
    let fpath = map.forcing_path(u)?.slice(j0, j1 + 1)?;
    let ivp_grid = TimeGrid::new(0.0, cfg.dt, fpath.len())?;
    let fpath = Path::new(ivp_grid, cfg.n_modes, fpath.into_values())?;
    let u0 = match &cfg.u0 {
        Some(v) => v.clone(),
        None if cfg.zero_forcing => vec![0.0; cfg.n_modes],
        None => StateVector::basis(cfg.n_modes, 0).coeffs,
    };
    let cond = NonlocalCondition {
        points: cfg.nonlocal.clone(),
        u0: StateVector::new(u0)?,
    };
    let v = ivp_solve(&op, alpha, &fpath, &cond, u)?;
    let gap = asymptotic_gap(&v, u)?;
    let transient = norm2(&cond.transient(u)?);
    let envelope = fit_gap_envelope(&gap, alpha, op.omega(), cm, transient)?;
    let gap_at_1 = gap.sample(1.0)?[0];
    let gap_at_h = gap.sample(cfg.gap_horizon)?[0];

    let names: Vec<String> = (1..=cfg.n_modes).map(|k| format!("u{k}")).collect();
    let mut files = vec![
        ("solution.csv".to_string(), u.to_csv(Some(&names))),
        ("gap.csv".to_string(), gap.to_csv(Some(&["gap".to_string()]))),
    ];

    let lambda = result.contraction.lambda;
    let tail = result.truncation_budget.tail_error_bound;
    let mut checks = vec![
        ("contractive", result.contraction.verdict == Verdict::Contractive),
        ("converged", result.converged),
        ("residual_within_budget", result.residual <= cfg.tol + tail),
        ("ratio_within_lambda", result.empirical_ratio <= lambda + 0.1),
        ("unique_fixed_point", uniqueness_gap <= 10.0 * cfg.tol),
        ("gap_decays", gap_at_h <= 0.05 * gap_at_1),
        ("gap_dominated", envelope.dominated),
    ];
    let mut results = json!({
        "operator": {
            "eigenvalues": op.eigenvalues(),
            "omega": op.omega(),
            "omega_convention": cfg.omega_convention,
            "CM": cm,
        },
        "forcing": forcing.summary(Some(cfg.beta)),
        "contraction": contraction,
        "picard": result,
        "uniqueness": {"second_guess_seed": cfg.seed, "sup_difference": uniqueness_gap, "iterations": other.iterations},
        "ivp": {
            "nonlocal": cfg.nonlocal,
            "transient_norm": transient,
            "gap_at_1": gap_at_1,
            "gap_at_horizon": gap_at_h,
            "gap_horizon": cfg.gap_horizon,
            "envelope": envelope,
        },
    });

    if diagnostics {
        let shifts = sqrt2_shift_sequence(cfg.shifts_n);
        let probe = TimeGrid::spanning(cfg.probe[0], cfg.probe[1], cfg.dt)?;
        let translate = translate_test(u, &shifts, &probe)?;
        let (base, cand) = late_window_profile(u, shifts.max_shift(), 0.0)?;
        let split_sup = decay_split_sup(&base, &cand, cfg.split_t)?;
        let composition = composition_closure(&map, u, &shifts, &probe)?;
        files.push(("translate.csv".to_string(), translate.to_csv()));
        checks.push(("translate_recurrent", translate.recurrent));
        checks.push(("decay_split", split_sup <= cfg.split_eps));
        checks.push(("composition_closure", composition.ok));
        results["translate"] = serde_json::to_value(&translate)?;
        results["decay_split"] = json!({
            "profile_shift": shifts.max_shift(),
            "T": cfg.split_t,
            "eps": cfg.split_eps,
            "sup": split_sup,
            "ok": split_sup <= cfg.split_eps,
        });
        results["composition"] = serde_json::to_value(&composition)?;
    }
    Ok((results, checks, files))
}

fn run_mlf(cfg: &ScenarioConfig) -> Result<Outcome> {
    let contour = HyperbolicContour::default();
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for &a in &cfg.ml_alphas {
        for &mu in &cfg.ml_mus {
            for &t in &cfg.ml_ts {
                let direct = ml_eval(a, Complex64::new(mu * t.powf(a), 0.0))?;
                let oracle = contour_eval(a, mu, t, &contour)?;
                let diff = (direct - oracle).norm();
                worst = worst.max(diff);
                rows.push(format!(
                    "{},{},{},{},{},{}",
                    a,
                    mu,
                    crate::grid::fmt_f64(t),
                    crate::grid::fmt_f64(direct.re),
                    crate::grid::fmt_f64(oracle.re),
                    crate::grid::fmt_f64(diff)
                ));
            }
        }
    }
    let mut exp_err = 0.0f64;
    let mut cos_err = 0.0f64;
    for t in TimeGrid::spanning(0.0, 10.0, 0.01)?.times() {
        exp_err = exp_err.max((ml_eval(1.0, Complex64::new(-t, 0.0))?.re - (-t).exp()).abs());
        exp_err = exp_err.max((ml_eval(1.0, Complex64::new(t, 0.0))?.re - t.exp()).abs() / t.exp());
        cos_err = cos_err.max((ml_eval(2.0, Complex64::new(-t * t, 0.0))?.re - t.cos()).abs());
    }

    let mut certificates = Vec::new();
    let mut all_stable = true;
    for &a in &cfg.ml_alphas {
        for &mu in &cfg.ml_mus {
            let t_max = (1e4 / mu.abs()).powf(1.0 / a);
            let s = certificate_stability(a, mu, t_max, cfg.certificate_samples)?;
            all_stable &= s.stable && s.base.c_est.is_finite();
            certificates.push(s);
        }
    }
    let control_t = 1e4f64.sqrt();
    let control = certificate_stability(2.0, -1.0, control_t, cfg.certificate_samples)?;
    // a fresh random grid must stay under the bound
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fresh_ok = true;
    for s in &certificates {
        let c = decay_certificate(s.base.alpha, s.base.mu, s.base.t_max, cfg.certificate_samples)?;
        for _ in 0..200 {
            let t = c.t_min * (c.t_max / c.t_min).powf(rng.gen::<f64>());
            let v = ml_eval(c.alpha, Complex64::new(c.mu * t.powf(c.alpha), 0.0))?.norm();
            fresh_ok &= v <= c.bound(t) * (1.0 + 1e-6);
        }
    }
    let mut csv = String::from("alpha,mu,t,ml_eval,contour_eval,abs_diff\n");
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    let results = json!({
        "lattice_points": cfg.ml_alphas.len() * cfg.ml_mus.len() * cfg.ml_ts.len(),
        "max_dual_route_difference": worst,
        "e1_exp_error": exp_err,
        "e2_cos_error": cos_err,
        "certificates": certificates,
        "alpha2_control": control,
    });
    let checks = vec![
        ("dual_route", worst <= 1e-8),
        ("closed_forms", exp_err <= 1e-8 && cos_err <= 1e-8),
        ("certificates_stable", all_stable),
        ("certificates_hold_on_fresh_grid", fresh_ok),
        ("alpha2_control_unstable", !control.stable),
    ];
    Ok((results, checks, vec![("mlf_lattice.csv".to_string(), csv)]))
}

fn run_identity(cfg: &ScenarioConfig) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_scaling = 0.0f64;
    for &a in &cfg.identity_alphas {
        for &w in &cfg.identity_omegas {
            let closed = kernel_integral_identity(a, w)?;
            let quad = kernel_integral_by_quadrature(a, w);
            let rel = (closed - quad).abs() / closed;
            worst = worst.max(rel);
            let c = 3.0;
            let scaled = kernel_integral_identity(a, c * w)?;
            let scaling = (scaled - c.powf(-1.0 / a) * closed).abs() / scaled;
            worst_scaling = worst_scaling.max(scaling);
            rows.push(json!({"alpha": a, "omega": w, "closed_form": closed, "quadrature": quad, "relative_error": rel, "scaling_error": scaling}));
        }
    }
    let results = json!({"rows": rows, "max_relative_error": worst, "max_scaling_error": worst_scaling});
    let checks = vec![("identity", worst <= 1e-6), ("scaling_law", worst_scaling <= 1e-14)];
    Ok((results, checks, Vec::new()))
}

fn run_contraction(cfg: &ScenarioConfig) -> Result<Outcome> {
    let alpha = FracOrder::solver(cfg.alpha)?;
    let omega = cfg.omega_or_default();
    let cm = match cfg.cm {
        Some(c) => c,
        None => {
            let op = dirichlet_laplacian_with(cfg.mu_shift, cfg.n_modes, cfg.omega_convention)?;
            operator_decay_constant(&op, alpha, certificate_horizon(&op, alpha, 1e3))?
        }
    };
    let l_f = cfg.l_f.unwrap_or((3.0 * cfg.beta.abs()).max(1.0));
    let k_l1 = match cfg.k_l1 {
        Some(k) => k,
        None => cfg.kernel.l1_norm()?,
    };
    let report = contraction_constant(cm, alpha, omega, l_f, k_l1)?.with_example1(cfg.beta, cfg.mu_shift)?;
    let via_identity = cm * l_f * (1.0 + k_l1) * kernel_integral_identity(cfg.alpha, omega)?;
    let consistency = if report.lambda == 0.0 {
        (via_identity - report.lambda).abs()
    } else {
        (via_identity - report.lambda).abs() / report.lambda
    };
    let results = json!({"report": report, "lambda_via_identity": via_identity, "relative_difference": consistency});
    let checks = vec![("formula_consistency", consistency <= 1e-12)];
    Ok((results, checks, Vec::new()))
}

fn run_theorem2(cfg: &ScenarioConfig) -> Result<Outcome> {
    let omega = cfg.omega_or_default();
    let alpha = FracOrder::solver(cfg.alpha)?;
    let cm = match cfg.cm {
        Some(c) => c,
        None => {
            let op = dirichlet_laplacian_with(cfg.mu_shift, cfg.n_modes, cfg.omega_convention)?;
            operator_decay_constant(&op, alpha, certificate_horizon(&op, alpha, 1e3))?
        }
    };
    let opts = Theorem2Options {
        margin: cfg.margin,
        limit_threshold: cfg.limit_threshold,
        ..Theorem2Options::default()
    };
    let report = check_theorem2(cm, cfg.alpha, omega, &cfg.growth, &cfg.weight, &cfg.r_grid, &cfg.xi_grid, &opts)?;
    let monotone = report.beta_samples.windows(2).all(|p| p[1].1 >= p[0].1);
    let checks = vec![
        ("condition_i", report.condition_i_ok),
        ("condition_iv", report.condition_iv_ok),
        ("beta_monotone", monotone),
    ];
    let results = json!({"CM": cm, "omega": omega, "report": report});
    Ok((results, checks, Vec::new()))
}
