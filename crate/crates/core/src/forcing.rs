//! Asymptotically almost automorphic forcing terms
//! `f(t, u, phi) = f_1(t, u, phi) + f_2(t, u)` where `f_1` is trigonometric
//! in `t` and `f_2` carries a decaying envelope `e^{-r |t|}`.
//!
//! The second argument `phi` is either the memory term `Ku(t)` or a delayed
//! state `u(t - tau)`. For spectral states the nonlinearities act on
//! collocation values `x_m = m pi / (n_x + 1)`, reached through the sine
//! transform of the Dirichlet modes `sqrt(2/pi) sin(k x)`.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm2, Path};

/// Pointwise nonlinearity; both choices are 1-Lipschitz and vanish at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    Identity,
    Sine,
}

impl Nonlinearity {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Nonlinearity::Identity => x,
            Nonlinearity::Sine => x.sin(),
        }
    }

    pub fn lipschitz(self) -> f64 {
        1.0
    }
}

/// `amplitude cos(frequency t)` multiplying the state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Multiplier {
    pub amplitude: f64,
    pub frequency: f64,
}

/// State-independent source `amplitude cos(frequency t + phase)` in one mode
/// (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdditiveTerm {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "first_mode")]
    pub mode: usize,
}

fn first_mode() -> usize {
    1
}

/// `scale e^{-rate |t|} nl(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayPart {
    pub scale: f64,
    pub rate: f64,
    pub nonlinearity: Nonlinearity,
}

/// `scale nl(phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub scale: f64,
    pub nonlinearity: Nonlinearity,
}

/// Growth bound `W(xi) = gamma0 + gamma1 xi^theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthBound {
    pub gamma0: f64,
    pub gamma1: f64,
    pub theta: f64,
}

impl GrowthBound {
    pub fn new(gamma0: f64, gamma1: f64, theta: f64) -> Result<Self> {
        if !(gamma0 >= 0.0 && gamma1 >= 0.0 && theta >= 0.0) || !(gamma0 + gamma1 + theta).is_finite() {
            return Err(Error::domain(format!(
                "growth bound needs nonnegative finite coefficients, got ({gamma0}, {gamma1}, {theta})"
            )));
        }
        Ok(GrowthBound { gamma0, gamma1, theta })
    }

    pub fn eval(&self, xi: f64) -> f64 {
        if self.theta == 0.0 {
            self.gamma0 + self.gamma1
        } else {
            self.gamma0 + self.gamma1 * xi.max(0.0).powf(self.theta)
        }
    }
}

/// How nonlinearities reach a state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Realization {
    /// Componentwise, for scalar and abstract diagonal states.
    Pointwise,
    /// Through `n_x = oversampling * n_modes` sine collocation points.
    SineCollocation { oversampling: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AaaForcing {
    pub multipliers: Vec<Multiplier>,
    #[serde(default)]
    pub additive: Vec<AdditiveTerm>,
    pub decay: DecayPart,
    pub coupling: Coupling,
    pub realization: Realization,
}

/// Serialized summary of a forcing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForcingSummary {
    pub beta: Option<f64>,
    pub frequencies: Vec<f64>,
    pub envelope_scale: f64,
    pub memory_nonlinearity: Nonlinearity,
    #[serde(rename = "L_f")]
    pub l_f: f64,
    #[serde(rename = "W")]
    pub w: GrowthBound,
    /// `sum |a_i| + |b| lip`, the Lipschitz constant in the state argument.
    pub lipschitz_state: f64,
    /// `|c| lip`, the Lipschitz constant in the second argument.
    pub lipschitz_second: f64,
}

/// `beta u (cos t + cos sqrt2 t) + beta e^{-|t|} sin(u) + sin(Ku)` on the
/// sine collocation grid.
pub fn make_example1_forcing(beta: f64) -> AaaForcing {
    AaaForcing {
        multipliers: vec![
            Multiplier {
                amplitude: beta,
                frequency: 1.0,
            },
            Multiplier {
                amplitude: beta,
                frequency: SQRT_2,
            },
        ],
        additive: Vec::new(),
        decay: DecayPart {
            scale: beta,
            rate: 1.0,
            nonlinearity: Nonlinearity::Sine,
        },
        coupling: Coupling {
            scale: 1.0,
            nonlinearity: Nonlinearity::Sine,
        },
        realization: Realization::SineCollocation { oversampling: 4 },
    }
}

impl AaaForcing {
    /// The zero forcing.
    pub fn zero() -> Self {
        AaaForcing {
            multipliers: Vec::new(),
            additive: Vec::new(),
            decay: DecayPart {
                scale: 0.0,
                rate: 1.0,
                nonlinearity: Nonlinearity::Identity,
            },
            coupling: Coupling {
                scale: 0.0,
                nonlinearity: Nonlinearity::Identity,
            },
            realization: Realization::Pointwise,
        }
    }

    pub fn with_additive(mut self, terms: Vec<AdditiveTerm>) -> Self {
        self.additive = terms;
        self
    }

    pub fn with_realization(mut self, realization: Realization) -> Self {
        self.realization = realization;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self
            .multipliers
            .iter()
            .all(|m| m.amplitude.is_finite() && m.frequency.is_finite())
            && self
                .additive
                .iter()
                .all(|a| a.amplitude.is_finite() && a.frequency.is_finite() && a.phase.is_finite())
            && self.decay.scale.is_finite()
            && self.coupling.scale.is_finite();
        if !finite {
            return Err(Error::input("forcing coefficients must be finite"));
        }
        if !(self.decay.rate > 0.0 && self.decay.rate.is_finite()) {
            return Err(Error::domain(format!(
                "decay envelope needs a positive rate, got {}",
                self.decay.rate
            )));
        }
        if self.additive.iter().any(|a| a.mode == 0) {
            return Err(Error::input("additive terms use 1-based mode indices"));
        }
        if let Realization::SineCollocation { oversampling } = self.realization {
            if oversampling < 2 {
                return Err(Error::input(format!(
                    "sine collocation needs at least two points per mode, got {oversampling}"
                )));
            }
        }
        Ok(())
    }

    /// Lipschitz constant in the state argument.
    pub fn lipschitz_state(&self) -> f64 {
        self.multipliers.iter().map(|m| m.amplitude.abs()).sum::<f64>()
            + self.decay.scale.abs() * self.decay.nonlinearity.lipschitz()
    }

    /// Lipschitz constant in the second argument.
    pub fn lipschitz_second(&self) -> f64 {
        self.coupling.scale.abs() * self.coupling.nonlinearity.lipschitz()
    }

    /// `L_f` with `|f(t,u,phi) - f(t,v,psi)| <= L_f (|u - v| + |phi - psi|)`.
    pub fn lipschitz_l(&self) -> f64 {
        self.lipschitz_state().max(self.lipschitz_second())
    }

    /// `W(xi) = |f(t,0,0)|_max + L_f xi`.
    pub fn growth_bound(&self) -> GrowthBound {
        GrowthBound {
            gamma0: self.additive.iter().map(|a| a.amplitude.abs()).sum(),
            gamma1: self.lipschitz_l(),
            theta: 1.0,
        }
    }

    /// Size of the decaying part relative to the state: `|b| e^{-r|t|}`.
    pub fn decay_envelope(&self, t: f64) -> f64 {
        self.decay.scale.abs() * (-self.decay.rate * t.abs()).exp()
    }

    /// `sup_t |sum a_i cos(nu_i t)|` is at most this.
    pub fn multiplier_bound(&self) -> f64 {
        self.multipliers.iter().map(|m| m.amplitude.abs()).sum()
    }

    pub fn summary(&self, beta: Option<f64>) -> ForcingSummary {
        let mut frequencies: Vec<f64> = self
            .multipliers
            .iter()
            .map(|m| m.frequency)
            .chain(self.additive.iter().map(|a| a.frequency))
            .collect();
        frequencies.sort_by(|a, b| a.partial_cmp(b).unwrap());
        frequencies.dedup();
        ForcingSummary {
            beta,
            frequencies,
            envelope_scale: self.decay.scale,
            memory_nonlinearity: self.coupling.nonlinearity,
            l_f: self.lipschitz_l(),
            w: self.growth_bound(),
            lipschitz_state: self.lipschitz_state(),
            lipschitz_second: self.lipschitz_second(),
        }
    }

    /// Evaluator for states of dimension `dim`.
    pub fn evaluator(&self, dim: usize) -> Result<ForcingEvaluator<'_>> {
        self.validate()?;
        if dim == 0 {
            return Err(Error::input("state dimension must be positive"));
        }
        if let Some(a) = self.additive.iter().find(|a| a.mode > dim) {
            return Err(Error::input(format!(
                "additive term in mode {} but the state has {dim} modes",
                a.mode
            )));
        }
        let transform = match self.realization {
            Realization::Pointwise => None,
            Realization::SineCollocation { oversampling } => Some(SineTransform::new(dim, oversampling * dim)),
        };
        Ok(ForcingEvaluator {
            forcing: self,
            dim,
            transform,
        })
    }
}

/// Discrete sine transform between Dirichlet mode coefficients and values at
/// `x_m = m pi / (n_x + 1)`.
#[derive(Debug, Clone)]
pub struct SineTransform {
    n_modes: usize,
    n_x: usize,
    /// `sqrt(2/pi) sin(k x_m)`, row `m`, column `k`.
    table: Vec<f64>,
}

impl SineTransform {
    pub fn new(n_modes: usize, n_x: usize) -> Self {
        let c = (2.0 / PI).sqrt();
        let mut table = Vec::with_capacity(n_modes * n_x);
        for m in 1..=n_x {
            let x = m as f64 * PI / (n_x + 1) as f64;
            for k in 1..=n_modes {
                table.push(c * (k as f64 * x).sin());
            }
        }
        SineTransform { n_modes, n_x, table }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.n_x).map(|m| m as f64 * PI / (self.n_x + 1) as f64).collect()
    }

    /// Coefficients to collocation values.
    pub fn synthesize(&self, coeffs: &[f64], values: &mut [f64]) {
        for (m, v) in values.iter_mut().enumerate() {
            let row = &self.table[m * self.n_modes..(m + 1) * self.n_modes];
            *v = row.iter().zip(coeffs).map(|(a, b)| a * b).sum();
        }
    }

    /// Collocation values to the first `n_modes` coefficients (exact inverse
    /// of [`SineTransform::synthesize`] on the modal subspace).
    pub fn analyze(&self, values: &[f64], coeffs: &mut [f64]) {
        let w = PI / (self.n_x + 1) as f64;
        coeffs.iter_mut().for_each(|c| *c = 0.0);
        for (m, v) in values.iter().enumerate() {
            let row = &self.table[m * self.n_modes..(m + 1) * self.n_modes];
            for (c, a) in coeffs.iter_mut().zip(row) {
                *c += w * a * v;
            }
        }
    }
}

/// Forcing bound to a state dimension, with its transform precomputed.
#[derive(Debug, Clone)]
pub struct ForcingEvaluator<'a> {
    forcing: &'a AaaForcing,
    dim: usize,
    transform: Option<SineTransform>,
}

impl ForcingEvaluator<'_> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out += scale nl(x)` in the realization of the state space.
    fn add_nonlinear(&self, scale: f64, nl: Nonlinearity, x: &[f64], out: &mut [f64]) {
        if scale == 0.0 {
            return;
        }
        match (&self.transform, nl) {
            (_, Nonlinearity::Identity) => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o += scale * v;
                }
            }
            (None, nl) => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o += scale * nl.apply(*v);
                }
            }
            (Some(tr), nl) => {
                let mut vals = vec![0.0; tr.n_x];
                tr.synthesize(x, &mut vals);
                vals.iter_mut().for_each(|v| *v = nl.apply(*v));
                let mut back = vec![0.0; self.dim];
                tr.analyze(&vals, &mut back);
                for (o, v) in out.iter_mut().zip(&back) {
                    *o += scale * v;
                }
            }
        }
    }

    /// Almost automorphic part: multipliers, additive sources and coupling.
    pub fn aa_part(&self, t: f64, u: &[f64], phi: &[f64], out: &mut [f64]) {
        let f = self.forcing;
        out.iter_mut().for_each(|o| *o = 0.0);
        let m: f64 = f.multipliers.iter().map(|m| m.amplitude * (m.frequency * t).cos()).sum();
        if m != 0.0 {
            for (o, v) in out.iter_mut().zip(u) {
                *o += m * v;
            }
        }
        for a in &f.additive {
            out[a.mode - 1] += a.amplitude * (a.frequency * t + a.phase).cos();
        }
        self.add_nonlinear(f.coupling.scale, f.coupling.nonlinearity, phi, out);
    }

    /// Decaying part `b e^{-r|t|} nl(u)`.
    pub fn decay_part(&self, t: f64, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let d = &self.forcing.decay;
        let env = d.scale * (-d.rate * t.abs()).exp();
        self.add_nonlinear(env, d.nonlinearity, u, out);
    }

    /// `f(t, u, phi)` written into `out`.
    pub fn eval_into(&self, t: f64, u: &[f64], phi: &[f64], out: &mut [f64]) {
        self.aa_part(t, u, phi, out);
        let d = &self.forcing.decay;
        let env = d.scale * (-d.rate * t.abs()).exp();
        self.add_nonlinear(env, d.nonlinearity, u, out);
    }

    pub fn eval(&self, t: f64, u: &[f64], phi: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim || phi.len() != self.dim {
            return Err(Error::input(format!(
                "forcing of dimension {} got arguments of length {} and {}",
                self.dim,
                u.len(),
                phi.len()
            )));
        }
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, u, phi, &mut out);
        Ok(out)
    }
}

/// One-shot evaluation of `f(t, u, phi)`.
pub fn eval_forcing(f: &AaaForcing, t: f64, u: &[f64], phi: &[f64]) -> Result<Vec<f64>> {
    if u.len() != phi.len() {
        return Err(Error::input(format!(
            "state and second argument differ in length: {} and {}",
            u.len(),
            phi.len()
        )));
    }
    f.evaluator(u.len())?.eval(t, u, phi)
}

/// Which arguments differ in a sampled Lipschitz pair.
#[derive(Debug, Clone, Copy)]
enum PairKind {
    Both,
    SameSecond,
    SameState,
}

/// Empirical Lipschitz constant: the largest
/// `|f(t,u,phi) - f(t,v,psi)| / (|u - v| + |phi - psi|)` over random pairs in
/// the ball of the given radius and random `t` in `[-50, 50]`.
///
/// Pairs alternate between moving both arguments, only the state, and only
/// the second argument, so each Lipschitz direction is probed.
pub fn estimate_lipschitz(f: &AaaForcing, dim: usize, radius: f64, samples: usize, seed: u64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    let ev = f.evaluator(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect();
        let n = norm2(&v);
        if n > radius {
            v.iter_mut().for_each(|x| *x *= radius / n);
        }
        v
    };
    let kinds = [PairKind::Both, PairKind::SameSecond, PairKind::SameState];
    let mut best = 0.0f64;
    let mut fa = vec![0.0; dim];
    let mut fb = vec![0.0; dim];
    for i in 0..samples {
        let t = rng.gen_range(-50.0..=50.0);
        let u = point(&mut rng);
        let phi = point(&mut rng);
        let (v, psi) = match kinds[i % 3] {
            PairKind::Both => (point(&mut rng), point(&mut rng)),
            PairKind::SameSecond => (point(&mut rng), phi.clone()),
            PairKind::SameState => (u.clone(), point(&mut rng)),
        };
        let du: f64 = norm2(&u.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>());
        let dphi: f64 = norm2(&phi.iter().zip(&psi).map(|(a, b)| a - b).collect::<Vec<_>>());
        let denom = du + dphi;
        if denom <= 1e-12 * radius {
            continue;
        }
        ev.eval_into(t, &u, &phi, &mut fa);
        ev.eval_into(t, &v, &psi, &mut fb);
        let num = norm2(&fa.iter().zip(&fb).map(|(a, b)| a - b).collect::<Vec<_>>());
        best = best.max(num / denom);
    }
    Ok(best)
}

/// `u(t - tau)` by linear interpolation along the path.
pub fn point_delay_eval(u: &Path, t: f64, tau: f64) -> Result<Vec<f64>> {
    if !(tau >= 0.0) {
        return Err(Error::domain(format!("delay must be nonnegative, got {tau}")));
    }
    u.sample(t - tau)
}
