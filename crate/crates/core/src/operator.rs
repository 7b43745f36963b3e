//! Diagonal sectorial operators.
//!
//! The state space is a spectral truncation: a state is a vector of mode
//! coefficients and the generator acts as multiplication by its eigenvalues.
//! For the Dirichlet Laplacian on `(0, pi)` the modes are
//! `sqrt(2/pi) sin(k x)` and the eigenvalues `-k^2 - shift`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{logspace, norm2, FracOrder};
use crate::mlf::{certificate_stability, resolvent_symbol, CertificateStability, SectorType};

/// Default sector angle of the shipped operators.
pub const DEFAULT_THETA: f64 = PI / 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTag {
    #[serde(rename = "dirichlet_sine_on_0_pi")]
    DirichletSine,
    AbstractDiagonal,
}

/// Which constant is used as the sector vertex of a shifted Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaConvention {
    /// `omega = -1 - shift`, the top of the spectrum.
    #[default]
    SpectrumTop,
    /// `omega = -shift`, the vertex quoted for the shifted Laplacian.
    ShiftOnly,
}

/// Mode coefficients of a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub coeffs: Vec<f64>,
}

impl StateVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("state coefficients must be finite"));
        }
        Ok(StateVector { coeffs })
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut coeffs = vec![0.0; n];
        coeffs[k] = 1.0;
        StateVector { coeffs }
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.coeffs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralOperator {
    eigenvalues: Vec<f64>,
    #[serde(flatten)]
    sector: SectorType,
    basis_tag: BasisTag,
}

impl SpectralOperator {
    /// A diagonal operator with strictly decreasing eigenvalues, none above
    /// the sector vertex.
    pub fn diagonal(eigenvalues: Vec<f64>, sector: SectorType, basis_tag: BasisTag) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::domain("operator needs at least one mode"));
        }
        if eigenvalues.iter().any(|m| !m.is_finite()) {
            return Err(Error::domain("eigenvalues must be finite"));
        }
        if eigenvalues.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::domain("eigenvalues must be strictly decreasing"));
        }
        if eigenvalues[0] > sector.omega {
            return Err(Error::domain(format!(
                "largest eigenvalue {} exceeds the sector vertex {}",
                eigenvalues[0], sector.omega
            )));
        }
        Ok(SpectralOperator {
            eigenvalues,
            sector,
            basis_tag,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn sector(&self) -> &SectorType {
        &self.sector
    }

    pub fn omega(&self) -> f64 {
        self.sector.omega
    }

    pub fn basis_tag(&self) -> BasisTag {
        self.basis_tag
    }
}

/// `A w = w'' - shift w` with Dirichlet conditions on `(0, pi)`, truncated to
/// `n_modes` sine modes, vertex at the top of the spectrum.
pub fn make_dirichlet_laplacian(mu_shift: f64, n_modes: usize) -> Result<SpectralOperator> {
    dirichlet_laplacian_with(mu_shift, n_modes, OmegaConvention::SpectrumTop)
}

pub fn dirichlet_laplacian_with(
    mu_shift: f64,
    n_modes: usize,
    convention: OmegaConvention,
) -> Result<SpectralOperator> {
    if !(mu_shift > 0.0 && mu_shift.is_finite()) {
        return Err(Error::domain(format!("shift must be positive, got {mu_shift}")));
    }
    if n_modes == 0 {
        return Err(Error::domain("operator needs at least one mode"));
    }
    let eigenvalues: Vec<f64> = (1..=n_modes).map(|k| -((k * k) as f64) - mu_shift).collect();
    let omega = match convention {
        OmegaConvention::SpectrumTop => eigenvalues[0],
        OmegaConvention::ShiftOnly => -mu_shift,
    };
    // self-adjoint with spectrum left of omega: distance to the spectrum is
    // at least |l - omega| sin(theta) outside the sector
    let m = 1.0 / DEFAULT_THETA.sin();
    let sector = SectorType::negative_type(omega, DEFAULT_THETA, m)?;
    let op = SpectralOperator::diagonal(eigenvalues, sector, BasisTag::DirichletSine)?;
    let report = verify_sectorial(&op, omega, DEFAULT_THETA, m, 33)?;
    if !report.ok {
        return Err(Error::Certification(format!(
            "sector bound fails with ratio {:.6}",
            report.worst_ratio
        )));
    }
    Ok(op)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SectorialReport {
    pub ok: bool,
    pub worst_ratio: f64,
    pub witness: Complex64,
}

/// Samples `l = omega + r e^{i phi}` on `sample_count` rays with
/// `|phi| <= pi - theta` and log-spaced radii, and compares
/// `max_k 1/|l - mu_k|` against `M / |l - omega|`.
pub fn verify_sectorial(
    op: &SpectralOperator,
    omega: f64,
    theta: f64,
    m: f64,
    sample_count: usize,
) -> Result<SectorialReport> {
    if sample_count == 0 {
        return Err(Error::input("need at least one sample ray"));
    }
    if !(0.0..0.5 * PI).contains(&theta) {
        return Err(Error::domain(format!("sector angle must lie in [0, pi/2), got {theta}")));
    }
    let scale = op
        .eigenvalues
        .iter()
        .chain(std::iter::once(&omega))
        .fold(1.0f64, |a, b| a.max(b.abs()));
    let radii = logspace(1e-3 * scale, 1e3 * scale, 61);
    let phi_max = PI - theta;
    let phis: Vec<f64> = if sample_count == 1 {
        vec![0.0]
    } else {
        (0..sample_count)
            .map(|i| -phi_max + 2.0 * phi_max * i as f64 / (sample_count - 1) as f64)
            .collect()
    };

    let mut worst_ratio = 0.0;
    let mut witness = Complex64::new(omega, 0.0);
    for &phi in &phis {
        for &r0 in &radii {
            let mut r = r0;
            let mut attempt = 0;
            let (lambda, res_norm) = loop {
                let lambda = omega + Complex64::from_polar(r, phi);
                let closest = op
                    .eigenvalues
                    .iter()
                    .map(|mu| (lambda - mu).norm())
                    .fold(f64::INFINITY, f64::min);
                if closest > 1e-12 * scale {
                    break (lambda, 1.0 / closest);
                }
                attempt += 1;
                if attempt > 5 {
                    return Err(Error::Evaluation {
                        what: "resolvent sample".into(),
                        detail: format!("sample {lambda} keeps hitting the spectrum"),
                    });
                }
                r *= 1.0 + 1e-6 * attempt as f64;
            };
            let ratio = res_norm * (lambda - omega).norm() / m;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                witness = lambda;
            }
        }
    }
    Ok(SectorialReport {
        ok: worst_ratio <= 1.0 + 1e-12,
        worst_ratio,
        witness,
    })
}

/// `S_a(t) x`, computed mode by mode as `E_a(mu_k t^a) x_k`.
pub fn apply_family(op: &SpectralOperator, alpha: FracOrder, t: f64, x: &StateVector) -> Result<StateVector> {
    if x.coeffs.len() != op.n_modes() {
        return Err(Error::input(format!(
            "state has {} coefficients, operator has {} modes",
            x.coeffs.len(),
            op.n_modes()
        )));
    }
    if t == 0.0 {
        return Ok(x.clone());
    }
    let coeffs = op
        .eigenvalues
        .iter()
        .zip(&x.coeffs)
        .map(|(&mu, &c)| Ok(resolvent_symbol(alpha, mu, t)? * c))
        .collect::<Result<Vec<f64>>>()?;
    Ok(StateVector { coeffs })
}

/// Per-mode certificates behind [`operator_decay_constant`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorDecay {
    /// `max_k c_est,k`, the constant playing the role of `CM`.
    pub cm: f64,
    pub per_mode: Vec<CertificateStability>,
}

/// Samples per certificate used by [`operator_decay_constant`].
pub const CERTIFICATE_SAMPLES: usize = 2000;

/// `CM = max_k c_est,k`, which bounds `|E_a(mu_k t^a)|` by
/// `CM / (1 + |omega| t^a)` because `|mu_k| >= |omega|`.
pub fn operator_decay_constant(op: &SpectralOperator, alpha: FracOrder, t_max: f64) -> Result<f64> {
    operator_decay_certificates(op, alpha, t_max).map(|d| d.cm)
}

pub fn operator_decay_certificates(op: &SpectralOperator, alpha: FracOrder, t_max: f64) -> Result<OperatorDecay> {
    if op.eigenvalues.iter().any(|&mu| mu >= 0.0) {
        return Err(Error::domain("decay constant needs strictly negative eigenvalues"));
    }
    let per_mode = op
        .eigenvalues
        .par_iter()
        .map(|&mu| certificate_stability(alpha.value(), mu, t_max, CERTIFICATE_SAMPLES))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = per_mode.iter().find(|c| !c.stable) {
        return Err(Error::Certification(format!(
            "certificate for mu = {} changes by {:.3} under refinement",
            bad.base.mu, bad.relative_change
        )));
    }
    let cm = per_mode.iter().map(|c| c.base.c_est).fold(0.0, f64::max);
    Ok(OperatorDecay { cm, per_mode })
}

/// Horizon at which `|mu| t^a` reaches `x_target` for the slowest mode.
pub fn certificate_horizon(op: &SpectralOperator, alpha: FracOrder, x_target: f64) -> f64 {
    let mu = op.eigenvalues[0].abs();
    (x_target / mu).powf(1.0 / alpha.value()) * (1.0 + 1e-9)
}
