//! Adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Used for the branch-cut representation of the Mittag-Leffler function,
//! partial integrals of the decay profile `1/(1 + |w| s^a)` and the
//! history integrals of the existence checker.

#![allow(clippy::excessive_precision)]

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Values that can be accumulated by the quadrature rule.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<V: QuadValue>(f: &impl Fn(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod = kronrod + pair * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + pair * WG[i / 2];
        }
    }
    let kronrod = kronrod * h;
    let gauss = gauss * h;
    (kronrod, (kronrod - gauss).magnitude())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<V> {
    pub value: V,
    pub error: f64,
    pub converged: bool,
}

/// Integrates `f` over `[a, b]` by global adaptive bisection until the
/// summed error estimate falls below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<V: QuadValue>(
    f: impl Fn(f64) -> V,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature<V> {
    integrate_with_breaks(f, &[a, b], abs_tol, rel_tol)
}

/// As [`integrate`], starting from the given (increasing) break points.
pub fn integrate_with_breaks<V: QuadValue>(
    f: impl Fn(f64) -> V,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature<V> {
    const MAX_INTERVALS: usize = 2000;
    let mut intervals: Vec<(f64, f64, V, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    if intervals.is_empty() {
        return Quadrature {
            value: V::zero(),
            error: 0.0,
            converged: true,
        };
    }
    loop {
        let total = intervals.iter().fold(V::zero(), |acc, iv| acc + iv.2);
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        let target = abs_tol.max(rel_tol * total.magnitude());
        if err <= target || intervals.len() >= MAX_INTERVALS {
            return Quadrature {
                value: total,
                error: err,
                converged: err <= target,
            };
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, iv)| if iv.3 > best.1 { (i, iv.3) } else { best });
        let (a, b, _, _) = intervals.swap_remove(idx);
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            // interval collapsed to machine resolution
            return Quadrature {
                value: total,
                error: err,
                converged: false,
            };
        }
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        intervals.push((a, m, v1, e1));
        intervals.push((m, b, v2, e2));
    }
}

/// Integral of `f` over `[a, inf)` through the map `s = a + x / (1 - x)`.
pub fn integrate_to_infinity(
    f: impl Fn(f64) -> f64,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature<f64> {
    let g = |x: f64| {
        if x >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - x;
        let s = a + x / one_minus;
        f(s) / (one_minus * one_minus)
    };
    integrate_with_breaks(g, &[0.0, 0.5, 0.9, 0.99, 0.999, 1.0], abs_tol, rel_tol)
}
