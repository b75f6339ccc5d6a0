//! Adaptive Gauss–Kronrod quadrature with oscillation-aware panelling.

use num_complex::Complex64;

use crate::error::{Result, ZkError};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
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

/// Value with an absolute error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

/// Scalar types the rules can integrate.
pub trait Integrand:
    Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// 15-point Kronrod rule with the embedded 7-point Gauss error estimate.
pub fn gk15<T: Integrand>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> Estimate<T> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod = kronrod + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    Estimate {
        value: kronrod * h,
        error: ((kronrod - gauss) * h).magnitude(),
    }
}

/// Globally adaptive bisection on `[a, b]` until the summed error estimate
/// is below `abs_tol`, or the panel budget runs out.
pub fn adaptive<T: Integrand>(
    f: &impl Fn(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate<T>> {
    adaptive_over(f, &[a, b], abs_tol, max_panels)
}

/// Adaptive integration starting from the given breakpoints.
pub fn adaptive_over<T: Integrand>(
    f: &impl Fn(f64) -> T,
    breaks: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate<T>> {
    struct Panel<T> {
        a: f64,
        b: f64,
        est: Estimate<T>,
    }
    let mut panels: Vec<Panel<T>> = breaks
        .windows(2)
        .map(|w| Panel {
            a: w[0],
            b: w[1],
            est: gk15(f, w[0], w[1]),
        })
        .collect();
    let mut total_err: f64 = panels.iter().map(|p| p.est.error).sum();
    let budget = max_panels.max(panels.len() + 1);
    while total_err > abs_tol && panels.len() < budget {
        // Split every panel whose error exceeds its share of the tolerance.
        let len = panels.len();
        let width: f64 = (breaks[breaks.len() - 1] - breaks[0]).abs();
        let mut next = Vec::with_capacity(2 * len);
        let mut refined = false;
        for p in panels.drain(..) {
            let share = abs_tol * ((p.b - p.a).abs() / width).max(1.0 / len as f64) * 0.5;
            if p.est.error > share && next.len() + 2 <= budget {
                let m = 0.5 * (p.a + p.b);
                if m <= p.a.min(p.b) || m >= p.a.max(p.b) {
                    next.push(p);
                    continue;
                }
                next.push(Panel {
                    a: p.a,
                    b: m,
                    est: gk15(f, p.a, m),
                });
                next.push(Panel {
                    a: m,
                    b: p.b,
                    est: gk15(f, m, p.b),
                });
                refined = true;
            } else {
                next.push(p);
            }
        }
        panels = next;
        total_err = panels.iter().map(|p| p.est.error).sum();
        if !refined {
            break;
        }
    }
    let value = panels.iter().fold(T::zero(), |s, p| s + p.est.value);
    if total_err > abs_tol {
        return Err(ZkError::QuadratureFailure {
            estimate: total_err,
            tolerance: abs_tol,
        });
    }
    Ok(Estimate {
        value,
        error: total_err,
    })
}

/// Breakpoints on `[a, b]` such that each panel is no wider than a quarter
/// of the local period `2π / |φ'(x)|` at its left end, nor than `max_width`.
pub fn oscillation_breaks(
    a: f64,
    b: f64,
    phase_derivative: impl Fn(f64) -> f64,
    max_width: f64,
) -> Vec<f64> {
    let mut out = vec![a];
    let mut x = a;
    let dir = (b - a).signum();
    while (b - x) * dir > 0.0 {
        let w0 = (0.5 * std::f64::consts::PI / phase_derivative(x).abs().max(1e-300)).min(max_width);
        // Shrink until the quarter-period rule also holds at the right end.
        let mut w = w0;
        for _ in 0..60 {
            let xr = x + dir * w;
            let wr = 0.5 * std::f64::consts::PI / phase_derivative(xr).abs().max(1e-300);
            if wr >= w {
                break;
            }
            w = wr;
        }
        x = if (b - (x + dir * w)) * dir <= 0.0 { b } else { x + dir * w };
        out.push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let e = gk15(&|x: f64| x.powi(6) - 3.0 * x, -1.0, 2.0);
        let exact = (2f64.powi(7) + 1.0) / 7.0 - 1.5 * (4.0 - 1.0);
        assert!((e.value - exact).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} = 2
        let e = adaptive(&|x: f64| if x > 0.0 { x.powf(-0.5) } else { 0.0 }, 0.0, 1.0, 1e-10, 4000).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9, "{}", e.value);
    }

    #[test]
    fn oscillatory_complex() {
        // ∫_0^10 e^{i 40 x} dx
        let w = 40.0;
        let f = |x: f64| Complex64::from_polar(1.0, w * x);
        let br = oscillation_breaks(0.0, 10.0, |_| w, 1.0);
        let e = adaptive_over(&f, &br, 1e-12, 100_000).unwrap();
        let exact = (Complex64::from_polar(1.0, w * 10.0) - 1.0) / Complex64::new(0.0, w);
        assert!((e.value - exact).norm() < 1e-12);
    }

    #[test]
    fn reports_failure() {
        let r = adaptive(&|x: f64| (1.0 / x).sin() / x, 1e-9, 1.0, 1e-14, 16);
        assert!(matches!(r, Err(ZkError::QuadratureFailure { .. })));
    }
}
