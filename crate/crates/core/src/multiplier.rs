//! Fourier multipliers: fractional derivatives, Bessel potentials, the free
//! group symbols and the dyadic pieces.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutoff::dyadic_unchecked;
use crate::error::{Result, ZkError};
use crate::fft::{inverse_transform, transform};
use crate::grid::{Field2D, Spectrum2D};

/// Which linear ZK operator the group symbol belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    /// `e^{it(ξ³+η³)}`, linear part `∂x³ + ∂y³`.
    Symmetrized,
    /// `e^{it(ξ³+ξη²)}`, linear part `∂x³ + ∂x∂y²`.
    Original,
}

impl SymbolKind {
    /// Dispersion relation `ω` with `V(t)` acting as `e^{itω}`.
    #[inline]
    pub fn dispersion(self, xi: f64, eta: f64) -> f64 {
        match self {
            SymbolKind::Symmetrized => xi * xi * xi + eta * eta * eta,
            SymbolKind::Original => xi * xi * xi + xi * eta * eta,
        }
    }
}

impl std::str::FromStr for SymbolKind {
    type Err = ZkError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetrized" => Ok(Self::Symmetrized),
            "original" => Ok(Self::Original),
            _ => Err(ZkError::InvalidInput(format!("unknown form `{s}`"))),
        }
    }
}

impl std::fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Symmetrized => "symmetrized",
            Self::Original => "original",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierSpec {
    /// `|ξ|^s`
    FractionalX(f64),
    /// `|η|^s`
    FractionalY(f64),
    /// `(ξ²+η²)^{s/2}`
    Isotropic(f64),
    /// `(1+ξ²+η²)^{s/2}`
    Bessel(f64),
    Propagator { t: f64, kind: SymbolKind },
    Dyadic(u32),
}

/// `|k|^s` with the convention that a zero frequency maps to 0 for `s != 0`
/// (annihilated for `s > 0`, regularized for `s < 0`) and to 1 for `s = 0`.
#[inline]
fn power_abs(k: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if k == 0.0 {
        0.0
    } else {
        k.abs().powf(s)
    }
}

impl MultiplierSpec {
    pub fn symbol(&self, xi: f64, eta: f64) -> Complex64 {
        match *self {
            MultiplierSpec::FractionalX(s) => power_abs(xi, s).into(),
            MultiplierSpec::FractionalY(s) => power_abs(eta, s).into(),
            MultiplierSpec::Isotropic(s) => power_abs((xi * xi + eta * eta).sqrt(), s).into(),
            MultiplierSpec::Bessel(s) => (1.0 + xi * xi + eta * eta).powf(0.5 * s).into(),
            MultiplierSpec::Propagator { t, kind } => {
                Complex64::from_polar(1.0, t * kind.dispersion(xi, eta))
            }
            MultiplierSpec::Dyadic(k) => dyadic_unchecked(k, xi, eta).into(),
        }
    }

    /// Real and even in `(ξ, η)`: output of a real field stays real.
    pub fn is_real_even(&self) -> bool {
        !matches!(self, MultiplierSpec::Propagator { .. })
    }
}

/// Pointwise product of the coefficients with `symbol(ξ, η)`.
pub fn apply_symbol(spectrum: &Spectrum2D, symbol: impl Fn(f64, f64) -> Complex64) -> Spectrum2D {
    let g = *spectrum.grid();
    let kx = g.wavenumbers_x();
    let ky = g.wavenumbers_y();
    let mut out = spectrum.clone();
    let c = out.coefficients_mut();
    for (j, &eta) in ky.iter().enumerate() {
        for (i, &xi) in kx.iter().enumerate() {
            c[j * g.nx + i] *= symbol(xi, eta);
        }
    }
    out
}

pub fn apply_multiplier(spectrum: &Spectrum2D, m: &MultiplierSpec) -> Spectrum2D {
    apply_symbol(spectrum, |xi, eta| m.symbol(xi, eta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeKind {
    X,
    Y,
    Isotropic,
    Bessel,
}

impl DerivativeKind {
    pub fn spec(self, order: f64) -> MultiplierSpec {
        match self {
            DerivativeKind::X => MultiplierSpec::FractionalX(order),
            DerivativeKind::Y => MultiplierSpec::FractionalY(order),
            DerivativeKind::Isotropic => MultiplierSpec::Isotropic(order),
            DerivativeKind::Bessel => MultiplierSpec::Bessel(order),
        }
    }
}

/// `D^s` along an axis, isotropically, or `J^s`, as a multiplier round trip.
///
/// Negative orders down to `-1` are accepted for the axis-wise kinds only.
pub fn fractional_derivative(field: &Field2D, kind: DerivativeKind, order: f64) -> Result<Field2D> {
    if !order.is_finite() || order < -1.0 {
        return Err(ZkError::UnsupportedOrder {
            order,
            reason: "orders below -1 are not supported",
        });
    }
    if order < 0.0 && matches!(kind, DerivativeKind::Isotropic) {
        return Err(ZkError::UnsupportedOrder {
            order,
            reason: "negative orders only for the axis-wise kinds",
        });
    }
    Ok(inverse_transform(&apply_multiplier(&transform(field), &kind.spec(order))))
}

/// Spectral `∂x` and `∂y` (Nyquist modes dropped to keep the result real).
pub fn partial(field: &Field2D, axis: usize) -> Field2D {
    let g = *field.grid();
    let (nqx, nqy) = (g.nyquist_x(), g.nyquist_y());
    let s = apply_symbol(&transform(field), |xi, eta| {
        if xi.abs() >= nqx - 1e-12 || eta.abs() >= nqy - 1e-12 {
            return Complex64::new(0.0, 0.0);
        }
        let k = if axis == 0 { xi } else { eta };
        Complex64::new(0.0, k)
    });
    inverse_transform(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::inverse_transform_complex;
    use crate::fields::gaussian;
    use crate::grid::Grid2D;
    use std::f64::consts::PI;

    #[test]
    fn isotropic_two_scales_unit_diagonal_mode() {
        // Lx = π so that ξ = j.
        let g = Grid2D::square(16, PI).unwrap();
        let f = Field2D::from_fn(g, |x, y| (x + y).cos());
        let s = transform(&f);
        let out = apply_multiplier(&s, &MultiplierSpec::Isotropic(2.0));
        for (a, b) in s.coefficients().iter().zip(out.coefficients()) {
            assert!((b - a * 2.0).norm() < 1e-13);
        }
    }

    #[test]
    fn dx_of_sine_is_sine() {
        let g = Grid2D::square(16, PI).unwrap();
        let f = Field2D::from_fn(g, |x, _| x.sin());
        let d = fractional_derivative(&f, DerivativeKind::X, 1.0).unwrap();
        assert!((&d - &f).sup_norm() < 1e-13);
    }

    #[test]
    fn constant_annihilated_and_bessel_zero_is_identity() {
        let g = Grid2D::square(16, 4.0).unwrap();
        let one = Field2D::from_fn(g, |_, _| 1.0);
        let d = fractional_derivative(&one, DerivativeKind::Isotropic, 0.7).unwrap();
        assert!(d.sup_norm() < 1e-14);
        let f = gaussian(g, 1.0, 1.0, (0.3, 0.0));
        let j0 = fractional_derivative(&f, DerivativeKind::Bessel, 0.0).unwrap();
        assert!((&j0 - &f).sup_norm() < 1e-14);
    }

    #[test]
    fn order_validation() {
        let g = Grid2D::square(16, 4.0).unwrap();
        let f = gaussian(g, 1.0, 1.0, (0.0, 0.0));
        assert!(matches!(
            fractional_derivative(&f, DerivativeKind::X, -1.5),
            Err(ZkError::UnsupportedOrder { .. })
        ));
        assert!(fractional_derivative(&f, DerivativeKind::Isotropic, -0.5).is_err());
        assert!(fractional_derivative(&f, DerivativeKind::Y, -0.25).is_ok());
    }

    #[test]
    fn real_even_multipliers_keep_output_real() {
        let g = Grid2D::square(32, 8.0).unwrap();
        let f = Field2D::from_fn(g, |x, y| (-(x * x + 2.0 * y * y) / 3.0).exp() * (x - 0.2 * y).sin());
        let s = transform(&f);
        for m in [
            MultiplierSpec::FractionalX(0.3),
            MultiplierSpec::FractionalY(-0.25),
            MultiplierSpec::Isotropic(1.7),
            MultiplierSpec::Bessel(0.9),
            MultiplierSpec::Dyadic(1),
        ] {
            let out = inverse_transform_complex(&apply_multiplier(&s, &m));
            let im = out.iter().fold(0.0f64, |a, c| a.max(c.im.abs()));
            assert!(im < 1e-12 * f.l2_norm(), "{m:?}: {im}");
        }
    }

    #[test]
    fn partial_derivative_of_gaussian() {
        let g = Grid2D::square(64, 10.0).unwrap();
        let f = gaussian(g, 1.0, 1.0, (0.0, 0.0));
        let fx = partial(&f, 0);
        let exact = Field2D::from_fn(g, |x, y| -x * (-(x * x + y * y) / 2.0).exp());
        assert!((&fx - &exact).sup_norm() < 1e-12);
    }
}
