//! The free linear group and the band-limited oscillatory integrals whose
//! decay controls it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutoff::band_cutoff;
use crate::error::{invalid, Result};
use crate::fft::{inverse_transform, transform};
use crate::fit::linear_fit;
use crate::grid::{Field2D, Spectrum2D};
use crate::multiplier::{apply_symbol, SymbolKind};
use crate::quadrature::{adaptive_over, oscillation_breaks};

/// `V(t) f` for the chosen linear operator. Requires decayed data.
pub fn free_evolve(field: &Field2D, t: f64, kind: SymbolKind) -> Result<Field2D> {
    field.check_decay()?;
    Ok(free_evolve_unchecked(field, t, kind))
}

/// [`free_evolve`] without the decay precondition, for intermediate states.
pub fn free_evolve_unchecked(field: &Field2D, t: f64, kind: SymbolKind) -> Field2D {
    if t == 0.0 {
        return field.clone();
    }
    inverse_transform(&evolve_spectrum(&transform(field), t, kind))
}

/// Multiplies coefficients by `e^{itω(ξ,η)}`.
pub fn evolve_spectrum(spectrum: &Spectrum2D, t: f64, kind: SymbolKind) -> Spectrum2D {
    apply_symbol(spectrum, |xi, eta| {
        Complex64::from_polar(1.0, t * kind.dispersion(xi, eta))
    })
}

/// Which variable carries the `|·|^ε` factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegralKind {
    /// `|ξ|^ε`
    I,
    /// `|η|^ε`
    J,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryIntegralSpec {
    pub kind: IntegralKind,
    pub epsilon: f64,
    pub cutoff_radius: f64,
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl OscillatoryIntegralSpec {
    /// `I_t(0, 0)` with the default band `K = 8`.
    pub fn at_origin(epsilon: f64, t: f64) -> Self {
        Self {
            kind: IntegralKind::I,
            epsilon,
            cutoff_radius: 8.0,
            x: 0.0,
            y: 0.0,
            t,
        }
    }
}

pub const OSCILLATORY_TOLERANCE: f64 = 1e-9;

/// `∫∫ |ξ|^ε e^{i[t(ξ³+η³) + xξ + yη]} χ_K(ξ) χ_K(η) dξ dη` (or with `|η|^ε`).
///
/// The integrand factorizes, so this is the product of two 1D integrals, each
/// computed adaptively on panels no wider than a quarter of the local period.
pub fn oscillatory_integral(spec: &OscillatoryIntegralSpec) -> Result<Complex64> {
    let s = *spec;
    if !(s.t > 0.0) {
        return invalid(format!("oscillatory integral needs t > 0, got {}", s.t));
    }
    if !(0.0..=0.5).contains(&s.epsilon) {
        return invalid(format!("epsilon must lie in [0, 1/2], got {}", s.epsilon));
    }
    if !(s.cutoff_radius > 1.0) {
        return invalid("cutoff radius must exceed 1");
    }
    let (ex, ey) = match s.kind {
        IntegralKind::I => (s.epsilon, 0.0),
        IntegralKind::J => (0.0, s.epsilon),
    };
    let a = cubic_phase_integral(s.t, s.x, ex, s.cutoff_radius)?;
    let b = cubic_phase_integral(s.t, s.y, ey, s.cutoff_radius)?;
    Ok(a * b)
}

/// `∫ |ξ|^ε e^{i(tξ³ + xξ)} χ_K(ξ) dξ`.
pub fn cubic_phase_integral(t: f64, x: f64, epsilon: f64, k: f64) -> Result<Complex64> {
    let f = |xi: f64| {
        let w = if epsilon == 0.0 { 1.0 } else { xi.abs().powf(epsilon) };
        Complex64::from_polar(w * band_cutoff(k, xi), t * xi * xi * xi + x * xi)
    };
    let dphase = |xi: f64| 3.0 * t * xi * xi + x;
    let mut breaks = oscillation_breaks(-k, -(k - 1.0), dphase, 0.25);
    breaks.pop();
    breaks.extend(oscillation_breaks(-(k - 1.0), 0.0, dphase, 0.25));
    breaks.pop();
    breaks.extend(oscillation_breaks(0.0, k - 1.0, dphase, 0.25));
    breaks.pop();
    breaks.extend(oscillation_breaks(k - 1.0, k, dphase, 0.25));
    let budget = 4 * breaks.len() + 10_000;
    Ok(adaptive_over(&f, &breaks, OSCILLATORY_TOLERANCE, budget)?.value)
}

/// Least-squares slope of `log m` against `log t`, with `r²`.
pub fn decay_exponent_fit(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 4 {
        return invalid(format!("decay fit needs at least 4 samples, got {}", samples.len()));
    }
    if samples.iter().any(|&(t, m)| !(t > 0.0) || !(m > 0.0)) {
        return invalid("decay fit needs positive times and magnitudes");
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok((fit.slope, fit.r_squared))
}
