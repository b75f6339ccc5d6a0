//! Evaluators for the interpolation inequality and the fractional Leibniz
//! rule. Both return the two sides separately; constants are fitted by the
//! caller over a suite.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, ZkError};
use crate::fft::{apply_symbol_1d, Grid1D};
use crate::grid::{Field2D, DECAY_TOLERANCE};
use crate::multiplier::{fractional_derivative, DerivativeKind};
use crate::weights::{weighted_l2_norm, weighted_l2_with, WeightSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationWeight {
    /// `⟨|x|⟩ = (1+|x|²)^{1/2}`
    Bracket,
    /// `w_N(|x|)`
    Truncated(u32),
}

impl InterpolationWeight {
    /// Spec for `‖ω^p f‖₂`.
    fn power(self, p: f64) -> WeightSpec {
        match self {
            InterpolationWeight::Bracket => WeightSpec::Polynomial(p),
            InterpolationWeight::Truncated(n) => WeightSpec::Truncated { n, s: p },
        }
    }
}

/// `(‖ω^{θb} J^{(1-θ)a} f‖₂, ‖ω^b f‖₂^θ ‖J^a f‖₂^{1-θ})`.
pub fn interpolation_check(
    field: &Field2D,
    a: f64,
    b: f64,
    theta: f64,
    weight: InterpolationWeight,
) -> Result<(f64, f64)> {
    if !(theta > 0.0 && theta < 1.0) {
        return invalid(format!("theta must lie in (0, 1), got {theta}"));
    }
    if !(a > 0.0 && b > 0.0) {
        return invalid("interpolation exponents a, b must be positive");
    }
    field.check_decay()?;
    let smoothed = fractional_derivative(field, DerivativeKind::Bessel, (1.0 - theta) * a)?;
    // J^{(1-θ)a} f has exponential rather than Gaussian tails, so the
    // precondition is enforced on `f` only.
    let ws = weight.power(theta * b).sample(*smoothed.grid())?;
    let lhs = weighted_l2_with(&smoothed, &ws);
    let wb = weighted_l2_norm(field, &weight.power(b))?;
    let ja = fractional_derivative(field, DerivativeKind::Bessel, a)?.l2_norm();
    Ok((lhs, wb.powf(theta) * ja.powf(1.0 - theta)))
}

/// `(‖D^α(fg) - f D^α g - g D^α f‖₂, ‖g‖_∞ ‖D^α f‖₂)` on a 1D periodic grid.
///
/// The decay precondition applies to `f`; `g` may be any bounded sample
/// vector (constants are exact on the periodic grid).
pub fn leibniz_defect(grid: &Grid1D, f: &[f64], g: &[f64], alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if f.len() != grid.n || g.len() != grid.n {
        return invalid("samples must match the 1D grid");
    }
    if f.iter().chain(g).any(|v| !v.is_finite()) {
        return invalid("non-finite samples");
    }
    check_decay_1d(grid, f)?;
    let d = |v: &[f64]| {
        apply_symbol_1d(grid, v, |k| if k == 0.0 { 0.0 } else { k.abs().powf(alpha) })
    };
    let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    let (dfg, df, dg) = (d(&fg), d(f), d(g));
    let dx = grid.dx();
    let defect: f64 = (0..grid.n)
        .map(|i| (dfg[i] - f[i] * dg[i] - g[i] * df[i]).powi(2))
        .sum::<f64>()
        * dx;
    let df_norm = (df.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
    let g_inf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((defect.sqrt(), g_inf * df_norm))
}

fn check_decay_1d(grid: &Grid1D, f: &[f64]) -> Result<()> {
    let peak = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(());
    }
    let r = 0.5 * grid.half_length;
    let tail = (0..grid.n)
        .filter(|&i| grid.x(i).abs() >= r)
        .fold(0.0f64, |m, i| m.max(f[i].abs()))
        / peak;
    if tail > DECAY_TOLERANCE {
        return Err(ZkError::DecayPrecondition { value: tail, radius: r });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::gaussian;
    use crate::grid::Grid2D;

    #[test]
    fn interpolation_limits_and_homogeneity() {
        let g = Grid2D::square(64, 16.0).unwrap();
        let f = gaussian(g, 1.0, 1.0, (0.5, 0.0));
        let (l, r) = interpolation_check(&f, 2.0, 1.0, 1.0 - 1e-9, InterpolationWeight::Bracket).unwrap();
        let wb = weighted_l2_norm(&f, &WeightSpec::Polynomial(1.0)).unwrap();
        assert!((l / wb - 1.0).abs() < 1e-6 && (r / wb - 1.0).abs() < 1e-6);
        let (l1, r1) = interpolation_check(&f, 2.0, 1.0, 0.5, InterpolationWeight::Truncated(4)).unwrap();
        let (l2, r2) = interpolation_check(&f.scale(2.0), 2.0, 1.0, 0.5, InterpolationWeight::Truncated(4)).unwrap();
        assert!((l2 / l1 - 2.0).abs() < 1e-12 && (r2 / r1 - 2.0).abs() < 1e-12);
        assert!(l1 <= 2.0 * r1);
        assert!(interpolation_check(&f, 2.0, 1.0, 1.0, InterpolationWeight::Bracket).is_err());
    }

    #[test]
    fn leibniz_trivial_cases() {
        let grid = Grid1D::new(256, 20.0).unwrap();
        let xs: Vec<f64> = (0..grid.n).map(|i| grid.x(i)).collect();
        let f: Vec<f64> = xs.iter().map(|x| (-x * x / 2.0).exp()).collect();
        let one = vec![1.0; grid.n];
        let (d, b) = leibniz_defect(&grid, &f, &one, 0.5).unwrap();
        assert!(d < 1e-12 * b, "{d}");
        let zero = vec![0.0; grid.n];
        assert_eq!(leibniz_defect(&grid, &zero, &f, 0.5).unwrap().0, 0.0);
        assert!(leibniz_defect(&grid, &f, &f, 1.0).is_err());
        let g: Vec<f64> = xs.iter().map(|x| (-(x - 3.0) * (x - 3.0) / 2.0).exp()).collect();
        let (d, b) = leibniz_defect(&grid, &f, &g, 0.5).unwrap();
        assert!(d > 0.0 && d < 10.0 * b);
    }
}
