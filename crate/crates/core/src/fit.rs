//! Regressions used to fit unknown constants and exponents.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `1` for data with no spread in `y`.
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return invalid("linear fit needs two or more paired samples");
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return invalid("linear fit needs distinct abscissae");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Constant in `lhs ≤ C·rhs` fitted over a sample set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantFit {
    /// Smallest `C` for which every sample satisfies the bound.
    pub envelope: f64,
    /// `exp(mean log(lhs/rhs))`: the log-space least-squares constant.
    pub least_squares: f64,
    /// Largest `|log(ratio) - log(least_squares)|`.
    pub max_log_residual: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
}

/// Fits `lhs ≤ C·rhs`. Pairs with both sides zero are skipped; `rhs = 0` with
/// `lhs > 0` is an error since no constant bounds it.
pub fn fit_constant(lhs: &[f64], rhs: &[f64]) -> Result<ConstantFit> {
    if lhs.len() != rhs.len() {
        return invalid("constant fit needs paired samples");
    }
    let mut ratios = Vec::with_capacity(lhs.len());
    for (&l, &r) in lhs.iter().zip(rhs) {
        if !(l >= 0.0 && r >= 0.0) || !l.is_finite() || !r.is_finite() {
            return invalid(format!("constant fit needs finite nonnegative values, got {l} / {r}"));
        }
        if r == 0.0 {
            if l == 0.0 {
                continue;
            }
            return invalid(format!("right side vanishes where left side is {l}"));
        }
        ratios.push(l / r);
    }
    if ratios.is_empty() {
        return invalid("constant fit has no informative samples");
    }
    let max_ratio = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min_ratio = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let positive: Vec<f64> = ratios.iter().filter(|&&q| q > 0.0).map(|q| q.ln()).collect();
    let (least_squares, max_log_residual) = if positive.is_empty() {
        (0.0, 0.0)
    } else {
        let m = positive.iter().sum::<f64>() / positive.len() as f64;
        let res = positive.iter().fold(0.0f64, |a, &q| a.max((q - m).abs()));
        (m.exp(), res)
    };
    Ok(ConstantFit {
        envelope: max_ratio,
        least_squares,
        max_log_residual,
        min_ratio,
        max_ratio,
        samples: ratios.len(),
    })
}

/// Number of samples with `lhs > c·rhs + tol`.
pub fn violations(lhs: &[f64], rhs: &[f64], c: f64, tol: f64) -> usize {
    lhs.iter().zip(rhs).filter(|(&l, &r)| l > c * r + tol).count()
}

/// `max/min - 1` of a positive series.
pub fn relative_spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::MIN, f64::max);
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    if lo <= 0.0 {
        return f64::INFINITY;
    }
    hi / lo - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_fit_envelope_dominates() {
        let lhs = [1.0, 2.0, 2.5, 0.0];
        let rhs = [1.0, 1.0, 2.0, 0.0];
        let c = fit_constant(&lhs, &rhs).unwrap();
        assert_eq!(c.envelope, 2.0);
        assert_eq!(c.samples, 3);
        assert_eq!(violations(&lhs, &rhs, c.envelope, 0.0), 0);
        assert!(c.least_squares < c.envelope && c.least_squares > c.min_ratio);
        assert!(fit_constant(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn spread() {
        assert!((relative_spread(&[1.0, 1.2, 1.1]) - 0.2).abs() < 1e-15);
    }
}
