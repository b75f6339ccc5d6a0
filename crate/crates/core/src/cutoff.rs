//! Smoothed step, band cutoffs and the dyadic partition of unity.

use crate::error::{invalid, Result};

fn bump_tail(theta: f64) -> f64 {
    if theta <= 0.0 {
        0.0
    } else {
        (-1.0 / theta).exp()
    }
}

/// C^∞ nondecreasing step: `0` on `(-∞, 0]`, `1` on `[1, ∞)`, and
/// `μ(θ) + μ(1-θ) = 1` on `[0, 1]`.
///
/// Built as `h(θ) / (h(θ) + h(1-θ))` with `h(θ) = e^{-1/θ}`; the upper half
/// is evaluated as `1 - μ(1-θ)` so the reflection identity holds to the last
/// bit rather than to rounding of two separate quotients.
pub fn smooth_step(theta: f64) -> f64 {
    if theta <= 0.0 {
        0.0
    } else if theta >= 1.0 {
        1.0
    } else if theta > 0.5 {
        1.0 - smooth_step(1.0 - theta)
    } else {
        let a = bump_tail(theta);
        let b = bump_tail(1.0 - theta);
        a / (a + b)
    }
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_derivative(theta: f64) -> f64 {
    if theta <= 0.0 || theta >= 1.0 {
        return 0.0;
    }
    let a = bump_tail(theta);
    let b = bump_tail(1.0 - theta);
    let da = a / (theta * theta);
    let db = -b / ((1.0 - theta) * (1.0 - theta));
    (da * b - a * db) / ((a + b) * (a + b))
}

/// Smooth band limiter `χ_K(ξ) = μ(K - |ξ|)`: one for `|ξ| <= K-1`, zero
/// for `|ξ| >= K`.
pub fn band_cutoff(k: f64, xi: f64) -> f64 {
    smooth_step(k - xi.abs())
}

/// Dyadic partition element `ψ_k(ξ, η)`.
///
/// `ψ_0 = μ(2-|ξ|) μ(2-|η|)`; for `k >= 1`
/// `ψ_k = μ(2^{k+1}-|ξ|) μ(2^{k+1}-|η|) μ(|η|-2^k+1)
///      + μ(2^{k+1}-|ξ|) μ(|ξ|-2^k+1) μ(2^k-|η|)`.
pub fn dyadic_partition_value(k: i64, xi: f64, eta: f64) -> Result<f64> {
    if k < 0 {
        return invalid(format!("dyadic index must be nonnegative, got {k}"));
    }
    Ok(dyadic_unchecked(k as u32, xi, eta))
}

pub(crate) fn dyadic_unchecked(k: u32, xi: f64, eta: f64) -> f64 {
    let (a, b) = (xi.abs(), eta.abs());
    if k == 0 {
        return smooth_step(2.0 - a) * smooth_step(2.0 - b);
    }
    let hi = 2f64.powi(k as i32 + 1);
    let lo = 2f64.powi(k as i32);
    let outer = smooth_step(hi - a);
    outer * smooth_step(hi - b) * smooth_step(b - lo + 1.0)
        + outer * smooth_step(a - lo + 1.0) * smooth_step(lo - b)
}
