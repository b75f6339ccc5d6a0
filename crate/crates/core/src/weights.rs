//! Weights, weighted L² norms and Sobolev norms.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::cutoff::{smooth_step, smooth_step_derivative};
use crate::error::{invalid, Result, ZkError};
use crate::fft::transform;
use crate::grid::{Field2D, Grid2D};
use crate::quadrature::gk15;

/// Weight multiplying `|u|²` inside an L² integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSpec {
    /// `(1+x²+y²)^r`
    Polynomial(f64),
    /// `(|x|+|y|)^{2b}`
    AbsoluteSum(f64),
    /// `w_N(√(x²+y²))^{2s}`
    Truncated { n: u32, s: f64 },
}

impl WeightSpec {
    fn grows(&self) -> bool {
        match *self {
            WeightSpec::Polynomial(r) => r > 0.0,
            WeightSpec::AbsoluteSum(b) => b > 0.0,
            WeightSpec::Truncated { s, .. } => s > 0.0,
        }
    }

    /// Column label used in traces.
    pub fn label(&self) -> String {
        match *self {
            WeightSpec::Polynomial(r) => format!("poly({r})"),
            WeightSpec::AbsoluteSum(b) => format!("abs_sum({b})"),
            WeightSpec::Truncated { n, s } => format!("trunc({n};{s})"),
        }
    }

    /// Weight sampled on the grid.
    pub fn sample(&self, grid: Grid2D) -> Result<Field2D> {
        Ok(match *self {
            WeightSpec::Polynomial(r) => Field2D::from_fn(grid, |x, y| (1.0 + x * x + y * y).powf(r)),
            WeightSpec::AbsoluteSum(b) => Field2D::from_fn(grid, |x, y| (x.abs() + y.abs()).powf(2.0 * b)),
            WeightSpec::Truncated { n, s } => {
                let w = TruncatedWeight::shared(n)?;
                Field2D::from_fn(grid, |x, y| w.value((x * x + y * y).sqrt()).powf(2.0 * s))
            }
        })
    }
}

impl std::str::FromStr for WeightSpec {
    type Err = ZkError;
    /// `poly:<r>`, `abs:<b>` or `trunc:<N>:<s>`.
    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ZkError::InvalidInput(format!("bad number `{s}` in weight `{text}`")))
        };
        match parts.as_slice() {
            ["poly", r] => Ok(WeightSpec::Polynomial(num(r)?)),
            ["abs", b] => Ok(WeightSpec::AbsoluteSum(num(b)?)),
            ["trunc", n, s] => Ok(WeightSpec::Truncated {
                n: n.trim()
                    .parse()
                    .map_err(|_| ZkError::InvalidInput(format!("bad N in weight `{text}`")))?,
                s: num(s)?,
            }),
            _ => invalid(format!("unknown weight `{text}` (expected poly:r, abs:b or trunc:N:s)")),
        }
    }
}

const TRANSITION_PANELS: usize = 128;

/// Smooth bounded surrogate for `⟨r⟩ = (1+r²)^{1/2}`.
///
/// `w_N(r) = ⟨r⟩` for `|r| ≤ N`. Beyond `N` the slope is `⟨r⟩'` damped by
/// `1 - μ((|r|-N)/β)`, with `β` chosen so the weight lands exactly on `2N`
/// at `|r| = N+β ≤ 3N` and stays there. Value and first derivative match at
/// `N`, and the profile is nondecreasing in `|r|`.
#[derive(Clone, Debug)]
pub struct TruncatedWeight {
    n: f64,
    beta: f64,
    /// Cumulative integral of the damped slope at the panel ends.
    cumulative: Vec<f64>,
}

fn bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

fn bracket_d1(r: f64) -> f64 {
    r / bracket(r)
}

impl TruncatedWeight {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return invalid("truncated weight needs N >= 1");
        }
        let nf = n as f64;
        let target = 2.0 * nf - bracket(nf);
        let rise = |beta: f64| Self::build(nf, beta).cumulative[TRANSITION_PANELS];
        let (mut lo, mut hi) = (0.0, 4.0 * nf);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rise(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * nf {
                break;
            }
        }
        let w = Self::build(nf, 0.5 * (lo + hi));
        if w.n + w.beta > 3.0 * nf {
            return invalid(format!("transition for N = {n} overshoots 3N"));
        }
        Ok(w)
    }

    /// Cached instance per `N`.
    pub fn shared(n: u32) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<TruncatedWeight>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(w) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&n) {
            return Ok(w.clone());
        }
        let w = Arc::new(Self::new(n)?);
        cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(n, w.clone());
        Ok(w)
    }

    fn build(n: f64, beta: f64) -> Self {
        let mut w = Self {
            n,
            beta,
            cumulative: vec![0.0; TRANSITION_PANELS + 1],
        };
        let h = beta / TRANSITION_PANELS as f64;
        for k in 0..TRANSITION_PANELS {
            let a = n + k as f64 * h;
            w.cumulative[k + 1] = w.cumulative[k] + gk15(&|r| w.slope(r), a, a + h).value;
        }
        w
    }

    fn slope(&self, r: f64) -> f64 {
        bracket_d1(r) * (1.0 - smooth_step((r - self.n) / self.beta))
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// Radius where the weight reaches `2N`.
    pub fn plateau_start(&self) -> f64 {
        self.n + self.beta
    }

    pub fn value(&self, r: f64) -> f64 {
        let a = r.abs();
        if a <= self.n {
            return bracket(a);
        }
        if a >= self.n + self.beta {
            return 2.0 * self.n;
        }
        let h = self.beta / TRANSITION_PANELS as f64;
        let k = (((a - self.n) / h) as usize).min(TRANSITION_PANELS - 1);
        let left = self.n + k as f64 * h;
        let partial = if a > left { gk15(&|r| self.slope(r), left, a).value } else { 0.0 };
        (bracket(self.n) + self.cumulative[k] + partial).min(2.0 * self.n)
    }

    /// `w_N'(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        let a = r.abs();
        let d = if a <= self.n {
            bracket_d1(a)
        } else if a >= self.n + self.beta {
            0.0
        } else {
            self.slope(a)
        };
        d * r.signum()
    }

    /// `w_N''(r)` (even in `r`).
    pub fn second_derivative(&self, r: f64) -> f64 {
        let a = r.abs();
        let b3 = bracket(a).powi(3);
        if a <= self.n {
            1.0 / b3
        } else if a >= self.n + self.beta {
            0.0
        } else {
            let th = (a - self.n) / self.beta;
            (1.0 / b3) * (1.0 - smooth_step(th)) - bracket_d1(a) * smooth_step_derivative(th) / self.beta
        }
    }
}

/// `w_N(r)`.
pub fn truncated_weight_value(n: u32, r: f64) -> Result<f64> {
    Ok(TruncatedWeight::shared(n)?.value(r))
}

/// `(Σ w |u|² dx dy)^{1/2}` on the grid.
pub fn weighted_l2_norm(field: &Field2D, w: &WeightSpec) -> Result<f64> {
    if w.grows() {
        field.check_decay()?;
    }
    let ws = w.sample(*field.grid())?;
    Ok(weighted_l2_with(field, &ws))
}

/// Same quadrature with a presampled weight (no precondition check).
pub fn weighted_l2_with(field: &Field2D, weight: &Field2D) -> f64 {
    let sum: f64 = field
        .samples()
        .iter()
        .zip(weight.samples())
        .map(|(u, w)| w * u * u)
        .sum();
    (sum * field.grid().cell_area()).sqrt()
}

/// `‖(1+ξ²+η²)^{s/2} f̂‖₂`.
pub fn sobolev_norm(field: &Field2D, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(ZkError::UnsupportedOrder {
            order: s,
            reason: "Sobolev norms need s >= 0",
        });
    }
    if s == 0.0 {
        return Ok(field.l2_norm());
    }
    let g = *field.grid();
    let spec = transform(field);
    let (dk, dl) = g.dk();
    let mut sum = 0.0;
    for j in 0..g.ny {
        let eta = g.wavenumber_y(j);
        for i in 0..g.nx {
            let xi = g.wavenumber_x(i);
            sum += (1.0 + xi * xi + eta * eta).powf(s) * spec.at(i, j).norm_sqr();
        }
    }
    Ok((sum * dk * dl).sqrt())
}
