//! The Stein derivative `𝒟^b f(x) = (∫ |f(x)-f(y)|² |x-y|^{-2-2b} dy)^{1/2}`
//! on grids, its value on the cubic phase `e^{itx₁³}`, and the bounds it
//! enters.
//!
//! Grid evaluation splits the kernel with `φ(r) = (1 - e^{-(r/a)²})^m`:
//!
//! * near part `(1-φ) K`: expanding `|f(x)-f(x+h)|² = [f²(x+h) - f²(x)]
//!   - 2 f(x) [f(x+h) - f(x)]` turns it into `N(f²) - 2 f N(f)`, where `N` is
//!   the Fourier multiplier `∫ (1-φ)K (e^{ik·h} - 1) dh`. Since `1-φ` is a
//!   finite sum of Gaussians the symbol has a closed form through `₁F₁`;
//!   `f²` is formed on a 2x refined grid so it is not aliased.
//! * far part `φ K`: a smooth kernel, summed on the lattice as a linear
//!   (zero-padded) convolution, plus `f(x)² ∫ φ K` in closed form. Outside
//!   the box the field is taken as zero, which is the ℝ² surrogate the
//!   decay rule licenses.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{invalid, Result, ZkError};
use crate::fft::{refine, transform, Plan2};
use crate::grid::{Field2D, Grid2D, Spectrum2D};
use crate::multiplier::{fractional_derivative, DerivativeKind};
use crate::par;
use crate::quadrature::{adaptive, adaptive_over, gk15, oscillation_breaks};

/// Exponent `m` of the kernel split.
pub const SPLIT_ORDER: i32 = 6;

/// Largest energy fraction allowed in the outer quarter of the spectrum.
pub const RESOLUTION_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinQuadratureConfig {
    pub b: f64,
    /// Split scale `a`: the near kernel decays like `e^{-(r/a)²}`.
    pub near_radius: f64,
    /// Cross terms with `|x-y| > R` are dropped and bounded.
    pub far_radius: f64,
    /// Panels for the radial and oscillatory quadratures.
    pub radial_panels: usize,
    /// Angular trapezoid nodes of the pointwise polar rule.
    pub angular_panels: usize,
    /// Bound on dropped contributions, relative to `‖f‖_∞²`.
    pub tolerance: f64,
}

impl SteinQuadratureConfig {
    /// Defaults for a grid: split scale of at least ten cells, `R` covering
    /// every pair of points in the box (no truncation).
    pub fn for_grid(grid: &Grid2D, b: f64) -> Self {
        let h = grid.dx().max(grid.dy());
        Self {
            b,
            near_radius: (10.0 * h).max(1.5),
            far_radius: 2.0 * grid.half_length_x.hypot(grid.half_length_y),
            radial_panels: 64,
            angular_panels: 64,
            tolerance: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b < 1.0) {
            return invalid(format!("Stein order b must lie in (0, 1), got {}", self.b));
        }
        if !(self.near_radius > 0.0 && self.near_radius < self.far_radius) {
            return invalid("need 0 < near radius < far radius");
        }
        if self.radial_panels == 0 || self.angular_panels < 4 {
            return invalid("panel counts too small");
        }
        Ok(())
    }
}

/// `𝒟^b f` on the grid together with the quantities that qualify it.
#[derive(Clone, Debug)]
pub struct SteinEvaluation {
    /// `(𝒟^b f)²`; may carry roundoff-level negative values.
    pub squared: Field2D,
    /// Bound on the dropped `|x-y| > R` contribution to the squared value.
    pub tail_bound: f64,
    /// Energy fraction in the outer quarter band.
    pub outer_band_fraction: f64,
}

impl SteinEvaluation {
    pub fn values(&self) -> Field2D {
        self.squared.map(|v| v.max(0.0).sqrt())
    }
}

/// `𝒟^b f` sampled on the grid.
pub fn stein_derivative(field: &Field2D, b: f64, cfg: &SteinQuadratureConfig) -> Result<Field2D> {
    Ok(stein_evaluate(field, b, cfg)?.values())
}

pub fn stein_evaluate(field: &Field2D, b: f64, cfg: &SteinQuadratureConfig) -> Result<SteinEvaluation> {
    let cfg = SteinQuadratureConfig { b, ..*cfg };
    cfg.validate()?;
    let g = *field.grid();
    let fraction = outer_band_fraction(&transform(field));
    if fraction > RESOLUTION_LIMIT {
        return Err(ZkError::Resolution {
            fraction,
            limit: RESOLUTION_LIMIT,
        });
    }
    let sup = field.sup_norm();
    if sup == 0.0 {
        return Ok(SteinEvaluation {
            squared: Field2D::zeros(g),
            tail_bound: 0.0,
            outer_band_fraction: fraction,
        });
    }
    let diag = 2.0 * g.half_length_x.hypot(g.half_length_y);
    let tail_bound = if cfg.far_radius >= diag {
        0.0
    } else {
        let l1 = field.samples().iter().map(|v| v.abs()).sum::<f64>() * g.cell_area();
        (field.l2_norm().powi(2) + 2.0 * sup * l1) * cfg.far_radius.powf(-2.0 - 2.0 * b)
    };
    if tail_bound > cfg.tolerance * sup * sup {
        return Err(ZkError::Truncation {
            bound: tail_bound,
            tolerance: cfg.tolerance * sup * sup,
        });
    }
    let near = near_part(field, &cfg);
    let far = far_part(field, &cfg)?;
    Ok(SteinEvaluation {
        squared: &near + &far,
        tail_bound,
        outer_band_fraction: fraction,
    })
}

/// Energy fraction in modes with `|ξ| > 3/4 ξ_max` or `|η| > 3/4 η_max`.
pub fn outer_band_fraction(spec: &Spectrum2D) -> f64 {
    let g = *spec.grid();
    let (cx, cy) = (0.75 * g.nyquist_x(), 0.75 * g.nyquist_y());
    let mut outer = 0.0;
    let mut total = 0.0;
    for j in 0..g.ny {
        let eta = g.wavenumber_y(j).abs();
        for i in 0..g.nx {
            let e = spec.at(i, j).norm_sqr();
            total += e;
            if g.wavenumber_x(i).abs() > cx || eta > cy {
                outer += e;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}

fn split_weight(r: f64, a: f64) -> f64 {
    (-(-(r / a).powi(2)).exp_m1()).powi(SPLIT_ORDER)
}

fn binomial(n: i32, k: i32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `₁F₁(-b; 1; -z)` for `z ≥ 0`.
fn kummer_neg(b: f64, z: f64) -> f64 {
    if z <= 60.0 {
        kummer_series(b, z)
    } else {
        kummer_asymptotic(b, z)
    }
}

/// `e^{-z} ₁F₁(1+b; 1; z)`, all terms positive.
fn kummer_series(b: f64, z: f64) -> f64 {
    let mut t = (-z).exp();
    let mut s = t;
    let mut n = 0.0;
    loop {
        t *= (1.0 + b + n) * z / ((n + 1.0) * (n + 1.0));
        n += 1.0;
        s += t;
        if n > z && t < 1e-17 * s {
            return s;
        }
    }
}

/// Algebraic large-`z` expansion, truncated before the terms turn.
fn kummer_asymptotic(b: f64, z: f64) -> f64 {
    let mut s = 1.0;
    let mut t = 1.0;
    for k in 0..200 {
        let kf = k as f64;
        t *= (kf - b) * (kf - b) / ((kf + 1.0) * z);
        if t.abs() < 1e-17 {
            break;
        }
        s += t;
    }
    z.powf(b) / gamma(1.0 + b) * s
}

/// Symbol of the near operator: `2π ∫_0^∞ (1-φ(r)) r^{-1-2b} (J₀(kr) - 1) dr`.
pub fn near_symbol(k: f64, b: f64, a: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let gm = gamma(-b);
    (1..=SPLIT_ORDER)
        .map(|j| {
            let c = if j % 2 == 1 { 1.0 } else { -1.0 } * binomial(SPLIT_ORDER, j);
            let p = j as f64 / (a * a);
            let z = k * k / (4.0 * p);
            c * PI * p.powf(b) * gm * (kummer_neg(b, z) - 1.0)
        })
        .sum()
}

/// Applies the radial near symbol on the lattice of `field`'s grid.
fn near_apply(field: &Field2D, b: f64, a: f64) -> Vec<f64> {
    let g = *field.grid();
    let spec = transform(field);
    // The symbol depends on |i|, |j| only; evaluate each pair once.
    let (hx, hy) = (g.nx / 2 + 1, g.ny / 2 + 1);
    let table = par::map_range(hx * hy, |idx| {
        let (i, j) = (idx % hx, idx / hx);
        let xi = std::f64::consts::PI * i as f64 / g.half_length_x;
        let eta = std::f64::consts::PI * j as f64 / g.half_length_y;
        near_symbol(xi.hypot(eta), b, a)
    });
    let mut c = spec.into_coefficients();
    for j in 0..g.ny {
        let aj = Grid2D::signed_mode(j, g.ny).unsigned_abs() as usize;
        for i in 0..g.nx {
            let ai = Grid2D::signed_mode(i, g.nx).unsigned_abs() as usize;
            c[j * g.nx + i] *= table[aj * hx + ai];
        }
    }
    let s = Spectrum2D::new(g, c).expect("length kept");
    crate::fft::inverse_transform(&s).into_samples()
}

fn near_part(field: &Field2D, cfg: &SteinQuadratureConfig) -> Field2D {
    let g = *field.grid();
    let fine = refine(field, 2);
    let sq = fine.map(|v| v * v);
    let n_sq_fine = near_apply(&sq, cfg.b, cfg.near_radius);
    let n_f = near_apply(field, cfg.b, cfg.near_radius);
    let f = field.samples();
    let fnx = 2 * g.nx;
    let out: Vec<f64> = (0..g.len())
        .map(|k| {
            let (ix, iy) = (k % g.nx, k / g.nx);
            n_sq_fine[2 * iy * fnx + 2 * ix] - 2.0 * f[k] * n_f[k]
        })
        .collect();
    Field2D::from_parts_unchecked(g, out)
}

/// `2π ∫_0^∞ φ(r) r^{-1-2b} dr`. Where `f(x+h) = 0` the integrand is the
/// whole of `|f(x) - f(x+h)|²`, so this part is never truncated.
fn far_kernel_mass(cfg: &SteinQuadratureConfig) -> Result<f64> {
    let (a, b) = (cfg.near_radius, cfg.b);
    // φ equals 1 to double precision beyond 7a.
    let flat = 7.0 * a;
    let f = |r: f64| split_weight(r, a) * r.powf(-1.0 - 2.0 * b);
    let breaks: Vec<f64> = (0..=cfg.radial_panels)
        .map(|k| flat * k as f64 / cfg.radial_panels as f64)
        .collect();
    let body = adaptive_over(&f, &breaks, 1e-14, 100_000)?.value;
    Ok(2.0 * PI * (body + flat.powf(-2.0 * b) / (2.0 * b)))
}

fn far_part(field: &Field2D, cfg: &SteinQuadratureConfig) -> Result<Field2D> {
    let g = *field.grid();
    let (nx, ny) = (g.nx, g.ny);
    let (px, py) = (2 * nx, 2 * ny);
    let (dx, dy) = (g.dx(), g.dy());
    let plan = Plan2::new(px, py);
    let zero = Complex64::new(0.0, 0.0);

    let mut kernel = vec![zero; px * py];
    for j in 0..py {
        let hy = Grid2D::signed_mode(j, py) as f64 * dy;
        for i in 0..px {
            let hx = Grid2D::signed_mode(i, px) as f64 * dx;
            let r = hx.hypot(hy);
            if r > 0.0 && r <= cfg.far_radius {
                kernel[j * px + i].re = split_weight(r, cfg.near_radius) * r.powf(-2.0 - 2.0 * cfg.b);
            }
        }
    }
    plan.forward(&mut kernel);

    // Linear convolutions of the kernel with f and f², both at once: f in
    // the real part, f² in the imaginary part (the kernel is real and even).
    let mut data = vec![zero; px * py];
    let f = field.samples();
    for iy in 0..ny {
        for ix in 0..nx {
            let v = f[iy * nx + ix];
            data[(iy + ny / 2) * px + ix + nx / 2] = Complex64::new(v, v * v);
        }
    }
    plan.forward(&mut data);
    for (d, k) in data.iter_mut().zip(&kernel) {
        *d *= k;
    }
    plan.inverse(&mut data);
    let norm = dx * dy / (px * py) as f64;
    let mass = far_kernel_mass(cfg)?;
    let out: Vec<f64> = (0..g.len())
        .map(|k| {
            let (ix, iy) = (k % nx, k / nx);
            let c = data[(iy + ny / 2) * px + ix + nx / 2] * norm;
            let v = f[k];
            v * v * mass - 2.0 * v * c.re + c.im
        })
        .collect();
    Ok(Field2D::from_parts_unchecked(g, out))
}

/// Pointwise polar rule for an analytically known field:
/// `∫_0^R r^{-1-2b} ∫_0^{2π} |f(x) - f(x + r e_θ)|² dθ dr + f(x)² 2π R^{-2b}/(2b)`.
///
/// The neglected far cross terms are the caller's responsibility (choose
/// `R` past the support). Radial panels are graded towards `r = 0`.
pub fn stein_square_at(
    f: impl Fn(f64, f64) -> f64,
    x: f64,
    y: f64,
    cfg: &SteinQuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    let b = cfg.b;
    let fx = f(x, y);
    let m = cfg.angular_panels;
    let ring = |r: f64| -> f64 {
        let s: f64 = (0..m)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / m as f64;
                let d = fx - f(x + r * th.cos(), y + r * th.sin());
                d * d
            })
            .sum();
        s * 2.0 * PI / m as f64 * r.powf(-1.0 - 2.0 * b)
    };
    let r_max = cfg.far_radius;
    let n = cfg.radial_panels;
    let mut breaks = vec![0.0];
    breaks.extend((0..=n).map(|k| r_max * 2f64.powf(-((n - k) as f64) * 30.0 / n as f64)));
    let v = adaptive_over(&ring, &breaks, 1e-12 * (1.0 + fx * fx), 200_000)?.value;
    Ok(v + fx * fx * 2.0 * PI * r_max.powf(-2.0 * b) / (2.0 * b))
}

/// `√π Γ(b+1/2) / Γ(b+1) = ∫_ℝ (1+s²)^{-1-b} ds`.
pub fn transverse_factor(b: f64) -> f64 {
    PI.sqrt() * gamma(b + 0.5) / gamma(b + 1.0)
}

/// `𝒟^b(e^{itx₁³})` at `x₁`; the value is independent of `x₂`.
///
/// Integrating out the transverse variable leaves
/// `B_b ∫_ℝ (2 - 2cos(t((x₁+h)³ - x₁³))) |h|^{-1-2b} dh`.
/// The difference `2 - 2cos φ` is evaluated as `4 sin²(φ/2)` to avoid
/// cancellation. On `|h| ≤ H` the rule uses quarter-period panels; beyond,
/// the constant part is exact and the oscillatory part is integrated by parts
/// twice in the variable `s = (x₁+h)³`.
pub fn phase_stein_derivative(t: f64, x1: f64, b: f64) -> Result<f64> {
    if !(t > 0.0) {
        return invalid(format!("phase Stein derivative needs t > 0, got {t}"));
    }
    if !(b > 0.0 && b < 1.0) {
        return invalid(format!("Stein order b must lie in (0, 1), got {b}"));
    }
    let h_max = 20.0 + 2.0 * x1.abs();
    let x3 = x1 * x1 * x1;
    let integrand = |h: f64| {
        if h == 0.0 {
            return 0.0;
        }
        let u = x1 + h;
        let phi = t * (u * u * u - x3);
        let s = (0.5 * phi).sin();
        4.0 * s * s * h.abs().powf(-1.0 - 2.0 * b)
    };
    let dphase = |h: f64| 3.0 * t * (x1 + h) * (x1 + h);
    let mut breaks = oscillation_breaks(-h_max, 0.0, dphase, 0.5);
    breaks.pop();
    breaks.extend(oscillation_breaks(0.0, h_max, dphase, 0.5));
    let budget = 4 * breaks.len() + 20_000;
    let body = adaptive_over(&integrand, &breaks, 1e-10, budget)?.value;

    // |h| > H: ∫ 2|h|^{-1-2b} exactly, minus the two cosine tails.
    let mean = 2.0 * 2.0 * h_max.powf(-2.0 * b) / (2.0 * b);
    let cos_tail = |v0: f64, shift: f64, phase_const: f64| -> f64 {
        // ∫_{v0}^∞ cos(t v³ + c) (v + shift)^{-1-2b} dv, with s = v³.
        let g = |v: f64| (v + shift).powf(-1.0 - 2.0 * b) / (3.0 * v * v);
        let dg = |v: f64| {
            let dv = -(1.0 + 2.0 * b) * (v + shift).powf(-2.0 - 2.0 * b) / (3.0 * v * v)
                - 2.0 * (v + shift).powf(-1.0 - 2.0 * b) / (3.0 * v * v * v);
            dv / (3.0 * v * v)
        };
        let s0 = v0 * v0 * v0;
        let arg = t * s0 + phase_const;
        -arg.sin() * g(v0) / t - arg.cos() * dg(v0) / (t * t)
    };
    // h > H: v = x₁+h, |h| = v - x₁, phase t v³ - t x₁³.
    // h < -H: u = -(x₁+h), |h| = u + x₁, phase -(t u³ + t x₁³), cos even.
    let osc = cos_tail(x1 + h_max, -x1, -t * x3) + cos_tail(h_max - x1, x1, t * x3);
    let total = body + mean - 2.0 * osc;
    Ok((transverse_factor(b) * total).max(0.0).sqrt())
}

/// `t^{b/3} + t^{(b+1)/3} + t^{b/3}|x₁|^b + (t^{1/3+2b/3} + t^{2b/3})|x₁|^{2b}`.
pub fn stein_phase_bound(t: f64, x1: f64, b: f64) -> Result<f64> {
    if !(t > 0.0) {
        return invalid(format!("the phase bound needs t > 0, got {t}"));
    }
    if !(b > 0.0 && b <= 0.5) {
        return invalid(format!("b must lie in (0, 1/2], got {b}"));
    }
    let a = x1.abs();
    Ok(t.powf(b / 3.0)
        + t.powf((b + 1.0) / 3.0)
        + t.powf(b / 3.0) * a.powf(b)
        + (t.powf(1.0 / 3.0 + 2.0 * b / 3.0) + t.powf(2.0 * b / 3.0)) * a.powf(2.0 * b))
}

/// `(1 + t^{b/3} + t^{(b+1)/3}) l2 + (t^{b/3} + t^{1/3+2b/3} + t^{2b/3}) d2b + wnorm`.
pub fn weighted_group_bound_rhs(l2: f64, d2b: f64, wnorm: f64, t: f64, b: f64) -> Result<f64> {
    if l2 < 0.0 || d2b < 0.0 || wnorm < 0.0 || !(l2 + d2b + wnorm).is_finite() {
        return invalid("norm inputs must be finite and nonnegative");
    }
    if !(t >= 0.0) {
        return invalid(format!("t must be nonnegative, got {t}"));
    }
    if !(b > 0.0 && b <= 0.5) {
        return invalid(format!("b must lie in (0, 1/2], got {b}"));
    }
    Ok((1.0 + t.powf(b / 3.0) + t.powf((b + 1.0) / 3.0)) * l2
        + (t.powf(b / 3.0) + t.powf(1.0 / 3.0 + 2.0 * b / 3.0) + t.powf(2.0 * b / 3.0)) * d2b
        + wnorm)
}

/// `(‖J^b f‖₂, ‖f‖₂ + ‖𝒟^b f‖₂)`.
pub fn norm_equivalence_check(field: &Field2D, b: f64) -> Result<(f64, f64)> {
    let cfg = SteinQuadratureConfig::for_grid(field.grid(), b);
    let jb = fractional_derivative(field, DerivativeKind::Bessel, b)?.l2_norm();
    let d = stein_derivative(field, b, &cfg)?;
    Ok((jb, field.l2_norm() + d.l2_norm()))
}

/// `2π ∫_0^∞ (1 - e^{-r²/(2σ²)})² r^{-1-2b} dr`: `(𝒟^b g)²` at the centre of
/// the unit-amplitude Gaussian of width `σ`, by 1D quadrature.
pub fn gaussian_centre_square(sigma: f64, b: f64) -> Result<f64> {
    let f = |r: f64| {
        let e = -(-(r * r) / (2.0 * sigma * sigma)).exp_m1();
        e * e * r.powf(-1.0 - 2.0 * b)
    };
    let cut = 12.0 * sigma;
    let body = adaptive(&f, 0.0, cut, 1e-13, 100_000)?.value;
    // Beyond the cut the bracket equals 1 to double precision.
    let _ = gk15(&f, cut, 2.0 * cut);
    Ok(2.0 * PI * (body + cut.powf(-2.0 * b) / (2.0 * b)))
}
