//! Weighted energy identity for the original equation with the weight
//! `p = w_N(r)^s`, and the Gronwall envelope that follows from it:
//!
//! `(u,up)(t) = (u₀,u₀p) - 3∫(u_x,u_x p_x) - ∫(u_y,u_y p_x) - 2∫(u_x,u_y p_y)
//!              + ∫(u,u(p_xxx+p_xyy)) + (2/3)∫(u³,p_x)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::Grid2D;
use crate::multiplier::SymbolKind;
use crate::par;
use crate::trajectory::Trajectory;
use crate::weights::TruncatedWeight;

use super::spectral::SpectralOps;

/// Step of the finite-difference stencils applied to the closed-form weight.
const FD_STEP: f64 = 0.05;
/// Cells where 6th- and 4th-order stencils disagree by more than this
/// (relative to the field's largest value) are reported.
const FD_AGREEMENT: f64 = 1e-6;

const D1_6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const D1_4: [f64; 2] = [2.0 / 3.0, -1.0 / 12.0];
const D2_6: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
const D2_4: [f64; 3] = [-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
const D3_6: [f64; 4] = [-61.0 / 30.0, 169.0 / 120.0, -3.0 / 10.0, 7.0 / 240.0];
const D3_4: [f64; 3] = [-13.0 / 8.0, 1.0, -1.0 / 8.0];

/// Odd stencil: `Σ_k c_k (f(k) - f(-k)) / h^order`, coefficients for `k ≥ 1`.
fn odd(c: &[f64], f: impl Fn(f64) -> f64, order: i32) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, &ck)| {
            let o = (k + 1) as f64 * FD_STEP;
            ck * (f(o) - f(-o))
        })
        .sum::<f64>()
        / FD_STEP.powi(order)
}

/// Even stencil: `Σ_k c_k (f(k) + f(-k) - 2 f(0))/h²`, with `c[0]` unused
/// beyond fixing the row sum to zero.
fn even(c: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let f0 = f(0.0);
    c[1..]
        .iter()
        .enumerate()
        .map(|(k, &ck)| {
            let o = (k + 1) as f64 * FD_STEP;
            ck * (f(o) - f0 + f(-o) - f0)
        })
        .sum::<f64>()
        / (FD_STEP * FD_STEP)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeWarning {
    pub derivative: String,
    pub cells: usize,
    pub worst: f64,
    /// Grid index `(ix, iy)` of the worst cell.
    pub at: (usize, usize),
}

struct WeightDerivatives {
    p: Vec<f64>,
    px: Vec<f64>,
    py: Vec<f64>,
    /// `p_xxx + p_xyy`
    third: Vec<f64>,
    warnings: Vec<DerivativeWarning>,
}

fn weight_derivatives(grid: &Grid2D, s: f64, n: u32) -> Result<WeightDerivatives> {
    let w = TruncatedWeight::shared(n)?;
    let p = |x: f64, y: f64| w.value((x * x + y * y).sqrt()).powf(s);
    // Per cell: p, then (6th, 4th) for p_x, p_y, p_xxx + p_xyy.
    let rows = par::map_range(grid.ny, |iy| {
        let y = grid.y(iy);
        (0..grid.nx)
            .map(|ix| {
                let x = grid.x(ix);
                let px6 = odd(&D1_6, |o| p(x + o, y), 1);
                let px4 = odd(&D1_4, |o| p(x + o, y), 1);
                let py6 = odd(&D1_6, |o| p(x, y + o), 1);
                let py4 = odd(&D1_4, |o| p(x, y + o), 1);
                let t6 = odd(&D3_6, |o| p(x + o, y), 3) + odd(&D1_6, |o| even(&D2_6, |q| p(x + o, y + q)), 1);
                let t4 = odd(&D3_4, |o| p(x + o, y), 3) + odd(&D1_4, |o| even(&D2_4, |q| p(x + o, y + q)), 1);
                [p(x, y), px6, px4, py6, py4, t6, t4]
            })
            .collect::<Vec<_>>()
    });
    let cells: Vec<[f64; 7]> = rows.into_iter().flatten().collect();
    let col = |k: usize| cells.iter().map(|c| c[k]).collect::<Vec<f64>>();
    let mut warnings = Vec::new();
    for (name, hi, lo, order) in [("p_x", 1, 2, 1), ("p_y", 3, 4, 1), ("p_xxx+p_xyy", 5, 6, 3)] {
        // Relative to the derivative's size, above the stencil's own
        // roundoff level.
        let pmax = cells.iter().map(|c| c[0].abs()).fold(0.0f64, f64::max);
        let scale = cells.iter().map(|c| c[hi].abs()).fold(0.0f64, f64::max);
        let noise = 1e3 * f64::EPSILON * pmax / FD_STEP.powi(order);
        let limit = FD_AGREEMENT * scale + noise;
        let mut count = 0;
        let mut worst = (0.0f64, 0usize);
        for (idx, c) in cells.iter().enumerate() {
            let d = (c[hi] - c[lo]).abs();
            if d > limit {
                count += 1;
                if d > worst.0 {
                    worst = (d, idx);
                }
            }
        }
        if count > 0 {
            warnings.push(DerivativeWarning {
                derivative: name.to_string(),
                cells: count,
                worst: worst.0,
                at: (worst.1 % grid.nx, worst.1 / grid.nx),
            });
        }
    }
    Ok(WeightDerivatives {
        p: col(0),
        px: col(1),
        py: col(3),
        third: col(5),
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub s: f64,
    pub n: u32,
    pub times: Vec<f64>,
    /// `(u, up)` at each snapshot.
    pub weighted: Vec<f64>,
    /// Integrands of the five time integrals, in the order of the identity.
    pub rates: Vec<[f64; 5]>,
    /// `(u₀,u₀p)` plus the time integrals up to each snapshot.
    pub identity_rhs: Vec<f64>,
    /// `max |weighted - identity_rhs| / max weighted`.
    pub defect: f64,
    /// Smallest `C` with `(u,up)(t) ≤ a + C(t + ∫₀ᵗ(u,up))` at every snapshot.
    pub gronwall_c: f64,
    /// `C` from the slope at `t = 0⁺`: `max(rate(0), 0) / (1 + a)`.
    pub initial_slope_c: f64,
    /// `(a + 1) e^{Ct} - 1`, the closed form of the Gronwall bound.
    pub envelope: Vec<f64>,
    pub envelope_holds: bool,
    pub warnings: Vec<DerivativeWarning>,
}

/// Cumulative integral of samples on uniform nodes: Simpson on even
/// prefixes, Simpson plus a three-point end panel on odd ones. Falls back to
/// the trapezoid rule for fewer than three or non-uniform nodes.
pub(crate) fn cumulative_integral(times: &[f64], f: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let h = times[1] - times[0];
    let uniform = times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
    if !uniform || n < 3 {
        for k in 1..n {
            out[k] = out[k - 1] + 0.5 * (times[k] - times[k - 1]) * (f[k] + f[k - 1]);
        }
        return out;
    }
    for k in 1..n {
        out[k] = if k % 2 == 0 {
            out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k])
        } else if k == 1 {
            h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
        } else {
            out[k - 1] + h / 12.0 * (5.0 * f[k] + 8.0 * f[k - 1] - f[k - 2])
        };
    }
    out
}

/// Audits a trajectory of the original equation against the weighted energy
/// identity and the Gronwall envelope.
pub fn weighted_energy_audit(traj: &Trajectory, s: f64, n: u32) -> Result<AuditRecord> {
    if !(s >= 0.0 && s.is_finite()) {
        return invalid(format!("weight exponent must be nonnegative, got {s}"));
    }
    let g = *traj.grid();
    let wd = weight_derivatives(&g, s, n)?;
    let ops = SpectralOps::new(g, SymbolKind::Original, false);
    let area = g.cell_area();

    let per_snapshot = par::map(traj.snapshots(), |u| {
        let (ux, uy) = ops.gradient(&ops.forward(u));
        let (u, ux, uy) = (u.samples(), ux.samples(), uy.samples());
        let mut acc = [0.0f64; 6];
        for k in 0..u.len() {
            acc[0] += u[k] * u[k] * wd.p[k];
            acc[1] += -3.0 * ux[k] * ux[k] * wd.px[k];
            acc[2] += -uy[k] * uy[k] * wd.px[k];
            acc[3] += -2.0 * ux[k] * uy[k] * wd.py[k];
            acc[4] += u[k] * u[k] * wd.third[k];
            acc[5] += 2.0 / 3.0 * u[k] * u[k] * u[k] * wd.px[k];
        }
        acc.map(|v| v * area)
    });
    let times = traj.times().to_vec();
    let weighted: Vec<f64> = per_snapshot.iter().map(|a| a[0]).collect();
    let rates: Vec<[f64; 5]> = per_snapshot.iter().map(|a| [a[1], a[2], a[3], a[4], a[5]]).collect();
    let total_rate: Vec<f64> = rates.iter().map(|r| r.iter().sum()).collect();
    let a = weighted[0];
    let integral = cumulative_integral(&times, &total_rate);
    let identity_rhs: Vec<f64> = integral.iter().map(|v| a + v).collect();
    let scale = weighted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let defect = if scale == 0.0 {
        0.0
    } else {
        weighted
            .iter()
            .zip(&identity_rhs)
            .map(|(l, r)| (l - r).abs())
            .fold(0.0, f64::max)
            / scale
    };

    let e_int = cumulative_integral(&times, &weighted);
    let gronwall_c = (1..times.len())
        .map(|k| (weighted[k] - a) / (times[k] + e_int[k]))
        .fold(0.0f64, f64::max);
    let initial_slope_c = total_rate[0].max(0.0) / (1.0 + a);
    let envelope: Vec<f64> = times.iter().map(|t| (a + 1.0) * (gronwall_c * t).exp() - 1.0).collect();
    let envelope_holds = weighted
        .iter()
        .zip(&envelope)
        .all(|(w, e)| *w <= e + 1e-12 * (1.0 + e.abs()));
    Ok(AuditRecord {
        s,
        n,
        times,
        weighted,
        rates,
        identity_rhs,
        defect,
        gronwall_c,
        initial_slope_c,
        envelope,
        envelope_holds,
        warnings: wd.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field2D;

    #[test]
    fn stencils_are_exact_on_polynomials() {
        let f = |x: f64| 2.0 * x.powi(3) - x * x + 0.5 * x;
        assert!((odd(&D1_6, f, 1) - 0.5).abs() < 1e-10);
        assert!((even(&D2_6, f) + 2.0).abs() < 1e-8);
        assert!((odd(&D3_6, f, 3) - 12.0).abs() < 1e-6);
        assert!((odd(&D3_4, f, 3) - 12.0).abs() < 1e-6);
    }

    #[test]
    fn cumulative_rule_is_exact_for_quadratics() {
        let t: Vec<f64> = (0..9).map(|k| 0.1 * k as f64).collect();
        let f: Vec<f64> = t.iter().map(|x| 3.0 * x * x - x).collect();
        let c = cumulative_integral(&t, &f);
        for (x, v) in t.iter().zip(c) {
            let exact = x.powi(3) - x * x / 2.0;
            assert!((v - exact).abs() < 1e-14, "{x}: {v} vs {exact}");
        }
    }

    #[test]
    fn zero_solution_audit() {
        let g = Grid2D::square(32, 8.0).unwrap();
        let z = Trajectory::from_fn(vec![0.0, 0.1, 0.2], |_| Field2D::zeros(g)).unwrap();
        let r = weighted_energy_audit(&z, 2.0, 4).unwrap();
        assert!(r.weighted.iter().all(|v| *v == 0.0));
        assert!(r.rates.iter().all(|v| v.iter().all(|x| *x == 0.0)));
        assert!(r.envelope_holds && r.defect == 0.0);
    }

    #[test]
    fn constant_weight_kills_derivative_terms() {
        let g = Grid2D::square(32, 8.0).unwrap();
        let wd = weight_derivatives(&g, 0.0, 4).unwrap();
        assert!(wd.px.iter().chain(&wd.py).chain(&wd.third).all(|v| *v == 0.0));
        assert!(wd.p.iter().all(|v| *v == 1.0));
    }

    #[test]
    fn bracket_weight_derivatives_match_closed_form() {
        // Inside the plateau-free core p = (1+r²)^{s/2}; with s = 2, p = 1+r².
        let g = Grid2D::square(32, 4.0).unwrap();
        let wd = weight_derivatives(&g, 2.0, 16).unwrap();
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let k = iy * g.nx + ix;
                let (x, y) = (g.x(ix), g.y(iy));
                assert!((wd.px[k] - 2.0 * x).abs() < 1e-8);
                assert!((wd.py[k] - 2.0 * y).abs() < 1e-8);
                assert!(wd.third[k].abs() < 1e-6);
            }
        }
        assert!(wd.warnings.is_empty(), "{:?}", wd.warnings);
    }
}
