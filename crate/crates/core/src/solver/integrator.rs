//! Integrating-factor RK4: the dispersive part is propagated exactly
//! between stages, only the dealiased quadratic term is Runge-Kutta
//! integrated.

use num_complex::Complex64;

use crate::error::{invalid, Result, ZkError};
use crate::grid::Field2D;
use crate::multiplier::SymbolKind;
use crate::trajectory::Trajectory;

use super::spectral::{axpy, hadamard, Coeffs, SpectralOps};
use super::{SimulationConfig, MU};

/// RK4 stability radius on the imaginary axis is `2√2`; kept a bit inside.
const RK4_IMAGINARY_LIMIT: f64 = 2.8;
/// Ceiling on the default step, for accuracy rather than stability.
const MAX_DEFAULT_DT: f64 = 5e-3;
const BLOW_UP_FACTOR: f64 = 10.0;

/// Advective stability bound `2.8 / (k_max ‖u₀‖_∞ c)`, with `c = 1` for the
/// original nonlinearity and `2μ` for the symmetrized one. Infinite for the
/// linear flow.
pub fn nonlinear_step_bound(u0: &Field2D, cfg: &SimulationConfig) -> f64 {
    let amp = u0.sup_norm();
    if !cfg.nonlinear || amp == 0.0 {
        return f64::INFINITY;
    }
    let ops = SpectralOps::new(*u0.grid(), cfg.form, cfg.dealias);
    let c = match cfg.form {
        SymbolKind::Original => 1.0,
        SymbolKind::Symmetrized => 2.0 * MU,
    };
    RK4_IMAGINARY_LIMIT / (ops.max_active_wavenumber() * amp * c)
}

/// Default step: a quarter of the advective bound, capped at 5e-3, halved
/// until the linear-only run reproduces the exact free flow to 1e-10.
pub fn stable_dt(u0: &Field2D, cfg: &SimulationConfig) -> Result<f64> {
    let ops = SpectralOps::new(*u0.grid(), cfg.form, cfg.dealias);
    let mut dt = (0.25 * nonlinear_step_bound(u0, cfg))
        .min(MAX_DEFAULT_DT)
        .min(cfg.t_final);
    let u = ops.forward(u0);
    let norm = ops.l2_norm(&u);
    if norm == 0.0 {
        return Ok(dt);
    }
    let exact = hadamard(&ops.propagator(cfg.t_final), &u);
    for _ in 0..20 {
        let steps = (cfg.t_final / dt).ceil() as usize;
        let h = cfg.t_final / steps as f64;
        let e = ops.propagator(h);
        let mut v = u.clone();
        for _ in 0..steps {
            v = hadamard(&e, &v);
        }
        let diff: Coeffs = v.iter().zip(&exact).map(|(a, b)| a - b).collect();
        if ops.l2_norm(&diff) <= 1e-10 * norm {
            return Ok(dt);
        }
        dt *= 0.5;
    }
    invalid("no time step reproduces the linear flow to 1e-10")
}

struct Stepper<'a> {
    ops: &'a SpectralOps,
    e_half: Coeffs,
    e_full: Coeffs,
    dt: f64,
    nonlinear: bool,
}

impl Stepper<'_> {
    fn step(&self, u: &Coeffs) -> Coeffs {
        if !self.nonlinear {
            return hadamard(&self.e_full, u);
        }
        let (dt, ops) = (self.dt, self.ops);
        let half = Complex64::new(0.5 * dt, 0.0);
        let k1 = ops.nonlinear(u);
        let mut a = u.clone();
        axpy(&mut a, half, &k1);
        let k2 = ops.nonlinear(&hadamard(&self.e_half, &a));
        let mut b = hadamard(&self.e_half, u);
        axpy(&mut b, half, &k2);
        let k3 = ops.nonlinear(&b);
        let mut c = hadamard(&self.e_full, u);
        axpy(&mut c, Complex64::new(dt, 0.0), &hadamard(&self.e_half, &k3));
        let k4 = ops.nonlinear(&c);
        let sixth = dt / 6.0;
        let mut out = hadamard(&self.e_full, u);
        for idx in 0..out.len() {
            out[idx] += sixth
                * (self.e_full[idx] * k1[idx] + 2.0 * self.e_half[idx] * (k2[idx] + k3[idx]) + k4[idx]);
        }
        out
    }
}

/// Solves the chosen form from `u0` on `[0, T]`, returning `cfg.snapshots`
/// equally spaced snapshots.
pub fn evolve(u0: &Field2D, cfg: &SimulationConfig) -> Result<Trajectory> {
    cfg.validate()?;
    cfg.grid()?.ensure_same(u0.grid())?;
    u0.check_decay()?;
    let ops = SpectralOps::new(*u0.grid(), cfg.form, cfg.dealias);
    let bound = nonlinear_step_bound(u0, cfg);
    let dt_target = match cfg.dt {
        Some(dt) if dt > bound => {
            return invalid(format!("time step {dt} exceeds the stability bound {bound:.4e}"));
        }
        Some(dt) => dt,
        None => stable_dt(u0, cfg)?,
    };
    let intervals = cfg.snapshots - 1;
    let span = cfg.t_final / intervals as f64;
    let per = (span / dt_target).ceil().max(1.0) as usize;
    let dt = span / per as f64;
    let stepper = Stepper {
        ops: &ops,
        e_half: ops.propagator(0.5 * dt),
        e_full: ops.propagator(dt),
        dt,
        nonlinear: cfg.nonlinear,
    };

    let mut u = ops.forward(u0);
    let norm0 = ops.l2_norm(&u);
    let mut times = vec![0.0];
    let mut snaps = vec![u0.clone()];
    for s in 1..=intervals {
        for k in 0..per {
            u = stepper.step(&u);
            let norm = ops.l2_norm(&u);
            if !norm.is_finite() || (norm0 > 0.0 && norm > BLOW_UP_FACTOR * norm0) {
                return Err(ZkError::Instability {
                    time: ((s - 1) * per + k + 1) as f64 * dt,
                    growth: norm / norm0,
                    last_good: Box::new(snaps.last().expect("nonempty").clone()),
                });
            }
        }
        times.push(cfg.t_final * s as f64 / intervals as f64);
        snaps.push(ops.inverse(&u));
    }
    Trajectory::new(times, snaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::gaussian;
    use crate::grid::Grid2D;
    use crate::propagator::free_evolve;

    fn cfg(n: usize, l: f64) -> SimulationConfig {
        SimulationConfig {
            nx: n,
            ny: n,
            half_length_x: l,
            half_length_y: l,
            snapshots: 5,
            ..Default::default()
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let c = cfg(64, 16.0);
        let t = evolve(&Field2D::zeros(c.grid().unwrap()), &c).unwrap();
        assert!(t.snapshots().iter().all(|s| s.sup_norm() == 0.0));
    }

    #[test]
    fn linear_run_matches_free_flow() {
        for form in [SymbolKind::Original, SymbolKind::Symmetrized] {
            let c = SimulationConfig {
                nonlinear: false,
                form,
                ..cfg(128, 20.0)
            };
            let u0 = gaussian(c.grid().unwrap(), 0.5, 1.0, (0.0, 0.0));
            let t = evolve(&u0, &c).unwrap();
            for (time, s) in t.times().iter().zip(t.snapshots()) {
                let exact = free_evolve(&u0, *time, form).unwrap();
                assert!((s - &exact).l2_norm() < 1e-12, "{time}");
            }
        }
    }

    #[test]
    fn rejects_steps_over_the_bound() {
        let c = SimulationConfig {
            dt: Some(1.0),
            ..cfg(64, 16.0)
        };
        let u0 = gaussian(c.grid().unwrap(), 5.0, 1.0, (0.0, 0.0));
        assert!(evolve(&u0, &c).is_err());
    }

    #[test]
    fn blow_up_reports_last_snapshot() {
        // An under-resolved large pulse with a step at the edge of the bound.
        let c = SimulationConfig {
            dealias: false,
            t_final: 2.0,
            snapshots: 3,
            ..cfg(32, 8.0)
        };
        let g = Grid2D::square(32, 8.0).unwrap();
        let u0 = gaussian(g, 40.0, 0.5, (0.0, 0.0));
        let dt = nonlinear_step_bound(&u0, &c) * 0.99;
        match evolve(&u0, &SimulationConfig { dt: Some(dt), ..c }) {
            Err(ZkError::Instability { growth, last_good, .. }) => {
                assert!(growth > 10.0 || !growth.is_finite());
                assert_eq!(last_good.grid(), &g);
            }
            other => panic!("expected instability, got {:?}", other.map(|t| t.len())),
        }
    }
}
