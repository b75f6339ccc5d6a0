//! The Duhamel operator `Ψ(v)(t) = V(t)v₀ - μ∫₀ᵗ V(t-t')(v v_x + v v_y)(t') dt'`
//! and its fixed-point iteration.

use crate::error::{invalid, Result, ZkError};
use crate::grid::Field2D;
use crate::multiplier::SymbolKind;
use crate::trajectory::Trajectory;

use super::spectral::{hadamard, Coeffs, SpectralOps};
use super::{PicardDiagnostics, SimulationConfig};

/// `Ψ` on uniform nodes `t_n = nT/M`: the time integral is the composite
/// trapezoid rule over the nodes, with the group applied spectrally.
fn duhamel_nodes(ops: &SpectralOps, v0: &Coeffs, nodes: &[Coeffs], t_final: f64) -> Vec<Coeffs> {
    let m = nodes.len() - 1;
    let dt = t_final / m as f64;
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = v0.clone();
    let mut prev: Option<Coeffs> = None;
    for (n, v) in nodes.iter().enumerate() {
        let t = dt * n as f64;
        let g = hadamard(&ops.propagator(-t), &ops.nonlinear(v));
        if let Some(p) = &prev {
            for ((a, x), y) in acc.iter_mut().zip(p).zip(&g) {
                *a += 0.5 * dt * (x + y);
            }
        }
        out.push(hadamard(&ops.propagator(t), &acc));
        prev = Some(g);
    }
    out
}

/// `Ψ(v)` at the nodes `nT/M`, `n = 0..=M`, for the symmetrized equation.
///
/// Every node must be one of the trajectory's times.
pub fn duhamel_apply(v: &Trajectory, v0: &Field2D, t_final: f64, substeps: usize) -> Result<Trajectory> {
    if substeps < 4 {
        return invalid(format!("Duhamel quadrature needs at least 4 substeps, got {substeps}"));
    }
    if !(t_final > 0.0) {
        return invalid("Duhamel operator needs T > 0");
    }
    v.grid().ensure_same(v0.grid())?;
    let times: Vec<f64> = (0..=substeps).map(|n| t_final * n as f64 / substeps as f64).collect();
    let tol = 1e-12 * t_final;
    let mut picked = Vec::with_capacity(times.len());
    for &t in &times {
        match v.times().iter().position(|&s| (s - t).abs() <= tol) {
            Some(i) => picked.push(i),
            None => {
                return invalid(format!(
                    "trajectory (covering [0, {}]) has no snapshot at Duhamel node t = {t}",
                    v.final_time()
                ))
            }
        }
    }
    let ops = SpectralOps::new(*v.grid(), SymbolKind::Symmetrized, true);
    let nodes: Vec<Coeffs> = picked.iter().map(|&i| ops.forward(&v.snapshots()[i])).collect();
    let out = duhamel_nodes(&ops, &ops.forward(v0), &nodes, t_final);
    Trajectory::new(times, out.iter().map(|c| ops.inverse(c)).collect())
}

/// Fixed point of `Ψ` on `[0, T]` by iteration from the free evolution.
///
/// Stops once `sup_t‖v^{(k+1)} - v^{(k)}‖₂ ≤ tolerance · sup_t‖v^{(k+1)}‖₂`
/// or after `max_iterations`. Three consecutive ratios at or above one
/// abort with [`ZkError::NoContraction`].
pub fn picard_solve(v0: &Field2D, t_final: f64, cfg: &SimulationConfig) -> Result<(Trajectory, PicardDiagnostics)> {
    cfg.validate()?;
    if !(t_final > 0.0) {
        return invalid("Picard iteration needs T > 0");
    }
    cfg.grid()?.ensure_same(v0.grid())?;
    v0.check_decay()?;
    let ops = SpectralOps::new(*v0.grid(), cfg.form, cfg.dealias);
    let m = cfg.substeps;
    let times: Vec<f64> = (0..=m).map(|n| t_final * n as f64 / m as f64).collect();
    let v0_hat = ops.forward(v0);
    let free: Vec<Coeffs> = times.iter().map(|&t| hadamard(&ops.propagator(t), &v0_hat)).collect();

    let mut v = free.clone();
    let mut diag = PicardDiagnostics::default();
    let sup_diff = |a: &[Coeffs], b: &[Coeffs]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let d: Coeffs = x.iter().zip(y).map(|(p, q)| p - q).collect();
                ops.l2_norm(&d)
            })
            .fold(0.0f64, f64::max)
    };
    for _ in 0..cfg.max_iterations {
        let next = duhamel_nodes(&ops, &v0_hat, &v, t_final);
        let d = sup_diff(&next, &v);
        let scale = next.iter().map(|c| ops.l2_norm(c)).fold(0.0f64, f64::max);
        if let Some(&prev) = diag.differences.last() {
            if prev > 0.0 {
                diag.ratios.push(d / prev);
            }
        }
        diag.differences.push(d);
        diag.iterations += 1;
        diag.final_residual = d;
        diag.ball_radius = diag.ball_radius.max(sup_diff(&next, &free));
        v = next;
        if !d.is_finite() {
            return Err(ZkError::NoContraction(Box::new(diag)));
        }
        if d <= cfg.tolerance * scale {
            diag.converged = true;
            break;
        }
        let r = &diag.ratios;
        if r.len() >= 3 && r[r.len() - 3..].iter().all(|&q| q >= 1.0) {
            return Err(ZkError::NoContraction(Box::new(diag)));
        }
    }
    let traj = Trajectory::new(times, v.iter().map(|c| ops.inverse(c)).collect())?;
    Ok((traj, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::gaussian;
    use crate::grid::Grid2D;
    use crate::propagator::free_evolve;

    fn sym_cfg(n: usize, l: f64) -> SimulationConfig {
        SimulationConfig {
            nx: n,
            ny: n,
            half_length_x: l,
            half_length_y: l,
            form: SymbolKind::Symmetrized,
            substeps: 16,
            ..Default::default()
        }
    }

    #[test]
    fn zero_and_free_cases() {
        let g = Grid2D::square(64, 16.0).unwrap();
        let v0 = gaussian(g, 1.0, 1.0, (0.0, 0.0));
        let zero_traj = Trajectory::from_fn(Trajectory::uniform_times(0.5, 9), |_| Field2D::zeros(g)).unwrap();
        let psi = duhamel_apply(&zero_traj, &v0, 0.5, 8).unwrap();
        for (t, s) in psi.times().iter().zip(psi.snapshots()) {
            let exact = free_evolve(&v0, *t, SymbolKind::Symmetrized).unwrap();
            assert!((s - &exact).sup_norm() < 1e-14);
        }
        let z = duhamel_apply(&zero_traj, &Field2D::zeros(g), 0.5, 8).unwrap();
        assert!(z.snapshots().iter().all(|s| s.sup_norm() == 0.0));
        assert!(duhamel_apply(&zero_traj, &v0, 0.5, 16).is_err());
        assert!(duhamel_apply(&zero_traj, &v0, 1.0, 8).is_err());
    }

    #[test]
    fn zero_data_converges_at_once() {
        let c = sym_cfg(64, 16.0);
        let (t, d) = picard_solve(&Field2D::zeros(c.grid().unwrap()), 0.25, &c).unwrap();
        assert!(d.converged && d.iterations == 1);
        assert!(t.snapshots().iter().all(|s| s.sup_norm() == 0.0));
    }

    #[test]
    fn trapezoid_is_second_order() {
        let g = Grid2D::square(64, 16.0).unwrap();
        let v0 = gaussian(g, 0.5, 1.0, (0.0, 0.0));
        let t_final = 0.5;
        let psi_t = |m: usize| {
            let v = Trajectory::from_fn(Trajectory::uniform_times(t_final, m + 1), |t| {
                free_evolve(&v0, t, SymbolKind::Symmetrized).unwrap()
            })
            .unwrap();
            duhamel_apply(&v, &v0, t_final, m).unwrap().last().clone()
        };
        let (a, b, c) = (psi_t(8), psi_t(16), psi_t(32));
        let ratio = (&a - &b).l2_norm() / (&b - &c).l2_norm();
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn large_data_does_not_contract() {
        let c = SimulationConfig {
            max_iterations: 30,
            ..sym_cfg(64, 16.0)
        };
        let v0 = gaussian(c.grid().unwrap(), 30.0, 1.0, (0.0, 0.0));
        match picard_solve(&v0, 2.0, &c) {
            Err(ZkError::NoContraction(d)) => assert!(d.ratios.len() >= 3),
            other => panic!("expected no-contraction, got {:?}", other.map(|x| x.1)),
        }
    }
}
