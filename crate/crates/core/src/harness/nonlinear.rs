use super::{Ctx, EstimateReport, Relation};
use crate::error::Result;
use crate::fields::gaussian;
use crate::grid::Field2D;
use crate::multiplier::SymbolKind;
use crate::solver::{
    evolve, pde_residual, picard_solve, symmetrize_map, symmetrize_map_within, weighted_energy_audit,
    MapDirection, SimulationConfig,
};

/// Grid, Gaussian datum and final time shared by the nonlinear runs.
fn gaussian_run(
    ctx: &Ctx,
    n: usize,
    box_half: f64,
    amplitude: f64,
    sigma: f64,
    t_final: f64,
) -> Result<(SimulationConfig, Field2D)> {
    let grid = ctx.grid(n, box_half)?;
    let amplitude: f64 = ctx.get("amplitude", amplitude)?;
    let sigma: f64 = ctx.get("sigma", sigma)?;
    let t_final: f64 = ctx.get("t_final", t_final)?;
    let cfg = SimulationConfig {
        nx: grid.nx,
        ny: grid.ny,
        half_length_x: grid.half_length_x,
        half_length_y: grid.half_length_y,
        t_final,
        ..Default::default()
    };
    Ok((cfg, gaussian(grid, amplitude, sigma, (0.0, 0.0))))
}

fn record_env(rep: &mut EstimateReport, cfg: &SimulationConfig) {
    rep.environment.grid = Some((cfg.nx, cfg.ny));
    rep.environment.half_lengths = Some((cfg.half_length_x, cfg.half_length_y));
    rep.environment.window = Some((0.0, cfg.t_final));
}

pub(crate) fn symmetrization_equiv(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let (mut cfg, u0) = gaussian_run(ctx, 256, 48.0, 0.5, 2.0, 0.5)?;
    cfg.snapshots = 2;
    let map_tol: f64 = ctx.get("map_tolerance", 1e-8)?;
    let limit: f64 = ctx.get("limit", 1e-6)?;
    ctx.finish()?;
    u0.check_decay()?;
    let original = evolve(&u0, &cfg)?;
    let mapped = symmetrize_map_within(original.last(), MapDirection::Forward, map_tol)?;
    let v0 = symmetrize_map(&u0, MapDirection::Forward)?;
    let sym_cfg = SimulationConfig {
        form: SymbolKind::Symmetrized,
        ..cfg.clone()
    };
    let symmetrized = evolve(&v0, &sym_cfg)?;
    let v = symmetrized.last();
    let rel = (&mapped - v).l2_norm() / v.l2_norm();
    rep.scalar("‖u(T)‖₂", original.last().l2_norm());
    rep.scalar("‖v(T)‖₂", v.l2_norm());
    rep.check("relative L2 difference at T", rel, Relation::Below, limit);
    record_env(rep, &cfg);
    rep.note("box chosen so the sheared image of u(T) stays inside the symmetrized box");
    Ok(())
}

pub(crate) fn picard_contraction(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let (mut cfg, v0) = gaussian_run(ctx, 256, 32.0, 0.1, 2.0, 0.25)?;
    cfg.form = SymbolKind::Symmetrized;
    cfg.substeps = ctx.get("substeps", 128)?;
    cfg.snapshots = 2;
    let ratio_limit: f64 = ctx.get("ratio_limit", 0.5)?;
    let residual_limit: f64 = ctx.get("residual_limit", 1e-5)?;
    let agreement_limit: f64 = ctx.get("agreement_limit", 1e-5)?;
    ctx.finish()?;
    v0.check_decay()?;
    let (traj, diag) = picard_solve(&v0, cfg.t_final, &cfg)?;
    let residual = pde_residual(&traj, SymbolKind::Symmetrized)?;
    let reference = evolve(&v0, &cfg)?;
    let agreement = (reference.last() - traj.last()).l2_norm() / reference.last().l2_norm();
    let iters: Vec<f64> = (1..=diag.differences.len()).map(|k| k as f64).collect();
    rep.series("sup_t difference per iteration", iters.clone(), diag.differences.clone());
    rep.series("contraction ratio", iters[1..].to_vec(), diag.ratios.clone());
    rep.scalar("iterations", diag.iterations as f64);
    rep.scalar("ball radius", diag.ball_radius);
    rep.scalar("final fixed-point residual", diag.final_residual);
    let worst = diag.ratios.iter().cloned().fold(0.0f64, f64::max);
    rep.check("max contraction ratio", worst, Relation::Below, ratio_limit);
    rep.check("PDE residual of the fixed point", residual, Relation::Below, residual_limit);
    rep.check("relative L2 distance to the exponential integrator", agreement, Relation::Below, agreement_limit);
    record_env(rep, &cfg);
    Ok(())
}

pub(crate) fn conservation(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let (mut cfg, u0) = gaussian_run(ctx, 256, 20.0, 0.5, 1.0, 1.0)?;
    cfg.snapshots = ctx.get("snapshots", 41)?;
    let form: SymbolKind = ctx.get("form", SymbolKind::Original)?;
    cfg.form = form;
    let mass_limit: f64 = ctx.get("mass_limit", 1e-10)?;
    let l2_limit: f64 = ctx.get("l2_limit", 1e-8)?;
    ctx.finish()?;
    u0.check_decay()?;
    let traj = evolve(&u0, &cfg)?;
    let (m0, l0) = (u0.mass(), u0.l2_norm());
    let mass: Vec<f64> = traj.snapshots().iter().map(|u| (u.mass() - m0).abs() / m0.abs()).collect();
    let l2: Vec<f64> = traj.snapshots().iter().map(|u| (u.l2_norm() - l0).abs() / l0).collect();
    let worst = |v: &[f64]| v.iter().cloned().fold(0.0f64, f64::max);
    rep.series("relative mass drift", traj.times().to_vec(), mass.clone());
    rep.series("relative L2 drift", traj.times().to_vec(), l2.clone());
    rep.scalar("PDE residual", pde_residual(&traj, form)?);
    rep.check("max relative mass drift", worst(&mass), Relation::Below, mass_limit);
    rep.check("max relative L2 drift", worst(&l2), Relation::Below, l2_limit);
    record_env(rep, &cfg);
    Ok(())
}

pub(crate) fn persistence_audit(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let (mut cfg, u0) = gaussian_run(ctx, 256, 20.0, 0.5, 1.0, 1.0)?;
    cfg.snapshots = ctx.get("snapshots", 41)?;
    let s: f64 = ctx.get("s", 2.0)?;
    let n: u32 = ctx.get("N", 8)?;
    let defect_limit: f64 = ctx.get("defect_limit", 1e-4)?;
    let degenerate_limit: f64 = ctx.get("degenerate_limit", 1e-8)?;
    ctx.finish()?;
    u0.check_decay()?;
    let traj = evolve(&u0, &cfg)?;
    let audit = weighted_energy_audit(&traj, s, n)?;
    let flat = weighted_energy_audit(&traj, 0.0, n)?;
    let l0 = u0.l2_norm();
    let l2_drift = traj
        .snapshots()
        .iter()
        .fold(0.0f64, |m, u| m.max((u.l2_norm() - l0).abs() / l0));
    let margin = audit
        .envelope
        .iter()
        .zip(&audit.weighted)
        .fold(f64::MAX, |m, (e, w)| m.min(e - w));
    rep.series("weighted norm", audit.times.clone(), audit.weighted.clone());
    rep.series("Gronwall envelope", audit.times.clone(), audit.envelope.clone());
    rep.scalar("fitted Gronwall C", audit.gronwall_c);
    rep.scalar("initial-slope C", audit.initial_slope_c);
    rep.scalar("s=0 max relative L2 drift", l2_drift);
    for w in &audit.warnings {
        rep.note(format!("{}: {} cells beyond tolerance (worst {:e})", w.derivative, w.cells, w.worst));
    }
    rep.check("relative identity defect", audit.defect, Relation::Below, defect_limit);
    rep.check("s=0 identity defect", flat.defect, Relation::Below, degenerate_limit);
    rep.scalar("min (envelope - weighted norm)", margin);
    rep.check(
        "envelope dominates at every snapshot",
        if audit.envelope_holds { 0.0 } else { 1.0 },
        Relation::AtMost,
        0.0,
    );
    record_env(rep, &cfg);
    Ok(())
}
