use super::{Ctx, EstimateReport, Relation};
use crate::error::{invalid, Result};
use crate::fft::Grid1D;
use crate::fields::{random_suite, random_suite_1d, SuiteSpec};
use crate::fit::{fit_constant, violations};
use crate::grid::Field2D;
use crate::inequalities::{interpolation_check, leibniz_defect, InterpolationWeight};
use crate::par;
use crate::stein::{
    norm_equivalence_check, phase_stein_derivative, stein_derivative, stein_phase_bound,
    SteinQuadratureConfig,
};

pub(crate) fn interpolation(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let grid = ctx.grid(256, 20.0)?;
    let count: usize = ctx.get("fields", 50)?;
    let a: f64 = ctx.get("a", 2.0)?;
    let b: f64 = ctx.get("b", 1.0)?;
    let theta: f64 = ctx.get("theta", 0.5)?;
    let ns: Vec<u32> = ctx.list("N", vec![4, 16, 64])?;
    let tol: f64 = ctx.get("spread_limit", 0.1)?;
    ctx.finish()?;
    let suite = random_suite(grid, count, ctx.seed, &SuiteSpec::default());
    let mut weights = vec![InterpolationWeight::Bracket];
    weights.extend(ns.iter().map(|&n| InterpolationWeight::Truncated(n)));
    let mut truncated = Vec::new();
    for w in weights {
        let sides = par::map(&suite, |f| interpolation_check(f, a, b, theta, w));
        let (lhs, rhs): (Vec<f64>, Vec<f64>) = sides.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
        let fit = fit_constant(&lhs, &rhs)?;
        let label = match w {
            InterpolationWeight::Bracket => "bracket".to_string(),
            InterpolationWeight::Truncated(n) => {
                truncated.push(fit.envelope);
                format!("w_{n}")
            }
        };
        rep.check(
            format!("{label}: violations at fitted C"),
            violations(&lhs, &rhs, fit.envelope, 1e-12) as f64,
            Relation::AtMost,
            0.0,
        );
        rep.constant(label, fit);
    }
    if !truncated.is_empty() {
        let ns_f: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        rep.series("fitted C vs N", ns_f, truncated.clone());
        rep.check("spread of fitted C across N", super::spread(&truncated), Relation::Below, tol);
    }
    rep.environment.grid = Some((grid.nx, grid.ny));
    rep.environment.half_lengths = Some((grid.half_length_x, grid.half_length_y));
    Ok(())
}

pub(crate) fn leibniz(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let n: usize = ctx.get("n", 1024)?;
    let half_length: f64 = ctx.get("box", 20.0)?;
    let count: usize = ctx.get("pairs", 50)?;
    let alphas: Vec<f64> = ctx.list("alpha", vec![0.25, 0.5, 0.75])?;
    ctx.finish()?;
    let grid = Grid1D::new(n, half_length)?;
    let xs: Vec<f64> = (0..n).map(|i| grid.x(i)).collect();
    let spec = SuiteSpec::default();
    let fs = random_suite_1d(&xs, count, ctx.seed, &spec);
    let gs = random_suite_1d(&xs, count, ctx.seed.wrapping_add(1), &spec);
    // Fresh pairs never seen by the fit.
    let hf = random_suite_1d(&xs, count, ctx.seed.wrapping_add(2), &spec);
    let hg = random_suite_1d(&xs, count, ctx.seed.wrapping_add(3), &spec);
    let eval = |fs: &[Vec<f64>], gs: &[Vec<f64>], alpha: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let idx: Vec<usize> = (0..fs.len()).collect();
        let sides = par::map(&idx, |&i| leibniz_defect(&grid, &fs[i], &gs[i], alpha));
        Ok(sides.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip())
    };
    for &alpha in &alphas {
        let (lhs, rhs) = eval(&fs, &gs, alpha)?;
        let fit = fit_constant(&lhs, &rhs)?;
        let (hl, hr) = eval(&hf, &hg, alpha)?;
        rep.check(
            format!("alpha={alpha}: violations at fitted C"),
            violations(&lhs, &rhs, fit.envelope, 1e-12) as f64,
            Relation::AtMost,
            0.0,
        );
        rep.scalar(
            format!("alpha={alpha}: held-out violations"),
            violations(&hl, &hr, fit.envelope, 1e-12) as f64,
        );
        rep.constant(format!("alpha={alpha}"), fit);
    }
    rep.environment.half_lengths = Some((half_length, 0.0));
    rep.note(format!("1D periodic grid with {n} points; f from seed, g from seed+1"));
    Ok(())
}

pub(crate) fn stein_bound(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let times: Vec<f64> = ctx.list("times", vec![0.5, 1.0, 2.0, 4.0])?;
    let points: Vec<f64> = ctx.list("x1", vec![0.0, 0.5, 1.0, 2.0])?;
    let bs: Vec<f64> = ctx.list("b", vec![0.25, 0.5])?;
    let tol: f64 = ctx.get("tolerance", 1e-6)?;
    ctx.finish()?;
    for &b in &bs {
        let jobs: Vec<(f64, f64)> = times
            .iter()
            .flat_map(|&t| points.iter().map(move |&x| (t, x)))
            .collect();
        let sides = par::map(&jobs, |&(t, x)| -> Result<(f64, f64)> {
            Ok((phase_stein_derivative(t, x, b)?, stein_phase_bound(t, x, b)?))
        });
        let (lhs, rhs): (Vec<f64>, Vec<f64>) = sides.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
        let fit = fit_constant(&lhs, &rhs)?;
        rep.series(format!("b={b}: measured"), (0..lhs.len()).map(|i| i as f64).collect(), lhs.clone());
        rep.check(
            format!("b={b}: violations at fitted C (tol {tol:e})"),
            violations(&lhs, &rhs, fit.envelope, tol) as f64,
            Relation::AtMost,
            0.0,
        );
        rep.constant(format!("b={b}"), fit);
    }
    rep.note("series index runs over times (outer) and x1 (inner)");
    Ok(())
}

pub(crate) fn stein_products(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let grid = ctx.grid(256, 20.0)?;
    let count: usize = ctx.get("pairs", 30)?;
    let b: f64 = ctx.get("b", 0.5)?;
    let tol: f64 = ctx.get("tolerance", 1e-6)?;
    ctx.finish()?;
    if !(b > 0.0 && b < 1.0) {
        return invalid("b must lie in (0, 1)");
    }
    let spec = SuiteSpec::default();
    let fs = random_suite(grid, count, ctx.seed, &spec);
    let gs = random_suite(grid, count, ctx.seed.wrapping_add(1), &spec);
    let cfg = SteinQuadratureConfig::for_grid(&grid, b);
    let idx: Vec<usize> = (0..count).collect();
    let per_pair = par::map(&idx, |&i| -> Result<(f64, f64)> {
        let (f, g) = (&fs[i], &gs[i]);
        let fg = f.zip_map(g, |a, b| a * b)?;
        let d_fg = stein_derivative(&fg, b, &cfg)?;
        let d_f = stein_derivative(f, b, &cfg)?;
        let d_g = stein_derivative(g, b, &cfg)?;
        let f_inf = f.sup_norm();
        let bound = Field2D::from_parts_unchecked(
            grid,
            (0..grid.len())
                .map(|k| f_inf * d_g.samples()[k] + g.samples()[k].abs() * d_f.samples()[k])
                .collect(),
        );
        let scale = bound.sup_norm();
        let pointwise = d_fg
            .samples()
            .iter()
            .zip(bound.samples())
            .fold(f64::MIN, |m, (l, r)| m.max((l - r) / scale));
        let f_dg = f.zip_map(&d_g, |a, b| a * b)?.l2_norm();
        let g_df = g.zip_map(&d_f, |a, b| a * b)?.l2_norm();
        let rhs = f_dg + g_df;
        Ok((pointwise, (d_fg.l2_norm() - rhs) / rhs))
    });
    let per_pair: Vec<(f64, f64)> = per_pair.into_iter().collect::<Result<_>>()?;
    let idx_f: Vec<f64> = idx.iter().map(|&i| i as f64).collect();
    let pointwise: Vec<f64> = per_pair.iter().map(|p| p.0).collect();
    let norm: Vec<f64> = per_pair.iter().map(|p| p.1).collect();
    let worst = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max);
    rep.series("pointwise max excess / sup bound", idx_f.clone(), pointwise.clone());
    rep.series("norm excess / bound", idx_f, norm.clone());
    rep.check("pointwise product rule: max relative excess", worst(&pointwise), Relation::AtMost, tol);
    rep.check("norm product rule: max relative excess", worst(&norm), Relation::AtMost, tol);
    rep.environment.grid = Some((grid.nx, grid.ny));
    rep.environment.half_lengths = Some((grid.half_length_x, grid.half_length_y));
    Ok(())
}

pub(crate) fn norm_equivalence(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let grid = ctx.grid(256, 20.0)?;
    let count: usize = ctx.get("fields", 50)?;
    let b: f64 = ctx.get("b", 0.5)?;
    ctx.finish()?;
    let suite = random_suite(grid, count, ctx.seed, &SuiteSpec::default());
    let sides = par::map(&suite, |f| norm_equivalence_check(f, b));
    let sides: Vec<(f64, f64)> = sides.into_iter().collect::<Result<_>>()?;
    let ratios: Vec<f64> = sides.iter().map(|(j, s)| j / s).collect();
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    rep.series("‖J^b f‖ / (‖f‖ + ‖𝒟^b f‖)", (0..count).map(|i| i as f64).collect(), ratios);
    rep.scalar("max ratio", hi);
    rep.check("min ratio", lo, Relation::Above, 0.0);
    rep.check("max/min ratio", hi / lo, Relation::Below, f64::MAX);
    rep.environment.grid = Some((grid.nx, grid.ny));
    rep.environment.half_lengths = Some((grid.half_length_x, grid.half_length_y));
    Ok(())
}
