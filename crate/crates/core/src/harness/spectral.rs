use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Ctx, EstimateReport, Relation};
use crate::cutoff::dyadic_partition_value;
use crate::error::{invalid, Result};
use crate::fields::{random_suite, SuiteSpec};
use crate::multiplier::SymbolKind;
use crate::par;
use crate::propagator::{
    decay_exponent_fit, free_evolve, free_evolve_unchecked, oscillatory_integral, IntegralKind,
    OscillatoryIntegralSpec,
};

pub(crate) fn unitarity(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let grid = ctx.grid(256, 20.0)?;
    let count: usize = ctx.get("fields", 100)?;
    let times: Vec<f64> = ctx.list("times", vec![0.1, 1.0, 10.0])?;
    let form: String = ctx.get("form", "symmetrized".to_string())?;
    let tol: f64 = ctx.get("tolerance", 1e-12)?;
    ctx.finish()?;
    let kind: SymbolKind = form.parse()?;

    let suite = random_suite(grid, count, ctx.seed, &SuiteSpec::default());
    let per_field = par::map(&suite, |f| -> Result<(f64, f64)> {
        let norm = f.l2_norm();
        let mut unit = 0.0f64;
        let mut group = 0.0f64;
        let evolved: Vec<_> = times
            .iter()
            .map(|&t| free_evolve(f, t, kind))
            .collect::<Result<_>>()?;
        for e in &evolved {
            unit = unit.max((e.l2_norm() / norm - 1.0).abs());
        }
        for &t in &times {
            for (j, &s) in times.iter().enumerate() {
                let twice = free_evolve_unchecked(&evolved[j], t, kind);
                let once = free_evolve_unchecked(f, t + s, kind);
                group = group.max((&twice - &once).l2_norm() / norm);
            }
        }
        Ok((unit, group))
    });
    let per_field: Vec<(f64, f64)> = per_field.into_iter().collect::<Result<_>>()?;
    let unit = per_field.iter().fold(0.0f64, |m, p| m.max(p.0));
    let group = per_field.iter().fold(0.0f64, |m, p| m.max(p.1));
    let idx: Vec<f64> = (0..count).map(|i| i as f64).collect();
    rep.series("norm_deviation", idx.clone(), per_field.iter().map(|p| p.0).collect());
    rep.series("group_law_defect", idx, per_field.iter().map(|p| p.1).collect());
    rep.check("max |‖V(t)f‖/‖f‖ - 1|", unit, Relation::Below, tol);
    rep.check("max ‖V(t)V(s)f - V(t+s)f‖/‖f‖", group, Relation::Below, tol);
    rep.environment.grid = Some((grid.nx, grid.ny));
    rep.environment.half_lengths = Some((grid.half_length_x, grid.half_length_y));
    Ok(())
}

pub(crate) fn partition_unity(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let k_max: u32 = ctx.get("K", 6)?;
    let points: usize = ctx.get("points", 10_000)?;
    let tol: f64 = ctx.get("tolerance", 1e-12)?;
    ctx.finish()?;
    if k_max > 40 {
        return invalid("K above 40 is outside double-precision range of the partition");
    }
    let r = 2f64.powi(k_max as i32) - 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let pts: Vec<(f64, f64)> = (0..points)
        .map(|_| (rng.gen_range(-r..=r), rng.gen_range(-r..=r)))
        .collect();
    let defects = par::map(&pts, |&(xi, eta)| -> Result<(f64, f64, f64)> {
        let mut sum = 0.0;
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for k in 0..=k_max as i64 {
            let v = dyadic_partition_value(k, xi, eta)?;
            lo = lo.min(v);
            hi = hi.max(v);
            sum += v;
        }
        Ok(((sum - 1.0).abs(), lo, hi))
    });
    let defects: Vec<(f64, f64, f64)> = defects.into_iter().collect::<Result<_>>()?;
    let worst = defects.iter().fold(0.0f64, |m, d| m.max(d.0));
    let lo = defects.iter().fold(f64::MAX, |m, d| m.min(d.1));
    let hi = defects.iter().fold(f64::MIN, |m, d| m.max(d.2));
    rep.scalar("min psi_k", lo);
    rep.scalar("max psi_k", hi);
    rep.check("max |Σψ_k - 1|", worst, Relation::Below, tol);
    rep.check("psi_k within [0, 1]", (lo.min(0.0).abs()).max(hi - 1.0).max(0.0), Relation::AtMost, 0.0);
    Ok(())
}

pub(crate) fn decay(ctx: &Ctx, rep: &mut EstimateReport) -> Result<()> {
    let epsilons: Vec<f64> = ctx.list("epsilon", vec![0.0, 0.25, 0.5])?;
    let times: Vec<f64> = ctx.list("times", vec![5.0, 10.0, 20.0, 40.0, 80.0])?;
    let k: f64 = ctx.get("K", 8.0)?;
    let kind: String = ctx.get("kind", "I".to_string())?;
    let slope_tol: f64 = ctx.get("slope_tolerance", 0.05)?;
    ctx.finish()?;
    let kind = match kind.as_str() {
        "I" => IntegralKind::I,
        "J" => IntegralKind::J,
        _ => return invalid(format!("kind must be I or J, got `{kind}`")),
    };
    let jobs: Vec<(f64, f64)> = epsilons
        .iter()
        .flat_map(|&e| times.iter().map(move |&t| (e, t)))
        .collect();
    let values = par::map(&jobs, |&(epsilon, t)| {
        oscillatory_integral(&OscillatoryIntegralSpec {
            kind,
            epsilon,
            cutoff_radius: k,
            x: 0.0,
            y: 0.0,
            t,
        })
        .map(|v| v.norm())
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    for (i, &eps) in epsilons.iter().enumerate() {
        let mags = &values[i * times.len()..(i + 1) * times.len()];
        let samples: Vec<(f64, f64)> = times.iter().copied().zip(mags.iter().copied()).collect();
        let (slope, r2) = decay_exponent_fit(&samples)?;
        let expected = -(2.0 + eps) / 3.0;
        let scaled: Vec<f64> = samples.iter().map(|&(t, m)| m * t.powf(-expected)).collect();
        rep.series(format!("|I_t(0,0)| eps={eps}"), times.clone(), mags.to_vec());
        rep.scalar(format!("slope eps={eps}"), slope);
        rep.scalar(format!("r2 eps={eps}"), r2);
        rep.scalar(format!("C spread eps={eps}"), super::spread(&scaled));
        rep.check(
            format!("|slope - ({expected:.4})| eps={eps}"),
            (slope - expected).abs(),
            Relation::AtMost,
            slope_tol,
        );
    }
    rep.environment.window = times.first().zip(times.last()).map(|(a, b)| (*a, *b));
    rep.note(format!("band-limited with smooth cutoff radius K = {k}, evaluated at the origin"));
    Ok(())
}
