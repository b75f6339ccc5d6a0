//! Mixed space-time norms and the ten-component solution metric.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, ZkError};
use crate::grid::Field2D;
use crate::multiplier::{fractional_derivative, partial, DerivativeKind};
use crate::par;
use crate::trajectory::Trajectory;
use crate::weights::{sobolev_norm, weighted_l2_with, WeightSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    Two,
    Inf,
}

/// Nested norm, listed outermost first: `L^∞_x L²_{yT}` is
/// `[(X, Inf), (Y, Two), (T, Two)]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub order: [(Axis, Exponent); 3],
}

impl MixedNormSpec {
    pub fn new(order: [(Axis, Exponent); 3]) -> Result<Self> {
        for a in [Axis::X, Axis::Y, Axis::T] {
            if order.iter().filter(|(b, _)| *b == a).count() != 1 {
                return invalid(format!("mixed norm must name each of x, y, t once: {order:?}"));
            }
        }
        Ok(Self { order })
    }

    /// `L^p_a L^q_{bc}`: outer axis with `p`, remaining two (in the given
    /// order) with `q`.
    pub fn outer(a: Axis, p: Exponent, b: Axis, c: Axis, q: Exponent) -> Result<Self> {
        Self::new([(a, p), (b, q), (c, q)])
    }
}

impl std::str::FromStr for MixedNormSpec {
    type Err = ZkError;
    /// `x:inf,y:2,t:2` (outermost first).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return invalid(format!("mixed norm `{s}` must list three axes"));
        }
        let mut order = [(Axis::X, Exponent::Two); 3];
        for (k, p) in parts.iter().enumerate() {
            let (a, e) = p
                .split_once(':')
                .ok_or_else(|| ZkError::InvalidInput(format!("malformed entry `{p}`")))?;
            let axis = match a {
                "x" => Axis::X,
                "y" => Axis::Y,
                "t" => Axis::T,
                _ => return invalid(format!("unknown axis `{a}`")),
            };
            let exp = match e {
                "2" => Exponent::Two,
                "inf" => Exponent::Inf,
                _ => return invalid(format!("exponent `{e}` not in {{2, inf}}")),
            };
            order[k] = (axis, exp);
        }
        Self::new(order)
    }
}

/// Evaluates a nested norm, innermost first. `L²` in space is the cell sum,
/// in time the trapezoid over the stored times; `L^∞` is a sample max.
pub fn mixed_norm(traj: &Trajectory, spec: &MixedNormSpec) -> Result<f64> {
    let g = *traj.grid();
    let tw = traj.trapezoid_weights();
    let (nt, ny, nx) = (traj.len(), g.ny, g.nx);
    let mut dims: Vec<(Axis, usize)> = vec![(Axis::T, nt), (Axis::Y, ny), (Axis::X, nx)];
    let mut data: Vec<f64> = Vec::with_capacity(nt * ny * nx);
    for s in traj.snapshots() {
        data.extend(s.samples().iter().map(|v| v.abs()));
    }
    for &(axis, exp) in spec.order.iter().rev() {
        let pos = dims.iter().position(|d| d.0 == axis).expect("validated spec");
        let weights: Vec<f64> = match axis {
            Axis::X => vec![g.dx(); nx],
            Axis::Y => vec![g.dy(); ny],
            Axis::T => tw.clone(),
        };
        data = reduce(&data, &dims, pos, exp, &weights);
        dims.remove(pos);
    }
    Ok(data[0])
}

fn reduce(data: &[f64], dims: &[(Axis, usize)], pos: usize, exp: Exponent, w: &[f64]) -> Vec<f64> {
    let n = dims[pos].1;
    let inner: usize = dims[pos + 1..].iter().map(|d| d.1).product();
    let outer: usize = dims[..pos].iter().map(|d| d.1).product();
    let mut out = vec![0.0; outer * inner];
    for o in 0..outer {
        for i in 0..inner {
            let mut acc = 0.0f64;
            for k in 0..n {
                let v = data[(o * n + k) * inner + i];
                match exp {
                    Exponent::Two => acc += w[k] * v * v,
                    Exponent::Inf => acc = acc.max(v),
                }
            }
            out[o * inner + i] = match exp {
                Exponent::Two => acc.sqrt(),
                Exponent::Inf => acc,
            };
        }
    }
    out
}

/// The ten norms `n₁ … n₁₀` and their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub components: [f64; 10],
    pub total: f64,
}

impl NormReport {
    pub fn from_components(components: [f64; 10]) -> Self {
        Self {
            components,
            total: components.iter().sum(),
        }
    }
}

/// `n₁ = ‖v‖_{L^∞_T H^s}`, `n₂,n₃ = ‖D^s_{x,y} v_x‖_{L^∞_x L²_{yT}}`,
/// `n₄ = ‖v_x‖_{L²_T L^∞_{xy}}`, `n₅ = ‖v‖_{L²_x L^∞_{yT}}`,
/// `n₆,n₇ = ‖D^s_{x,y} v_y‖_{L^∞_y L²_{xT}}`, `n₈ = ‖v_y‖_{L²_T L^∞_{xy}}`,
/// `n₉ = ‖v‖_{L²_y L^∞_{xT}}`, `n₁₀ = ‖v‖_{L^∞_T L²((|x|+|y|)^s)}`.
/// At `s = 1` the `D^s` factors become `∂x`, `∂y`.
pub fn triple_norm(traj: &Trajectory, s: f64) -> Result<NormReport> {
    if !(s > 0.75) {
        return invalid(format!("the solution metric needs s > 3/4, got {s}"));
    }
    traj.snapshots()[0].check_decay()?;
    let times = traj.times().to_vec();
    let deriv = |f: &Field2D, axis: usize| -> Result<Field2D> {
        if s == 1.0 {
            Ok(partial(f, axis))
        } else {
            let kind = if axis == 0 { DerivativeKind::X } else { DerivativeKind::Y };
            fractional_derivative(f, kind, s)
        }
    };
    let build = |op: &(dyn Fn(&Field2D) -> Result<Field2D> + Sync)| -> Result<Trajectory> {
        let snaps: Result<Vec<Field2D>> = traj.snapshots().iter().map(op).collect();
        Trajectory::new(times.clone(), snaps?)
    };
    use Axis::{T, X, Y};
    use Exponent::{Inf, Two};
    let li_x = MixedNormSpec::outer(X, Inf, Y, T, Two)?;
    let li_y = MixedNormSpec::outer(Y, Inf, X, T, Two)?;
    let l2t_li = MixedNormSpec::outer(T, Two, X, Y, Inf)?;
    let l2x_li = MixedNormSpec::outer(X, Two, Y, T, Inf)?;
    let l2y_li = MixedNormSpec::outer(Y, Two, X, T, Inf)?;

    let weight = WeightSpec::AbsoluteSum(0.5 * s).sample(*traj.grid())?;
    let tasks: Vec<usize> = (0..10).collect();
    let values: Vec<Result<f64>> = par::map(&tasks, |&k| -> Result<f64> {
        match k {
            0 => traj
                .snapshots()
                .iter()
                .map(|f| sobolev_norm(f, s))
                .try_fold(0.0f64, |m, v| v.map(|v| m.max(v))),
            1 => mixed_norm(&build(&|f| deriv(&partial(f, 0), 0))?, &li_x),
            2 => mixed_norm(&build(&|f| deriv(&partial(f, 0), 1))?, &li_x),
            3 => mixed_norm(&build(&|f| Ok(partial(f, 0)))?, &l2t_li),
            4 => mixed_norm(traj, &l2x_li),
            5 => mixed_norm(&build(&|f| deriv(&partial(f, 1), 0))?, &li_y),
            6 => mixed_norm(&build(&|f| deriv(&partial(f, 1), 1))?, &li_y),
            7 => mixed_norm(&build(&|f| Ok(partial(f, 1)))?, &l2t_li),
            8 => mixed_norm(traj, &l2y_li),
            _ => Ok(traj
                .snapshots()
                .iter()
                .map(|f| weighted_l2_with(f, &weight))
                .fold(0.0, f64::max)),
        }
    });
    let mut c = [0.0; 10];
    for (k, v) in values.into_iter().enumerate() {
        c[k] = v?;
    }
    Ok(NormReport::from_components(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::gaussian;
    use crate::grid::Grid2D;
    use crate::multiplier::SymbolKind;
    use crate::propagator::free_evolve_unchecked;

    fn sep_traj() -> (Trajectory, Vec<f64>, Vec<f64>, Vec<f64>) {
        let g = Grid2D::new(16, 8, 2.0, 1.0).unwrap();
        let times = vec![0.0, 0.2, 0.5, 1.0];
        let a = |x: f64| 1.0 + 0.5 * x.sin();
        let b = |y: f64| (-(y * y)).exp();
        let c = |t: f64| 1.0 + t;
        let traj = Trajectory::from_fn(times.clone(), |t| Field2D::from_fn(g, |x, y| a(x) * b(y) * c(t))).unwrap();
        let av: Vec<f64> = g.xs().into_iter().map(a).collect();
        let bv: Vec<f64> = g.ys().into_iter().map(b).collect();
        let cv: Vec<f64> = times.iter().map(|&t| c(t)).collect();
        (traj, av, bv, cv)
    }

    #[test]
    fn separable_norms_factor() {
        let (traj, a, b, c) = sep_traj();
        let g = *traj.grid();
        let a_inf = a.iter().cloned().fold(0.0, f64::max);
        let b2 = (b.iter().map(|v| v * v).sum::<f64>() * g.dy()).sqrt();
        let tw = traj.trapezoid_weights();
        let c2 = c.iter().zip(&tw).map(|(v, w)| w * v * v).sum::<f64>().sqrt();
        let spec: MixedNormSpec = "x:inf,y:2,t:2".parse().unwrap();
        let got = mixed_norm(&traj, &spec).unwrap();
        assert!((got - a_inf * b2 * c2).abs() < 1e-10 * got);
    }

    #[test]
    fn all_two_is_spacetime_l2() {
        let (traj, ..) = sep_traj();
        let tw = traj.trapezoid_weights();
        let direct: f64 = traj
            .snapshots()
            .iter()
            .zip(&tw)
            .map(|(f, w)| w * f.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt();
        for s in ["x:2,y:2,t:2", "t:2,x:2,y:2", "y:2,t:2,x:2"] {
            let got = mixed_norm(&traj, &s.parse().unwrap()).unwrap();
            assert!((got - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn constant_one() {
        let g = Grid2D::square(8, 3.0).unwrap();
        let traj = Trajectory::from_fn(Trajectory::uniform_times(1.0, 5), |_| Field2D::from_fn(g, |_, _| 1.0)).unwrap();
        let v = mixed_norm(&traj, &"t:2,x:inf,y:inf".parse().unwrap()).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_specs() {
        assert!("x:inf,x:2,t:2".parse::<MixedNormSpec>().is_err());
        assert!("x:3,y:2,t:2".parse::<MixedNormSpec>().is_err());
        assert!("x:inf,y:2".parse::<MixedNormSpec>().is_err());
    }

    #[test]
    fn triple_norm_zero_and_free() {
        let g = Grid2D::square(64, 16.0).unwrap();
        let zero = Trajectory::from_fn(vec![0.0, 0.5, 1.0], |_| Field2D::zeros(g)).unwrap();
        let r = triple_norm(&zero, 0.9).unwrap();
        assert_eq!(r.total, 0.0);
        let v0 = gaussian(g, 1.0, 1.0, (0.0, 0.0));
        let free = Trajectory::from_fn(vec![0.0, 0.5, 1.0], |t| free_evolve_unchecked(&v0, t, SymbolKind::Symmetrized)).unwrap();
        let r = triple_norm(&free, 0.9).unwrap();
        let hs = sobolev_norm(&v0, 0.9).unwrap();
        assert!((r.components[0] - hs).abs() < 1e-10 * hs);
        assert!(r.components.iter().all(|&c| c > 0.0));
        assert!((r.total - r.components.iter().sum::<f64>()).abs() < 1e-15);
        assert!(triple_norm(&free, 0.5).is_err());
    }
}
