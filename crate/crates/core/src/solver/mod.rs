//! Nonlinear solvers for the original and symmetrized ZK equations and the
//! checks run on their output.

mod audit;
mod integrator;
mod picard;
mod residual;
mod spectral;
mod symmetrize;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, ZkError};
use crate::grid::Grid2D;
use crate::multiplier::SymbolKind;

pub use audit::{weighted_energy_audit, AuditRecord, DerivativeWarning};
pub use integrator::{evolve, nonlinear_step_bound, stable_dt};
pub use picard::{duhamel_apply, picard_solve};
pub use residual::pde_residual;
pub use symmetrize::{map_point, symmetrize_map, symmetrize_map_within, MapDirection};

/// `μ = 4^{-1/3}`.
pub const MU: f64 = 0.629_960_524_947_436_6;
/// `λ = √3 μ`.
pub const LAMBDA: f64 = 1.091_123_635_971_721_4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Picard,
    ExponentialIntegrator,
}

impl std::str::FromStr for Scheme {
    type Err = ZkError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "picard" => Ok(Self::Picard),
            "exponential_integrator" => Ok(Self::ExponentialIntegrator),
            _ => invalid(format!("unknown scheme `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub nx: usize,
    pub ny: usize,
    pub half_length_x: f64,
    pub half_length_y: f64,
    pub t_final: f64,
    /// Time step of the exponential integrator; `None` picks [`stable_dt`].
    pub dt: Option<f64>,
    /// Duhamel quadrature intervals `M` on `[0, T]`.
    pub substeps: usize,
    /// Snapshots written by `evolve`, including `t = 0` and `t = T`.
    pub snapshots: usize,
    pub scheme: Scheme,
    pub form: SymbolKind,
    pub dealias: bool,
    /// `false` runs the linear flow through the same integrator.
    pub nonlinear: bool,
    /// Picard stopping threshold on the relative change.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight `w_N^s` used by the energy audit.
    pub weight_s: f64,
    pub weight_n: u32,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            nx: 256,
            ny: 256,
            half_length_x: 20.0,
            half_length_y: 20.0,
            t_final: 1.0,
            dt: None,
            substeps: 128,
            snapshots: 11,
            scheme: Scheme::ExponentialIntegrator,
            form: SymbolKind::Original,
            dealias: true,
            nonlinear: true,
            tolerance: 1e-10,
            max_iterations: 50,
            weight_s: 2.0,
            weight_n: 8,
        }
    }
}

impl SimulationConfig {
    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.nx, self.ny, self.half_length_x, self.half_length_y)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return invalid(format!("final time must be positive, got {}", self.t_final));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt <= self.t_final) {
                return invalid(format!("time step must lie in (0, T], got {dt}"));
            }
        }
        if self.substeps < 4 {
            return invalid(format!("Duhamel quadrature needs at least 4 substeps, got {}", self.substeps));
        }
        if self.snapshots < 2 {
            return invalid("need at least 2 snapshots");
        }
        if !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return invalid("Picard tolerance and iteration cap must be positive");
        }
        if !(self.weight_s >= 0.0) || self.weight_n == 0 {
            return invalid("audit weight needs s >= 0 and N >= 1");
        }
        Ok(())
    }
}

/// Record of a Picard run, kept whether or not it converged.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PicardDiagnostics {
    /// `sup_t ‖v^{(k+1)}(t) - v^{(k)}(t)‖₂` per iteration.
    pub differences: Vec<f64>,
    /// Consecutive quotients of `differences`.
    pub ratios: Vec<f64>,
    /// Last difference, i.e. `sup_t ‖Ψ(v) - v‖₂` at the returned iterate.
    pub final_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest `sup_t ‖v^{(k)}(t) - V(t)v₀‖₂` seen: the ball radius used.
    pub ball_radius: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((MU.powi(3) - 0.25).abs() < 1e-15);
        assert!((LAMBDA * LAMBDA - 3.0 * MU * MU).abs() < 1e-15);
    }

    #[test]
    fn config_checks() {
        assert!(SimulationConfig::default().validate().is_ok());
        let bad = SimulationConfig {
            substeps: 3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
