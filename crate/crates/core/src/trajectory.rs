use crate::error::{invalid, Result};
use crate::grid::{Field2D, Grid2D};

/// Snapshots of one solution at strictly increasing times starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    grid: Grid2D,
    times: Vec<f64>,
    snapshots: Vec<Field2D>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, snapshots: Vec<Field2D>) -> Result<Self> {
        if snapshots.is_empty() || times.len() != snapshots.len() {
            return invalid(format!(
                "trajectory needs one snapshot per time ({} times, {} snapshots)",
                times.len(),
                snapshots.len()
            ));
        }
        if times[0] != 0.0 {
            return invalid(format!("trajectory must start at t = 0, got {}", times[0]));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("trajectory times must be strictly increasing");
        }
        let grid = *snapshots[0].grid();
        for s in &snapshots[1..] {
            grid.ensure_same(s.grid())?;
        }
        Ok(Self {
            grid,
            times,
            snapshots,
        })
    }

    /// Samples `f(t)` at the given times.
    pub fn from_fn(times: Vec<f64>, f: impl Fn(f64) -> Field2D) -> Result<Self> {
        let snapshots = times.iter().map(|&t| f(t)).collect();
        Self::new(times, snapshots)
    }

    /// `count` equally spaced times on `[0, t_final]`, inclusive.
    pub fn uniform_times(t_final: f64, count: usize) -> Vec<f64> {
        if count <= 1 {
            return vec![0.0];
        }
        (0..count)
            .map(|j| t_final * j as f64 / (count - 1) as f64)
            .collect()
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[Field2D] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn last(&self) -> &Field2D {
        self.snapshots.last().expect("nonempty")
    }

    pub fn map(&self, f: impl Fn(f64, &Field2D) -> Field2D) -> Self {
        Self {
            grid: self.grid,
            times: self.times.clone(),
            snapshots: self
                .times
                .iter()
                .zip(&self.snapshots)
                .map(|(&t, s)| f(t, s))
                .collect(),
        }
    }

    /// Trapezoid weights for integrating over the stored times.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.times)
    }

    /// Largest `‖a(t) - b(t)‖₂` over the shared times.
    pub fn max_l2_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.times != other.times {
            return invalid("trajectories sampled at different times");
        }
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .snapshots
            .iter()
            .zip(&other.snapshots)
            .map(|(a, b)| (a - b).l2_norm())
            .fold(0.0, f64::max))
    }
}

pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = times[k + 1] - times[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let g = Grid2D::square(8, 1.0).unwrap();
        let z = Field2D::zeros(g);
        assert!(Trajectory::new(vec![], vec![]).is_err());
        assert!(Trajectory::new(vec![0.1], vec![z.clone()]).is_err());
        assert!(Trajectory::new(vec![0.0, 0.0], vec![z.clone(), z.clone()]).is_err());
        let other = Field2D::zeros(Grid2D::square(16, 1.0).unwrap());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![z.clone(), other]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![z.clone(), z]).is_ok());
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let t = [0.0, 0.3, 1.0, 1.2];
        let w = trapezoid_weights(&t);
        let s: f64 = t.iter().zip(&w).map(|(t, w)| t * w).sum();
        assert!((s - 0.72).abs() < 1e-15);
    }
}
