//! Periodic grids, real fields and their Fourier coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result, ZkError};

/// Relative amplitude a field may keep at distance `L/2` from the origin.
pub const DECAY_TOLERANCE: f64 = 1e-12;

/// Periodic box `[-Lx, Lx) x [-Ly, Ly)` sampled on `nx x ny` points.
///
/// Samples are stored row-major with `y` selecting the row:
/// index `iy * nx + ix`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub half_length_x: f64,
    pub half_length_y: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, half_length_x: f64, half_length_y: f64) -> Result<Self> {
        if nx < 8 || ny < 8 || !nx.is_multiple_of(2) || !ny.is_multiple_of(2) {
            return invalid(format!("grid {nx}x{ny}: sizes must be even and at least 8"));
        }
        if !(half_length_x > 0.0 && half_length_y > 0.0)
            || !half_length_x.is_finite()
            || !half_length_y.is_finite()
        {
            return invalid("box half-lengths must be positive and finite");
        }
        Ok(Self {
            nx,
            ny,
            half_length_x,
            half_length_y,
        })
    }

    pub fn square(n: usize, half_length: f64) -> Result<Self> {
        Self::new(n, n, half_length, half_length)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length_x / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_length_y / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn x(&self, ix: usize) -> f64 {
        -self.half_length_x + ix as f64 * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        -self.half_length_y + iy as f64 * self.dy()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    /// Signed mode number of FFT index `i` on an axis of `n` points.
    pub fn signed_mode(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Wavenumber `ξ = π j / Lx` of FFT index `i` along x.
    pub fn wavenumber_x(&self, i: usize) -> f64 {
        PI * Self::signed_mode(i, self.nx) as f64 / self.half_length_x
    }

    pub fn wavenumber_y(&self, j: usize) -> f64 {
        PI * Self::signed_mode(j, self.ny) as f64 / self.half_length_y
    }

    pub fn wavenumbers_x(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.wavenumber_x(i)).collect()
    }

    pub fn wavenumbers_y(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.wavenumber_y(j)).collect()
    }

    /// Spacing of the wavenumber lattice, `(π/Lx, π/Ly)`.
    pub fn dk(&self) -> (f64, f64) {
        (PI / self.half_length_x, PI / self.half_length_y)
    }

    pub fn nyquist_x(&self) -> f64 {
        PI / self.dx()
    }

    pub fn nyquist_y(&self) -> f64 {
        PI / self.dy()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return invalid(format!(
                "data length {len} does not match grid {}x{}",
                self.nx, self.ny
            ));
        }
        Ok(())
    }

    pub(crate) fn ensure_same(&self, other: &Grid2D) -> Result<()> {
        if self != other {
            return invalid("operands live on different grids");
        }
        Ok(())
    }
}

/// Real samples of a field on a [`Grid2D`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field2D {
    grid: Grid2D,
    samples: Vec<f64>,
}

impl Field2D {
    pub fn new(grid: Grid2D, samples: Vec<f64>) -> Result<Self> {
        grid.check_len(samples.len())?;
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return invalid(format!("sample {i} is not finite"));
        }
        Ok(Self { grid, samples })
    }

    pub(crate) fn from_parts_unchecked(grid: Grid2D, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self { grid, samples }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut samples = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny {
            let y = grid.y(iy);
            for ix in 0..grid.nx {
                samples.push(f(grid.x(ix), y));
            }
        }
        Self { grid, samples }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.samples[iy * self.grid.nx + ix]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field2D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ u dx dy` by the cell rule.
    pub fn mass(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// `∫ u v dx dy`.
    pub fn inner(&self, other: &Field2D) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_area())
    }

    /// Largest relative amplitude found at radius `>= min(Lx, Ly)/2`.
    pub fn boundary_amplitude(&self) -> f64 {
        let peak = self.sup_norm();
        if peak == 0.0 {
            return 0.0;
        }
        let r = 0.5 * self.grid.half_length_x.min(self.grid.half_length_y);
        let mut worst = 0.0f64;
        for iy in 0..self.grid.ny {
            let y = self.grid.y(iy);
            for ix in 0..self.grid.nx {
                let x = self.grid.x(ix);
                if x * x + y * y >= r * r {
                    worst = worst.max(self.at(ix, iy).abs());
                }
            }
        }
        worst / peak
    }

    /// Enforces the ℝ²-surrogate rule: the field must have decayed below
    /// [`DECAY_TOLERANCE`] (relative to its peak) at distance `L/2`.
    pub fn check_decay(&self) -> Result<()> {
        let a = self.boundary_amplitude();
        if a > DECAY_TOLERANCE {
            return Err(ZkError::DecayPrecondition {
                value: a,
                radius: 0.5 * self.grid.half_length_x.min(self.grid.half_length_y),
            });
        }
        Ok(())
    }
}

impl std::ops::Add for &Field2D {
    type Output = Field2D;
    fn add(self, rhs: &Field2D) -> Field2D {
        self.zip_map(rhs, |a, b| a + b).expect("grid mismatch in Field2D + Field2D")
    }
}

impl std::ops::Sub for &Field2D {
    type Output = Field2D;
    fn sub(self, rhs: &Field2D) -> Field2D {
        self.zip_map(rhs, |a, b| a - b).expect("grid mismatch in Field2D - Field2D")
    }
}

/// Fourier coefficients on the wavenumber lattice of a grid, in FFT order
/// (index `j * nx + i`, `i` along x).
///
/// The normalization approximates the unitary continuum transform
/// `f̂(ξ) = (2π)^{-1} ∫ f(x) e^{-i x·ξ} dx`, so that
/// `Σ |ĉ|² dξ dη = Σ |f|² dx dy`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum2D {
    grid: Grid2D,
    coefficients: Vec<Complex64>,
}

impl Spectrum2D {
    pub fn new(grid: Grid2D, coefficients: Vec<Complex64>) -> Result<Self> {
        grid.check_len(coefficients.len())?;
        Ok(Self { grid, coefficients })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coefficients
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.coefficients[j * self.grid.nx + i]
    }

    pub fn l2_norm(&self) -> f64 {
        let (dk, dl) = self.grid.dk();
        (self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>() * dk * dl).sqrt()
    }

    /// Largest `|c(-k) - conj(c(k))|` over the lattice, relative to the
    /// largest coefficient. Nyquist rows and columns pair with themselves.
    pub fn hermitian_defect(&self) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let peak = self.coefficients.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if peak == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for j in 0..ny {
            let jm = (ny - j) % ny;
            for i in 0..nx {
                let im = (nx - i) % nx;
                let d = (self.at(im, jm) - self.at(i, j).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / peak
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid2D::new(6, 8, 1.0, 1.0).is_err());
        assert!(Grid2D::new(9, 8, 1.0, 1.0).is_err());
        assert!(Grid2D::new(8, 8, 0.0, 1.0).is_err());
        assert!(Grid2D::new(8, 8, 1.0, 1.0).is_ok());
    }

    #[test]
    fn lattice_symmetric_except_nyquist() {
        let g = Grid2D::new(16, 8, 3.0, 2.0).unwrap();
        let ks = g.wavenumbers_x();
        assert_eq!(ks[0], 0.0);
        assert!((ks[8] + PI * 8.0 / 3.0).abs() < 1e-15);
        for j in 1..8 {
            assert_eq!(ks[j], -ks[16 - j]);
        }
        assert!((g.dx() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn field_rejects_wrong_length_and_nan() {
        let g = Grid2D::square(8, 1.0).unwrap();
        assert!(Field2D::new(g, vec![0.0; 63]).is_err());
        let mut v = vec![0.0; 64];
        v[3] = f64::NAN;
        assert!(Field2D::new(g, v).is_err());
    }

    #[test]
    fn decay_check() {
        let g = Grid2D::square(64, 20.0).unwrap();
        let gauss = Field2D::from_fn(g, |x, y| (-(x * x + y * y) / 2.0).exp());
        assert!(gauss.check_decay().is_ok());
        let wide = Field2D::from_fn(g, |x, y| (-(x * x + y * y) / 50.0).exp());
        assert!(matches!(
            wide.check_decay(),
            Err(ZkError::DecayPrecondition { .. })
        ));
        assert!(Field2D::zeros(g).check_decay().is_ok());
    }
}
