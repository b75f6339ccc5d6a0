//! Raw-DFT helpers shared by the integrators. Coefficients here are the
//! unnormalized DFT of the samples; multipliers commute with the box offset
//! phase, so no centring is needed.

use num_complex::Complex64;

use crate::fft::Plan2;
use crate::grid::{Field2D, Grid2D};
use crate::multiplier::SymbolKind;
use crate::par;

use super::MU;

pub(crate) type Coeffs = Vec<Complex64>;

pub(crate) struct SpectralOps {
    pub grid: Grid2D,
    plan: Plan2,
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
    keep: Vec<bool>,
    form: SymbolKind,
    dealias: bool,
}

impl SpectralOps {
    pub fn new(grid: Grid2D, form: SymbolKind, dealias: bool) -> Self {
        let kx = grid.wavenumbers_x();
        let ky = grid.wavenumbers_y();
        let (cx, cy) = (2.0 / 3.0 * grid.nyquist_x(), 2.0 / 3.0 * grid.nyquist_y());
        let mut keep = vec![true; grid.len()];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                keep[j * grid.nx + i] = kx[i].abs() < cx && ky[j].abs() < cy;
            }
        }
        Self {
            grid,
            plan: Plan2::for_grid(&grid),
            kx,
            ky,
            keep,
            form,
            dealias,
        }
    }

    /// Largest wavenumber the nonlinearity can excite.
    pub fn max_active_wavenumber(&self) -> f64 {
        let f = if self.dealias { 2.0 / 3.0 } else { 1.0 };
        f * self.grid.nyquist_x().max(self.grid.nyquist_y())
    }

    pub fn forward(&self, field: &Field2D) -> Coeffs {
        let mut buf: Coeffs = field.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.plan.forward(&mut buf);
        buf
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Field2D {
        let mut buf = coeffs.to_vec();
        self.plan.inverse(&mut buf);
        let n = self.grid.len() as f64;
        Field2D::new(self.grid, buf.into_iter().map(|c| c.re / n).collect())
            .unwrap_or_else(|_| Field2D::zeros(self.grid).map(|_| f64::NAN))
    }

    pub fn dispersion(&self, idx: usize) -> f64 {
        let (i, j) = (idx % self.grid.nx, idx / self.grid.nx);
        self.form.dispersion(self.kx[i], self.ky[j])
    }

    /// `e^{itω}` per mode.
    pub fn propagator(&self, t: f64) -> Coeffs {
        par::map_range(self.grid.len(), |idx| Complex64::from_polar(1.0, t * self.dispersion(idx)))
    }

    /// Fourier image of the right-hand side's nonlinear part:
    /// `-∂x(u²/2)` or `-μ(∂x+∂y)(v²/2)`, dealiased before and after the
    /// product when enabled.
    pub fn nonlinear(&self, coeffs: &[Complex64]) -> Coeffs {
        let mut buf = coeffs.to_vec();
        if self.dealias {
            self.truncate(&mut buf);
        }
        self.plan.inverse(&mut buf);
        let n = self.grid.len() as f64;
        for c in buf.iter_mut() {
            let v = c.re / n;
            *c = Complex64::new(0.5 * v * v, 0.0);
        }
        self.plan.forward(&mut buf);
        let nx = self.grid.nx;
        for (idx, c) in buf.iter_mut().enumerate() {
            let (xi, eta) = (self.kx[idx % nx], self.ky[idx / nx]);
            let d = match self.form {
                SymbolKind::Original => xi,
                SymbolKind::Symmetrized => MU * (xi + eta),
            };
            *c *= Complex64::new(0.0, -d);
        }
        if self.dealias {
            self.truncate(&mut buf);
        }
        buf
    }

    fn truncate(&self, buf: &mut [Complex64]) {
        for (c, &k) in buf.iter_mut().zip(&self.keep) {
            if !k {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// `Σ |c|²` scaled to the grid L² norm.
    pub fn l2_norm(&self, coeffs: &[Complex64]) -> f64 {
        let s: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        (s * self.grid.cell_area() / self.grid.len() as f64).sqrt()
    }

    /// Spectral partial derivatives `(∂x f, ∂y f)`.
    pub fn gradient(&self, coeffs: &[Complex64]) -> (Field2D, Field2D) {
        let nx = self.grid.nx;
        let dx: Coeffs = coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * Complex64::new(0.0, self.kx[idx % nx]))
            .collect();
        let dy: Coeffs = coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * Complex64::new(0.0, self.ky[idx / nx]))
            .collect();
        (self.inverse(&dx), self.inverse(&dy))
    }
}

pub(crate) fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn hadamard(a: &[Complex64], b: &[Complex64]) -> Coeffs {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}
