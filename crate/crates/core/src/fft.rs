//! Discrete Fourier transforms on [`Grid2D`] with the unitary normalization
//! of [`Spectrum2D`].
//!
//! Plans are cached per grid shape behind a mutex; the cached `Arc<dyn Fft>`
//! handles are `Send + Sync`, so concurrent transforms on distinct inputs
//! are safe.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Result;
use crate::grid::{Field2D, Grid2D, Spectrum2D};
use crate::par;

#[derive(Clone)]
struct AxisPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn axis_plans(n: usize) -> AxisPlans {
    static CACHE: OnceLock<Mutex<HashMap<usize, AxisPlans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            AxisPlans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            }
        })
        .clone()
}

/// Unnormalized 2D DFT on a row-major `ny x nx` buffer.
///
/// `forward` computes `F_k = Σ f_m e^{-2πi k·m/n}`; `inverse` the same with
/// `+i` and no `1/N` factor.
#[derive(Clone)]
pub struct Plan2 {
    nx: usize,
    ny: usize,
    x: AxisPlans,
    y: AxisPlans,
}

impl Plan2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            x: axis_plans(nx),
            y: axis_plans(ny),
        }
    }

    pub fn for_grid(g: &Grid2D) -> Self {
        Self::new(g.nx, g.ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.x.forward, &self.y.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.x.inverse, &self.y.inverse);
    }

    fn run(&self, data: &mut [Complex64], fx: &Arc<dyn Fft<f64>>, fy: &Arc<dyn Fft<f64>>) {
        let (nx, ny) = (self.nx, self.ny);
        assert_eq!(data.len(), nx * ny);
        rows(data, nx, fx);
        let mut t = transpose(data, nx, ny);
        rows(&mut t, ny, fy);
        let back = transpose(&t, ny, nx);
        data.copy_from_slice(&back);
    }
}

fn rows(data: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    // Batch several rows per task so the scratch allocation is amortized.
    let rows_per_task = (data.len() / n).div_ceil(16).max(1);
    par::for_each_chunk_mut(data, rows_per_task * n, |_, chunk| fft.process(chunk));
}

fn transpose(data: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); nx * ny];
    const B: usize = 32;
    for by in (0..ny).step_by(B) {
        for bx in (0..nx).step_by(B) {
            for iy in by..(by + B).min(ny) {
                for ix in bx..(bx + B).min(nx) {
                    out[ix * ny + iy] = data[iy * nx + ix];
                }
            }
        }
    }
    out
}

/// `(-1)^(i+j)`: shifts the DFT origin from the box corner to the centre.
#[inline]
fn centre_sign(i: usize, j: usize) -> f64 {
    if (i + j).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Field to unitary spectrum.
pub fn transform(field: &Field2D) -> Spectrum2D {
    let g = *field.grid();
    let mut buf: Vec<Complex64> = field
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    Plan2::for_grid(&g).forward(&mut buf);
    let scale = g.cell_area() / (2.0 * PI);
    for j in 0..g.ny {
        for i in 0..g.nx {
            buf[j * g.nx + i] *= scale * centre_sign(i, j);
        }
    }
    Spectrum2D::new(g, buf).expect("length preserved by transform")
}

/// Spectrum back to complex samples (no real part taken).
pub fn inverse_transform_complex(spectrum: &Spectrum2D) -> Vec<Complex64> {
    let g = *spectrum.grid();
    let scale = 2.0 * PI / (g.cell_area() * g.len() as f64);
    let mut buf: Vec<Complex64> = spectrum.coefficients().to_vec();
    for j in 0..g.ny {
        for i in 0..g.nx {
            buf[j * g.nx + i] *= scale * centre_sign(i, j);
        }
    }
    Plan2::for_grid(&g).inverse(&mut buf);
    buf
}

/// Spectrum to field; the imaginary part (roundoff for spectra of real
/// fields under real-even multipliers) is dropped.
pub fn inverse_transform(spectrum: &Spectrum2D) -> Field2D {
    let g = *spectrum.grid();
    let re = inverse_transform_complex(spectrum)
        .into_iter()
        .map(|c| c.re)
        .collect();
    Field2D::from_parts_unchecked(g, re)
}

/// Checked variant of [`inverse_transform`] for externally built spectra.
pub fn try_inverse_transform(spectrum: &Spectrum2D) -> Result<Field2D> {
    let f = inverse_transform(spectrum);
    Field2D::new(*f.grid(), f.into_samples())
}

/// Band-limited interpolation of a field onto a grid refined by `factor`
/// per axis (zero padding in Fourier space). Needed before forming
/// products whose bandwidth exceeds the original lattice.
pub fn refine(field: &Field2D, factor: usize) -> Field2D {
    let g = *field.grid();
    let fine = Grid2D::new(g.nx * factor, g.ny * factor, g.half_length_x, g.half_length_y)
        .expect("refined grid is valid");
    let mut buf: Vec<Complex64> = field
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    Plan2::for_grid(&g).forward(&mut buf);
    let mut padded = vec![Complex64::new(0.0, 0.0); fine.len()];
    for j in 0..g.ny {
        let sj = Grid2D::signed_mode(j, g.ny);
        for i in 0..g.nx {
            let si = Grid2D::signed_mode(i, g.nx);
            let mut c = buf[j * g.nx + i];
            // Split Nyquist modes evenly between ±k so the result stays real.
            if 2 * si.unsigned_abs() as usize == g.nx {
                c *= 0.5;
            }
            if 2 * sj.unsigned_abs() as usize == g.ny {
                c *= 0.5;
            }
            let targets_i: &[i64] = if 2 * si.unsigned_abs() as usize == g.nx {
                &[si, -si]
            } else {
                std::slice::from_ref(&si)
            };
            let targets_j: &[i64] = if 2 * sj.unsigned_abs() as usize == g.ny {
                &[sj, -sj]
            } else {
                std::slice::from_ref(&sj)
            };
            for &ti in targets_i {
                for &tj in targets_j {
                    let fi = ti.rem_euclid(fine.nx as i64) as usize;
                    let fj = tj.rem_euclid(fine.ny as i64) as usize;
                    padded[fj * fine.nx + fi] += c;
                }
            }
        }
    }
    Plan2::for_grid(&fine).inverse(&mut padded);
    let scale = 1.0 / g.len() as f64;
    Field2D::from_parts_unchecked(fine, padded.into_iter().map(|c| c.re * scale).collect())
}

/// One-dimensional periodic grid `[-L, L)` with `n` points, used by the
/// axis-wise Leibniz-rule evaluator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub n: usize,
    pub half_length: f64,
}

impl Grid1D {
    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) || !(half_length > 0.0) {
            return crate::error::invalid("1D grid needs even n >= 8 and L > 0");
        }
        Ok(Self { n, half_length })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.dx()
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        PI * Grid2D::signed_mode(i, self.n) as f64 / self.half_length
    }
}

/// Applies a real symbol `m(ξ)` to 1D samples and returns the real part.
pub fn apply_symbol_1d(grid: &Grid1D, samples: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
    let plans = axis_plans(grid.n);
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plans.forward.process(&mut buf);
    for (i, c) in buf.iter_mut().enumerate() {
        *c *= symbol(grid.wavenumber(i));
    }
    plans.inverse.process(&mut buf);
    let s = 1.0 / grid.n as f64;
    buf.into_iter().map(|c| c.re * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::gaussian;

    fn grid() -> Grid2D {
        Grid2D::new(32, 16, 4.0, 3.0).unwrap()
    }

    #[test]
    fn roundtrip() {
        let g = grid();
        let f = Field2D::from_fn(g, |x, y| (x * 1.3).sin() * (-(y * y)).exp() + 0.1 * x);
        let back = inverse_transform(&transform(&f));
        let err = f
            .samples()
            .iter()
            .zip(back.samples())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn constant_is_zero_mode_only() {
        let g = grid();
        let s = transform(&Field2D::from_fn(g, |_, _| 1.0));
        for (k, c) in s.coefficients().iter().enumerate() {
            if k == 0 {
                assert!(c.norm() > 0.1);
            } else {
                assert!(c.norm() < 1e-13, "mode {k}: {c}");
            }
        }
    }

    #[test]
    fn cosine_hits_two_modes() {
        let g = grid();
        let k0 = PI / g.half_length_x;
        let s = transform(&Field2D::from_fn(g, |x, _| (k0 * x).cos()));
        let big: Vec<usize> = s
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 1e-10)
            .map(|(k, _)| k)
            .collect();
        assert_eq!(big, vec![1, g.nx - 1]);
        assert!((s.coefficients()[1].norm() - s.coefficients()[g.nx - 1].norm()).abs() < 1e-13);
    }

    #[test]
    fn gaussian_matches_continuum_transform() {
        // Unitary transform of e^{-r²/2} is e^{-|k|²/2}.
        let g = Grid2D::square(64, 12.0).unwrap();
        let s = transform(&gaussian(g, 1.0, 1.0, (0.0, 0.0)));
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (k, l) = (g.wavenumber_x(i), g.wavenumber_y(j));
                let want = (-(k * k + l * l) / 2.0).exp();
                assert!((s.at(i, j) - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn refine_interpolates_band_limited() {
        let g = Grid2D::square(48, 10.0).unwrap();
        let f = gaussian(g, 1.0, 1.3, (0.5, -0.2));
        let fine = refine(&f, 2);
        let exact = gaussian(*fine.grid(), 1.0, 1.3, (0.5, -0.2));
        let err = (&fine - &exact).sup_norm();
        assert!(err < 1e-10, "{err}");
    }
}
