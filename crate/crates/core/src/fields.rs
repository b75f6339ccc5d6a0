//! Test data: Gaussians, wave packets and seeded random suites.
//!
//! Every generator produces smooth fields with Gaussian envelopes, so the
//! decay precondition holds by construction once the box is large enough
//! relative to the widths used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{Field2D, Grid2D};

/// `amplitude * exp(-|x - centre|² / (2 σ²))`.
pub fn gaussian(grid: Grid2D, amplitude: f64, sigma: f64, centre: (f64, f64)) -> Field2D {
    let inv = 1.0 / (2.0 * sigma * sigma);
    Field2D::from_fn(grid, |x, y| {
        let (dx, dy) = (x - centre.0, y - centre.1);
        amplitude * (-(dx * dx + dy * dy) * inv).exp()
    })
}

/// One Gaussian-envelope wave packet `A e^{-(Δx²/2σx² + Δy²/2σy²)} cos(k·Δx + φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub amplitude: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub centre: (f64, f64),
    pub wavevector: (f64, f64),
    pub phase: f64,
}

impl Packet {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.centre.0, y - self.centre.1);
        let env = (-(dx * dx) / (2.0 * self.sigma_x * self.sigma_x)
            - (dy * dy) / (2.0 * self.sigma_y * self.sigma_y))
            .exp();
        self.amplitude * env * (self.wavevector.0 * dx + self.wavevector.1 * dy + self.phase).cos()
    }

    pub fn sample(&self, grid: Grid2D) -> Field2D {
        Field2D::from_fn(grid, |x, y| self.value(x, y))
    }
}

/// Ranges for the seeded suite generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub sigma: (f64, f64),
    pub centre_radius: f64,
    pub max_wavenumber: f64,
    pub amplitude: (f64, f64),
    pub max_packets: usize,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            sigma: (0.8, 1.1),
            centre_radius: 1.0,
            max_wavenumber: 1.5,
            amplitude: (0.5, 1.5),
            max_packets: 3,
        }
    }
}

/// Deterministic suite of `count` band-limited fields with Gaussian envelopes.
pub fn random_suite(grid: Grid2D, count: usize, seed: u64, spec: &SuiteSpec) -> Vec<Field2D> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let packets: Vec<Packet> = (0..rng.gen_range(1..=spec.max_packets))
                .map(|_| random_packet(&mut rng, spec))
                .collect();
            Field2D::from_fn(grid, |x, y| packets.iter().map(|p| p.value(x, y)).sum())
        })
        .collect()
}

fn random_packet(rng: &mut ChaCha8Rng, spec: &SuiteSpec) -> Packet {
    let r = spec.centre_radius * rng.gen::<f64>().sqrt();
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    let k = spec.max_wavenumber * rng.gen::<f64>();
    let ka = rng.gen_range(0.0..std::f64::consts::TAU);
    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    Packet {
        amplitude: sign * rng.gen_range(spec.amplitude.0..=spec.amplitude.1),
        sigma_x: rng.gen_range(spec.sigma.0..=spec.sigma.1),
        sigma_y: rng.gen_range(spec.sigma.0..=spec.sigma.1),
        centre: (r * a.cos(), r * a.sin()),
        wavevector: (k * ka.cos(), k * ka.sin()),
        phase: rng.gen_range(0.0..std::f64::consts::TAU),
    }
}

/// Deterministic 1D suite for the axis-wise Leibniz checks.
pub fn random_suite_1d(xs: &[f64], count: usize, seed: u64, spec: &SuiteSpec) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let packets: Vec<Packet> = (0..rng.gen_range(1..=spec.max_packets))
                .map(|_| random_packet(&mut rng, spec))
                .collect();
            xs.iter()
                .map(|&x| packets.iter().map(|p| p.value(x, p.centre.1)).sum())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_deterministic_and_decays() {
        let g = Grid2D::square(64, 20.0).unwrap();
        let a = random_suite(g, 5, 7, &SuiteSpec::default());
        let b = random_suite(g, 5, 7, &SuiteSpec::default());
        assert_eq!(a, b);
        for f in &a {
            f.check_decay().unwrap();
            assert!(f.l2_norm() > 0.0);
        }
        let c = random_suite(g, 5, 8, &SuiteSpec::default());
        assert_ne!(a, c);
    }
}
