//! Shared inputs for the kernel benchmarks.

use num_complex::Complex64;
use qdot_core::{make_grid, EnvelopeShape, Grid1D, ModelParams, Pulse};

/// The production lab grid.
pub fn lab_grid() -> Grid1D {
    make_grid(15.0, 256).expect("lab grid")
}

pub fn params() -> ModelParams {
    ModelParams::benchmark()
}

/// Normalized displaced Gaussian, a stand-in for a driven orbital.
pub fn gaussian(grid: &Grid1D) -> Vec<Complex64> {
    let raw: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|x| Complex64::new((-0.125 * (x - 1.0) * (x - 1.0)).exp(), 0.0))
        .collect();
    let norm = (raw.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.spacing()).sqrt();
    raw.into_iter().map(|c| c / norm).collect()
}

/// Pulse of `steps` time steps of 0.02 without ramps.
pub fn short_pulse(steps: usize) -> Pulse {
    Pulse::new(0.07, 0.1839, 0.02 * steps as f64, 0.0, 0.0, EnvelopeShape::Linear).expect("short pulse")
}
