//! Uniform periodic grids, rectangle-rule quadrature and Fourier-basis operators.
//!
//! A grid of `n` points covers `[-L, L)` with spacing `2L/n`; the point `x = 0` sits
//! at index `n/2` and the periodic mirror of index `j` is `(n - j) % n`, so every
//! grid is exactly symmetric under `x -> -x`.

use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary amplitude above which periodic wraparound is no longer negligible.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n_points: usize,
    extent: f64,
    spacing: f64,
}

/// Builds a grid of `n_points` (a power of two, at least 16) on `[-extent, extent)`.
pub fn make_grid(extent: f64, n_points: usize) -> Result<Grid1D> {
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::InvalidGrid(format!("extent must be positive, got {extent}")));
    }
    if n_points < 16 || !n_points.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "point count must be a power of two >= 16, got {n_points}"
        )));
    }
    Ok(Grid1D {
        n_points,
        extent,
        spacing: 2.0 * extent / n_points as f64,
    })
}

impl Grid1D {
    pub fn new(extent: f64, n_points: usize) -> Result<Self> {
        make_grid(extent, n_points)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.extent + j as f64 * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }

    /// Index of `x = 0`.
    pub fn center_index(&self) -> usize {
        self.n_points / 2
    }

    /// Index of the point `-x_j` under the periodic layout.
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.n_points - j) % self.n_points
    }

    /// Grid for the pair coordinates `r = x1 - x2` and `R = x1 + x2`: same spacing,
    /// twice the extent and point count, so both land exactly on its points.
    pub fn pair_grid(&self) -> Grid1D {
        Grid1D {
            n_points: 2 * self.n_points,
            extent: 2.0 * self.extent,
            spacing: self.spacing,
        }
    }

    /// Same extent, twice the points.
    pub fn refined(&self) -> Grid1D {
        Grid1D {
            n_points: 2 * self.n_points,
            extent: self.extent,
            spacing: self.spacing / 2.0,
        }
    }

    /// Angular wavenumbers in FFT order. The Nyquist mode carries `-pi/dx`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points as isize;
        let dk = 2.0 * std::f64::consts::PI / (self.n_points as f64 * self.spacing);
        (0..n)
            .map(|q| if q < n / 2 { q as f64 * dk } else { (q - n) as f64 * dk })
            .collect()
    }

    pub(crate) fn ensure_same(&self, other: &Grid1D, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: ({} pts, L={}) vs ({} pts, L={})",
                self.n_points, self.extent, other.n_points, other.extent
            )))
        }
    }
}

/// Rectangle-rule integral `sum_j f_j dx`.
pub fn quadrature(grid: &Grid1D, values: &[f64]) -> f64 {
    values.iter().sum::<f64>() * grid.spacing
}

/// L1 distance of two real fields on the same grid.
pub fn l1_distance(grid: &Grid1D, a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * grid.spacing
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFn1D {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl WaveFn1D {
    pub fn new(grid: Grid1D, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn from_real(grid: Grid1D, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = grid.points().into_iter().map(f).collect();
        Self { grid, amplitudes }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn normalize(&mut self) {
        let scale = 1.0 / self.norm_sqr().sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a *= scale);
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < 1e-12
    }

    /// `|psi(x)|^2`.
    pub fn probability_density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Largest modulus on the two outermost points at each end of the box.
    pub fn boundary_amplitude(&self) -> f64 {
        let n = self.amplitudes.len();
        [0, 1, n - 2, n - 1]
            .iter()
            .map(|&j| self.amplitudes[j].norm())
            .fold(0.0, f64::max)
    }

    /// Max over the grid of `|psi(-x) - psi(x)|`.
    pub fn parity_defect(&self) -> f64 {
        (0..self.amplitudes.len())
            .map(|j| (self.amplitudes[j] - self.amplitudes[self.grid.mirror_index(j)]).norm())
            .fold(0.0, f64::max)
    }
}

/// `sum_j conj(a_j) b_j dx`.
pub fn inner_product(a: &WaveFn1D, b: &WaveFn1D) -> Result<Complex64> {
    a.grid.ensure_same(&b.grid, "inner product")?;
    Ok(raw_inner(&a.amplitudes, &b.amplitudes) * a.grid.spacing())
}

pub(crate) fn raw_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Two-particle amplitude `Psi(x1, x2)` stored row-major with `x1` as the row.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFn2D {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl WaveFn2D {
    pub fn new(grid: Grid1D, amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = grid.n_points();
        if amplitudes.len() != n * n {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for a {n}x{n} grid",
                amplitudes.len()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn at(&self, i1: usize, i2: usize) -> Complex64 {
        self.amplitudes[i1 * self.grid.n_points() + i2]
    }

    pub fn norm_sqr(&self) -> f64 {
        let dx = self.grid.spacing();
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx * dx
    }

    pub fn normalize(&mut self) {
        let scale = 1.0 / self.norm_sqr().sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a *= scale);
    }

    pub fn inner(&self, other: &WaveFn2D) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid, "2D inner product")?;
        let dx = self.grid.spacing();
        Ok(raw_inner(&self.amplitudes, &other.amplitudes) * dx * dx)
    }

    /// The same state with the particle labels swapped.
    pub fn transposed(&self) -> WaveFn2D {
        let n = self.grid.n_points();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                out[k * n + i] = self.amplitudes[i * n + k];
            }
        }
        WaveFn2D {
            grid: self.grid,
            amplitudes: out,
        }
    }

    /// Max over the grid of `|Psi(x1,x2) - Psi(x2,x1)|`.
    pub fn exchange_asymmetry(&self) -> f64 {
        let n = self.grid.n_points();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for k in (i + 1)..n {
                worst = worst.max((self.amplitudes[i * n + k] - self.amplitudes[k * n + i]).norm());
            }
        }
        worst
    }

    /// One-particle density `n(x) = 2 * integral |Psi(x, x2)|^2 dx2`.
    pub fn one_particle_density(&self) -> Vec<f64> {
        let n = self.grid.n_points();
        let dx = self.grid.spacing();
        self.amplitudes
            .chunks(n)
            .map(|row| 2.0 * dx * row.iter().map(|a| a.norm_sqr()).sum::<f64>())
            .collect()
    }

    /// Largest modulus on the outer frame of the box.
    pub fn boundary_amplitude(&self) -> f64 {
        let n = self.grid.n_points();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for (a, b) in [(0, j), (n - 1, j), (j, 0), (j, n - 1)] {
                worst = worst.max(self.amplitudes[a * n + b].norm());
            }
        }
        worst
    }
}

/// FFT plans and wavenumbers for one grid.
#[derive(Clone)]
pub struct Spectral1D {
    grid: Grid1D,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl std::fmt::Debug for Spectral1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral1D").field("grid", &self.grid).finish()
    }
}

impl Spectral1D {
    pub fn new(grid: Grid1D) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(grid.n_points()),
            inverse: planner.plan_fft_inverse(grid.n_points()),
            k: grid.wavenumbers(),
            grid,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Inverse transform including the `1/n` normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    /// Applies a diagonal Fourier-space multiplier in place.
    pub fn apply_multiplier(&self, data: &mut [Complex64], multiplier: &[Complex64]) {
        self.forward(data);
        data.iter_mut().zip(multiplier).for_each(|(v, m)| *v *= m);
        self.inverse(data);
    }

    /// `-(1/(2m)) d^2/dx^2` applied in the Fourier basis.
    pub fn kinetic(&self, psi: &[Complex64], mass: f64) -> Vec<Complex64> {
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        for (v, k) in buf.iter_mut().zip(&self.k) {
            *v *= k * k / (2.0 * mass);
        }
        self.inverse(&mut buf);
        buf
    }

    /// Spectral second derivative of a real field.
    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        for (v, k) in buf.iter_mut().zip(&self.k) {
            *v *= -k * k;
        }
        self.inverse(&mut buf);
        buf.into_iter().map(|v| v.re).collect()
    }

    /// `f(x - d)` by band-limited interpolation.
    pub fn shift(&self, f: &[f64], d: f64) -> Vec<f64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        let nyq = self.k.len() / 2;
        let nyquist = buf[nyq];
        for (v, &k) in buf.iter_mut().zip(&self.k) {
            *v *= Complex64::from_polar(1.0, -k * d);
        }
        // The Nyquist mode has no partner to carry the imaginary part.
        buf[nyq] = nyquist * (self.k[nyq] * d).cos();
        self.inverse(&mut buf);
        buf.into_iter().map(|v| v.re).collect()
    }
}

/// `(-1/(2 mass)) psi''` in the Fourier basis. Warns when the boundary amplitude is
/// large enough for periodic wraparound to matter.
pub fn apply_kinetic_spectral(psi: &WaveFn1D, mass: f64) -> WaveFn1D {
    let edge = psi.boundary_amplitude();
    if edge > BOUNDARY_TOLERANCE {
        warn!("kinetic operator applied to a state with boundary amplitude {edge:.2e}");
    }
    let spectral = Spectral1D::new(*psi.grid());
    WaveFn1D {
        grid: *psi.grid(),
        amplitudes: spectral.kinetic(psi.amplitudes(), mass),
    }
}

/// First row of the periodic Fourier-grid kinetic matrix: `t[d]` couples points `d` apart.
pub fn kinetic_kernel(grid: &Grid1D, mass: f64) -> Vec<f64> {
    let n = grid.n_points();
    let k = grid.wavenumbers();
    let two_pi_over_n = 2.0 * std::f64::consts::PI / n as f64;
    (0..n)
        .map(|d| {
            k.iter()
                .enumerate()
                .map(|(q, kq)| {
                    let q = q as f64;
                    kq * kq * (two_pi_over_n * q * d as f64).cos()
                })
                .sum::<f64>()
                / (2.0 * mass * n as f64)
        })
        .collect()
}

/// Dense Fourier-grid Hamiltonian `T + diag(V)`; identical to the FFT kinetic operator.
pub fn fourier_grid_hamiltonian(grid: &Grid1D, mass: f64, potential: &[f64]) -> DMatrix<f64> {
    let n = grid.n_points();
    let t = kinetic_kernel(grid, mass);
    DMatrix::from_fn(n, n, |i, j| {
        let d = if i >= j { i - j } else { n + i - j };
        t[d] + if i == j { potential[i] } else { 0.0 }
    })
}

/// 2D transforms on an `n x n` row-major array.
#[derive(Clone)]
pub struct Spectral2D {
    inner: Spectral1D,
    scratch: Vec<Complex64>,
}

impl Spectral2D {
    pub fn new(grid: Grid1D) -> Self {
        Self {
            inner: Spectral1D::new(grid),
            scratch: Vec::new(),
        }
    }

    pub fn wavenumbers(&self) -> &[f64] {
        self.inner.wavenumbers()
    }

    fn transpose(&mut self, data: &mut [Complex64]) {
        let n = self.inner.grid.n_points();
        self.scratch.clear();
        self.scratch.extend_from_slice(data);
        for i in 0..n {
            for k in 0..n {
                data[k * n + i] = self.scratch[i * n + k];
            }
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        // rustfft batches over consecutive chunks of the plan length.
        self.inner.forward.process(data);
        self.transpose(data);
        self.inner.forward.process(data);
        self.transpose(data);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.inner.inverse.process(data);
        self.transpose(data);
        self.inner.inverse.process(data);
        self.transpose(data);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    /// Two-particle kinetic energy `(p1^2 + p2^2)/2` applied spectrally.
    pub fn kinetic(&mut self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.inner.grid.n_points();
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        let k = self.inner.k.clone();
        for i in 0..n {
            for j in 0..n {
                buf[i * n + j] *= 0.5 * (k[i] * k[i] + k[j] * k[j]);
            }
        }
        self.inverse(&mut buf);
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn gaussian(grid: Grid1D, center: f64, alpha: f64) -> WaveFn1D {
        WaveFn1D::from_fn(grid, |x| {
            Complex64::new((-alpha * (x - center).powi(2) / 2.0).exp(), 0.0)
        })
        .normalized()
    }

    #[test]
    fn grid_spacing_and_endpoints() {
        let g = make_grid(15.0, 256).unwrap();
        assert_eq!(g.spacing(), 0.1171875);
        assert_abs_diff_eq!(g.spacing() * g.n_points() as f64, 2.0 * g.extent());

        let g = make_grid(1.0, 16).unwrap();
        assert_eq!(g.point(0), -1.0);
        assert_eq!(g.point(15), 0.875);
        assert_eq!(g.point(g.center_index()), 0.0);
        for j in 0..16 {
            assert_abs_diff_eq!(g.point(g.mirror_index(j)).abs(), g.point(j).abs(), epsilon = 1e-15);
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(make_grid(15.0, 100), Err(Error::InvalidGrid(_))));
        assert!(make_grid(15.0, 8).is_err());
        assert!(make_grid(0.0, 64).is_err());
        assert!(make_grid(-2.0, 64).is_err());
    }

    #[test]
    fn pair_grid_contains_differences_and_sums() {
        let lab = make_grid(15.0, 256).unwrap();
        let pair = lab.pair_grid();
        assert_eq!(pair.spacing(), lab.spacing());
        let (i, k) = (17, 201);
        let r = lab.point(i) - lab.point(k);
        let big_r = lab.point(i) + lab.point(k);
        assert_abs_diff_eq!(pair.point(i + 256 - k), r, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.point(i + k), big_r, epsilon = 1e-12);
    }

    #[test]
    fn inner_product_basics() {
        let g = make_grid(15.0, 256).unwrap();
        let psi = gaussian(g, 0.0, 0.5);
        assert_abs_diff_eq!(inner_product(&psi, &psi).unwrap().re, 1.0, epsilon = 1e-12);

        // Hermite functions of the same oscillator are orthogonal.
        let h1 = WaveFn1D::from_fn(g, |x| Complex64::new(x * (-0.25 * x * x).exp(), 0.0)).normalized();
        assert!(inner_product(&psi, &h1).unwrap().norm() < 1e-10);

        let other = make_grid(10.0, 256).unwrap();
        assert!(inner_product(&psi, &gaussian(other, 0.0, 1.0)).is_err());
    }

    #[test]
    fn shifted_gaussian_overlap_matches_closed_form() {
        // psi ~ exp(-x^2/(2 a^2)): <psi(. - d)|psi> = exp(-d^2/(4 a^2)); here alpha = 1/a^2.
        let g = make_grid(15.0, 256).unwrap();
        for &alpha in &[0.25, 0.5, 1.0] {
            let d = 1.0;
            let a = gaussian(g, d, alpha);
            let b = gaussian(g, 0.0, alpha);
            let expected = (-alpha * d * d / 4.0).exp();
            assert_abs_diff_eq!(inner_product(&a, &b).unwrap().re, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn kinetic_plane_wave_eigenvalue() {
        let g = make_grid(15.0, 256).unwrap();
        let k = g.wavenumbers()[7];
        let psi = WaveFn1D::from_fn(g, |x| Complex64::from_polar(1.0, k * x));
        let t = Spectral1D::new(g).kinetic(psi.amplitudes(), 1.0);
        for (tv, pv) in t.iter().zip(psi.amplitudes()) {
            assert!((tv - pv * (k * k / 2.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn kinetic_virial_for_oscillator_ground_state() {
        // mass 1/2, frequency w: ground state exp(-w x^2 / 4), <T> = w/4.
        let g = make_grid(30.0, 512).unwrap();
        let w = 0.25;
        let psi = gaussian(g, 0.0, w / 2.0);
        let t = apply_kinetic_spectral(&psi, 0.5);
        assert_abs_diff_eq!(inner_product(&psi, &t).unwrap().re, w / 4.0, epsilon = 1e-8);
    }

    #[test]
    fn kinetic_matches_fourth_order_finite_differences() {
        // FD oracle on a 4x finer grid, sampled back onto the coarse points.
        let coarse = make_grid(15.0, 256).unwrap();
        let f = |x: f64| (1.0 + 0.3 * x) * (-0.4 * (x - 0.7).powi(2)).exp() + 0.5 * (-(x + 2.0).powi(2)).exp();
        let psi = WaveFn1D::from_fn(coarse, |x| Complex64::new(f(x), 0.0));
        let spectral = apply_kinetic_spectral(&psi, 1.0);
        let h = coarse.spacing() / 32.0;
        let mut worst: f64 = 0.0;
        let scale = spectral.amplitudes().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (j, x) in coarse.points().into_iter().enumerate() {
            let d2 =
                (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h);
            worst = worst.max((spectral.amplitudes()[j].re + 0.5 * d2).abs());
        }
        assert!(worst / scale < 1e-6, "relative deviation {}", worst / scale);
    }

    #[test]
    fn dense_hamiltonian_agrees_with_fft_kinetic() {
        let g = make_grid(5.0, 32).unwrap();
        let h = fourier_grid_hamiltonian(&g, 0.7, &vec![0.0; 32]);
        let spectral = Spectral1D::new(g);
        for col in [0, 5, 31] {
            let mut e = vec![Complex64::new(0.0, 0.0); 32];
            e[col] = Complex64::new(1.0, 0.0);
            let t = spectral.kinetic(&e, 0.7);
            for row in 0..32 {
                assert_abs_diff_eq!(h[(row, col)], t[row].re, epsilon = 1e-12);
                assert!(t[row].im.abs() < 1e-12);
            }
        }
        assert_abs_diff_eq!((&h - h.transpose()).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_examples() {
        let g = make_grid(15.0, 256).unwrap();
        assert_abs_diff_eq!(quadrature(&g, &vec![1.0; 256]), 30.0, epsilon = 1e-12);
        let density = gaussian(g, 0.3, 0.7).probability_density();
        assert_abs_diff_eq!(quadrature(&g, &density), 1.0, epsilon = 1e-10);
        let two: Vec<f64> = density.iter().map(|v| 2.0 * v).collect();
        assert_abs_diff_eq!(quadrature(&g, &two), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn spectral_shift_moves_a_gaussian() {
        let g = make_grid(15.0, 256).unwrap();
        let base = gaussian(g, 0.0, 1.0).probability_density();
        let moved = Spectral1D::new(g).shift(&base, 0.37);
        let expect = gaussian(g, 0.37, 1.0).probability_density();
        assert!(l1_distance(&g, &moved, &expect) < 1e-12);
    }

    #[test]
    fn two_dimensional_transform_round_trip_and_kinetic() {
        let g = make_grid(8.0, 32).unwrap();
        let n = 32;
        let pts = g.points();
        let mut amps = Vec::with_capacity(n * n);
        for &x1 in &pts {
            for &x2 in &pts {
                amps.push(Complex64::new((-(x1 * x1 + x2 * x2) / 2.0).exp(), 0.0));
            }
        }
        let mut s = Spectral2D::new(g);
        let mut buf = amps.clone();
        s.forward(&mut buf);
        s.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&amps) {
            assert!((a - b).norm() < 1e-13);
        }
        // Product of two unit-frequency oscillator ground states: <T> = 1/2.
        let mut psi = WaveFn2D::new(g, amps).unwrap();
        psi.normalize();
        let t = WaveFn2D::new(g, s.kinetic(psi.amplitudes())).unwrap();
        assert_abs_diff_eq!(psi.inner(&t).unwrap().re, 0.5, epsilon = 1e-10);
    }

    fn band_limited(grid: Grid1D, coeffs: &[(f64, f64)]) -> WaveFn1D {
        // Random smooth packet: a few Gaussians with random centers and phases.
        WaveFn1D::from_fn(grid, |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &(c, p))| {
                    let center = -4.0 + 2.0 * i as f64 + c;
                    Complex64::from_polar((-(x - center).powi(2)).exp(), p * x)
                })
                .sum()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn parseval_holds(coeffs in prop::collection::vec((-1.0f64..1.0, -2.0f64..2.0), 1..5)) {
            let g = make_grid(15.0, 256).unwrap();
            let psi = band_limited(g, &coeffs);
            let mut buf = psi.amplitudes().to_vec();
            Spectral1D::new(g).forward(&mut buf);
            let real: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            let fourier: f64 = buf.iter().map(|a| a.norm_sqr()).sum::<f64>() / 256.0;
            prop_assert!((real - fourier).abs() <= 1e-12 * real.max(1.0));
        }

        #[test]
        fn kinetic_is_hermitian(
            ca in prop::collection::vec((-1.0f64..1.0, -2.0f64..2.0), 1..5),
            cb in prop::collection::vec((-1.0f64..1.0, -2.0f64..2.0), 1..5),
        ) {
            let g = make_grid(15.0, 256).unwrap();
            let a = band_limited(g, &ca);
            let b = band_limited(g, &cb);
            let ta = apply_kinetic_spectral(&a, 1.0);
            let tb = apply_kinetic_spectral(&b, 1.0);
            let lhs = inner_product(&a, &tb).unwrap();
            let rhs = inner_product(&b, &ta).unwrap().conj();
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }

        #[test]
        fn odd_functions_integrate_to_zero(a in -2.0f64..2.0, w in 0.1f64..2.0) {
            let g = make_grid(15.0, 256).unwrap();
            // Odd under the periodic mirror, including the self-mirrored edge point.
            let values: Vec<f64> = (0..256)
                .map(|j| {
                    let x = g.point(j);
                    if j == 0 { 0.0 } else { x * (-w * x * x).exp() * (1.0 + a * x * x) }
                })
                .collect();
            prop_assert!(quadrature(&g, &values).abs() < 1e-12);
        }
    }
}
