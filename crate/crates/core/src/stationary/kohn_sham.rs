use std::sync::Arc;

use log::debug;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{fix_sign, sorted_eigen};
use crate::error::{Error, Result};
use crate::grid::{fourier_grid_hamiltonian, Grid1D, Spectral1D, WaveFn1D};
use crate::model::{soft_coulomb, ModelParams};

/// Below this density the curvature of `sqrt(n)` is not trusted during inversion.
pub const DENSITY_FLOOR: f64 = 1e-8;

/// Hartree potential `V_H(x) = integral n(x') / sqrt(b + (x - x')^2) dx'` as a
/// zero-padded (aperiodic) FFT convolution.
#[derive(Clone)]
pub struct HartreeSolver {
    n: usize,
    spacing: f64,
    kernel_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl HartreeSolver {
    pub fn new(grid: &Grid1D, params: &ModelParams) -> Self {
        let n = grid.n_points();
        let dx = grid.spacing();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(2 * n);
        let inverse = planner.plan_fft_inverse(2 * n);
        let mut kernel = vec![Complex64::new(0.0, 0.0); 2 * n];
        for d in 0..n {
            let v = soft_coulomb(d as f64 * dx, params) * dx;
            kernel[d] = Complex64::new(v, 0.0);
            if d > 0 {
                kernel[2 * n - d] = Complex64::new(v, 0.0);
            }
        }
        forward.process(&mut kernel);
        Self {
            n,
            spacing: dx,
            kernel_hat: kernel,
            forward,
            inverse,
        }
    }

    pub fn potential(&self, density: &[f64]) -> Vec<f64> {
        debug_assert_eq!(density.len(), self.n);
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * self.n];
        for (b, &d) in buf.iter_mut().zip(density) {
            *b = Complex64::new(d, 0.0);
        }
        self.forward.process(&mut buf);
        buf.iter_mut().zip(&self.kernel_hat).for_each(|(b, k)| *b *= k);
        self.inverse.process(&mut buf);
        let scale = 1.0 / (2 * self.n) as f64;
        buf[..self.n].iter().map(|v| v.re * scale).collect()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

/// Direct `O(n^2)` Hartree sum.
pub fn hartree_direct(grid: &Grid1D, params: &ModelParams, density: &[f64]) -> Vec<f64> {
    let x = grid.points();
    x.iter()
        .map(|&xi| {
            x.iter()
                .zip(density)
                .map(|(&xj, &n)| n * soft_coulomb(xi - xj, params))
                .sum::<f64>()
                * grid.spacing()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XcKind {
    ExchangeSic,
    ExactInverted,
    NonInteracting,
}

pub struct XcInput<'a> {
    pub density: &'a [f64],
    pub hartree: &'a [f64],
    /// Rigid displacement of the density relative to the ground state.
    pub shift: f64,
}

/// An exchange-correlation model for the doubly occupied singlet orbital.
pub trait XcFunctional: Send + Sync {
    fn kind(&self) -> XcKind;

    /// Whether the Hartree term enters the Kohn-Sham potential.
    fn includes_hartree(&self) -> bool {
        true
    }

    fn potential(&self, input: &XcInput<'_>) -> Vec<f64>;
}

/// Self-interaction-corrected exchange for two electrons in one orbital:
/// removing the orbital self-Hartree leaves `V_xc = -V_H / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExchangeSic;

impl XcFunctional for ExchangeSic {
    fn kind(&self) -> XcKind {
        XcKind::ExchangeSic
    }

    fn potential(&self, input: &XcInput<'_>) -> Vec<f64> {
        input.hartree.iter().map(|v| -0.5 * v).collect()
    }
}

/// Interaction switched off: no Hartree, no xc.
#[derive(Debug, Clone, Copy, Default)]
pub struct NonInteracting;

impl XcFunctional for NonInteracting {
    fn kind(&self) -> XcKind {
        XcKind::NonInteracting
    }

    fn includes_hartree(&self) -> bool {
        false
    }

    fn potential(&self, input: &XcInput<'_>) -> Vec<f64> {
        vec![0.0; input.density.len()]
    }
}

/// The exact ground-state xc potential, rigidly translated with the density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactShiftXc {
    grid: Grid1D,
    ground: Vec<f64>,
}

impl ExactShiftXc {
    pub fn new(grid: Grid1D, ground_vxc: Vec<f64>) -> Self {
        Self {
            grid,
            ground: ground_vxc,
        }
    }

    pub fn ground(&self) -> &[f64] {
        &self.ground
    }

    /// `V_xc^GS(x - d)`: 4-point Lagrange interpolation inside the grid, linear
    /// extrapolation past its ends.
    pub fn shifted(&self, d: f64) -> Vec<f64> {
        if d == 0.0 {
            return self.ground.clone();
        }
        let n = self.grid.n_points();
        let dx = self.grid.spacing();
        let v = &self.ground;
        (0..n)
            .map(|j| {
                let u = (self.grid.point(j) - d + self.grid.extent()) / dx;
                let i0 = u.floor();
                if i0 < 1.0 {
                    v[0] + (v[1] - v[0]) * u
                } else if i0 as usize + 2 > n - 1 {
                    v[n - 1] + (v[n - 1] - v[n - 2]) * (u - (n - 1) as f64)
                } else {
                    let i = i0 as usize;
                    let s = u - i0;
                    let w = [
                        -s * (s - 1.0) * (s - 2.0) / 6.0,
                        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
                        -(s + 1.0) * s * (s - 2.0) / 2.0,
                        (s + 1.0) * s * (s - 1.0) / 6.0,
                    ];
                    w[0] * v[i - 1] + w[1] * v[i] + w[2] * v[i + 1] + w[3] * v[i + 2]
                }
            })
            .collect()
    }
}

impl XcFunctional for ExactShiftXc {
    fn kind(&self) -> XcKind {
        XcKind::ExactInverted
    }

    fn potential(&self, input: &XcInput<'_>) -> Vec<f64> {
        self.shifted(input.shift)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScfOptions {
    pub mixing: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            mixing: 0.5,
            tolerance: 1e-10,
            max_iterations: 500,
        }
    }
}

/// Stationary Kohn-Sham solution for one doubly occupied orbital.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KSGroundState {
    pub orbital: WaveFn1D,
    pub orbital_energy: f64,
    pub ks_potential: Vec<f64>,
    pub virtuals: Vec<WaveFn1D>,
    pub virtual_energies: Vec<f64>,
    pub xc_model: XcKind,
    pub iterations: usize,
    pub residual: f64,
}

impl KSGroundState {
    pub fn grid(&self) -> &Grid1D {
        self.orbital.grid()
    }

    /// `n = 2 |phi_0|^2`.
    pub fn density(&self) -> Vec<f64> {
        self.orbital.probability_density().iter().map(|v| 2.0 * v).collect()
    }
}

/// Lowest `count` eigenpairs of `-1/2 d^2/dx^2 + V` on the grid.
pub fn solve_in_potential(grid: &Grid1D, potential: &[f64], count: usize) -> Result<Vec<(f64, WaveFn1D)>> {
    if count > grid.n_points() {
        return Err(Error::UnresolvedStates {
            requested: count,
            resolvable: grid.n_points(),
        });
    }
    let (values, vectors) = sorted_eigen(fourier_grid_hamiltonian(grid, 1.0, potential));
    let scale = 1.0 / grid.spacing().sqrt();
    (0..count)
        .map(|n| {
            let mut v: Vec<f64> = vectors.column(n).iter().map(|c| c * scale).collect();
            fix_sign(&mut v);
            Ok((values[n], WaveFn1D::from_real(*grid, &v)?))
        })
        .collect()
}

/// Self-consistent `V_KS = w^2 x^2/2 + V_H[n] + V_xc[n]` by linear density mixing,
/// followed by one diagonalization for `n_virtuals` unoccupied orbitals.
pub fn ks_scf_ground_state(
    params: &ModelParams,
    grid: &Grid1D,
    xc: &dyn XcFunctional,
    n_virtuals: usize,
    options: &ScfOptions,
) -> Result<KSGroundState> {
    let hartree = HartreeSolver::new(grid, params);
    let v_ext: Vec<f64> = grid.points().into_iter().map(|x| params.confinement(x)).collect();
    let ks_potential = |n: &[f64]| -> Vec<f64> {
        let vh = if xc.includes_hartree() {
            hartree.potential(n)
        } else {
            vec![0.0; n.len()]
        };
        let vxc = xc.potential(&XcInput {
            density: n,
            hartree: &vh,
            shift: 0.0,
        });
        v_ext.iter().zip(&vh).zip(&vxc).map(|((a, b), c)| a + b + c).collect()
    };

    let (_, start) = solve_in_potential(grid, &v_ext, 1)?.remove(0);
    let mut density: Vec<f64> = start.probability_density().iter().map(|v| 2.0 * v).collect();
    let mut residual = f64::INFINITY;
    let mut mixing = options.mixing;
    for iteration in 1..=options.max_iterations {
        let potential = ks_potential(&density);
        let states = solve_in_potential(grid, &potential, 1 + n_virtuals)?;
        let out: Vec<f64> = states[0].1.probability_density().iter().map(|v| 2.0 * v).collect();
        let previous = residual;
        residual = out.iter().zip(&density).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        debug!("scf iteration {iteration}: residual {residual:.3e}");
        // Charge sloshing in the soft trap: back off whenever the residual grows.
        if residual > previous {
            mixing = (0.5 * mixing).max(1e-3);
        }
        if residual < options.tolerance {
            let mut states = states.into_iter();
            let (orbital_energy, orbital) = states.next().expect("occupied orbital");
            let (virtual_energies, virtuals) = states.unzip();
            return Ok(KSGroundState {
                orbital,
                orbital_energy,
                ks_potential: potential,
                virtuals,
                virtual_energies,
                xc_model: xc.kind(),
                iterations: iteration,
                residual,
            });
        }
        density
            .iter_mut()
            .zip(&out)
            .for_each(|(d, o)| *d = (1.0 - mixing) * *d + mixing * o);
    }
    Err(Error::ScfNotConverged {
        iterations: options.max_iterations,
        residual,
    })
}

/// Kohn-Sham potential reconstructed from a two-electron singlet density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsInversion {
    pub v_ks: Vec<f64>,
    pub v_xc: Vec<f64>,
    pub v_hartree: Vec<f64>,
    pub orbital_energy: f64,
    /// Inclusive index range where the density exceeds [`DENSITY_FLOOR`].
    pub window: (usize, usize),
}

/// Inverts the Kohn-Sham equation for `phi = sqrt(n/2)`:
/// `V_KS = eps + phi''/(2 phi)` on the window where `n > DENSITY_FLOOR`.
///
/// The free constant is fixed so that `V_xc + V_H/2` vanishes on average at the two
/// window edges (the exchange tail of a two-electron singlet); outside the window
/// `V_xc` is extended linearly.
pub fn invert_ks_equation(exact_density: &[f64], params: &ModelParams, grid: &Grid1D) -> Result<KsInversion> {
    let n = grid.n_points();
    if exact_density.len() != n {
        return Err(Error::GridMismatch(format!(
            "{} density values for {n} points",
            exact_density.len()
        )));
    }
    let above: Vec<usize> = (0..n).filter(|&j| exact_density[j] > DENSITY_FLOOR).collect();
    let (&lo, &hi) = match (above.first(), above.last()) {
        (Some(lo), Some(hi)) if hi > lo => (lo, hi),
        _ => {
            return Err(Error::DensityNotPositive {
                index: grid.center_index(),
            })
        }
    };
    if let Some(index) = (lo..=hi).find(|&j| exact_density[j] <= DENSITY_FLOOR) {
        return Err(Error::DensityNotPositive { index });
    }

    let phi: Vec<f64> = exact_density.iter().map(|&d| (0.5 * d.max(0.0)).sqrt()).collect();
    let phi2 = Spectral1D::new(*grid).second_derivative(&phi);
    let v_hartree = HartreeSolver::new(grid, params).potential(exact_density);
    let v_ext: Vec<f64> = grid.points().into_iter().map(|x| params.confinement(x)).collect();

    let mut v_xc = vec![0.0; n];
    for j in lo..=hi {
        v_xc[j] = 0.5 * phi2[j] / phi[j] - v_ext[j] - v_hartree[j];
    }
    let gauge = -0.5 * ((v_xc[lo] + 0.5 * v_hartree[lo]) + (v_xc[hi] + 0.5 * v_hartree[hi]));
    for v in &mut v_xc[lo..=hi] {
        *v += gauge;
    }
    let (left_slope, right_slope) = if hi - lo >= 1 {
        (v_xc[lo + 1] - v_xc[lo], v_xc[hi] - v_xc[hi - 1])
    } else {
        (0.0, 0.0)
    };
    for j in 0..lo {
        v_xc[j] = v_xc[lo] - left_slope * (lo - j) as f64;
    }
    for j in hi + 1..n {
        v_xc[j] = v_xc[hi] + right_slope * (j - hi) as f64;
    }
    let v_ks = (0..n).map(|j| v_ext[j] + v_hartree[j] + v_xc[j]).collect();
    Ok(KsInversion {
        v_ks,
        v_xc,
        v_hartree,
        orbital_energy: gauge,
        window: (lo, hi),
    })
}
