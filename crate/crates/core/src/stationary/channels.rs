use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{fix_sign, sorted_eigen};
use crate::error::{Error, Result};
use crate::grid::{kinetic_kernel, Grid1D, WaveFn1D};
use crate::model::{lab_density_from_factorized, transition_density_factorized, ModelParams};

/// Coarsest spacing that still resolves the soft-Coulomb core.
const MAX_RELATIVE_SPACING: f64 = 0.15;
/// Relative edge amplitude above which an eigenstate counts as unresolved.
const EDGE_TOLERANCE: f64 = 1e-6;

/// Even-parity spectrum of `H_rel`, ascending.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelativeSpectrum {
    pub energies: Vec<f64>,
    pub states: Vec<WaveFn1D>,
}

impl RelativeSpectrum {
    pub fn grid(&self) -> &Grid1D {
        self.states[0].grid()
    }
}

/// Lowest `count` even-parity eigenpairs of `p_r^2 + w^2 r^2/4 + 1/sqrt(b + r^2)`.
///
/// The Fourier-grid Hamiltonian is projected onto the mirror-symmetric subspace
/// (`r = 0`, the self-mirrored box edge, and symmetric pairs), so odd states never
/// appear. `n_rel` counts even states only.
pub fn solve_relative_eigenstates(params: &ModelParams, grid: &Grid1D, count: usize) -> Result<RelativeSpectrum> {
    if grid.spacing() > MAX_RELATIVE_SPACING {
        return Err(Error::InvalidGrid(format!(
            "relative grid spacing {} does not resolve the soft-Coulomb core (max {MAX_RELATIVE_SPACING})",
            grid.spacing()
        )));
    }
    let m = grid.n_points();
    let c = grid.center_index();
    let dim = c + 1;
    if count == 0 || count > dim {
        return Err(Error::UnresolvedStates {
            requested: count,
            resolvable: dim,
        });
    }
    let t = kinetic_kernel(grid, 0.5);
    let v: Vec<f64> = grid.points().into_iter().map(|r| params.rel_potential(r)).collect();

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let members = |k: usize| -> Vec<(usize, f64)> {
        match k {
            0 => vec![(c, 1.0)],
            k if k == c => vec![(0, 1.0)],
            k => vec![(c + k, s), (c - k, s)],
        }
    };
    let basis: Vec<Vec<(usize, f64)>> = (0..dim).map(members).collect();
    let h = DMatrix::from_fn(dim, dim, |k, l| {
        let mut acc = 0.0;
        for &(a, alpha) in &basis[k] {
            for &(b, beta) in &basis[l] {
                let d = (a + m - b) % m;
                acc += alpha * beta * (t[d] + if a == b { v[a] } else { 0.0 });
            }
        }
        acc
    });
    let (energies, vectors) = sorted_eigen(h);

    let scale = 1.0 / grid.spacing().sqrt();
    let mut states = Vec::with_capacity(count);
    for n in 0..count {
        let mut g = vec![0.0; m];
        for (k, group) in basis.iter().enumerate() {
            for &(idx, coef) in group {
                g[idx] = coef * vectors[(k, n)] * scale;
            }
        }
        fix_sign(&mut g);
        let state = WaveFn1D::from_real(*grid, &g)?;
        let peak = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if state.boundary_amplitude() > EDGE_TOLERANCE * peak {
            return Err(Error::UnresolvedStates {
                requested: count,
                resolvable: n,
            });
        }
        states.push(state);
    }
    Ok(RelativeSpectrum {
        energies: energies[..count].to_vec(),
        states,
    })
}

/// Normalized oscillator eigenfunction `n` for `exp(-mass_omega x^2 / 2)` ground state,
/// by the stable three-term recurrence.
pub fn oscillator_eigenfunction(n: usize, mass_omega: f64, grid: &Grid1D) -> WaveFn1D {
    let alpha = mass_omega.sqrt();
    let values: Vec<f64> = grid
        .points()
        .into_iter()
        .map(|x| {
            let xi = alpha * x;
            let mut prev = 0.0;
            let mut cur = (alpha / std::f64::consts::PI.sqrt()).sqrt() * (-0.5 * xi * xi).exp();
            for k in 1..=n {
                let k = k as f64;
                let next = (2.0 / k).sqrt() * xi * cur - ((k - 1.0) / k).sqrt() * prev;
                prev = cur;
                cur = next;
            }
            cur
        })
        .collect();
    WaveFn1D::from_real(*grid, &values).expect("grid-sized").normalized()
}

/// Center-of-mass eigenstate `n_cm`: Hermite function of the mass-1/2 oscillator of
/// frequency `w` (ground state `exp(-w R^2/4)`), energy `w (n_cm + 1/2)`.
pub fn cm_eigenstate(n_cm: usize, params: &ModelParams, grid: &Grid1D) -> (f64, WaveFn1D) {
    let energy = params.omega * (n_cm as f64 + 0.5);
    (energy, oscillator_eigenfunction(n_cm, 0.5 * params.omega, grid))
}

/// Unperturbed eigenstate `chi_f = sqrt(2) g_{n_rel}(r) h_{n_cm}(R)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelState {
    pub n_cm: usize,
    pub n_rel: usize,
    pub energy: f64,
    pub rel_wavefn: WaveFn1D,
    pub cm_wavefn: WaveFn1D,
    pub lab: Grid1D,
    /// `rho_ff(x)`, integrates to 2.
    pub channel_density: Vec<f64>,
}

impl ChannelState {
    pub fn label(&self) -> String {
        format!("({},{})", self.n_cm, self.n_rel)
    }
}

pub fn assemble_channel(
    n_cm: usize,
    n_rel: usize,
    relative: &RelativeSpectrum,
    params: &ModelParams,
    lab: &Grid1D,
) -> Result<ChannelState> {
    let rel_wavefn = relative
        .states
        .get(n_rel)
        .ok_or(Error::UnresolvedStates {
            requested: n_rel + 1,
            resolvable: relative.states.len(),
        })?
        .clone();
    let (cm_energy, cm_wavefn) = cm_eigenstate(n_cm, params, relative.grid());
    let channel_density = lab_density_from_factorized(&rel_wavefn, &cm_wavefn, lab)?;
    Ok(ChannelState {
        n_cm,
        n_rel,
        energy: cm_energy + relative.energies[n_rel],
        rel_wavefn,
        cm_wavefn,
        lab: *lab,
        channel_density,
    })
}

/// One-particle transition density `rho_{f1,f2}(x) = 2 integral conj(chi_f1) chi_f2 dx2`.
pub fn rdm_offdiagonal(f1: &ChannelState, f2: &ChannelState) -> Result<Vec<Complex64>> {
    f1.lab.ensure_same(&f2.lab, "channel lab grids")?;
    transition_density_factorized(
        (&f1.rel_wavefn, &f1.cm_wavefn),
        (&f2.rel_wavefn, &f2.cm_wavefn),
        &f1.lab,
    )
}

/// The `(N, 0)` channel ladder plus the center-of-mass states used to record amplitudes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSet {
    pub params: ModelParams,
    pub lab: Grid1D,
    pub relative: RelativeSpectrum,
    /// `h_N` for `N = 0..=n_cm_max`.
    pub cm_states: Vec<WaveFn1D>,
    pub channels: Vec<ChannelState>,
}

impl ChannelSet {
    /// Channels `(0,0), (1,0), ..., (n_channels-1, 0)`; center-of-mass states up to
    /// `n_cm_max` (at least `n_channels - 1`).
    pub fn ladder(params: &ModelParams, lab: &Grid1D, n_channels: usize, n_cm_max: usize) -> Result<Self> {
        if n_channels == 0 {
            return Err(Error::InvalidParameter("at least one channel is required".into()));
        }
        let pair = lab.pair_grid();
        let relative = solve_relative_eigenstates(params, &pair, 3)?;
        let channels = (0..n_channels)
            .map(|n| assemble_channel(n, 0, &relative, params, lab))
            .collect::<Result<Vec<_>>>()?;
        let cm_states = (0..=n_cm_max.max(n_channels - 1))
            .map(|n| cm_eigenstate(n, params, &pair).1)
            .collect();
        Ok(Self {
            params: *params,
            lab: *lab,
            relative,
            cm_states,
            channels,
        })
    }

    pub fn pair(&self) -> Grid1D {
        self.lab.pair_grid()
    }

    pub fn ground_relative(&self) -> &WaveFn1D {
        &self.relative.states[0]
    }

    pub fn ground(&self) -> &ChannelState {
        &self.channels[0]
    }

    pub fn energies(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.energy).collect()
    }

    pub fn densities(&self) -> Vec<Vec<f64>> {
        self.channels.iter().map(|c| c.channel_density.clone()).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.channels.iter().map(ChannelState::label).collect()
    }
}
