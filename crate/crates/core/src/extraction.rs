//! Transition probabilities from projections and from the averaged density alone.
//!
//! After the pulse every channel amplitude only rotates, `c_f(t) = c_f e^{-i e_f (t - tau)}`,
//! so the density is `n(x,t) = sum T_{f'f}(t) rho_{f'f}(x)` with beating off-diagonal
//! terms. Averaged over a long window only the diagonal survives,
//! `n_avg(x) = sum_f P_f rho_ff(x)`, and sampling that at as many points as there are
//! channels gives a linear system for the `P_f`.

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{quadrature, raw_inner, Grid1D};
use crate::propagation::{AmplitudeTrace, DensityTrace, OrbitalTrace};
use crate::stationary::{rdm_offdiagonal, ChannelSet, KSGroundState};

/// Largest acceptable condition number of the sample-point matrix.
pub const MAX_CONDITION: f64 = 1e6;
/// Read-out probabilities may leave `[0, 1]` by this much through channel truncation.
pub const TRUNCATION_SLACK: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    ExactProjection,
    KsDeterminantProjection,
}

/// `P_f(t)` for a set of final channels. `probabilities[i][f]` belongs to `times[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionTrace {
    pub method: ProjectionMethod,
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub probabilities: Vec<Vec<f64>>,
}

impl ProjectionTrace {
    pub fn n_channels(&self) -> usize {
        self.labels.len()
    }

    pub fn channel(&self, f: usize) -> Vec<f64> {
        self.probabilities.iter().map(|p| p[f]).collect()
    }

    /// Checks `0 <= P_f <= 1` and `sum_f P_f <= 1` (both up to 1e-6).
    pub fn check_bounds(&self) -> Result<()> {
        for (t, p) in self.times.iter().zip(&self.probabilities) {
            let total: f64 = p.iter().sum();
            if p.iter().any(|&v| !(-1e-12..=1.0 + 1e-6).contains(&v)) || total > 1.0 + 1e-6 {
                return Err(Error::InvalidParameter(format!(
                    "probabilities {p:?} out of range at t = {t}"
                )));
            }
        }
        Ok(())
    }

    fn after(&self, tau: f64) -> impl Iterator<Item = &Vec<f64>> {
        self.times
            .iter()
            .zip(&self.probabilities)
            .filter(move |(t, _)| **t >= tau - 1e-9)
            .map(|(_, p)| p)
    }

    /// Population standard deviation of each channel over the snapshots from `tau` on.
    pub fn std_dev_after(&self, tau: f64) -> Vec<f64> {
        let rows: Vec<&Vec<f64>> = self.after(tau).collect();
        let m = rows.len().max(1) as f64;
        (0..self.n_channels())
            .map(|f| {
                let mean = rows.iter().map(|p| p[f]).sum::<f64>() / m;
                (rows.iter().map(|p| (p[f] - mean).powi(2)).sum::<f64>() / m).sqrt()
            })
            .collect()
    }

    /// `max - min` of each channel over the snapshots from `tau` on.
    pub fn spread_after(&self, tau: f64) -> Vec<f64> {
        (0..self.n_channels())
            .map(|f| {
                let (lo, hi) = self.after(tau).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p[f]), hi.max(p[f]))
                });
                hi - lo
            })
            .collect()
    }

    /// Trapezoidal time average of each channel over `[tau, t_end]`.
    pub fn time_average(&self, tau: f64, t_end: f64) -> Result<Vec<f64>> {
        (0..self.n_channels())
            .map(|f| Ok(piecewise_linear_integral(&self.times, &self.channel(f), tau, t_end)? / (t_end - tau)))
            .collect()
    }
}

/// Exact projections from the center-of-mass amplitudes: the relative factor never
/// leaves `g_0`, so `P_(N,0) = |<h_N|h(t)>|^2` and channels with `n_rel > 0` stay empty.
pub fn project_exact(amplitudes: &AmplitudeTrace, channels: &ChannelSet) -> Result<ProjectionTrace> {
    let available = amplitudes.amplitudes.first().map_or(0, Vec::len);
    if let Some(c) = channels.channels.iter().find(|c| c.n_cm >= available) {
        return Err(Error::UnresolvedStates {
            requested: c.n_cm + 1,
            resolvable: available,
        });
    }
    let probabilities = amplitudes
        .amplitudes
        .iter()
        .map(|a| {
            channels
                .channels
                .iter()
                .map(|c| if c.n_rel == 0 { a[c.n_cm].norm_sqr() } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(ProjectionTrace {
        method: ProjectionMethod::ExactProjection,
        labels: channels.labels(),
        times: amplitudes.times.clone(),
        probabilities,
    })
}

/// Projections onto singlet Slater determinants of Kohn-Sham orbitals:
/// `a_00 = <phi_0|Phi>^2`, `a_0n = sqrt(2) <phi_0|Phi><phi_n|Phi>`.
pub fn project_ks_determinants(
    orbitals: &OrbitalTrace,
    ks0: &KSGroundState,
    n_channels: usize,
) -> Result<ProjectionTrace> {
    if n_channels == 0 || n_channels > ks0.virtuals.len() + 1 {
        return Err(Error::UnresolvedStates {
            requested: n_channels,
            resolvable: ks0.virtuals.len() + 1,
        });
    }
    orbitals.grid.ensure_same(ks0.grid(), "orbital trace")?;
    let dx = orbitals.grid.spacing();
    let basis: Vec<&[Complex64]> = std::iter::once(ks0.orbital.amplitudes())
        .chain(ks0.virtuals.iter().map(|v| v.amplitudes()))
        .take(n_channels)
        .collect();
    let probabilities = orbitals
        .orbitals
        .iter()
        .map(|phi| {
            let o: Vec<Complex64> = basis.iter().map(|b| raw_inner(b, phi) * dx).collect();
            (0..n_channels)
                .map(|n| {
                    if n == 0 {
                        (o[0] * o[0]).norm_sqr()
                    } else {
                        2.0 * (o[0] * o[n]).norm_sqr()
                    }
                })
                .collect()
        })
        .collect();
    Ok(ProjectionTrace {
        method: ProjectionMethod::KsDeterminantProjection,
        labels: (0..n_channels).map(|n| format!("|0,{n}>")).collect(),
        times: orbitals.times.clone(),
        probabilities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutMode {
    /// As many points as channels, solved exactly.
    SquareExact,
    /// More points than channels, solved in the least-squares sense.
    LeastSquares,
}

/// Channel densities sampled at the read-out points: `values[(f, j)] = rho_ff(x_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RMatrix {
    pub grid: Grid1D,
    pub indices: Vec<usize>,
    pub points: Vec<f64>,
    pub values: DMatrix<f64>,
    pub condition_number: f64,
    pub mode: ReadoutMode,
    /// Full channel densities, kept for the residual.
    pub densities: Vec<Vec<f64>>,
}

fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    let hi = s.iter().copied().fold(0.0, f64::max);
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn submatrix(densities: &[Vec<f64>], columns: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(densities.len(), columns.len(), |f, j| densities[f][columns[j]])
}

/// Greedy sample-point design over all grid points.
pub fn select_sample_points(
    grid: &Grid1D,
    densities: &[Vec<f64>],
    n_points: usize,
    mode: ReadoutMode,
) -> Result<RMatrix> {
    let all: Vec<usize> = (0..grid.n_points()).collect();
    select_sample_points_from(grid, densities, n_points, mode, &all)
}

/// Greedy sample-point design restricted to `candidates` (grid indices): start at the
/// maximum of the first channel density, then repeatedly add the candidate that
/// maximizes the smallest singular value of the sampled matrix.
pub fn select_sample_points_from(
    grid: &Grid1D,
    densities: &[Vec<f64>],
    n_points: usize,
    mode: ReadoutMode,
    candidates: &[usize],
) -> Result<RMatrix> {
    let n_channels = densities.len();
    if n_channels == 0 {
        return Err(Error::InvalidParameter("no channel densities".into()));
    }
    if let Some(d) = densities.iter().find(|d| d.len() != grid.n_points()) {
        return Err(Error::GridMismatch(format!(
            "channel density with {} points on a {}-point grid",
            d.len(),
            grid.n_points()
        )));
    }
    match mode {
        ReadoutMode::SquareExact if n_points != n_channels => {
            return Err(Error::InvalidParameter(format!(
                "square read-out needs exactly {n_channels} points, got {n_points}"
            )))
        }
        ReadoutMode::LeastSquares if n_points < n_channels => {
            return Err(Error::InvalidParameter(format!(
                "least-squares read-out needs at least {n_channels} points, got {n_points}"
            )))
        }
        _ => {}
    }
    if candidates.len() < n_points || candidates.iter().any(|&j| j >= grid.n_points()) {
        return Err(Error::InvalidParameter(format!(
            "{} candidate points cannot supply {n_points} sample points",
            candidates.len()
        )));
    }

    let first = candidates.iter().copied().fold(
        candidates[0],
        |b, j| if densities[0][j] > densities[0][b] { j } else { b },
    );
    let mut chosen = vec![first];
    while chosen.len() < n_points {
        let mut best: Option<(usize, f64)> = None;
        for &j in candidates {
            if chosen.contains(&j) {
                continue;
            }
            chosen.push(j);
            let smallest = singular_values(&submatrix(densities, &chosen))
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            chosen.pop();
            if best.map_or(true, |(_, s)| smallest > s) {
                best = Some((j, smallest));
            }
        }
        chosen.push(best.expect("candidates remain").0);
    }

    let values = submatrix(densities, &chosen);
    let condition_number = condition(&values);
    if !(condition_number < MAX_CONDITION) {
        return Err(Error::NearSingular {
            condition: condition_number,
            channels: most_parallel_rows(&values),
        });
    }
    Ok(RMatrix {
        grid: *grid,
        points: chosen.iter().map(|&j| grid.point(j)).collect(),
        indices: chosen,
        values,
        condition_number,
        mode,
        densities: densities.to_vec(),
    })
}

/// The pair of rows with the largest `|cos|` between them.
fn most_parallel_rows(m: &DMatrix<f64>) -> (usize, usize) {
    let mut best = ((0, 1.min(m.nrows() - 1)), f64::NEG_INFINITY);
    for a in 0..m.nrows() {
        for b in a + 1..m.nrows() {
            let (ra, rb) = (m.row(a), m.row(b));
            let denom = ra.norm() * rb.norm();
            let cos = if denom > 0.0 { (ra.dot(&rb) / denom).abs() } else { 1.0 };
            if cos > best.1 {
                best = ((a, b), cos);
            }
        }
    }
    best.0
}

/// Integral over `[a, b]` of the piecewise-linear interpolant through `(times, values)`.
fn piecewise_linear_integral(times: &[f64], values: &[f64], a: f64, b: f64) -> Result<f64> {
    let eps = 1e-9;
    if times.is_empty() || a < times[0] - eps || b > times[times.len() - 1] + eps || !(b > a) {
        return Err(Error::InvalidParameter(format!(
            "window [{a}, {b}] not covered by samples on [{}, {}]",
            times.first().copied().unwrap_or(f64::NAN),
            times.last().copied().unwrap_or(f64::NAN)
        )));
    }
    let value_at = |i: usize, t: f64| -> f64 {
        let (t0, t1) = (times[i], times[i + 1]);
        values[i] + (values[i + 1] - values[i]) * (t - t0) / (t1 - t0)
    };
    let mut total = 0.0;
    for i in 0..times.len().saturating_sub(1) {
        let lo = times[i].max(a);
        let hi = times[i + 1].min(b);
        if hi > lo {
            total += 0.5 * (hi - lo) * (value_at(i, lo) + value_at(i, hi));
        }
    }
    Ok(total)
}

/// Long-time averaged density over `[tau, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedDensity {
    pub grid: Grid1D,
    pub tau: f64,
    pub t_end: f64,
    pub density: Vec<f64>,
    /// Set when the window does not cover a full period of the slowest beat.
    pub warning: Option<String>,
}

impl AveragedDensity {
    pub fn window(&self) -> f64 {
        self.t_end - self.tau
    }
}

/// Trapezoidal average of the snapshots over `[tau, t_end]` (linear interpolation at a
/// window end that falls between snapshots). `min_gap` is the smallest channel energy
/// difference; windows shorter than `2 pi / min_gap` get a warning.
pub fn time_average_density(trace: &DensityTrace, t_end: f64, min_gap: Option<f64>) -> Result<AveragedDensity> {
    let tau = trace.tau;
    if !(t_end > tau) {
        return Err(Error::InvalidParameter(format!(
            "averaging end {t_end} must exceed tau = {tau}"
        )));
    }
    let n = trace.grid.n_points();
    let window = t_end - tau;
    let first = trace.times.partition_point(|&t| t < tau - 1e-9).saturating_sub(1);
    let last = (trace.times.partition_point(|&t| t < t_end - 1e-9) + 1).min(trace.len());
    let times = &trace.times[first..last];
    let density = (0..n)
        .map(|j| {
            let column: Vec<f64> = trace.densities[first..last].iter().map(|d| d[j]).collect();
            Ok(piecewise_linear_integral(times, &column, tau, t_end)? / window)
        })
        .collect::<Result<Vec<f64>>>()?;
    let warning = min_gap.and_then(|gap| {
        let period = 2.0 * std::f64::consts::PI / gap;
        (window < period).then(|| {
            let msg = format!("averaging window {window:.3} is shorter than the slowest beat period {period:.3}");
            warn!("{msg}");
            msg
        })
    });
    Ok(AveragedDensity {
        grid: trace.grid,
        tau,
        t_end,
        density,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutResult {
    pub window: f64,
    pub probabilities: Vec<f64>,
    /// `integral |n_avg - sum_f P_f rho_ff| dx`.
    pub residual: f64,
    pub condition_number: f64,
    pub points: Vec<f64>,
}

impl ReadoutResult {
    /// Whether every probability lies within the truncation slack of `[0, 1]`.
    pub fn within_truncation_bounds(&self) -> bool {
        self.probabilities
            .iter()
            .all(|p| (-TRUNCATION_SLACK..=1.0 + TRUNCATION_SLACK).contains(p))
    }
}

/// Solves `sum_f P_f rho_ff(x_j) = n_avg(x_j)`; no clipping to `[0, 1]`.
pub fn invert_readout(averaged: &AveragedDensity, rmatrix: &RMatrix) -> Result<ReadoutResult> {
    averaged.grid.ensure_same(&rmatrix.grid, "averaged density")?;
    let rhs = DVector::from_iterator(
        rmatrix.indices.len(),
        rmatrix.indices.iter().map(|&j| averaged.density[j]),
    );
    let a = rmatrix.values.transpose();
    let p = match rmatrix.mode {
        ReadoutMode::SquareExact => a.lu().solve(&rhs).ok_or(Error::NearSingular {
            condition: f64::INFINITY,
            channels: most_parallel_rows(&rmatrix.values),
        })?,
        ReadoutMode::LeastSquares => a
            .svd(true, true)
            .solve(&rhs, 0.0)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?,
    };
    let probabilities: Vec<f64> = p.iter().copied().collect();
    let model: Vec<f64> = (0..averaged.grid.n_points())
        .map(|j| {
            rmatrix
                .densities
                .iter()
                .zip(&probabilities)
                .map(|(d, p)| d[j] * p)
                .sum()
        })
        .collect();
    let misfit: Vec<f64> = averaged
        .density
        .iter()
        .zip(&model)
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(ReadoutResult {
        window: averaged.window(),
        residual: quadrature(&averaged.grid, &misfit),
        probabilities,
        condition_number: rmatrix.condition_number,
        points: rmatrix.points.clone(),
    })
}

/// All one-particle transition densities `rho_{f'f}` of a channel set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionDensities {
    pub grid: Grid1D,
    pub energies: Vec<f64>,
    /// `rho[f'][f]`.
    pub rho: Vec<Vec<Vec<Complex64>>>,
}

impl TransitionDensities {
    pub fn new(channels: &ChannelSet) -> Result<Self> {
        let c = &channels.channels;
        let rho = c
            .iter()
            .map(|a| c.iter().map(|b| rdm_offdiagonal(a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: channels.lab,
            energies: channels.energies(),
            rho,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.energies.len()
    }
}

/// `T_{f'f} = conj(c_f') c_f` for channel amplitudes `c`.
pub fn transition_matrix(amplitudes: &[Complex64]) -> DMatrix<Complex64> {
    let n = amplitudes.len();
    DMatrix::from_fn(n, n, |a, b| amplitudes[a].conj() * amplitudes[b])
}

/// `n(x, t) = sum T_{f'f} e^{-i (e_f - e_f') (t - tau)} rho_{f'f}(x)` for a transition
/// density matrix `T` given at `tau`.
pub fn synthesize_density(
    t_matrix: &DMatrix<Complex64>,
    rho: &TransitionDensities,
    tau: f64,
    t: f64,
) -> Result<Vec<f64>> {
    let m = rho.n_channels();
    if t_matrix.nrows() != m || t_matrix.ncols() != m {
        return Err(Error::InvalidParameter(format!(
            "{}x{} transition matrix for {m} channels",
            t_matrix.nrows(),
            t_matrix.ncols()
        )));
    }
    let asym = (t_matrix - t_matrix.adjoint())
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if asym > 1e-12 {
        return Err(Error::NonHermitian(asym));
    }
    let trace: f64 = (0..m).map(|f| t_matrix[(f, f)].re).sum();
    let lowest = t_matrix
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if trace > 1.0 + 1e-12 || lowest < -1e-12 {
        return Err(Error::InvalidParameter(format!(
            "transition matrix must be positive semidefinite with trace <= 1 (trace {trace}, lowest eigenvalue {lowest})"
        )));
    }
    let n = rho.grid.n_points();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..m {
        for b in 0..m {
            let w = t_matrix[(a, b)] * Complex64::from_polar(1.0, -(rho.energies[b] - rho.energies[a]) * (t - tau));
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, r) in out.iter_mut().zip(&rho.rho[a][b]) {
                *o += w * r;
            }
        }
    }
    debug_assert!(out.iter().all(|c| c.im.abs() < 1e-12));
    Ok(out.into_iter().map(|c| c.re).collect())
}
