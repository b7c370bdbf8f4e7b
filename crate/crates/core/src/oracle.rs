//! Closed-form references for the driven harmonic dot.
//!
//! The center of mass obeys `R' = 2P`, `P' = -w^2 R / 2 + F(t)`. Its quantum state stays
//! a coherent state following the classical orbit, so level occupations are Poisson
//! with mean `E_cl / w`, and the one-particle density is the ground density translated
//! by `R_cl / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{l1_distance, Spectral1D};
use crate::model::{pulse_field, ModelParams, Pulse};
use crate::propagation::DensityTrace;

/// Largest step accepted for the reference integrator.
pub const MAX_ORACLE_STEP: f64 = 0.01;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalTrajectory {
    pub omega: f64,
    pub tau: f64,
    pub times: Vec<f64>,
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub energy: Vec<f64>,
    /// Driving force at each stored time.
    pub force: Vec<f64>,
}

impl ClassicalTrajectory {
    fn locate(&self, t: f64) -> usize {
        match self.times.binary_search_by(|s| s.total_cmp(&t)) {
            Ok(i) => i.min(self.times.len() - 2),
            Err(i) => i.clamp(1, self.times.len() - 1) - 1,
        }
    }

    /// `(R, P)` at time `t`, cubic Hermite interpolation between stored steps.
    /// Past the last step the free oscillation is continued analytically.
    pub fn state_at(&self, t: f64) -> (f64, f64) {
        let last = self.times.len() - 1;
        if t >= self.times[last] {
            let (r0, p0) = (self.position[last], self.momentum[last]);
            let s = t - self.times[last];
            let w = self.omega;
            let (sn, cs) = (w * s).sin_cos();
            return (r0 * cs + 2.0 * p0 / w * sn, p0 * cs - 0.5 * w * r0 * sn);
        }
        if t <= self.times[0] {
            return (self.position[0], self.momentum[0]);
        }
        let i = self.locate(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let w2 = self.omega * self.omega;
        let hermite = |y0: f64, y1: f64, d0: f64, d1: f64| {
            let s2 = s * s;
            let s3 = s2 * s;
            (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                + (s3 - 2.0 * s2 + s) * h * d0
                + (-2.0 * s3 + 3.0 * s2) * y1
                + (s3 - s2) * h * d1
        };
        let (r0, r1, p0, p1) = (
            self.position[i],
            self.position[i + 1],
            self.momentum[i],
            self.momentum[i + 1],
        );
        let r = hermite(r0, r1, 2.0 * p0, 2.0 * p1);
        let p = hermite(
            p0,
            p1,
            -0.5 * w2 * r0 + self.force[i],
            -0.5 * w2 * r1 + self.force[i + 1],
        );
        (r, p)
    }

    pub fn position_at(&self, t: f64) -> f64 {
        self.state_at(t).0
    }

    /// Rigid one-particle density displacement `R_cl(t) / 2`.
    pub fn displacement_at(&self, t: f64) -> f64 {
        0.5 * self.position_at(t)
    }

    pub fn energy_at(&self, t: f64) -> f64 {
        let (r, p) = self.state_at(t);
        p * p + 0.25 * self.omega * self.omega * r * r
    }

    /// Mean number of c.o.m. quanta after the pulse, `E_cl(tau) / w`.
    pub fn excitation(&self) -> f64 {
        let i = self
            .times
            .partition_point(|&t| t < self.tau - 1e-12)
            .min(self.times.len() - 1);
        self.energy[i] / self.omega
    }

    pub fn max_excursion(&self) -> f64 {
        self.position.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Fourth-order Runge-Kutta integration of the driven c.o.m. orbit from rest, with
/// steps aligned to the pulse envelope kinks.
pub fn classical_trajectory(pulse: &Pulse, params: &ModelParams, dt: f64, t_max: f64) -> Result<ClassicalTrajectory> {
    let mut breaks: Vec<f64> = pulse.breakpoints().to_vec();
    breaks.push(t_max);
    integrate_orbit(|t| pulse_field(pulse, t), &breaks, params.omega, pulse.tau, dt, t_max)
}

pub(crate) fn integrate_orbit(
    force: impl Fn(f64) -> f64,
    breaks: &[f64],
    omega: f64,
    tau: f64,
    dt: f64,
    t_max: f64,
) -> Result<ClassicalTrajectory> {
    if !(dt > 0.0 && dt <= MAX_ORACLE_STEP) {
        return Err(Error::InvalidParameter(format!(
            "oracle step must lie in (0, {MAX_ORACLE_STEP}], got {dt}"
        )));
    }
    if !(t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
    }
    let w2 = omega * omega;
    let rhs = |t: f64, r: f64, p: f64| (2.0 * p, -0.5 * w2 * r + force(t));

    let mut nodes: Vec<f64> = breaks.iter().copied().filter(|&b| b > 0.0 && b < t_max).collect();
    nodes.push(t_max);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let mut times = vec![0.0];
    let mut position = vec![0.0];
    let mut momentum = vec![0.0];
    let mut forces = vec![force(0.0)];
    let (mut t, mut r, mut p) = (0.0, 0.0, 0.0);
    for &end in &nodes {
        let steps = ((end - t) / dt).ceil().max(1.0) as usize;
        let start = t;
        let h = (end - start) / steps as f64;
        for k in 1..=steps {
            let (k1r, k1p) = rhs(t, r, p);
            let (k2r, k2p) = rhs(t + 0.5 * h, r + 0.5 * h * k1r, p + 0.5 * h * k1p);
            let (k3r, k3p) = rhs(t + 0.5 * h, r + 0.5 * h * k2r, p + 0.5 * h * k2p);
            let (k4r, k4p) = rhs(t + h, r + h * k3r, p + h * k3p);
            r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            t = if k == steps { end } else { start + k as f64 * h };
            times.push(t);
            position.push(r);
            momentum.push(p);
            forces.push(force(t));
        }
    }
    let energy = position
        .iter()
        .zip(&momentum)
        .map(|(r, p)| p * p + 0.25 * w2 * r * r)
        .collect();
    Ok(ClassicalTrajectory {
        omega,
        tau,
        times,
        position,
        momentum,
        energy,
        force: forces,
    })
}

/// Coherent-state occupations `P_N = exp(-lambda) lambda^N / N!` for `N = 0..=n_max`.
pub fn poisson_probabilities(lambda: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "mean excitation must be >= 0, got {lambda}"
        )));
    }
    let mut out = Vec::with_capacity(n_max + 1);
    let mut term = (-lambda).exp();
    for n in 0..=n_max {
        if n > 0 {
            term *= lambda / n as f64;
        }
        out.push(term);
    }
    Ok(out)
}

/// Largest L1 distance between a traced density and the ground density rigidly moved
/// by `R_cl(t) / 2` (spectral sub-grid shift).
pub fn hpt_check(trace: &DensityTrace, ground_density: &[f64], trajectory: &ClassicalTrajectory) -> Result<f64> {
    let grid = trace.grid;
    if ground_density.len() != grid.n_points() {
        return Err(Error::GridMismatch(format!(
            "ground density has {} points, trace grid {}",
            ground_density.len(),
            grid.n_points()
        )));
    }
    let spectral = Spectral1D::new(grid);
    let mut worst: f64 = 0.0;
    for (t, n) in trace.times.iter().zip(&trace.densities) {
        let moved = spectral.shift(ground_density, trajectory.displacement_at(*t));
        worst = worst.max(l1_distance(&grid, n, &moved));
    }
    Ok(worst)
}
