//! The driven two-electron quantum dot.
//!
//! ```text
//! H(t) = sum_i [ p_i^2/2 + w^2 x_i^2/2 - F(t) x_i ] + 1/sqrt(b + (x1 - x2)^2)
//! ```
//!
//! With `R = x1 + x2` and `r = x1 - x2` this splits into
//! `H_cm = P_R^2 + w^2 R^2/4 - F(t) R` and `H_rel = p_r^2 + w^2 r^2/4 + 1/sqrt(b + r^2)`,
//! both with mass 1/2. Since `dx1 dx2 = dR dr / 2`, the lab-frame state built from
//! normalized factors is `Psi(x1, x2) = sqrt(2) g(x1 - x2) h(x1 + x2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, WaveFn1D, WaveFn2D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Confinement frequency.
    pub omega: f64,
    /// Soft-Coulomb softening parameter.
    pub b: f64,
}

impl ModelParams {
    pub fn new(omega: f64, b: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("b must be positive, got {b}")));
        }
        Ok(Self { omega, b })
    }

    /// The strongly correlated benchmark dot: `w = 0.25`, `b = 0.55`.
    pub fn benchmark() -> Self {
        Self { omega: 0.25, b: 0.55 }
    }

    /// Single-particle trap `w^2 x^2 / 2`.
    pub fn confinement(&self, x: f64) -> f64 {
        0.5 * self.omega * self.omega * x * x
    }

    /// Field-free center-of-mass potential `w^2 R^2 / 4`.
    pub fn cm_potential(&self, big_r: f64) -> f64 {
        0.25 * self.omega * self.omega * big_r * big_r
    }

    /// Relative-motion potential `w^2 r^2 / 4 + 1/sqrt(b + r^2)`.
    pub fn rel_potential(&self, r: f64) -> f64 {
        0.25 * self.omega * self.omega * r * r + soft_coulomb(r, self)
    }
}

pub fn soft_coulomb(r: f64, params: &ModelParams) -> f64 {
    1.0 / (params.b + r * r).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeShape {
    /// Linear ramps.
    Linear,
    /// `sin^2` ramps.
    SinSquared,
}

/// Trapezoidal sine pulse: ramp up over `ramp_cycles` optical cycles, flat top,
/// ramp down over the final `ramp_cycles` cycles, zero outside `[0, tau]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub f0: f64,
    pub omega_l: f64,
    pub tau: f64,
    pub ramp_cycles: f64,
    pub carrier_phase: f64,
    pub shape: EnvelopeShape,
}

impl Pulse {
    pub fn new(
        f0: f64,
        omega_l: f64,
        tau: f64,
        ramp_cycles: f64,
        carrier_phase: f64,
        shape: EnvelopeShape,
    ) -> Result<Self> {
        if !(omega_l > 0.0) || !(tau > 0.0) || !(ramp_cycles >= 0.0) || !f0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pulse needs omega_l > 0, tau > 0, ramp_cycles >= 0 (got {omega_l}, {tau}, {ramp_cycles})"
            )));
        }
        let pulse = Self {
            f0,
            omega_l,
            tau,
            ramp_cycles,
            carrier_phase,
            shape,
        };
        if 2.0 * pulse.ramp_duration() > tau {
            return Err(Error::InvalidParameter(format!(
                "pulse length {tau} is shorter than its two ramps ({:.4})",
                2.0 * pulse.ramp_duration()
            )));
        }
        Ok(pulse)
    }

    /// `F0 = 0.07`, `w_L = 0.1839`, `tau = 168`, two-cycle linear ramps, sine carrier.
    pub fn benchmark() -> Self {
        Self::new(0.07, 0.1839, 168.0, 2.0, 0.0, EnvelopeShape::Linear).expect("valid benchmark pulse")
    }

    /// Same timing, no field.
    pub fn switched_off(&self) -> Self {
        Self { f0: 0.0, ..*self }
    }

    pub fn optical_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega_l
    }

    pub fn ramp_duration(&self) -> f64 {
        self.ramp_cycles * self.optical_period()
    }

    pub fn envelope(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.tau {
            return 0.0;
        }
        let ramp = self.ramp_duration();
        let s = if t < ramp {
            t / ramp
        } else if t > self.tau - ramp {
            (self.tau - t) / ramp
        } else {
            1.0
        };
        match self.shape {
            EnvelopeShape::Linear => s,
            EnvelopeShape::SinSquared => (0.5 * std::f64::consts::PI * s).sin().powi(2),
        }
    }

    pub fn field(&self, t: f64) -> f64 {
        self.f0 * self.envelope(t) * (self.omega_l * t + self.carrier_phase).sin()
    }

    /// Times where the envelope has a kink.
    pub fn breakpoints(&self) -> [f64; 4] {
        let ramp = self.ramp_duration();
        [0.0, ramp, self.tau - ramp, self.tau]
    }
}

pub fn pulse_field(pulse: &Pulse, t: f64) -> f64 {
    pulse.field(t)
}

fn check_pair_grid(lab: &Grid1D, factor: &WaveFn1D, what: &str) -> Result<()> {
    lab.pair_grid().ensure_same(factor.grid(), what)
}

/// One-particle density of `Psi = sqrt(2) g(x1 - x2) h(x1 + x2)` on the lab grid:
/// `n(x) = 4 * integral |g(x - x2)|^2 |h(x + x2)|^2 dx2`, which integrates to 2.
pub fn lab_density_from_factorized(g: &WaveFn1D, h: &WaveFn1D, lab: &Grid1D) -> Result<Vec<f64>> {
    check_pair_grid(lab, g, "relative factor")?;
    check_pair_grid(lab, h, "center-of-mass factor")?;
    let g2 = g.probability_density();
    let h2 = h.probability_density();
    let n = lab.n_points();
    let dx = lab.spacing();
    Ok((0..n)
        .map(|i| 4.0 * dx * (0..n).map(|k| g2[i + n - k] * h2[i + k]).sum::<f64>())
        .collect())
}

/// Density matrix element `2 * integral conj(chi_a(x, x2)) chi_b(x, x2) dx2` of two
/// factorized two-particle states `chi = sqrt(2) g h`.
pub fn transition_density_factorized(
    (g_a, h_a): (&WaveFn1D, &WaveFn1D),
    (g_b, h_b): (&WaveFn1D, &WaveFn1D),
    lab: &Grid1D,
) -> Result<Vec<Complex64>> {
    for (f, what) in [
        (g_a, "relative"),
        (h_a, "center-of-mass"),
        (g_b, "relative"),
        (h_b, "center-of-mass"),
    ] {
        check_pair_grid(lab, f, what)?;
    }
    let (ga, ha, gb, hb) = (g_a.amplitudes(), h_a.amplitudes(), g_b.amplitudes(), h_b.amplitudes());
    let n = lab.n_points();
    let dx = lab.spacing();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let (r, big_r) = (i + n - k, i + k);
                    (ga[r] * ha[big_r]).conj() * gb[r] * hb[big_r]
                })
                .sum::<Complex64>()
                * (4.0 * dx)
        })
        .collect())
}

/// Lab-frame two-particle state `Psi(x1, x2) proportional to g(x1 - x2) h(x1 + x2)`,
/// renormalized on the 2D grid. The relative factor must be even.
pub fn assemble_wavefn2d(g: &WaveFn1D, h: &WaveFn1D, lab: &Grid1D) -> Result<WaveFn2D> {
    check_pair_grid(lab, g, "relative factor")?;
    check_pair_grid(lab, h, "center-of-mass factor")?;
    let scale = g.amplitudes().iter().map(|a| a.norm()).fold(0.0, f64::max);
    if g.parity_defect() > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotEvenParity);
    }
    let n = lab.n_points();
    let mut amps = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            amps.push(g.amplitudes()[i + n - k] * h.amplitudes()[i + k]);
        }
    }
    let mut psi = WaveFn2D::new(*lab, amps)?;
    psi.normalize();
    Ok(psi)
}

/// Potential energy of the full problem at `(x1, x2)` for field `f`.
pub fn lab_potential(params: &ModelParams, x1: f64, x2: f64, field: f64) -> f64 {
    params.confinement(x1) + params.confinement(x2) - field * (x1 + x2) + soft_coulomb(x1 - x2, params)
}
