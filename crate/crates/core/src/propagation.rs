//! Time evolution and density traces.
//!
//! All paths use Strang splitting (half kinetic, full potential at the step midpoint,
//! half kinetic) on periodic Fourier grids. The integration is split at the end of
//! the pulse so that `tau` is always a step boundary.

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fourier_grid_hamiltonian, quadrature, raw_inner, Grid1D, Spectral1D, Spectral2D, WaveFn1D};
use crate::model::{assemble_wavefn2d, lab_density_from_factorized, soft_coulomb, ModelParams, Pulse};
use crate::oracle::ClassicalTrajectory;
use crate::stationary::{sorted_eigen, ChannelSet, HartreeSolver, KSGroundState, XcFunctional, XcInput, XcKind};

/// Norm drift beyond which a propagation is aborted.
pub const MAX_NORM_DRIFT: f64 = 1e-6;
/// Boundary amplitude of a propagated state that triggers a warning.
pub const BOUNDARY_WARNING: f64 = 1e-6;
/// Relative spectral power above which a Fourier mode counts as populated.
const POPULATED_MODE: f64 = 1e-14;

/// How the field-free center-of-mass motion is advanced after the pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostPulseScheme {
    /// Exact evolution in the eigenbasis of the discretized field-free Hamiltonian.
    Eigenbasis,
    /// Keep Strang stepping.
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Steps between density snapshots.
    pub record_stride: usize,
    pub scheme: SplitScheme,
    pub post_pulse: PostPulseScheme,
}

impl PropagatorConfig {
    /// `dt = 0.02` Strang steps, one snapshot per 0.5 a.u., run until `tau + 1000`.
    pub fn for_pulse(pulse: &Pulse) -> Self {
        Self {
            dt: 0.02,
            t_max: pulse.tau + 1000.0,
            record_stride: 25,
            scheme: SplitScheme::Strang,
            post_pulse: PostPulseScheme::Eigenbasis,
        }
    }

    pub fn validate(&self, pulse: &Pulse) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_max > pulse.tau) {
            return Err(Error::InvalidParameter(format!(
                "t_max = {} must exceed the pulse length {}",
                self.t_max, pulse.tau
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Rejects a step whose kinetic phase wraps past `pi` on any populated Fourier mode
    /// of `psi`.
    pub fn check_kinetic_phase(&self, psi: &WaveFn1D, mass: f64) -> Result<()> {
        let k_max = populated_wavenumber(psi);
        let phase = self.dt * k_max * k_max / (2.0 * mass);
        if phase >= std::f64::consts::PI {
            return Err(Error::InvalidParameter(format!(
                "dt = {} aliases the kinetic phase of populated modes (|k| up to {k_max:.3}, phase {phase:.3})",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Largest `|k|` carrying more than [`POPULATED_MODE`] of the peak spectral power.
pub fn populated_wavenumber(psi: &WaveFn1D) -> f64 {
    let spectral = Spectral1D::new(*psi.grid());
    let mut buf = psi.amplitudes().to_vec();
    spectral.forward(&mut buf);
    let peak = buf.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    buf.iter()
        .zip(spectral.wavenumbers())
        .filter(|(c, _)| c.norm_sqr() > POPULATED_MODE * peak)
        .map(|(_, k)| k.abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    end: f64,
    steps: usize,
}

impl Segment {
    fn new(start: f64, end: f64, dt: f64) -> Self {
        let steps = ((end - start) / dt - 1e-9).ceil().max(1.0) as usize;
        Self { start, end, steps }
    }

    fn step(&self) -> f64 {
        (self.end - self.start) / self.steps as f64
    }

    fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.end
        } else {
            self.start + k as f64 * self.step()
        }
    }

    fn records(&self, k: usize, stride: usize) -> bool {
        k == self.steps || k % stride == 0
    }
}

fn schedule(cfg: &PropagatorConfig, pulse: &Pulse) -> [Segment; 2] {
    [
        Segment::new(0.0, pulse.tau, cfg.dt),
        Segment::new(pulse.tau, cfg.t_max, cfg.dt),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    Exact,
    #[serde(rename = "exact_2d")]
    Exact2d,
    TdksExactVxc,
    TdksExchangeSic,
    TdksNonInteracting,
}

impl TraceSource {
    pub fn is_exact(self) -> bool {
        matches!(self, Self::Exact | Self::Exact2d)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Exact2d => "exact_2d",
            Self::TdksExactVxc => "tdks_exact_vxc",
            Self::TdksExchangeSic => "tdks_exchange_sic",
            Self::TdksNonInteracting => "tdks_non_interacting",
        }
    }

    fn from_xc(kind: XcKind) -> Self {
        match kind {
            XcKind::ExchangeSic => Self::TdksExchangeSic,
            XcKind::ExactInverted => Self::TdksExactVxc,
            XcKind::NonInteracting => Self::TdksNonInteracting,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropagationDiagnostics {
    pub max_norm_drift: f64,
    pub max_particle_number_error: f64,
    pub max_boundary_amplitude: f64,
    /// Two-dimensional path only.
    pub max_exchange_asymmetry: f64,
    /// `(t, <H_0>)` at snapshots from `tau` on; two-dimensional path only.
    pub post_pulse_energy: Vec<(f64, f64)>,
}

impl PropagationDiagnostics {
    fn observe_norm(&mut self, t: f64, norm: f64) -> Result<()> {
        let drift = (norm - 1.0).abs();
        self.max_norm_drift = self.max_norm_drift.max(drift);
        if drift > MAX_NORM_DRIFT {
            return Err(Error::NormDrift { time: t, drift });
        }
        Ok(())
    }

    fn observe_boundary(&mut self, t: f64, edge: f64) {
        if edge > BOUNDARY_WARNING && edge > self.max_boundary_amplitude {
            warn!("boundary amplitude {edge:.2e} at t = {t}: enlarge the box");
        }
        self.max_boundary_amplitude = self.max_boundary_amplitude.max(edge);
    }

    /// Spread of the recorded post-pulse energies.
    pub fn energy_variation(&self) -> f64 {
        let (lo, hi) = self
            .post_pulse_energy
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, e)| {
                (lo.min(e), hi.max(e))
            });
        if self.post_pulse_energy.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }
}

/// Snapshots of `n(x, t)` on the lab grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTrace {
    pub source: TraceSource,
    pub grid: Grid1D,
    pub tau: f64,
    pub times: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
    pub diagnostics: PropagationDiagnostics,
}

impl DensityTrace {
    pub fn new(source: TraceSource, grid: Grid1D, tau: f64) -> Self {
        Self {
            source,
            grid,
            tau,
            times: Vec::new(),
            densities: Vec::new(),
            diagnostics: PropagationDiagnostics::default(),
        }
    }

    pub fn push(&mut self, t: f64, density: Vec<f64>) {
        let error = (quadrature(&self.grid, &density) - 2.0).abs();
        self.diagnostics.max_particle_number_error = self.diagnostics.max_particle_number_error.max(error);
        self.times.push(t);
        self.densities.push(density);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Snapshot index recorded at `t` (within 1e-9).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i = self.times.partition_point(|&s| s < t - 1e-9);
        (i < self.times.len() && (self.times[i] - t).abs() <= 1e-9).then_some(i)
    }

    /// Running mean `(1/(t - tau)) integral_tau^t n dt'` at every snapshot after `tau`,
    /// accumulated with the trapezoidal rule.
    pub fn running_average(&self) -> Vec<(f64, Vec<f64>)> {
        let Some(start) = self.index_of(self.tau) else {
            return Vec::new();
        };
        let mut integral = vec![0.0; self.grid.n_points()];
        let mut out = Vec::new();
        for i in start + 1..self.len() {
            let h = self.times[i] - self.times[i - 1];
            for ((acc, a), b) in integral.iter_mut().zip(&self.densities[i - 1]).zip(&self.densities[i]) {
                *acc += 0.5 * h * (a + b);
            }
            let w = self.times[i] - self.tau;
            out.push((self.times[i], integral.iter().map(|v| v / w).collect()));
        }
        out
    }
}

/// Projections `<h_N | h(t)>` of the center-of-mass factor, `N = 0..`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTrace {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vec<Complex64>>,
}

/// The time-dependent Kohn-Sham orbital at the snapshot times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitalTrace {
    pub grid: Grid1D,
    pub xc_model: XcKind,
    pub times: Vec<f64>,
    pub orbitals: Vec<Vec<Complex64>>,
}

/// Operator splitting of one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitScheme {
    /// Kinetic-potential-kinetic, second order.
    Strang,
    /// Symmetric triple composition of Strang steps, fourth order.
    Yoshida4,
}

impl SplitScheme {
    /// Kinetic fractions `a_0..a_m` and potential fractions `b_1..b_m` of the sequence
    /// `K(a_0 h) V(b_1 h) K(a_1 h) ... V(b_m h) K(a_m h)`.
    fn stages(self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Strang => (vec![0.5, 0.5], vec![1.0]),
            Self::Yoshida4 => {
                let c = 2f64.cbrt();
                let w1 = 1.0 / (2.0 - c);
                let w0 = -c / (2.0 - c);
                (
                    vec![0.5 * w1, 0.5 * (w1 + w0), 0.5 * (w0 + w1), 0.5 * w1],
                    vec![w1, w0, w1],
                )
            }
        }
    }

    /// Times (as step fractions) at which the potential of each stage is evaluated:
    /// the midpoints of the composed Strang substeps.
    fn potential_times(self) -> Vec<f64> {
        let (_, b) = self.stages();
        let mut elapsed = 0.0;
        b.iter()
            .map(|w| {
                let t = elapsed + 0.5 * w;
                elapsed += w;
                t
            })
            .collect()
    }
}

/// Split-operator stepping for one particle of mass `mass` with step `h`.
#[derive(Clone)]
pub struct SplitOperator1D {
    spectral: Spectral1D,
    kinetic: Vec<Vec<Complex64>>,
    potential_weights: Vec<f64>,
    potential_times: Vec<f64>,
    h: f64,
}

impl SplitOperator1D {
    pub fn new(grid: Grid1D, mass: f64, h: f64, scheme: SplitScheme) -> Self {
        let spectral = Spectral1D::new(grid);
        let (a, b) = scheme.stages();
        let kinetic = a
            .iter()
            .map(|w| {
                spectral
                    .wavenumbers()
                    .iter()
                    .map(|k| Complex64::from_polar(1.0, -w * h * k * k / (2.0 * mass)))
                    .collect()
            })
            .collect();
        Self {
            spectral,
            kinetic,
            potential_weights: b,
            potential_times: scheme.potential_times(),
            h,
        }
    }

    /// Advances `psi` from `t` to `t + h`. `potential(s, psi)` returns the potential at
    /// time `s` for the current state; it is called once per potential stage.
    pub fn step(&self, psi: &mut [Complex64], t: f64, mut potential: impl FnMut(f64, &[Complex64]) -> Vec<f64>) {
        self.spectral.apply_multiplier(psi, &self.kinetic[0]);
        for (j, (&w, &s)) in self.potential_weights.iter().zip(&self.potential_times).enumerate() {
            let v = potential(t + s * self.h, psi);
            for (p, &v) in psi.iter_mut().zip(&v) {
                *p *= Complex64::from_polar(1.0, -w * self.h * v);
            }
            self.spectral.apply_multiplier(psi, &self.kinetic[j + 1]);
        }
    }
}

fn norm_sqr(grid: &Grid1D, psi: &[Complex64]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.spacing()
}

fn boundary(psi: &[Complex64]) -> f64 {
    psi[0].norm().max(psi[psi.len() - 1].norm())
}

/// Exact propagation in the eigenbasis of a time-independent real Hamiltonian.
struct FreeEvolution {
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
    re: DVector<f64>,
    im: DVector<f64>,
    t0: f64,
}

impl FreeEvolution {
    fn new(hamiltonian: DMatrix<f64>, psi: &[Complex64], t0: f64) -> Self {
        let (energies, vectors) = sorted_eigen(hamiltonian);
        let re = vectors.tr_mul(&DVector::from_iterator(psi.len(), psi.iter().map(|c| c.re)));
        let im = vectors.tr_mul(&DVector::from_iterator(psi.len(), psi.iter().map(|c| c.im)));
        Self {
            energies,
            vectors,
            re,
            im,
            t0,
        }
    }

    fn at(&self, t: f64) -> Vec<Complex64> {
        let s = t - self.t0;
        let mut a = DVector::zeros(self.energies.len());
        let mut b = DVector::zeros(self.energies.len());
        for (j, e) in self.energies.iter().enumerate() {
            let (sn, cs) = (e * s).sin_cos();
            // (re + i im) * (cs - i sn)
            a[j] = self.re[j] * cs + self.im[j] * sn;
            b[j] = self.im[j] * cs - self.re[j] * sn;
        }
        let re = &self.vectors * a;
        let im = &self.vectors * b;
        re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }
}

/// Exact dynamics in the factorized form `Psi = sqrt(2) g_0(r) h(R, t)`: the relative
/// factor is stationary, `h` evolves under `P^2 + w^2 R^2/4 - F(t) R`.
///
/// Returns the lab density trace and `<h_N | h(t)>` for every stored c.o.m. state.
pub fn propagate_exact_factorized(
    channels: &ChannelSet,
    pulse: &Pulse,
    cfg: &PropagatorConfig,
) -> Result<(DensityTrace, AmplitudeTrace)> {
    cfg.validate(pulse)?;
    let params = channels.params;
    let lab = channels.lab;
    let pair = channels.pair();
    let g = channels.ground_relative();
    let mut h = channels.cm_states[0].clone();
    cfg.check_kinetic_phase(&h, 0.5)?;

    let dx = pair.spacing();
    let r: Vec<f64> = pair.points();
    let trap: Vec<f64> = r.iter().map(|&x| params.cm_potential(x)).collect();

    let mut trace = DensityTrace::new(TraceSource::Exact, lab, pulse.tau);
    let mut amplitudes = AmplitudeTrace {
        times: Vec::new(),
        amplitudes: Vec::new(),
    };
    let mut record = |t: f64, psi: &[Complex64], trace: &mut DensityTrace| -> Result<()> {
        trace.diagnostics.observe_norm(t, norm_sqr(&pair, psi))?;
        trace.diagnostics.observe_boundary(t, boundary(psi));
        let hw = WaveFn1D::new(pair, psi.to_vec())?;
        trace.push(t, lab_density_from_factorized(g, &hw, &lab)?);
        amplitudes.times.push(t);
        amplitudes.amplitudes.push(
            channels
                .cm_states
                .iter()
                .map(|s| raw_inner(s.amplitudes(), psi) * dx)
                .collect(),
        );
        Ok(())
    };

    let [during, after] = schedule(cfg, pulse);
    record(0.0, h.amplitudes(), &mut trace)?;
    for segment in [during, after] {
        if segment.start >= pulse.tau && cfg.post_pulse == PostPulseScheme::Eigenbasis {
            let free = FreeEvolution::new(
                fourier_grid_hamiltonian(&pair, 0.5, &trap),
                h.amplitudes(),
                segment.start,
            );
            for k in 1..=segment.steps {
                if segment.records(k, cfg.record_stride) {
                    let t = segment.time(k);
                    record(t, &free.at(t), &mut trace)?;
                }
            }
            continue;
        }
        let split = SplitOperator1D::new(pair, 0.5, segment.step(), cfg.scheme);
        for k in 1..=segment.steps {
            split.step(h.amplitudes_mut(), segment.time(k - 1), |t, _| {
                let f = pulse.field(t);
                r.iter().zip(&trap).map(|(&x, &w)| w - f * x).collect()
            });
            if segment.records(k, cfg.record_stride) {
                record(segment.time(k), h.amplitudes(), &mut trace)?;
            }
        }
    }
    debug!(
        "factorized propagation: {} snapshots, max norm drift {:.2e}",
        trace.len(),
        trace.diagnostics.max_norm_drift
    );
    Ok((trace, amplitudes))
}

/// Full two-particle Strang propagation on the lab grid squared. The field-free stage
/// after the pulse is always stepped (the dense eigenbasis would be `n^2 x n^2`).
pub fn propagate_exact_2d(channels: &ChannelSet, pulse: &Pulse, cfg: &PropagatorConfig) -> Result<DensityTrace> {
    cfg.validate(pulse)?;
    let params = channels.params;
    let lab = channels.lab;
    cfg.check_kinetic_phase(channels.ground_relative(), 0.5)?;
    cfg.check_kinetic_phase(&channels.cm_states[0], 0.5)?;
    let mut psi = assemble_wavefn2d(channels.ground_relative(), &channels.cm_states[0], &lab)?;

    let n = lab.n_points();
    let dx = lab.spacing();
    let x = lab.points();
    let mut static_v = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            static_v[i * n + k] =
                params.confinement(x[i]) + params.confinement(x[k]) + soft_coulomb(x[i] - x[k], &params);
        }
    }
    let mut fft = Spectral2D::new(lab);
    let kin: Vec<f64> = {
        let kk = fft.wavenumbers().to_vec();
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                t[i * n + j] = 0.5 * (kk[i] * kk[i] + kk[j] * kk[j]);
            }
        }
        t
    };

    let mut trace = DensityTrace::new(TraceSource::Exact2d, lab, pulse.tau);
    let energy = |psi: &[Complex64], fft: &mut Spectral2D| -> f64 {
        let mut buf = psi.to_vec();
        fft.forward(&mut buf);
        let kinetic: f64 = buf.iter().zip(&kin).map(|(c, t)| c.norm_sqr() * t).sum::<f64>() / (n * n) as f64;
        let potential: f64 = psi.iter().zip(&static_v).map(|(c, v)| c.norm_sqr() * v).sum();
        (kinetic + potential) * dx * dx
    };
    let observe = |t: f64, psi: &crate::grid::WaveFn2D, trace: &mut DensityTrace, fft: &mut Spectral2D| -> Result<()> {
        trace.diagnostics.observe_norm(t, psi.norm_sqr())?;
        trace.diagnostics.observe_boundary(t, psi.boundary_amplitude());
        trace.diagnostics.max_exchange_asymmetry =
            trace.diagnostics.max_exchange_asymmetry.max(psi.exchange_asymmetry());
        if t >= pulse.tau - 1e-9 {
            let e = energy(psi.amplitudes(), fft);
            trace.diagnostics.post_pulse_energy.push((t, e));
        }
        trace.push(t, psi.one_particle_density());
        Ok(())
    };
    observe(0.0, &psi, &mut trace, &mut fft)?;

    // Adjacent kinetic stages of consecutive steps are fused unless a snapshot
    // falls in between.
    let (kinetic_weights, potential_weights) = cfg.scheme.stages();
    let potential_times = cfg.scheme.potential_times();
    let mut phases: Vec<(f64, Vec<Complex64>)> = Vec::new();
    let mut kinetic = |psi: &mut [Complex64], tau_k: f64, fft: &mut Spectral2D| {
        if tau_k == 0.0 {
            return;
        }
        let phase = match phases.iter().position(|(w, _)| *w == tau_k) {
            Some(i) => &phases[i].1,
            None => {
                phases.push((
                    tau_k,
                    kin.iter().map(|t| Complex64::from_polar(1.0, -tau_k * t)).collect(),
                ));
                &phases.last().expect("just pushed").1
            }
        };
        fft.forward(psi);
        psi.iter_mut().zip(phase).for_each(|(p, m)| *p *= m);
        fft.inverse(psi);
    };

    for segment in schedule(cfg, pulse) {
        let h = segment.step();
        let static_phases: Vec<Vec<Complex64>> = potential_weights
            .iter()
            .map(|w| {
                static_v
                    .iter()
                    .map(|v| Complex64::from_polar(1.0, -w * h * v))
                    .collect()
            })
            .collect();
        let mut pending = 0.0;
        for k in 1..=segment.steps {
            let t0 = segment.time(k - 1);
            pending += kinetic_weights[0] * h;
            for (j, (&w, &s)) in potential_weights.iter().zip(&potential_times).enumerate() {
                kinetic(psi.amplitudes_mut(), pending, &mut fft);
                let f = pulse.field(t0 + s * h);
                let amps = psi.amplitudes_mut();
                if f != 0.0 {
                    let dipole: Vec<Complex64> =
                        x.iter().map(|&xi| Complex64::from_polar(1.0, w * h * f * xi)).collect();
                    for i in 0..n {
                        for l in 0..n {
                            amps[i * n + l] *= static_phases[j][i * n + l] * dipole[i] * dipole[l];
                        }
                    }
                } else {
                    amps.iter_mut().zip(&static_phases[j]).for_each(|(p, m)| *p *= m);
                }
                pending = kinetic_weights[j + 1] * h;
            }
            if segment.records(k, cfg.record_stride) {
                kinetic(psi.amplitudes_mut(), pending, &mut fft);
                pending = 0.0;
                observe(segment.time(k), &psi, &mut trace, &mut fft)?;
            }
        }
    }
    debug!(
        "2D propagation: {} snapshots, max asymmetry {:.2e}, energy spread {:.2e}",
        trace.len(),
        trace.diagnostics.max_exchange_asymmetry,
        trace.diagnostics.energy_variation()
    );
    Ok(trace)
}

/// Time-dependent Kohn-Sham propagation of the doubly occupied orbital under
/// `-1/2 d^2/dx^2 + w^2 x^2/2 - F(t) x + V_H[n] + V_xc`.
///
/// Each potential stage is built from the density left by the preceding kinetic stage;
/// the potential phase leaves `|Phi|^2` untouched, so this density is already the
/// self-consistent one for the stage. The exact-shift functional needs the classical
/// trajectory for its displacement `R_cl(t)/2`.
pub fn propagate_tdks(
    ks0: &KSGroundState,
    xc: &dyn XcFunctional,
    params: &ModelParams,
    pulse: &Pulse,
    cfg: &PropagatorConfig,
    trajectory: Option<&ClassicalTrajectory>,
) -> Result<(DensityTrace, OrbitalTrace)> {
    cfg.validate(pulse)?;
    if xc.kind() == XcKind::ExactInverted && trajectory.is_none() {
        return Err(Error::InvalidParameter(
            "the exact-shift functional needs the classical trajectory".into(),
        ));
    }
    let grid = *ks0.grid();
    cfg.check_kinetic_phase(&ks0.orbital, 1.0)?;
    let x = grid.points();
    let trap: Vec<f64> = x.iter().map(|&x| params.confinement(x)).collect();
    let hartree = HartreeSolver::new(&grid, params);
    let mut phi = ks0.orbital.amplitudes().to_vec();

    let mut trace = DensityTrace::new(TraceSource::from_xc(xc.kind()), grid, pulse.tau);
    let mut orbitals = OrbitalTrace {
        grid,
        xc_model: xc.kind(),
        times: Vec::new(),
        orbitals: Vec::new(),
    };
    let mut record = |t: f64, phi: &[Complex64], trace: &mut DensityTrace| -> Result<()> {
        trace.diagnostics.observe_norm(t, norm_sqr(&grid, phi))?;
        trace.diagnostics.observe_boundary(t, boundary(phi));
        trace.push(t, phi.iter().map(|c| 2.0 * c.norm_sqr()).collect());
        orbitals.times.push(t);
        orbitals.orbitals.push(phi.to_vec());
        Ok(())
    };
    record(0.0, &phi, &mut trace)?;

    for segment in schedule(cfg, pulse) {
        let split = SplitOperator1D::new(grid, 1.0, segment.step(), cfg.scheme);
        for k in 1..=segment.steps {
            split.step(&mut phi, segment.time(k - 1), |t, phi| {
                let density: Vec<f64> = phi.iter().map(|c| 2.0 * c.norm_sqr()).collect();
                let vh = if xc.includes_hartree() {
                    hartree.potential(&density)
                } else {
                    vec![0.0; density.len()]
                };
                let shift = trajectory.map_or(0.0, |tr| tr.displacement_at(t));
                let vxc = xc.potential(&XcInput {
                    density: &density,
                    hartree: &vh,
                    shift,
                });
                let f = pulse.field(t);
                (0..density.len())
                    .map(|j| trap[j] - f * x[j] + vh[j] + vxc[j])
                    .collect()
            });
            if segment.records(k, cfg.record_stride) {
                record(segment.time(k), &phi, &mut trace)?;
            }
        }
    }
    Ok((trace, orbitals))
}

/// Rigid one-particle density displacement `R_cl(t) / 2`.
pub fn classical_shift(t: f64, trajectory: &ClassicalTrajectory) -> f64 {
    trajectory.displacement_at(t)
}
