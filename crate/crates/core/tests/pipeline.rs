use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qdot_core::extraction::{select_sample_points_from, transition_matrix};
use qdot_core::grid::l1_distance;
use qdot_core::propagation::DensityTrace;
use qdot_core::{
    invert_readout, make_grid, propagate_exact_factorized, select_sample_points, synthesize_density,
    time_average_density, ChannelSet, ModelParams, PropagatorConfig, Pulse, ReadoutMode, TraceSource,
    TransitionDensities,
};

struct Run {
    channels: ChannelSet,
    exact: DensityTrace,
    amplitudes_at_tau: Vec<Complex64>,
    tau: f64,
}

fn run(window: f64) -> Run {
    let params = ModelParams::benchmark();
    let pulse = Pulse::benchmark();
    let lab = make_grid(15.0, 256).unwrap();
    let channels = ChannelSet::ladder(&params, &lab, 3, 6).unwrap();
    let cfg = PropagatorConfig {
        t_max: pulse.tau + window,
        ..PropagatorConfig::for_pulse(&pulse)
    };
    let (exact, amps) = propagate_exact_factorized(&channels, &pulse, &cfg).unwrap();
    let i = amps.times.iter().position(|t| *t == pulse.tau).unwrap();
    Run {
        channels,
        exact,
        amplitudes_at_tau: amps.amplitudes[i][..3].to_vec(),
        tau: pulse.tau,
    }
}

#[test]
fn synthesized_density_reproduces_exact_after_pulse() {
    let r = run(200.0);
    let rho = TransitionDensities::new(&r.channels).unwrap();
    let t = transition_matrix(&r.amplitudes_at_tau);
    let lab = r.channels.lab;
    for (time, n) in r
        .exact
        .times
        .iter()
        .zip(&r.exact.densities)
        .filter(|(t, _)| **t >= r.tau)
    {
        let synth = synthesize_density(&t, &rho, r.tau, *time).unwrap();
        let d = l1_distance(&lab, &synth, n);
        assert!(d < 1e-3, "t = {time}: L1 {d:.3e}");
    }
}

#[test]
fn coherent_mixture_recovered_over_commensurate_window() {
    let params = ModelParams::benchmark();
    let lab = make_grid(15.0, 256).unwrap();
    let channels = ChannelSet::ladder(&params, &lab, 3, 4).unwrap();
    let rho = TransitionDensities::new(&channels).unwrap();
    let c = [
        Complex64::new(0.8, 0.0),
        Complex64::from_polar(0.5, 0.7),
        Complex64::from_polar(0.2, -1.9),
    ];
    let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let c: Vec<Complex64> = c.iter().map(|z| z / norm).collect();
    let t: DMatrix<Complex64> = transition_matrix(&c);
    let tau = 10.0;
    let beat = 2.0 * PI / params.omega;
    let window = 20.0 * beat;
    let steps = 4000;
    let mut trace = DensityTrace::new(TraceSource::Exact, lab, tau);
    for k in 0..=steps {
        let time = tau + window * k as f64 / steps as f64;
        trace.push(time, synthesize_density(&t, &rho, tau, time).unwrap());
    }
    let avg = time_average_density(&trace, tau + window, None).unwrap();
    let rm = select_sample_points(&lab, &channels.densities(), 3, ReadoutMode::SquareExact).unwrap();
    let out = invert_readout(&avg, &rm).unwrap();
    for f in 0..3 {
        assert!(
            (out.probabilities[f] - c[f].norm_sqr()).abs() < 1e-6,
            "{:?}",
            out.probabilities
        );
    }
}

#[test]
fn disjoint_sample_sets_agree() {
    let r = run(1000.0);
    let lab = r.channels.lab;
    let dens = r.channels.densities();
    let first = select_sample_points(&lab, &dens, 3, ReadoutMode::SquareExact).unwrap();
    let rest: Vec<usize> = (0..lab.n_points())
        .filter(|j| first.indices.iter().all(|i| i.abs_diff(*j) > 4))
        .collect();
    let second = select_sample_points_from(&lab, &dens, 3, ReadoutMode::SquareExact, &rest).unwrap();
    assert!(first.indices.iter().all(|i| !second.indices.contains(i)));

    let avg = time_average_density(&r.exact, r.tau + 1000.0, Some(r.channels.params.omega)).unwrap();
    let a = invert_readout(&avg, &first).unwrap();
    let b = invert_readout(&avg, &second).unwrap();
    for f in 0..3 {
        assert!(
            (a.probabilities[f] - b.probabilities[f]).abs() < 1e-3,
            "{:?} vs {:?}",
            a.probabilities,
            b.probabilities
        );
        let p = r.amplitudes_at_tau[f].norm_sqr();
        assert!((a.probabilities[f] - p).abs() < 5e-3);
    }
}
