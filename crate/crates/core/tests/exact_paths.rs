use qdot_core::grid::l1_distance;
use qdot_core::{
    make_grid, propagate_exact_2d, propagate_exact_factorized, ChannelSet, EnvelopeShape, ModelParams,
    PropagatorConfig, Pulse,
};

// A short pulse keeps the full pair-grid run to a few seconds.
fn short_pulse() -> Pulse {
    Pulse::new(0.07, 0.1839, 70.0, 1.0, 0.0, EnvelopeShape::Linear).unwrap()
}

#[test]
fn two_dimensional_and_factorized_paths_agree() {
    let params = ModelParams::benchmark();
    let lab = make_grid(15.0, 256).unwrap();
    let channels = ChannelSet::ladder(&params, &lab, 3, 4).unwrap();
    let pulse = short_pulse();
    let cfg = PropagatorConfig {
        t_max: pulse.tau + 20.0,
        ..PropagatorConfig::for_pulse(&pulse)
    };
    let full = propagate_exact_2d(&channels, &pulse, &cfg).unwrap();
    let (fact, _) = propagate_exact_factorized(&channels, &pulse, &cfg).unwrap();
    assert_eq!(full.times, fact.times);
    assert!(full.times.contains(&pulse.tau));

    let worst = (0..full.len())
        .map(|i| l1_distance(&lab, &full.densities[i], &fact.densities[i]))
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "L1 {worst:.3e}");

    // The abrupt one-cycle ramps excite more strongly than the benchmark pulse, so the
    // O(dt^2) oscillation of <H_0> under splitting is larger here.
    let d = &full.diagnostics;
    assert!(
        d.energy_variation() < 1e-5,
        "energy variation {:.3e}",
        d.energy_variation()
    );
    assert!(
        d.max_exchange_asymmetry < 1e-8,
        "asymmetry {:.3e}",
        d.max_exchange_asymmetry
    );
    assert!(d.max_norm_drift < 1e-6);
    assert!(!d.post_pulse_energy.is_empty());
}

#[test]
fn field_free_pair_grid_run_stays_in_ground_state() {
    let params = ModelParams::benchmark();
    let lab = make_grid(15.0, 256).unwrap();
    let channels = ChannelSet::ladder(&params, &lab, 2, 2).unwrap();
    let pulse = Pulse::new(0.0, 0.1839, 5.0, 0.0, 0.0, EnvelopeShape::Linear).unwrap();
    let cfg = PropagatorConfig {
        t_max: pulse.tau + 5.0,
        record_stride: 50,
        ..PropagatorConfig::for_pulse(&pulse)
    };
    let full = propagate_exact_2d(&channels, &pulse, &cfg).unwrap();
    // The assembled ground channel is an eigenstate of the pair-grid Hamiltonian, not
    // exactly of the lab-grid one, so the same tolerance as the cross-check applies.
    let ground = &channels.ground().channel_density;
    for n in &full.densities {
        let d = l1_distance(&lab, n, ground);
        assert!(d < 1e-4, "L1 {d:.3e}");
    }
}
