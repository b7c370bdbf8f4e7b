//! Pipeline stages. Each stage reads the artifacts of the earlier ones from the output
//! directory, so extraction and validation can be re-run without propagating again.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use nalgebra::DMatrix;
use num_complex::Complex64;
use qdot_core::extraction::ProjectionMethod;
use qdot_core::grid::l1_distance;
use qdot_core::io::{
    format_value, read_csv_file, read_density_binary_file, write_csv_file, write_density_binary_file, write_density_csv,
};
use qdot_core::oracle::MAX_ORACLE_STEP;
use qdot_core::stationary::{invert_ks_equation, ScfOptions};
use qdot_core::{
    classical_trajectory, hpt_check, invert_readout, ks_scf_ground_state, make_grid, poisson_probabilities,
    project_exact, project_ks_determinants, propagate_exact_2d, propagate_exact_factorized, propagate_tdks,
    select_sample_points, synthesize_density, time_average_density, AveragedDensity, ChannelSet, ClassicalTrajectory,
    DensityTrace, ExactShiftXc, ExchangeSic, Grid1D, KSGroundState, ProjectionTrace, PropagatorConfig, RMatrix,
    TraceSource, TransitionDensities,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

/// Propagation sources selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Source {
    Exact,
    #[value(name = "exact_2d")]
    Exact2d,
    TdksExact,
    TdksSic,
}

impl Source {
    pub const ALL: [Source; 4] = [Source::Exact, Source::TdksSic, Source::TdksExact, Source::Exact2d];

    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Exact2d => "exact_2d",
            Self::TdksExact => "tdks_exact",
            Self::TdksSic => "tdks_sic",
        }
    }

    fn trace_source(self) -> TraceSource {
        match self {
            Self::Exact => TraceSource::Exact,
            Self::Exact2d => TraceSource::Exact2d,
            Self::TdksExact => TraceSource::TdksExactVxc,
            Self::TdksSic => TraceSource::TdksExchangeSic,
        }
    }
}

/// Everything the ground stage persists for the later ones.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundState {
    pub channels: ChannelSet,
    pub ks_sic: KSGroundState,
    pub ks_exact: KSGroundState,
    /// Ground-state xc potential inverted from the exact density.
    pub exact_vxc: Vec<f64>,
}

fn ground_dir(cfg: &RunConfig) -> PathBuf {
    cfg.outputs.join("ground")
}

fn source_dir(cfg: &RunConfig, source: Source) -> PathBuf {
    cfg.outputs.join("propagate").join(source.name())
}

fn require(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::MissingArtifact(path.display().to_string()))
    }
}

fn lab_grid(cfg: &RunConfig) -> Result<Grid1D, CliError> {
    Ok(make_grid(cfg.extent, cfg.n_points)?)
}

fn channel_columns(prefix: &str, n: usize, channels: &ChannelSet) -> Vec<String> {
    channels.channels[..n]
        .iter()
        .map(|c| format!("{prefix}_{}_{}", c.n_cm, c.n_rel))
        .collect()
}

fn write_config(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.outputs)?;
    fs::write(cfg.outputs.join("config.txt"), cfg.serialize())?;
    Ok(())
}

pub fn run_ground(cfg: &RunConfig) -> Result<GroundState, CliError> {
    cfg.validate()?;
    write_config(cfg)?;
    let lab = lab_grid(cfg)?;
    let channels = ChannelSet::ladder(&cfg.model, &lab, cfg.channels, cfg.channels + 3)?;
    info!("channel energies {:?}", channels.energies());

    let scf = ScfOptions::default();
    let ks_sic = ks_scf_ground_state(&cfg.model, &lab, &ExchangeSic, cfg.channels, &scf)?;
    info!("exchange-only KS converged in {} iterations", ks_sic.iterations);
    let inversion = invert_ks_equation(&channels.ground().channel_density, &cfg.model, &lab)?;
    let xc = ExactShiftXc::new(lab, inversion.v_xc.clone());
    let ks_exact = ks_scf_ground_state(&cfg.model, &lab, &xc, cfg.channels, &scf)?;
    info!("inverted-potential KS converged in {} iterations", ks_exact.iterations);

    let dir = ground_dir(cfg);
    fs::create_dir_all(&dir)?;
    write_csv_file(
        &dir.join("channels.csv"),
        &["n_cm".into(), "n_rel".into(), "energy".into()],
        channels
            .channels
            .iter()
            .map(|c| vec![c.n_cm as f64, c.n_rel as f64, c.energy]),
    )?;
    write_csv_file(
        &dir.join("relative.csv"),
        &["n_rel".into(), "energy".into()],
        channels
            .relative
            .energies
            .iter()
            .enumerate()
            .map(|(n, e)| vec![n as f64, *e]),
    )?;
    let x = lab.points();
    let mut header = vec!["x".to_owned()];
    header.extend(channel_columns("rho", cfg.channels, &channels));
    write_csv_file(
        &dir.join("channel_densities.csv"),
        &header,
        (0..lab.n_points()).map(|j| {
            let mut row = vec![x[j]];
            row.extend(channels.channels.iter().map(|c| c.channel_density[j]));
            row
        }),
    )?;
    let mut header = vec!["x".to_owned(), "v_ks_sic".into()];
    header.extend((0..=ks_sic.virtuals.len()).map(|n| format!("phi_{n}_sic")));
    header.extend(["v_ks_exact".to_owned(), "v_xc_exact".into(), "phi_0_exact".into()]);
    write_csv_file(
        &dir.join("ks_orbitals.csv"),
        &header,
        (0..lab.n_points()).map(|j| {
            let mut row = vec![x[j], ks_sic.ks_potential[j], ks_sic.orbital.amplitudes()[j].re];
            row.extend(ks_sic.virtuals.iter().map(|v| v.amplitudes()[j].re));
            row.extend([
                ks_exact.ks_potential[j],
                inversion.v_xc[j],
                ks_exact.orbital.amplitudes()[j].re,
            ]);
            row
        }),
    )?;

    let ground = GroundState {
        channels,
        ks_sic,
        ks_exact,
        exact_vxc: inversion.v_xc,
    };
    let json = serde_json::to_string(&ground).map_err(std::io::Error::other)?;
    fs::write(dir.join("ground_state.json"), json)?;
    Ok(ground)
}

pub fn load_ground(cfg: &RunConfig) -> Result<GroundState, CliError> {
    let path = ground_dir(cfg).join("ground_state.json");
    require(&path)?;
    let ground: GroundState = serde_json::from_str(&fs::read_to_string(&path)?).map_err(std::io::Error::other)?;
    if ground.channels.lab != lab_grid(cfg)?
        || ground.channels.params != cfg.model
        || ground.channels.channels.len() != cfg.channels
    {
        return Err(CliError::Config(format!(
            "{} was computed for a different model, grid or channel count; rerun the ground stage",
            path.display()
        )));
    }
    Ok(ground)
}

fn trajectory(cfg: &RunConfig) -> Result<ClassicalTrajectory, CliError> {
    Ok(classical_trajectory(
        &cfg.pulse,
        &cfg.model,
        MAX_ORACLE_STEP,
        cfg.propagation.t_max,
    )?)
}

struct SourceRun {
    source: Source,
    trace: DensityTrace,
    probabilities: Option<ProjectionTrace>,
}

fn propagate_one(cfg: &RunConfig, ground: &GroundState, source: Source) -> Result<SourceRun, CliError> {
    let channels = &ground.channels;
    let pulse = &cfg.pulse;
    let n = cfg.channels;
    info!("propagating {}", source.name());
    let (trace, probabilities) = match source {
        Source::Exact => {
            let (trace, amplitudes) = propagate_exact_factorized(channels, pulse, &cfg.propagation)?;
            (trace, Some(project_exact(&amplitudes, channels)?))
        }
        Source::Exact2d => {
            let short = PropagatorConfig {
                t_max: pulse.tau + cfg.t_max_2d,
                ..cfg.propagation
            };
            (propagate_exact_2d(channels, pulse, &short)?, None)
        }
        Source::TdksSic => {
            let (trace, orbitals) =
                propagate_tdks(&ground.ks_sic, &ExchangeSic, &cfg.model, pulse, &cfg.propagation, None)?;
            (trace, Some(project_ks_determinants(&orbitals, &ground.ks_sic, n)?))
        }
        Source::TdksExact => {
            let xc = ExactShiftXc::new(channels.lab, ground.exact_vxc.clone());
            let traj = trajectory(cfg)?;
            let (trace, orbitals) =
                propagate_tdks(&ground.ks_exact, &xc, &cfg.model, pulse, &cfg.propagation, Some(&traj))?;
            (trace, Some(project_ks_determinants(&orbitals, &ground.ks_exact, n)?))
        }
    };
    if trace.diagnostics.max_boundary_amplitude > qdot_core::propagation::BOUNDARY_WARNING {
        warn!(
            "{}: wavefunction reaches the box edge (amplitude {:.3e})",
            source.name(),
            trace.diagnostics.max_boundary_amplitude
        );
    }
    Ok(SourceRun {
        source,
        trace,
        probabilities,
    })
}

fn max_l1(a: &DensityTrace, b: &DensityTrace) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for (t, n) in a.times.iter().zip(&a.densities) {
        if let Some(j) = b.index_of(*t) {
            worst = Some(worst.unwrap_or(0.0).max(l1_distance(&a.grid, n, &b.densities[j])));
        }
    }
    worst
}

fn load_trace(cfg: &RunConfig, source: Source) -> Result<DensityTrace, CliError> {
    let path = source_dir(cfg, source).join("density.bin");
    require(&path)?;
    Ok(read_density_binary_file(&path)?.into_trace(source.trace_source(), cfg.pulse.tau))
}

fn load_probabilities(cfg: &RunConfig, source: Source) -> Result<ProjectionTrace, CliError> {
    let path = source_dir(cfg, source).join("probabilities.csv");
    require(&path)?;
    let (header, rows) = read_csv_file(&path)?;
    Ok(ProjectionTrace {
        method: if source == Source::Exact {
            ProjectionMethod::ExactProjection
        } else {
            ProjectionMethod::KsDeterminantProjection
        },
        labels: header[1..].to_vec(),
        times: rows.iter().map(|r| r[0]).collect(),
        probabilities: rows.iter().map(|r| r[1..].to_vec()).collect(),
    })
}

fn write_source(
    cfg: &RunConfig,
    ground: &GroundState,
    run: &SourceRun,
    exact: Option<&DensityTrace>,
) -> Result<(), CliError> {
    let dir = source_dir(cfg, run.source);
    fs::create_dir_all(&dir)?;
    write_density_csv(&dir.join("density.csv"), &run.trace)?;
    write_density_binary_file(&dir.join("density.bin"), &run.trace)?;
    if let Some(p) = &run.probabilities {
        let mut header = vec!["t".to_owned()];
        header.extend(channel_columns("P", cfg.channels, &ground.channels));
        write_csv_file(
            &dir.join("probabilities.csv"),
            &header,
            p.times.iter().zip(&p.probabilities).map(|(t, row)| {
                let mut out = vec![*t];
                out.extend_from_slice(row);
                out
            }),
        )?;
    }
    let d = &run.trace.diagnostics;
    let mut log = String::new();
    let _ = writeln!(log, "source {}", run.source.name());
    let _ = writeln!(log, "snapshots {}", run.trace.len());
    let _ = writeln!(
        log,
        "t_end {}",
        format_value(run.trace.times.last().copied().unwrap_or(0.0))
    );
    let _ = writeln!(log, "max_norm_drift {}", format_value(d.max_norm_drift));
    let _ = writeln!(
        log,
        "max_particle_number_error {}",
        format_value(d.max_particle_number_error)
    );
    let _ = writeln!(log, "max_boundary_amplitude {}", format_value(d.max_boundary_amplitude));
    if run.source == Source::Exact2d {
        let _ = writeln!(log, "max_exchange_asymmetry {}", format_value(d.max_exchange_asymmetry));
        let _ = writeln!(
            log,
            "post_pulse_energy_variation {}",
            format_value(d.energy_variation())
        );
    }
    if run.source != Source::Exact {
        if let Some(l1) = exact.and_then(|e| max_l1(&run.trace, e)) {
            let _ = writeln!(log, "max_l1_vs_exact {}", format_value(l1));
        }
    }
    fs::write(dir.join("diagnostics.log"), log)?;
    Ok(())
}

/// Propagates the requested sources concurrently, one output directory each.
pub fn run_propagate(cfg: &RunConfig, sources: &[Source]) -> Result<(), CliError> {
    cfg.validate()?;
    let ground = load_ground(cfg)?;
    let runs: Vec<Result<SourceRun, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = sources
            .iter()
            .map(|&source| {
                let ground = &ground;
                scope.spawn(move || propagate_one(cfg, ground, source))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("propagation thread panicked"))
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let on_disk = if sources.contains(&Source::Exact) {
        None
    } else {
        load_trace(cfg, Source::Exact).ok()
    };
    let exact = runs
        .iter()
        .find(|r| r.source == Source::Exact)
        .map(|r| &r.trace)
        .or(on_disk.as_ref());
    for run in &runs {
        write_source(cfg, &ground, run, exact)?;
    }
    Ok(())
}

fn readout_matrix(cfg: &RunConfig, ground: &GroundState) -> Result<RMatrix, CliError> {
    let lab = ground.channels.lab;
    Ok(select_sample_points(
        &lab,
        &ground.channels.densities(),
        cfg.readout_points,
        cfg.readout_mode,
    )?)
}

fn row_at(p: &ProjectionTrace, t: f64) -> Result<Vec<f64>, CliError> {
    p.times
        .iter()
        .position(|s| (s - t).abs() <= 1e-9)
        .map(|i| p.probabilities[i].clone())
        .ok_or_else(|| CliError::Config(format!("no probability snapshot at t = {t}")))
}

#[derive(Debug, Serialize)]
struct Summary {
    labels: Vec<String>,
    tau: f64,
    window: f64,
    exact: Vec<f64>,
    readout: Vec<f64>,
    readout_sum: f64,
    within_truncation_bound: bool,
    condition_number: f64,
    residual: f64,
    points: Vec<f64>,
    /// Largest whole number of beat periods inside the window.
    commensurate_window: Option<f64>,
    readout_commensurate: Option<Vec<f64>>,
    ks_average: Vec<f64>,
    ks_average_commensurate: Option<Vec<f64>>,
    lambda: f64,
    poisson: Vec<f64>,
    warnings: Vec<String>,
}

pub fn run_extract(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let ground = load_ground(cfg)?;
    let channels = &ground.channels;
    let tau = cfg.pulse.tau;
    let n = cfg.channels;
    let exact = load_trace(cfg, Source::Exact)?;
    let exact_p = load_probabilities(cfg, Source::Exact)?;
    let ks = load_probabilities(cfg, Source::TdksSic)?;
    if exact_p.times.len() != ks.times.len() || exact_p.times.iter().zip(&ks.times).any(|(a, b)| (a - b).abs() > 1e-9) {
        return Err(CliError::Config(
            "exact and Kohn-Sham traces were recorded at different times".into(),
        ));
    }
    let rm = readout_matrix(cfg, &ground)?;
    let p_tau = row_at(&exact_p, tau)?;

    let mut header = vec!["t".to_owned()];
    header.extend(channel_columns("exact", n, channels));
    header.extend(channel_columns("ks", n, channels));
    write_csv_file(
        &cfg.outputs.join("fig1.csv"),
        &header,
        exact_p.times.iter().enumerate().map(|(i, t)| {
            let mut row = vec![*t];
            row.extend_from_slice(&exact_p.probabilities[i]);
            row.extend_from_slice(&ks.probabilities[i]);
            row
        }),
    )?;

    let mut header = vec!["window".to_owned()];
    header.extend(channel_columns("exact", n, channels));
    header.extend(channel_columns("readout", n, channels));
    header.extend(channel_columns("ks_average", n, channels));
    let mut rows = Vec::new();
    for (t, density) in exact.running_average() {
        let avg = AveragedDensity {
            grid: exact.grid,
            tau,
            t_end: t,
            density,
            warning: None,
        };
        let read = invert_readout(&avg, &rm)?;
        let mut row = vec![t - tau];
        row.extend_from_slice(&p_tau);
        row.extend_from_slice(&read.probabilities);
        row.extend(ks.time_average(tau, t)?);
        rows.push(row);
    }
    write_csv_file(&cfg.outputs.join("fig2.csv"), &header, rows)?;

    let t_end = *exact.times.last().expect("non-empty trace");
    let gap = cfg.model.omega;
    let avg = time_average_density(&exact, t_end, Some(gap))?;
    let mut warnings: Vec<String> = avg.warning.iter().cloned().collect();
    let read = invert_readout(&avg, &rm)?;
    let beat = 2.0 * PI / gap;
    let periods = ((t_end - tau) / beat).floor();
    let (commensurate_window, readout_commensurate, ks_average_commensurate) = if periods >= 1.0 {
        let w = periods * beat;
        let a = time_average_density(&exact, tau + w, None)?;
        (
            Some(w),
            Some(invert_readout(&a, &rm)?.probabilities),
            Some(ks.time_average(tau, tau + w)?),
        )
    } else {
        (None, None, None)
    };
    let ks_average = ks.time_average(tau, t_end)?;
    let lambda = trajectory(cfg)?.excitation();
    let poisson = poisson_probabilities(lambda, n - 1)?;
    let readout_sum: f64 = read.probabilities.iter().sum();
    if !read.within_truncation_bounds() {
        warnings.push(format!(
            "read-out probabilities {:?} leave [0, 1] beyond the truncation slack",
            read.probabilities
        ));
    }

    let mut header = vec![
        "n_cm".to_owned(),
        "n_rel".into(),
        "energy".into(),
        "exact".into(),
        "readout".into(),
        "ks_average".into(),
        "poisson".into(),
    ];
    if commensurate_window.is_some() {
        header.push("readout_commensurate".into());
    }
    write_csv_file(
        &cfg.outputs.join("transitions.csv"),
        &header,
        channels.channels.iter().enumerate().map(|(f, c)| {
            let mut row = vec![
                c.n_cm as f64,
                c.n_rel as f64,
                c.energy,
                p_tau[f],
                read.probabilities[f],
                ks_average[f],
                poisson[f],
            ];
            if let Some(r) = &readout_commensurate {
                row.push(r[f]);
            }
            row
        }),
    )?;

    let summary = Summary {
        labels: channels.labels(),
        tau,
        window: read.window,
        exact: p_tau,
        readout_sum,
        within_truncation_bound: readout_sum <= 1.0 + qdot_core::extraction::TRUNCATION_SLACK
            && read.within_truncation_bounds(),
        readout: read.probabilities,
        condition_number: read.condition_number,
        residual: read.residual,
        points: read.points,
        commensurate_window,
        readout_commensurate,
        ks_average,
        ks_average_commensurate,
        lambda,
        poisson,
        warnings,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
    fs::write(cfg.outputs.join("summary.json"), json + "\n")?;
    Ok(())
}

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Runs every oracle check against the persisted artifacts and writes `validation.txt`.
pub fn run_validate(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    cfg.validate()?;
    let ground = load_ground(cfg)?;
    let channels = &ground.channels;
    let tau = cfg.pulse.tau;
    let exact = load_trace(cfg, Source::Exact)?;
    let exact_p = load_probabilities(cfg, Source::Exact)?;
    let full = load_trace(cfg, Source::Exact2d)?;
    let traj = trajectory(cfg)?;
    let mut checks = Vec::new();

    let lambda = traj.excitation();
    let poisson = poisson_probabilities(lambda, cfg.channels - 1)?;
    let p_tau = row_at(&exact_p, tau)?;
    let err = p_tau
        .iter()
        .zip(&poisson)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "poisson",
        pass: err <= 1e-3,
        detail: format!(
            "lambda {lambda:.6e}, P(tau) {}, Poisson {}, max diff {err:.2e}",
            sci(&p_tau),
            sci(&poisson)
        ),
    });

    let hpt = hpt_check(&exact, &channels.ground().channel_density, &traj)?;
    checks.push(Check {
        name: "harmonic_potential_theorem",
        pass: hpt < 1e-3,
        detail: format!("max L1 to shifted ground density {hpt:.2e}"),
    });

    let spread = exact_p.spread_after(tau);
    checks.push(Check {
        name: "post_pulse_constancy",
        pass: spread.iter().all(|s| *s < 1e-8),
        detail: format!("max - min after tau {}", sci(&spread)),
    });

    let stride = (full.len() / 10).max(1);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for i in (0..full.len()).step_by(stride) {
        if let Some(j) = exact.index_of(full.times[i]) {
            worst = worst.max(l1_distance(&exact.grid, &full.densities[i], &exact.densities[j]));
            compared += 1;
        }
    }
    checks.push(Check {
        name: "two_dimensional_cross_check",
        pass: compared > 0 && worst < 1e-4,
        detail: format!("max L1 {worst:.2e} at {compared} sampled times"),
    });

    let rho = TransitionDensities::new(channels)?;
    let rm = readout_matrix(cfg, &ground)?;
    let times: Vec<f64> = exact.times.iter().copied().filter(|t| *t >= tau - 1e-9).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let m = cfg.channels;
    for _ in 0..100 {
        let u: Vec<f64> = (0..=m).map(|_| rng.random::<f64>()).collect();
        let total: f64 = u.iter().sum();
        let p: Vec<f64> = u[..m].iter().map(|x| x / total).collect();
        let t_matrix = DMatrix::from_fn(m, m, |a, b| {
            if a == b {
                Complex64::new(p[a], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let mut trace = DensityTrace::new(TraceSource::Exact, exact.grid, tau);
        for &t in &times {
            trace.push(t, synthesize_density(&t_matrix, &rho, tau, t)?);
        }
        let avg = time_average_density(&trace, *times.last().expect("post-pulse snapshots"), None)?;
        let read = invert_readout(&avg, &rm)?;
        worst = worst.max(
            read.probabilities
                .iter()
                .zip(&p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
    }
    checks.push(Check {
        name: "round_trip_inversion",
        pass: worst < 1e-10,
        detail: format!("100 random diagonal transition matrices, max error {worst:.2e}"),
    });

    let mut report = String::new();
    for c in &checks {
        let _ = writeln!(
            report,
            "{} {} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    fs::write(cfg.outputs.join("validation.txt"), &report)?;
    print!("{report}");
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.to_owned()).collect();
    if failed.is_empty() {
        Ok(checks)
    } else {
        Err(CliError::Validation(failed))
    }
}

pub fn run_all(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    run_ground(cfg)?;
    run_propagate(cfg, &Source::ALL)?;
    run_extract(cfg)?;
    run_validate(cfg)
}
