//! Flat `key=value` run configuration.
//!
//! One setting per line, `#` starts a comment, keys are the dotted field paths listed
//! in [`KEYS`]. Missing keys keep their defaults, unknown keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qdot_core::{EnvelopeShape, ModelParams, PostPulseScheme, PropagatorConfig, Pulse, ReadoutMode, SplitScheme};

use crate::error::CliError;

/// Every accepted key, in the order they are written.
pub const KEYS: &[&str] = &[
    "model.omega",
    "model.b",
    "pulse.f0",
    "pulse.omega_l",
    "pulse.tau",
    "pulse.ramp_cycles",
    "pulse.carrier_phase",
    "pulse.envelope",
    "grids.extent",
    "grids.n_points",
    "propagation.dt",
    "propagation.t_max",
    "propagation.record_stride",
    "propagation.scheme",
    "propagation.post_pulse",
    "channels",
    "readout.n_points",
    "readout.mode",
    "outputs",
    "validation.t_max_2d",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub pulse: Pulse,
    pub extent: f64,
    pub n_points: usize,
    pub propagation: PropagatorConfig,
    /// Number of `(N, 0)` channels.
    pub channels: usize,
    pub readout_points: usize,
    pub readout_mode: ReadoutMode,
    pub outputs: PathBuf,
    /// Length of the pair-grid cross-check after the pulse.
    pub t_max_2d: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pulse = Pulse::benchmark();
        Self {
            model: ModelParams::benchmark(),
            pulse,
            extent: 15.0,
            n_points: 256,
            propagation: PropagatorConfig::for_pulse(&pulse),
            channels: 3,
            readout_points: 3,
            readout_mode: ReadoutMode::SquareExact,
            outputs: PathBuf::from("qdot-out"),
            t_max_2d: 50.0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Config(format!("{key}: cannot parse {value:?}: {e}")))
}

fn envelope_name(shape: EnvelopeShape) -> &'static str {
    match shape {
        EnvelopeShape::Linear => "linear",
        EnvelopeShape::SinSquared => "sin_squared",
    }
}

fn scheme_name(scheme: SplitScheme) -> &'static str {
    match scheme {
        SplitScheme::Strang => "strang",
        SplitScheme::Yoshida4 => "yoshida4",
    }
}

fn post_pulse_name(scheme: PostPulseScheme) -> &'static str {
    match scheme {
        PostPulseScheme::Eigenbasis => "eigenbasis",
        PostPulseScheme::Strang => "strang",
    }
}

fn mode_name(mode: ReadoutMode) -> &'static str {
    match mode {
        ReadoutMode::SquareExact => "square",
        ReadoutMode::LeastSquares => "least_squares",
    }
}

impl RunConfig {
    /// Sets one key. Consistency across keys is checked by [`RunConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key {
            "model.omega" => self.model.omega = parse(key, value)?,
            "model.b" => self.model.b = parse(key, value)?,
            "pulse.f0" => self.pulse.f0 = parse(key, value)?,
            "pulse.omega_l" => self.pulse.omega_l = parse(key, value)?,
            "pulse.tau" => self.pulse.tau = parse(key, value)?,
            "pulse.ramp_cycles" => self.pulse.ramp_cycles = parse(key, value)?,
            "pulse.carrier_phase" => self.pulse.carrier_phase = parse(key, value)?,
            "pulse.envelope" => {
                self.pulse.shape = match value {
                    "linear" => EnvelopeShape::Linear,
                    "sin_squared" => EnvelopeShape::SinSquared,
                    _ => {
                        return Err(CliError::Config(format!(
                            "{key}: expected linear or sin_squared, got {value:?}"
                        )))
                    }
                }
            }
            "grids.extent" => self.extent = parse(key, value)?,
            "grids.n_points" => self.n_points = parse(key, value)?,
            "propagation.dt" => self.propagation.dt = parse(key, value)?,
            "propagation.t_max" => self.propagation.t_max = parse(key, value)?,
            "propagation.record_stride" => self.propagation.record_stride = parse(key, value)?,
            "propagation.scheme" => {
                self.propagation.scheme = match value {
                    "strang" => SplitScheme::Strang,
                    "yoshida4" => SplitScheme::Yoshida4,
                    _ => {
                        return Err(CliError::Config(format!(
                            "{key}: expected strang or yoshida4, got {value:?}"
                        )))
                    }
                }
            }
            "propagation.post_pulse" => {
                self.propagation.post_pulse = match value {
                    "eigenbasis" => PostPulseScheme::Eigenbasis,
                    "strang" => PostPulseScheme::Strang,
                    _ => {
                        return Err(CliError::Config(format!(
                            "{key}: expected eigenbasis or strang, got {value:?}"
                        )))
                    }
                }
            }
            "channels" => self.channels = parse(key, value)?,
            "readout.n_points" => self.readout_points = parse(key, value)?,
            "readout.mode" => {
                self.readout_mode = match value {
                    "square" => ReadoutMode::SquareExact,
                    "least_squares" => ReadoutMode::LeastSquares,
                    _ => {
                        return Err(CliError::Config(format!(
                            "{key}: expected square or least_squares, got {value:?}"
                        )))
                    }
                }
            }
            "outputs" => self.outputs = PathBuf::from(value),
            "validation.t_max_2d" => self.t_max_2d = parse(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "model.omega" => self.model.omega.to_string(),
            "model.b" => self.model.b.to_string(),
            "pulse.f0" => self.pulse.f0.to_string(),
            "pulse.omega_l" => self.pulse.omega_l.to_string(),
            "pulse.tau" => self.pulse.tau.to_string(),
            "pulse.ramp_cycles" => self.pulse.ramp_cycles.to_string(),
            "pulse.carrier_phase" => self.pulse.carrier_phase.to_string(),
            "pulse.envelope" => envelope_name(self.pulse.shape).to_owned(),
            "grids.extent" => self.extent.to_string(),
            "grids.n_points" => self.n_points.to_string(),
            "propagation.dt" => self.propagation.dt.to_string(),
            "propagation.t_max" => self.propagation.t_max.to_string(),
            "propagation.record_stride" => self.propagation.record_stride.to_string(),
            "propagation.scheme" => scheme_name(self.propagation.scheme).to_owned(),
            "propagation.post_pulse" => post_pulse_name(self.propagation.post_pulse).to_owned(),
            "channels" => self.channels.to_string(),
            "readout.n_points" => self.readout_points.to_string(),
            "readout.mode" => mode_name(self.readout_mode).to_owned(),
            "outputs" => self.outputs.display().to_string(),
            "validation.t_max_2d" => self.t_max_2d.to_string(),
            _ => return None,
        })
    }

    /// Parses a config file body on top of the defaults.
    pub fn parse_str(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got {raw:?}", number + 1)))?;
            cfg.set(key.trim(), value)
                .map_err(|e| CliError::Config(format!("line {}: {e}", number + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), CliError> {
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override {item:?} is not key=value")))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key}={}", self.get(key).expect("listed key"));
        }
        out
    }

    /// Checks every sub-config through the core constructors.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |e: qdot_core::Error| CliError::Config(e.to_string());
        ModelParams::new(self.model.omega, self.model.b).map_err(bad)?;
        Pulse::new(
            self.pulse.f0,
            self.pulse.omega_l,
            self.pulse.tau,
            self.pulse.ramp_cycles,
            self.pulse.carrier_phase,
            self.pulse.shape,
        )
        .map_err(bad)?;
        qdot_core::make_grid(self.extent, self.n_points).map_err(bad)?;
        self.propagation.validate(&self.pulse).map_err(bad)?;
        if self.channels == 0 {
            return Err(CliError::Config("channels must be at least 1".into()));
        }
        let enough = match self.readout_mode {
            ReadoutMode::SquareExact => self.readout_points == self.channels,
            ReadoutMode::LeastSquares => self.readout_points > self.channels,
        };
        if !enough {
            return Err(CliError::Config(format!(
                "readout.mode={} with {} channels needs {} points, got {}",
                mode_name(self.readout_mode),
                self.channels,
                if self.readout_mode == ReadoutMode::SquareExact {
                    "as many"
                } else {
                    "more"
                },
                self.readout_points
            )));
        }
        if !(self.t_max_2d > 0.0) || self.pulse.tau + self.t_max_2d > self.propagation.t_max + 1e-9 {
            return Err(CliError::Config(format!(
                "validation.t_max_2d must be positive and end inside the propagated span, got {}",
                self.t_max_2d
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_benchmark() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.model, ModelParams::benchmark());
        assert_eq!(cfg.pulse, Pulse::benchmark());
        assert_eq!(cfg.propagation.t_max, 1168.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn serialize_then_parse_is_identity() {
        let mut cfg = RunConfig::default();
        cfg.apply_overrides(&[
            "model.b=0.1234567890123".into(),
            "pulse.envelope=sin_squared".into(),
            "pulse.carrier_phase=0.3".into(),
            "propagation.scheme=yoshida4".into(),
            "readout.mode=least_squares".into(),
            "readout.n_points=5".into(),
            "outputs=/tmp/x y".into(),
        ])
        .unwrap();
        let text = cfg.serialize();
        assert_eq!(RunConfig::parse_str(&text).unwrap(), cfg);
        assert_eq!(text.lines().count(), KEYS.len());
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = RunConfig::parse_str("# dot\n\nmodel.b = 2.0  # softer\n pulse.f0=0\n").unwrap();
        assert_eq!(cfg.model.b, 2.0);
        assert_eq!(cfg.pulse.f0, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::parse_str("model.c=1"), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse_str("model.b"), Err(CliError::Config(_))));
        assert!(matches!(
            RunConfig::parse_str("grids.n_points=2.5"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            RunConfig::parse_str("readout.mode=cubic"),
            Err(CliError::Config(_))
        ));
        let mut cfg = RunConfig::default();
        cfg.model.omega = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.readout_points = 4;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.pulse.tau = 30.0;
        assert!(cfg.validate().is_err());
    }
}
