//! Driven two-electron harmonic quantum dot in one dimension.
//!
//! The crate computes state-to-state transition probabilities for a laser-driven
//! pair of soft-Coulomb electrons in a harmonic trap, by two routes:
//!
//! * projecting a propagated wavefunction (exact or Kohn-Sham Slater determinant)
//!   onto channel states, and
//! * reading the probabilities out of the long-time averaged one-particle density
//!   alone, by inverting a small matrix of channel densities sampled at selected
//!   points.
//!
//! The exact dynamics separate into a static relative factor and a driven
//! center-of-mass coherent state, which gives closed-form oracles (classical
//! trajectory, Poisson occupations, rigid density shift) for every numerical path.

// Negated comparisons reject NaN on purpose; the other two suggest APIs newer than the MSRV.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::unnecessary_map_or,
    clippy::manual_is_multiple_of
)]

pub mod error;
pub mod extraction;
pub mod grid;
pub mod io;
pub mod model;
pub mod oracle;
pub mod propagation;
pub mod stationary;

pub use error::{Error, Result};
pub use extraction::{
    invert_readout, project_exact, project_ks_determinants, select_sample_points, synthesize_density,
    time_average_density, AveragedDensity, ProjectionMethod, ProjectionTrace, RMatrix, ReadoutMode, ReadoutResult,
    TransitionDensities,
};
pub use grid::{inner_product, make_grid, quadrature, Grid1D, WaveFn1D, WaveFn2D};
pub use model::{soft_coulomb, EnvelopeShape, ModelParams, Pulse};
pub use oracle::{classical_trajectory, hpt_check, poisson_probabilities, ClassicalTrajectory};
pub use propagation::{
    classical_shift, propagate_exact_2d, propagate_exact_factorized, propagate_tdks, AmplitudeTrace, DensityTrace,
    OrbitalTrace, PostPulseScheme, PropagatorConfig, SplitScheme, TraceSource,
};
pub use stationary::{
    ks_scf_ground_state, ChannelSet, ChannelState, ExactShiftXc, ExchangeSic, KSGroundState, NonInteracting,
    XcFunctional, XcKind,
};
