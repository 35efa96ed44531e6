//! Nonlinear channel identification experiments.
//!
//! Each trial draws a random unit-norm channel and random initial weights
//! from its own seeded stream, feeds white unit Gaussian input through the
//! channel, adds Gaussian noise at the configured SNR, and records learning
//! curves. [`monte_carlo`] runs many trials in parallel and averages them in
//! trial order, so results depend only on the configuration and master seed.

mod channel;
mod metrics;
mod protocol;
mod trial;

pub use channel::{ChannelFamily, ChannelSpec};
pub use metrics::{
    correlation_coefficient, iterations_to_reach, nwd, tail_mean, to_db, window_means,
};
pub use protocol::{
    cells, protocol1, protocol2, run_experiment, theory_curves, whitened_gain, Algorithm, Cell,
    CellResult, ExperimentConfig, Protocol1Report, Protocol2Report, SnrComparison, StepRule,
    TheoryComparison,
};
pub use trial::{
    monte_carlo, run_trial, run_trial_with_channel, trial_seed, AveragedCurves, TrialConfig,
    TrialCurves, WeightInit, DIVERGENCE_NWD,
};
