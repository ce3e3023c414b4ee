//! Link-level simulator for a hybrid-beamforming NOMA mmWave downlink.
//!
//! Users are grouped into clusters that share one RF chain. The analog
//! precoder steers each chain toward its cluster's strongest user, a
//! zero-forcing baseband stage removes inter-cluster interference on those
//! users, and the remaining users are served by superposition coding with
//! SIC. The crate evaluates exact per-user rates, optionally under random
//! beam misalignment, alongside closed-form lower bounds and a rate-gap
//! upper bound.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod bounds;
pub mod channel;
pub mod config;
pub mod error;
pub mod montecarlo;
pub mod noma;
pub mod numerics;

pub use beamforming::{build_hybrid_precoder, EffectiveChannel, HybridPrecoder};
pub use channel::{synthesize_scenario, Scenario, UlaConfig, UserLink};
pub use config::{ClusterConfig, DecodingOrder, GainProfile, ScenarioConfig};
pub use error::{Error, Result};
pub use montecarlo::{preset, run_experiment, run_experiment_with_threads, ExperimentSpec, ResultTable, Sweep};
pub use numerics::{CMatrix, C64};
