//! Experiment orchestration for the `wpbc` optimizer: tradeoff regions,
//! model comparisons, the TDMA baseline and (K, N) grids, with CSV output,
//! manifests and bit-exact replay.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod output;
pub mod spec;

pub use error::{HarnessError, Result};
pub use experiments::{compare_models, execute, tdma_comparison, trace_region, zdc_vs_kn, RunOutput};
pub use output::{persist, replay, Manifest};
pub use spec::{Algorithm, Design, Experiment, Model, RunSpec, Scenario};
