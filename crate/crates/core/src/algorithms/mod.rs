//! Feasibility (Algorithm 1), joint SCA optimization (Algorithm 2), the
//! simplified variant with fixed combiners (Algorithm 3), and rank-one
//! recovery.

pub mod checker;
pub mod feasibility;
pub mod rank_one;
pub mod sca;

use serde::{Deserialize, Serialize};

pub use checker::{check_solution, CheckReport};
pub use feasibility::{
    algorithm1_feasibility, algorithm1_with, single_tone_snr_bound, FeasibilityOptions, FeasibilityResult,
};
pub use rank_one::{extract_rank_one, max_feasible_scale, Extraction, ExtractionMethod, ExtractionOptions};
pub use sca::{
    algorithm2_optimize, algorithm3_simplified, design_m_diagonals, optimize_with, sca_linearize, sca_objective,
    sca_quadratic, CombinerRefresh, IterationRecord, ScaOptions, ScaState, WaveformSolution,
};

/// Channel used to build the harvested-DC design metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DesignChannel {
    /// Forward channel `h_{j,n}` (the physical metric).
    Forward,
    /// Backscatter product `h_{j,n} h^b_{j,n}` in place of `h_{j,n}`.
    BackscatterOnly,
}
