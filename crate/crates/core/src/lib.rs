//! Multisine waveform and receive-combiner optimization for multiuser
//! wirelessly powered backscatter communication.
//!
//! The crate is generic over the real scalar (`f32` or `f64`) through
//! [`Real`]; the `*64` aliases below fix it to `f64`, which is what the
//! harness uses.

pub mod algorithms;
pub mod channel;
pub mod conic;
pub mod error;
pub mod linalg;
pub mod link;
pub mod model;
mod scalar;

pub use algorithms::{
    algorithm1_feasibility, algorithm2_optimize, algorithm3_simplified, check_solution, extract_rank_one,
    sca_linearize, CheckReport, DesignChannel, ExtractionMethod, FeasibilityResult, ScaOptions, ScaState,
    WaveformSolution,
};
pub use channel::{
    draw_realization, reciprocal_backward, stream_rng, ChannelFile, ChannelRealization, LinkBudget,
    PowerDelayProfile, Tap,
};
pub use conic::{solve_sdp_step, solve_socp_step, ConicStatus, SdpStepSpec, SocpStepSpec, SolveStatus};
pub use error::{Error, Result};
pub use link::{
    all_sinrs, eigen_combiner, eigen_combiners, mmse_combiner, mmse_combiners, sinr, sinr_matrix, CombinerSet,
};
pub use model::{
    build_m_diagonals, db_to_linear, dc_power_2nd, dc_power_4th, derive_taylor_coeffs, linear_to_db,
    time_domain_oracle, z_dc_from_t, z_dc_matrix, z_dc_scalar, EhModel, HarvestReport, MDiagonalSet,
    RectennaParams, SystemConfig, Waveform,
};
pub use scalar::{Cplx, Real};

pub type SystemConfig64 = SystemConfig<f64>;
pub type RectennaParams64 = RectennaParams<f64>;
pub type Waveform64 = Waveform<f64>;
pub type ChannelRealization64 = ChannelRealization<f64>;
pub type CombinerSet64 = CombinerSet<f64>;
pub type HarvestReport64 = HarvestReport<f64>;
pub type MDiagonalSet64 = MDiagonalSet<f64>;
pub type FeasibilityResult64 = FeasibilityResult<f64>;
pub type WaveformSolution64 = WaveformSolution<f64>;
