//! Rectenna physics, configuration, and the harvested-DC metric.

pub mod config;
pub mod harvest;
pub mod oracle;
pub mod waveform;

pub use config::{db_to_linear, derive_taylor_coeffs, linear_to_db, EhModel, RectennaParams, SystemConfig};
pub use harvest::{
    build_m_diagonals, dc_power_2nd, dc_power_4th, z_dc_from_t, z_dc_matrix, z_dc_scalar, HarvestReport,
    MDiagonalSet,
};
pub use oracle::time_domain_oracle;
pub use waveform::Waveform;
