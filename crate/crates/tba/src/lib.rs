//! Closed-form hydrodynamics of the box-ball system.
//!
//! Profiles and velocities ([`profile`]), currents, cumulants and Drude
//! weights ([`currents`]), truncated matrices ([`matrices`]), large-deviation
//! functions ([`ldf`]) and the carrier transfer matrix ([`transfer`]).

pub mod capacity;
pub mod currents;
pub mod error;
pub mod ldf;
pub mod matrices;
pub mod profile;
mod series;
pub mod transfer;

pub use capacity::Capacity;
pub use currents::{
    c2_analytic, drude_analytic, eta, four_index_correlation, mean_currents, pseudoenergy_cov_prediction,
    MeanCurrents,
};
pub use error::AnalyticsError;
pub use ldf::{alpha_of, rate, rate_2t_inf, scgf, scgf_2t, RatePoint, ScgfPoint};
pub use matrices::{correlation_matrix, dressing_matrix, flux_jacobian, TruncatedMatrix};
pub use profile::{profile, velocities, Fugacities, TbaProfile, VelocityTable};
pub use transfer::{build_carrier_matrix, c2_via_tm, conjectured_f, equal_time_variance, stationary_current};
