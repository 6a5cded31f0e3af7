//! Box-ball system dynamics.
//!
//! Reference per-site carriers live in [`carrier`]; [`batch`] runs 256 rings
//! at once with bit-sliced arithmetic and is checked against the reference.

pub mod batch;
pub mod carrier;
pub mod config;
pub mod current;
pub mod energy;
pub mod ensemble;
pub mod error;
pub mod rmatrix;

pub use carrier::{evolve_open, evolve_periodic, evolve_steps, periodic_load, CarrierElement, CarrierTrace};
pub use config::Configuration;
pub use current::{generalized_current_field, CurrentField};
pub use energy::{energy, pseudoenergies, pseudoenergy, soliton_content, EnergySpectrum};
pub use ensemble::{sample_gge2t, sample_iid, EnsembleSpec, Gge2tSpec, IidSpec};
pub use error::{DynamicsError, EnsembleError, ParseError};
pub use rmatrix::{affine_r, combinatorial_r, Affine, Exchange};
