//! Numerics for classical channel interconversion: divergences and Renyi
//! channel capacities, closed-form and variational strong converse
//! exponents, exact finite-blocklength non-signaling / shared-randomness
//! linear programs, and a desk-scale coding-plus-simulation conversion
//! pipeline.

pub mod capacity;
pub mod channel;
pub mod checks;
pub mod config;
pub mod dist;
pub mod divergence;
pub mod error;
pub mod exponents;
pub mod io;
pub mod lp;
pub mod mutual_info;
pub mod ns;
pub mod protocol;
pub mod sample;
pub mod types;
pub mod unit;

pub use channel::Channel;
pub use config::Config;
pub use dist::Distribution;
pub use error::{Error, Result};
pub use types::TypeClass;
pub use unit::LogUnit;
