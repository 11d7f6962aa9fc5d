//! Oracles and fixtures shared by the integration targets.
#![allow(dead_code, unused_imports)]

pub mod audit;
pub mod cli_lattice;
pub mod corpus;
pub mod ordinal_oracle;
pub mod prov_suite;
pub mod psi_ref;

pub use cli_lattice::*;
pub use prov_suite::*;
pub use psi_ref::*;
