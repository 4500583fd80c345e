//! Mahler measures of two one-parameter families of K3 surfaces, computed
//! from modular q-expansions, Kronecker lattice sums, and direct torus
//! integration.

pub mod cli;
pub mod error;
pub mod lattice;
pub mod mahler;
pub mod modular;
pub mod oracle;
pub mod series;

pub use error::{Error, Result};
