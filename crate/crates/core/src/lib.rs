//! Numerical toolkit for wave-trace invariants of smooth plane billiards.

mod dd;
pub mod error;
pub mod specfun;

pub use error::{Error, Result};
pub use specfun::{Scaling, SpectralParameter};
pub mod quadrature;
pub mod series;
pub mod geometry;
pub mod billiards;
pub mod linalg;
pub mod layers;
pub mod trace;
pub mod waveinv;

/// Crate version, recorded in CLI manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
