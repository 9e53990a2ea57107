//! Numerical laboratory for Gaussian free fields, Liouville quantum gravity
//! measures and the KPZ scaling relation.

pub mod checks;
pub mod error;
pub mod geometry;
pub mod io;
pub mod gff;
pub mod kpz;
pub mod liouville;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{DomainKind, DomainSpec, Point};
pub use rng::StreamSeed;
