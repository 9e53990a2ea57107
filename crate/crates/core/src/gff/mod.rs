//! Gaussian free field samplers: the truncated spectral series on the unit
//! square, the discrete field on grids, and their circle averages.

pub mod dgff;
pub(crate) mod fold;
pub mod lattice;
pub mod spectral;

pub use dgff::{dgff_covariance, dgff_green_column, sample_dgff, DgffSampler, DiscreteField};
pub use lattice::{LatticeSample, LatticeSampler};
pub use spectral::{
    circle_average, circle_process, cutoff_for_scale, evaluate_field, pair_h_f, sample_spectral_gff,
    CircleKernel, CirclePath, CoeffTable, GridKernel, SpectralField,
};
