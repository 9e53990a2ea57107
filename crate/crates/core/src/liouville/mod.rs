//! Regularized Liouville measures `eps^{gamma^2/2} e^{gamma h_eps(z)} dz`,
//! their L² diagnostics, and rooted (shifted) fields.

mod measure;
mod moments;
mod rooted;
mod test_function;

pub use measure::{build_measure, measure_apply, GridMeasure, LiouvilleParams, L2_GAMMA_MAX};
pub use moments::{
    cauchy_diagnostic, chebyshev_basis, first_moment_limit, second_moment_limit, weak_star_distance,
    CauchyRow, CauchyTable, QuadratureValue, WeakStarDistance,
};
pub use rooted::{
    ball_mass_in_window, root_shift, root_shift_grid, rooted_ball_mass, RootSampler, RootedField,
};
pub use test_function::TestFunction;
pub(crate) use rooted::ball_window;
