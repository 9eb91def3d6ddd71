//! Minkowski and fractional distances, feature weights and center solvers.

mod center;
mod distance;

pub use center::{
    center_1d, center_objective, minkowski_center, CenterSolve, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use distance::{minkowski_norm, minkowski_pow_dist, weighted_pow_dist, Exponent, WeightMatrix};

pub(crate) use distance::{pow_dist_unchecked, scaled_pow_dist};
