//! K-means engines.
//!
//! - [`lloyd_kmeans`]: classic Euclidean K-means on the raw data.
//! - [`exact_kernel_kmeans`]: kernel K-means through the Gram matrix; kept as
//!   a baseline and as an oracle for the explicit maps.
//! - [`explicit_kmwk_means`]: maps the data with an explicit feature map and
//!   runs Minkowski K-means there, optionally learning per-cluster feature
//!   weights.
//! - [`minkowski_kmeans`]: the shared engine, usable on any real matrix.

mod dataset;
mod engine;
mod exact;
mod weights;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

pub use dataset::Dataset;
pub use engine::{
    assign, explicit_kernel_kmeans, explicit_kmwk_means, lloyd_kmeans, minkowski_kmeans, objective_value, warm_start,
};
pub use exact::{exact_kernel_kmeans, gram_matrix};
pub use weights::{dispersions, update_weights, weights_from_dispersion};

use crate::error::{Error, Result};
use crate::minkcore::{Exponent, WeightMatrix, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// How initial centers are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// `k` distinct rows drawn with the run seed.
    RandomPoints,
    /// Converged centers of an unweighted `p = 2` run.
    WarmStartP2,
    /// Converged centers of an unweighted `p = 1` run.
    WarmStartP1,
    /// Caller-supplied `k x D'` centers.
    Provided(Array2<f64>),
}

impl Init {
    /// Default for a given exponent: random rows at `p = 2`, otherwise a
    /// warm start from the Euclidean solution.
    pub fn default_for(p: Exponent) -> Self {
        if p.value() == 2.0 {
            Init::RandomPoints
        } else {
            Init::WarmStartP2
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Init::RandomPoints => "random",
            Init::WarmStartP2 => "warm2",
            Init::WarmStartP1 => "warm1",
            Init::Provided(_) => "provided",
        }
    }
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" | "random_points" => Ok(Init::RandomPoints),
            "warm2" | "warm_start_p2" => Ok(Init::WarmStartP2),
            "warm1" | "warm_start_p1" => Ok(Init::WarmStartP1),
            "provided" => Err(Error::InvalidArgument(
                "provided init needs a centers matrix".into(),
            )),
            other => Err(Error::InvalidArgument(format!("unknown init '{other}'"))),
        }
    }
}

/// Parameters of a clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    pub p: Exponent,
    pub max_iter: usize,
    /// Tolerance of the inner center solvers.
    pub tol: f64,
    pub seed: u64,
    pub init: Init,
    pub restarts: usize,
}

impl RunConfig {
    pub fn new(k: usize, p: Exponent) -> Self {
        RunConfig {
            k,
            p,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            seed: 0,
            init: Init::default_for(p),
            restarts: 10,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        if self.k > n {
            return Err(Error::TooManyClusters { k: self.k, n });
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be >= 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Result of a clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    /// `k x D'` centers; `None` for the exact kernel engine, whose centers
    /// only exist implicitly in feature space.
    pub centers: Option<Array2<f64>>,
    /// Learned weights; `None` means unweighted.
    pub weights: Option<WeightMatrix>,
    pub assignments: Vec<usize>,
    pub k: usize,
    pub p: Exponent,
    pub objective: f64,
    /// Objective after every completed iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Center-solver iterations summed over the whole run.
    pub solver_iterations: usize,
    /// Seed of the restart that produced this model.
    pub seed: u64,
}

impl ClusterModel {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// Row indices assigned to cluster `c`.
    pub fn members(&self, c: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| (a == c).then_some(i))
            .collect()
    }
}
