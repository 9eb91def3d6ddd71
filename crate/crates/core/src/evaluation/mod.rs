//! External clustering metrics and the semi-supervised choice of the
//! Minkowski exponent.

mod metrics;
mod select;

pub use metrics::{contingency, evaluate, nmi, purity, Contingency, MetricResult};
pub use select::{default_p_grid, labeled_subset, select_p, PSelectionResult};
