use serde::{Deserialize, Serialize};

use crate::clustering::ClusterModel;
use crate::diagnostics::DiagnosticsReport;
use crate::evaluation::{MetricResult, PSelectionResult};
use crate::featmap::ApproximationStats;

pub const REPORT_VERSION: u32 = 1;

/// Every option that influences a run. Options that do not apply to the
/// subcommand are `null`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input: Option<String>,
    pub header: Option<bool>,
    pub label_column: Option<String>,
    pub id_column: Option<String>,
    pub kernel: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub map_n: Option<usize>,
    pub map_period: Option<f64>,
    pub engine: Option<String>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub weighted: Option<bool>,
    pub init: Option<String>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub approx_pairs: Option<usize>,
    pub grid: Option<Vec<f64>>,
    pub labeled_fraction: Option<f64>,
    pub repeats: Option<usize>,
    pub d_grid: Option<Vec<usize>>,
    pub n: Option<usize>,
    pub labels: Option<String>,
    pub assignments: Option<String>,
}

/// Summary of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub k: usize,
    pub p: f64,
    pub kernel: Option<String>,
    pub map_n: Option<usize>,
    pub map_period: Option<f64>,
    pub restarts: usize,
    /// Seed of the winning restart.
    pub restart_seed: u64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub solver_iterations: usize,
    pub cluster_sizes: Vec<usize>,
    pub weights: Option<Vec<Vec<f64>>>,
    pub trace: Vec<f64>,
    pub assignments: Vec<usize>,
}

impl ModelSummary {
    pub fn new(
        model: &ClusterModel,
        kernel: Option<String>,
        map: Option<(usize, f64)>,
        restarts: usize,
    ) -> Self {
        ModelSummary {
            k: model.k,
            p: model.p.value(),
            kernel,
            map_n: map.map(|m| m.0),
            map_period: map.map(|m| m.1),
            restarts,
            restart_seed: model.seed,
            objective: model.objective,
            iterations: model.iterations,
            converged: model.converged,
            solver_iterations: model.solver_iterations,
            cluster_sizes: model.cluster_sizes(),
            weights: model
                .weights
                .as_ref()
                .map(|w| w.as_array().outer_iter().map(|r| r.to_vec()).collect()),
            trace: model.trace.clone(),
            assignments: model.assignments.clone(),
        }
    }
}

/// Wall-clock timings in milliseconds. Not covered by the determinism
/// guarantee.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub map_ms: f64,
    pub cluster_ms: f64,
}

/// The JSON document written by every report-producing subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: u32,
    pub command: String,
    pub config: ConfigEcho,
    pub model: Option<ModelSummary>,
    pub metrics: Option<MetricResult>,
    pub approximation: Option<ApproximationStats>,
    pub selection: Option<PSelectionResult>,
    pub diagnostics: Option<DiagnosticsReport>,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(command: &str, config: ConfigEcho) -> Self {
        RunReport {
            version: REPORT_VERSION,
            command: command.to_string(),
            config,
            model: None,
            metrics: None,
            approximation: None,
            selection: None,
            diagnostics: None,
            timing: Timing::default(),
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// JSON schema every [`RunReport`] validates against.
pub const REPORT_SCHEMA: &str = include_str!("../../schemas/run_report.schema.json");
