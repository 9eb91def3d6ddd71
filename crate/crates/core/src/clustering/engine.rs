use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::index;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::weights::{dispersions, weights_from_dispersion_matrix};
use super::{ClusterModel, Dataset, Init, RunConfig};
use crate::error::{Error, Result};
use crate::featmap::{FeatureMap, KernelSpec, MapConfig};
use crate::minkcore::{center_1d, scaled_pow_dist, pow_dist_unchecked, Exponent, WeightMatrix};

/// Nearest center for every row under the (optionally weighted) p-th power
/// Minkowski distance. Ties go to the lowest cluster index.
pub fn assign(
    points: ArrayView2<'_, f64>,
    centers: ArrayView2<'_, f64>,
    weights: Option<&WeightMatrix>,
    p: Exponent,
) -> Result<Vec<usize>> {
    if centers.nrows() == 0 {
        return Err(Error::InvalidArgument("no centers given".into()));
    }
    check_cols(points.ncols(), centers.ncols())?;
    let wp = weights
        .map(|w| {
            if w.n_clusters() != centers.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: centers.nrows(),
                    got: w.n_clusters(),
                });
            }
            check_cols(centers.ncols(), w.dim())?;
            Ok(w.as_array().mapv(|x| p.pow(x)))
        })
        .transpose()?;
    let pts = points.as_standard_layout();
    let ctr = centers.as_standard_layout();
    Ok(nearest(pts.view(), ctr.view(), wp.as_ref(), p).0)
}

/// Clustering objective: `sum_i sum_l w_{k(i) l}^p |x_il - m_{k(i) l}|^p`,
/// with all weights taken as 1 when `weights` is `None`.
pub fn objective_value(
    points: ArrayView2<'_, f64>,
    centers: ArrayView2<'_, f64>,
    weights: Option<&WeightMatrix>,
    assignments: &[usize],
    p: Exponent,
) -> Result<f64> {
    check_cols(points.ncols(), centers.ncols())?;
    if assignments.len() != points.nrows() {
        return Err(Error::DimensionMismatch {
            expected: points.nrows(),
            got: assignments.len(),
        });
    }
    if let Some(w) = weights {
        if w.as_array().dim() != centers.dim() {
            return Err(Error::DimensionMismatch {
                expected: centers.nrows() * centers.ncols(),
                got: w.n_clusters() * w.dim(),
            });
        }
    }
    if let Some(&bad) = assignments.iter().find(|&&a| a >= centers.nrows()) {
        return Err(Error::InvalidArgument(format!(
            "assignment {bad} out of range for {} clusters",
            centers.nrows()
        )));
    }
    let wp = weights.map(|w| w.as_array().mapv(|x| p.pow(x)));
    let pts = points.as_standard_layout();
    let ctr = centers.as_standard_layout();
    Ok(objective_compact(pts.view(), ctr.view(), wp.as_ref(), assignments, p))
}

/// Euclidean K-means on the raw data (`p` must be 2, no weights).
pub fn lloyd_kmeans(data: &Dataset, cfg: &RunConfig) -> Result<ClusterModel> {
    if cfg.p.value() != 2.0 {
        return Err(Error::InvalidArgument(format!(
            "lloyd_kmeans runs at p = 2, got p = {}",
            cfg.p
        )));
    }
    minkowski_kmeans(data.values().view(), cfg, false)
}

/// Maps `data` with the explicit feature map of `spec` and clusters the
/// mapped rows with [`minkowski_kmeans`].
pub fn explicit_kmwk_means(
    data: &Dataset,
    spec: &KernelSpec,
    map_cfg: &MapConfig,
    cfg: &RunConfig,
    weighted: bool,
) -> Result<ClusterModel> {
    cfg.validate(data.n_samples())?;
    let mapped = FeatureMap::new(*spec, *map_cfg)?.map_dataset(data)?;
    minkowski_kmeans(mapped.values.view(), cfg, weighted)
}

/// Explicit kernel K-means: the explicit map followed by unweighted
/// Euclidean K-means (`cfg.p` must be 2).
pub fn explicit_kernel_kmeans(
    data: &Dataset,
    spec: &KernelSpec,
    map_cfg: &MapConfig,
    cfg: &RunConfig,
) -> Result<ClusterModel> {
    if cfg.p.value() != 2.0 {
        return Err(Error::InvalidArgument(format!(
            "explicit kernel K-means runs at p = 2, got p = {}",
            cfg.p
        )));
    }
    explicit_kmwk_means(data, spec, map_cfg, cfg, false)
}

/// Converged centers of an unweighted run at `base_p` (1 or 2) from random
/// rows, for use as the initialization of a run at another exponent.
pub fn warm_start(
    points: ArrayView2<'_, f64>,
    k: usize,
    base_p: Exponent,
    seed: u64,
    max_iter: usize,
) -> Result<Array2<f64>> {
    if base_p.value() != 1.0 && base_p.value() != 2.0 {
        return Err(Error::InvalidArgument(format!(
            "warm start runs at p = 1 or p = 2, got {base_p}"
        )));
    }
    let mut cfg = RunConfig::new(k, base_p).with_max_iter(max_iter);
    cfg.validate(points.nrows())?;
    cfg.seed = seed;
    let layout = Layout::new(points);
    let pts = layout.compact(points);
    let init = random_centers(pts.view(), k, seed);
    let out = run_single(pts.view(), &cfg, base_p, false, init);
    Ok(layout.expand_centers(points, &out.centers))
}

/// Minkowski K-means on an arbitrary real matrix, optionally learning
/// per-cluster feature weights. Runs `cfg.restarts` independent restarts
/// and keeps the lowest objective.
///
/// Columns that are constant over the whole matrix carry no information and
/// are left out of the iterations: their center coordinate is the constant
/// and their weight is zero.
pub fn minkowski_kmeans(
    points: ArrayView2<'_, f64>,
    cfg: &RunConfig,
    weighted: bool,
) -> Result<ClusterModel> {
    cfg.validate(points.nrows())?;
    if points.ncols() == 0 {
        return Err(Error::Empty("no feature columns"));
    }
    let layout = Layout::new(points);
    let pts = layout.compact(points);
    let pts = pts.view();

    let restarts = match cfg.init {
        Init::Provided(_) => 1,
        _ => cfg.restarts,
    };
    let seeds = restart_seeds(cfg.seed, restarts);
    let runs: Vec<(u64, RunOutput)> = seeds
        .par_iter()
        .map(|&seed| {
            let init = initial_centers(pts, points.ncols(), &layout, cfg, seed)?;
            Ok((seed, run_single(pts, cfg, cfg.p, weighted, init)))
        })
        .collect::<Result<_>>()?;
    let (seed, best) = runs
        .into_iter()
        .reduce(|a, b| if b.1.objective < a.1.objective { b } else { a })
        .expect("at least one restart");

    let centers = layout.expand_centers(points, &best.centers);
    let weights = best
        .weights
        .map(|w| WeightMatrix::from_raw(layout.expand_weights(&w)));
    Ok(ClusterModel {
        centers: Some(centers),
        weights,
        assignments: best.assignments,
        k: cfg.k,
        p: cfg.p,
        objective: best.objective,
        trace: best.trace,
        iterations: best.iterations,
        converged: best.converged,
        solver_iterations: best.solver_iterations,
        seed,
    })
}

pub(crate) fn restart_seeds(seed: u64, restarts: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..restarts).map(|_| rng.next_u64()).collect()
}

/// `k` distinct row indices drawn from `0..n`.
pub(crate) fn random_rows(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    index::sample(&mut rng, n, k).into_vec()
}

fn random_centers(pts: ArrayView2<'_, f64>, k: usize, seed: u64) -> Array2<f64> {
    standard(pts.select(Axis(0), &random_rows(pts.nrows(), k, seed)))
}

fn standard(a: Array2<f64>) -> Array2<f64> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().into_owned()
    }
}

fn initial_centers(
    pts: ArrayView2<'_, f64>,
    full_dim: usize,
    layout: &Layout,
    cfg: &RunConfig,
    seed: u64,
) -> Result<Array2<f64>> {
    let base = match &cfg.init {
        Init::RandomPoints => return Ok(random_centers(pts, cfg.k, seed)),
        Init::Provided(c) => {
            if c.dim() != (cfg.k, full_dim) {
                return Err(Error::InvalidArgument(format!(
                    "provided centers have shape {:?}, expected ({}, {})",
                    c.dim(),
                    cfg.k,
                    full_dim
                )));
            }
            return Ok(standard(c.select(Axis(1), &layout.active)));
        }
        Init::WarmStartP2 => Exponent::TWO,
        Init::WarmStartP1 => Exponent::ONE,
    };
    let init = random_centers(pts, cfg.k, seed);
    Ok(run_single(pts, cfg, base, false, init).centers)
}

/// Which columns take part in the iterations.
struct Layout {
    active: Vec<usize>,
    all_active: bool,
    full_dim: usize,
}

impl Layout {
    fn new(points: ArrayView2<'_, f64>) -> Self {
        let first = points.row(0);
        let mut active: Vec<usize> = (0..points.ncols())
            .filter(|&l| points.column(l).iter().any(|&v| v != first[l]))
            .collect();
        if active.is_empty() {
            active = (0..points.ncols()).collect();
        }
        let all_active = active.len() == points.ncols();
        Layout {
            active,
            all_active,
            full_dim: points.ncols(),
        }
    }

    fn compact(&self, points: ArrayView2<'_, f64>) -> Array2<f64> {
        if self.all_active {
            points.as_standard_layout().into_owned()
        } else {
            standard(points.select(Axis(1), &self.active))
        }
    }

    fn expand_centers(&self, points: ArrayView2<'_, f64>, centers: &Array2<f64>) -> Array2<f64> {
        if self.all_active {
            return centers.clone();
        }
        let first = points.row(0);
        let mut full = Array2::from_shape_fn((centers.nrows(), points.ncols()), |(_, l)| first[l]);
        for (j, &l) in self.active.iter().enumerate() {
            full.column_mut(l).assign(&centers.column(j));
        }
        full
    }

    fn expand_weights(&self, w: &Array2<f64>) -> Array2<f64> {
        if self.all_active {
            return w.clone();
        }
        let mut full = Array2::zeros((w.nrows(), self.full_dim));
        for (j, &l) in self.active.iter().enumerate() {
            full.column_mut(l).assign(&w.column(j));
        }
        full
    }
}

struct RunOutput {
    centers: Array2<f64>,
    weights: Option<Array2<f64>>,
    assignments: Vec<usize>,
    objective: f64,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
    solver_iterations: usize,
}

/// One restart of the alternating scheme:
/// assign -> repair empty clusters -> centers -> (weights), until the
/// assignment repeats or `max_iter` iterations have run.
fn run_single(
    pts: ArrayView2<'_, f64>,
    cfg: &RunConfig,
    p: Exponent,
    weighted: bool,
    init: Array2<f64>,
) -> RunOutput {
    let k = cfg.k;
    let dim = pts.ncols();
    let mut centers = init;
    let mut weights = weighted.then(|| Array2::from_elem((k, dim), 1.0 / dim as f64));
    let mut wp = weights.as_ref().map(|w| w.mapv(|x| p.pow(x)));
    let mut assignments: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut solver_iterations = 0;

    for _ in 0..cfg.max_iter {
        let (mut next, mut dist) = nearest(pts, centers.view(), wp.as_ref(), p);
        repair_empty(&mut next, &mut dist, k);
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
        let (c, its) = update_centers(pts, &assignments, &centers, p, cfg.tol, cfg.max_iter);
        centers = c;
        solver_iterations += its;
        if weighted {
            let v = dispersions(pts, &assignments, centers.view(), p)
                .expect("shapes are consistent");
            let w = weights_from_dispersion_matrix(&v, p).into_inner();
            wp = Some(w.mapv(|x| p.pow(x)));
            weights = Some(w);
        }
        trace.push(objective_compact(pts, centers.view(), wp.as_ref(), &assignments, p));
    }
    let objective = trace.last().copied().unwrap_or(f64::INFINITY);
    RunOutput {
        centers,
        weights,
        assignments,
        objective,
        iterations: trace.len(),
        trace,
        converged,
        solver_iterations,
    }
}

/// Assignment plus the distance of every row to its chosen center.
fn nearest(
    pts: ArrayView2<'_, f64>,
    centers: ArrayView2<'_, f64>,
    wp: Option<&Array2<f64>>,
    p: Exponent,
) -> (Vec<usize>, Vec<f64>) {
    let k = centers.nrows();
    let center_rows: Vec<&[f64]> = (0..k)
        .map(|c| centers.row(c).to_slice().expect("standard layout"))
        .collect();
    let wp_rows: Option<Vec<&[f64]>> = wp.map(|w| {
        (0..k)
            .map(|c| w.row(c).to_slice().expect("standard layout"))
            .collect()
    });
    pts.axis_iter(Axis(0))
        .into_par_iter()
        .map(|row| {
            let x = row.to_slice().expect("standard layout");
            let mut best = (0, f64::INFINITY);
            for c in 0..k {
                let d = match &wp_rows {
                    Some(w) => scaled_pow_dist(x, center_rows[c], w[c], p),
                    None => pow_dist_unchecked(x, center_rows[c], p),
                };
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .unzip()
}

/// Gives every empty cluster the row farthest from its current center,
/// taken from clusters that keep at least one member.
pub(crate) fn repair_empty(assign: &mut [usize], dist: &mut [f64], k: usize) {
    let mut sizes = vec![0usize; k];
    for &a in assign.iter() {
        sizes[a] += 1;
    }
    for e in 0..k {
        if sizes[e] > 0 {
            continue;
        }
        let mut pick: Option<usize> = None;
        for i in 0..assign.len() {
            if sizes[assign[i]] < 2 {
                continue;
            }
            if pick.is_none_or(|j| dist[i] > dist[j]) {
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };
        sizes[assign[i]] -= 1;
        sizes[e] += 1;
        assign[i] = e;
        dist[i] = 0.0;
    }
}

fn objective_1d(values: &[f64], m: f64, p: Exponent) -> f64 {
    values.iter().map(|x| p.pow((x - m).abs())).sum()
}

/// Recomputes every center coordinate. For the iterative solvers a
/// coordinate only moves when the new value scores strictly better than the
/// previous one, which keeps the objective monotone under solver tolerance.
fn update_centers(
    pts: ArrayView2<'_, f64>,
    assignments: &[usize],
    prev: &Array2<f64>,
    p: Exponent,
    tol: f64,
    max_iter: usize,
) -> (Array2<f64>, usize) {
    let (k, dim) = prev.dim();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &a) in assignments.iter().enumerate() {
        members[a].push(i);
    }
    let closed_form = p.value() == 1.0 || p.value() == 2.0;
    let solved: Vec<(f64, usize)> = (0..k * dim)
        .into_par_iter()
        .map(|idx| {
            let (c, l) = (idx / dim, idx % dim);
            let old = prev[[c, l]];
            if members[c].is_empty() {
                return (old, 0);
            }
            let mut buf: Vec<f64> = members[c].iter().map(|&i| pts[[i, l]]).collect();
            let (m, its) = center_1d(&mut buf, p, None, tol, max_iter);
            if !closed_form && objective_1d(&buf, old, p) < objective_1d(&buf, m, p) {
                return (old, its);
            }
            (m, its)
        })
        .collect();
    let total = solved.iter().map(|s| s.1).sum();
    let centers = Array2::from_shape_vec((k, dim), solved.into_iter().map(|s| s.0).collect())
        .expect("k * dim values");
    (centers, total)
}

fn objective_compact(
    pts: ArrayView2<'_, f64>,
    centers: ArrayView2<'_, f64>,
    wp: Option<&Array2<f64>>,
    assignments: &[usize],
    p: Exponent,
) -> f64 {
    let mut total = 0.0;
    for (row, &a) in pts.outer_iter().zip(assignments) {
        let c = centers.row(a);
        total += match wp {
            Some(w) => row
                .iter()
                .zip(c)
                .zip(w.row(a))
                .map(|((x, m), s)| s * p.pow((x - m).abs()))
                .sum::<f64>(),
            None => row.iter().zip(c).map(|(x, m)| p.pow((x - m).abs())).sum::<f64>(),
        };
    }
    total
}

fn check_cols(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
