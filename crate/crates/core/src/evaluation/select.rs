use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::nmi;
use crate::clustering::{minkowski_kmeans, Dataset, RunConfig};
use crate::error::{Error, Result};
use crate::featmap::{FeatureMap, KernelSpec, MapConfig};
use crate::minkcore::Exponent;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSelectionResult {
    pub grid: Vec<f64>,
    /// Mean labeled-subset NMI per grid entry.
    pub scores: Vec<f64>,
    pub chosen_p: f64,
    pub labeled_fraction: f64,
    pub repeats: usize,
    pub labeled_size: usize,
    pub seed: u64,
}

/// `0.5, 0.7, 0.9, 1.0, 1.1, ..., 3.1`.
pub fn default_p_grid() -> Vec<f64> {
    let mut g = vec![0.5, 0.7, 0.9];
    g.extend((10..=31).map(|i| i as f64 / 10.0));
    g
}

/// Seeded class-stratified sample of row indices, sorted. Every class
/// contributes `round(fraction * size)` rows, at least one.
pub fn labeled_subset(labels: &[i64], fraction: f64, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "labeled fraction must be in (0, 1], got {fraction}"
        )));
    }
    let mut by_class: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut out = Vec::new();
    for (_, mut idx) in by_class {
        let take = ((fraction * idx.len() as f64).round() as usize).clamp(1, idx.len());
        idx.shuffle(rng);
        out.extend_from_slice(&idx[..take]);
    }
    out.sort_unstable();
    Ok(out)
}

/// Chooses the exponent whose clusterings of the full data agree best with
/// the labels of a small seeded subset.
///
/// The data are mapped once. Every grid value is run `repeats` times with
/// the same per-repeat seeds, each run is scored by NMI on the labeled rows
/// only, and the grid value with the largest mean score wins (smaller `p` on
/// ties). `base_cfg` supplies `k`, init, restarts and iteration limits; its
/// `p` and `seed` are overridden.
#[allow(clippy::too_many_arguments)]
pub fn select_p(
    data: &Dataset,
    spec: &KernelSpec,
    map_cfg: &MapConfig,
    base_cfg: &RunConfig,
    weighted: bool,
    p_grid: &[f64],
    labeled_fraction: f64,
    repeats: usize,
    seed: u64,
) -> Result<PSelectionResult> {
    let labels = data
        .labels()
        .ok_or_else(|| Error::InvalidArgument("p selection needs labels".into()))?;
    if p_grid.is_empty() {
        return Err(Error::Empty("p grid"));
    }
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    let ps = p_grid
        .iter()
        .map(|&p| Exponent::new(p))
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subset = labeled_subset(labels, labeled_fraction, &mut rng)?;
    if subset.len() < base_cfg.k {
        return Err(Error::InvalidArgument(format!(
            "labeled subset has {} points, fewer than k = {}",
            subset.len(),
            base_cfg.k
        )));
    }
    let run_seeds: Vec<u64> = (0..repeats).map(|_| rng.next_u64()).collect();
    let sub_labels: Vec<i64> = subset.iter().map(|&i| labels[i]).collect();

    let mapped = FeatureMap::new(*spec, *map_cfg)?.map_dataset(data)?;
    let jobs: Vec<(usize, u64)> = (0..ps.len())
        .flat_map(|pi| run_seeds.iter().map(move |&s| (pi, s)))
        .collect();
    let nmis: Vec<f64> = jobs
        .par_iter()
        .map(|&(pi, s)| {
            let mut cfg = base_cfg.clone();
            cfg.p = ps[pi];
            cfg.seed = s;
            let model = minkowski_kmeans(mapped.values.view(), &cfg, weighted)?;
            let sub: Vec<usize> = subset.iter().map(|&i| model.assignments[i]).collect();
            nmi(&sub_labels, &sub)
        })
        .collect::<Result<_>>()?;

    let scores: Vec<f64> = nmis
        .chunks(repeats)
        .map(|c| c.iter().sum::<f64>() / repeats as f64)
        .collect();
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] || (scores[i] == scores[best] && p_grid[i] < p_grid[best]) {
            best = i;
        }
    }
    Ok(PSelectionResult {
        grid: p_grid.to_vec(),
        chosen_p: p_grid[best],
        scores,
        labeled_fraction,
        repeats,
        labeled_size: subset.len(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::Init;

    fn blobs() -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            let t = i as f64 * 0.01;
            rows.push(vec![0.9 - t, 0.1 + t]);
            labels.push(0);
            rows.push(vec![0.1 + t, 0.9 - t]);
            labels.push(1);
        }
        Dataset::from_rows(&rows).unwrap().with_labels(labels).unwrap()
    }

    #[test]
    fn default_grid_contents() {
        let g = default_p_grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[..4], [0.5, 0.7, 0.9, 1.0]);
        assert_eq!(*g.last().unwrap(), 3.1);
    }

    #[test]
    fn subset_is_stratified_and_seeded() {
        let labels: Vec<i64> = (0..100).map(|i| if i < 90 { 0 } else { 1 }).collect();
        let a = labeled_subset(&labels, 0.15, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = labeled_subset(&labels, 0.15, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|&&i| i >= 90).count(), 2);
        assert_eq!(a.len(), 14 + 2);
        let all = labeled_subset(&labels, 1.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert!(labeled_subset(&labels, 0.0, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn singleton_grid_and_errors() {
        let ds = blobs();
        let spec = KernelSpec::chi_square();
        let mc = MapConfig::default();
        let cfg = RunConfig::new(2, Exponent::TWO)
            .with_init(Init::RandomPoints)
            .with_restarts(2);
        let r = select_p(&ds, &spec, &mc, &cfg, false, &[2.0], 0.2, 3, 5).unwrap();
        assert_eq!(r.chosen_p, 2.0);
        assert_eq!(r.scores.len(), 1);
        let again = select_p(&ds, &spec, &mc, &cfg, false, &[2.0], 0.2, 3, 5).unwrap();
        assert_eq!(r, again);
        assert!(select_p(&ds, &spec, &mc, &cfg, false, &[], 0.2, 3, 5).is_err());
        let unlabeled = Dataset::new(ds.values().clone()).unwrap();
        assert!(select_p(&unlabeled, &spec, &mc, &cfg, false, &[2.0], 0.2, 3, 5).is_err());
        let big_k = RunConfig::new(5, Exponent::TWO);
        assert!(select_p(&ds, &spec, &mc, &big_k, false, &[2.0], 0.01, 1, 5).is_err());
    }

    #[test]
    fn ties_go_to_smaller_p() {
        let ds = blobs();
        let cfg = RunConfig::new(2, Exponent::TWO).with_init(Init::RandomPoints);
        let r = select_p(
            &ds,
            &KernelSpec::hellinger(),
            &MapConfig::default(),
            &cfg,
            false,
            &[3.0, 2.0, 1.5],
            1.0,
            2,
            9,
        )
        .unwrap();
        assert!(r.scores.iter().all(|s| (*s - 1.0).abs() < 1e-12), "{:?}", r.scores);
        assert_eq!(r.chosen_p, 1.5);
    }
}
