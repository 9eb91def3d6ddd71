use ndarray::{Array2, Axis};
use rayon::prelude::*;

use super::engine::{random_rows, repair_empty, restart_seeds};
use super::{ClusterModel, Dataset, Init, RunConfig};
use crate::error::{Error, Result};
use crate::featmap::KernelSpec;

/// Full `N x N` kernel matrix `G_ij = K(x_i, x_j)`.
pub fn gram_matrix(spec: &KernelSpec, data: &Dataset) -> Result<Array2<f64>> {
    data.check_nonnegative()?;
    let x = data.values();
    let n = x.nrows();
    let mut g = Array2::<f64>::zeros((n, n));
    g.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let xi = x.row(i);
            for (j, out) in row.iter_mut().enumerate() {
                *out = xi
                    .iter()
                    .zip(x.row(j))
                    .map(|(a, b)| spec.eval_scalar(*a, *b))
                    .sum();
            }
        });
    Ok(g)
}

/// Kernel K-means driven by the Gram matrix alone. The distance of row `i`
/// to the implicit center of cluster `c` is
/// `G_ii - 2/n_c sum_{j in c} G_ij + 1/n_c^2 sum_{j,l in c} G_jl`.
///
/// Needs `O(N^2)` memory. Only `p = 2` and random-row initialization are
/// supported; restarts draw the same rows as [`super::minkowski_kmeans`]
/// for the same seed, so the two engines can be compared run for run.
pub fn exact_kernel_kmeans(
    data: &Dataset,
    spec: &KernelSpec,
    cfg: &RunConfig,
) -> Result<ClusterModel> {
    if cfg.p.value() != 2.0 {
        return Err(Error::InvalidArgument(format!(
            "exact kernel K-means is Euclidean in feature space, got p = {}",
            cfg.p
        )));
    }
    if cfg.init != Init::RandomPoints {
        return Err(Error::InvalidArgument(format!(
            "exact kernel K-means supports random init only, got {}",
            cfg.init
        )));
    }
    cfg.validate(data.n_samples())?;
    let g = gram_matrix(spec, data)?;

    let seeds = restart_seeds(cfg.seed, cfg.restarts);
    let runs: Vec<(u64, Run)> = seeds
        .par_iter()
        .map(|&s| (s, run_single(&g, cfg, &random_rows(g.nrows(), cfg.k, s))))
        .collect();
    let (seed, best) = runs
        .into_iter()
        .reduce(|a, b| if b.1.objective < a.1.objective { b } else { a })
        .expect("at least one restart");
    Ok(ClusterModel {
        centers: None,
        weights: None,
        assignments: best.assignments,
        k: cfg.k,
        p: cfg.p,
        objective: best.objective,
        iterations: best.trace.len(),
        trace: best.trace,
        converged: best.converged,
        solver_iterations: 0,
        seed,
    })
}

/// Feature-space objective `sum_c (sum_{i in c} G_ii - 1/n_c sum_{i,j in c} G_ij)`.
pub(crate) fn kernel_objective(g: &Array2<f64>, assignments: &[usize], k: usize) -> f64 {
    let (t, sizes) = member_sums(g, assignments, k);
    let s = cluster_totals(&t, assignments, k);
    (0..k)
        .filter(|&c| sizes[c] > 0)
        .map(|c| {
            let diag: f64 = assignments
                .iter()
                .enumerate()
                .filter(|(_, a)| **a == c)
                .map(|(i, _)| g[[i, i]])
                .sum();
            diag - s[c] / sizes[c] as f64
        })
        .sum()
}

struct Run {
    assignments: Vec<usize>,
    objective: f64,
    trace: Vec<f64>,
    converged: bool,
}

fn run_single(g: &Array2<f64>, cfg: &RunConfig, init_rows: &[usize]) -> Run {
    let k = cfg.k;
    let n = g.nrows();
    let mut assignments: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;

    for it in 0..cfg.max_iter {
        let dist: Vec<Vec<f64>> = if it == 0 {
            (0..n)
                .into_par_iter()
                .map(|i| {
                    init_rows
                        .iter()
                        .map(|&r| g[[i, i]] - 2.0 * g[[i, r]] + g[[r, r]])
                        .collect()
                })
                .collect()
        } else {
            let (t, sizes) = member_sums(g, &assignments, k);
            let s = cluster_totals(&t, &assignments, k);
            (0..n)
                .into_par_iter()
                .map(|i| {
                    (0..k)
                        .map(|c| {
                            let nc = sizes[c] as f64;
                            g[[i, i]] - 2.0 * t[[i, c]] / nc + s[c] / (nc * nc)
                        })
                        .collect()
                })
                .collect()
        };
        let (mut next, mut d): (Vec<usize>, Vec<f64>) = dist
            .iter()
            .map(|row| {
                let mut best = (0, f64::INFINITY);
                for (c, &v) in row.iter().enumerate() {
                    if v < best.1 {
                        best = (c, v);
                    }
                }
                best
            })
            .unzip();
        repair_empty(&mut next, &mut d, k);
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
        trace.push(kernel_objective(g, &assignments, k));
    }
    Run {
        objective: trace.last().copied().unwrap_or(f64::INFINITY),
        assignments,
        trace,
        converged,
    }
}

/// `t[i][c] = sum_{j in c} G_ij` and the cluster sizes.
fn member_sums(g: &Array2<f64>, assignments: &[usize], k: usize) -> (Array2<f64>, Vec<usize>) {
    let n = g.nrows();
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    let mut t = Array2::<f64>::zeros((n, k));
    t.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            for (j, &a) in assignments.iter().enumerate() {
                row[a] += g[[i, j]];
            }
        });
    (t, sizes)
}

fn cluster_totals(t: &Array2<f64>, assignments: &[usize], k: usize) -> Vec<f64> {
    let mut s = vec![0.0; k];
    for (i, &a) in assignments.iter().enumerate() {
        s[a] += t[[i, a]];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkcore::Exponent;

    #[test]
    fn gram_is_symmetric_with_kernel_diagonal() {
        let ds = Dataset::from_rows(&[vec![0.2, 0.8], vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let spec = KernelSpec::chi_square();
        let g = gram_matrix(&spec, &ds).unwrap();
        for i in 0..3 {
            assert!((g[[i, i]] - ds.values().row(i).sum()).abs() < 1e-15);
            for j in 0..3 {
                assert_eq!(g[[i, j]], g[[j, i]]);
            }
        }
        let bad = Dataset::from_rows(&[vec![-0.1]]).unwrap();
        assert!(gram_matrix(&spec, &bad).is_err());
    }

    #[test]
    fn single_cluster_objective() {
        let ds = Dataset::from_rows(&[vec![0.1, 0.9], vec![0.4, 0.6], vec![0.7, 0.3], vec![1.0, 0.2]])
            .unwrap();
        let spec = KernelSpec::jensen_shannon();
        let g = gram_matrix(&spec, &ds).unwrap();
        let n = 4.0;
        let expected = g.diag().sum() - g.sum() / n;
        let cfg = RunConfig::new(1, Exponent::TWO).with_restarts(1);
        let m = exact_kernel_kmeans(&ds, &spec, &cfg).unwrap();
        assert!((m.objective - expected).abs() < 1e-12);
        assert!(m.centers.is_none());
    }

    #[test]
    fn rejects_unsupported_configs() {
        let ds = Dataset::from_rows(&[vec![0.1], vec![0.9]]).unwrap();
        let spec = KernelSpec::hellinger();
        let cfg = RunConfig::new(2, Exponent::new(1.5).unwrap());
        assert!(exact_kernel_kmeans(&ds, &spec, &cfg).is_err());
        let cfg = RunConfig::new(2, Exponent::TWO).with_init(Init::WarmStartP2);
        assert!(exact_kernel_kmeans(&ds, &spec, &cfg).is_err());
        let cfg = RunConfig::new(3, Exponent::TWO);
        assert!(exact_kernel_kmeans(&ds, &spec, &cfg).is_err());
    }
}
