//! Minkowski centers: per-dimension minimisers of `sum_i |x_i - m|^p`.
//!
//! The objective is separable across dimensions, so every solver works on
//! one coordinate at a time:
//! - `p = 2`: arithmetic mean.
//! - `p = 1`: median (midpoint of the two middle values for even counts).
//! - `p > 1`: steepest descent with backtracking, started at the median.
//! - `p < 1`: candidate search over the data values, then a golden-section
//!   refinement around the best candidate.

use ndarray::ArrayView2;

use super::distance::Exponent;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Sufficient-decrease constant for the backtracking line search.
const ARMIJO_C: f64 = 1e-4;
const GOLDEN_ITERS: usize = 40;

/// Result of a center solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSolve {
    pub center: Vec<f64>,
    /// Solver iterations summed over dimensions (0 for closed forms).
    pub iterations: usize,
}

/// `sum_i sum_l |points[i][l] - m[l]|^p`.
pub fn center_objective(points: ArrayView2<'_, f64>, m: &[f64], p: Exponent) -> Result<f64> {
    if points.ncols() != m.len() {
        return Err(Error::DimensionMismatch {
            expected: points.ncols(),
            got: m.len(),
        });
    }
    Ok(points
        .outer_iter()
        .map(|row| {
            row.iter()
                .zip(m)
                .map(|(x, c)| p.pow((x - c).abs()))
                .sum::<f64>()
        })
        .sum())
}

/// Minkowski center of the rows of `points`.
///
/// `init`, when given, replaces the median as the starting point of the
/// `p > 1` descent; it is ignored by the closed forms and the `p < 1`
/// search.
pub fn minkowski_center(
    points: ArrayView2<'_, f64>,
    p: Exponent,
    init: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<CenterSolve> {
    if points.nrows() == 0 {
        return Err(Error::Empty("no points to center"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    if let Some(init) = init {
        if init.len() != points.ncols() {
            return Err(Error::DimensionMismatch {
                expected: points.ncols(),
                got: init.len(),
            });
        }
    }
    let mut buf = Vec::with_capacity(points.nrows());
    let mut center = Vec::with_capacity(points.ncols());
    let mut iterations = 0;
    for (l, col) in points.columns().into_iter().enumerate() {
        buf.clear();
        buf.extend(col.iter().copied());
        let (m, it) = center_1d(&mut buf, p, init.map(|v| v[l]), tol, max_iter);
        center.push(m);
        iterations += it;
    }
    Ok(CenterSolve { center, iterations })
}

/// One-dimensional center of `values` (reordered in place). Returns the
/// center and the number of solver iterations spent.
pub fn center_1d(
    values: &mut [f64],
    p: Exponent,
    init: Option<f64>,
    tol: f64,
    max_iter: usize,
) -> (f64, usize) {
    debug_assert!(!values.is_empty());
    let pv = p.value();
    if pv == 2.0 {
        return (mean(values), 0);
    }
    values.sort_unstable_by(f64::total_cmp);
    let med = sorted_median(values);
    if pv == 1.0 || values[0] == values[values.len() - 1] {
        return (med, 0);
    }
    if pv > 1.0 {
        descend(values, p, init.unwrap_or(med), tol, max_iter)
    } else {
        fractional_search(values, p)
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sorted_median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn objective_1d(values: &[f64], m: f64, p: Exponent) -> f64 {
    values.iter().map(|x| p.pow((x - m).abs())).sum()
}

/// Derivative of the 1-D objective; a zero deviation contributes nothing.
fn gradient_1d(values: &[f64], m: f64, p: Exponent) -> f64 {
    let q = p.value() - 1.0;
    let mut g = 0.0;
    for &x in values {
        let d = m - x;
        if d != 0.0 {
            g += d.signum() * d.abs().powf(q);
        }
    }
    p.value() * g
}

/// Steepest descent on the convex `p > 1` objective. Each trial step of the
/// backtracking line search counts as one iteration; the step doubles after
/// an accepted move and halves after a rejected one. Stops once
/// `step * |gradient| < tol`.
fn descend(sorted: &[f64], p: Exponent, start: f64, tol: f64, max_iter: usize) -> (f64, usize) {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let mut m = start.clamp(lo, hi);
    let mut f = objective_1d(sorted, m, p);
    let mut step = 0.25 * (hi - lo);
    let mut it = 0;
    'outer: while it < max_iter {
        let g = gradient_1d(sorted, m, p);
        if g == 0.0 || step * g.abs() < tol {
            break;
        }
        let dir = -g.signum();
        loop {
            it += 1;
            let cand = m + dir * step;
            let fc = objective_1d(sorted, cand, p);
            if fc <= f - ARMIJO_C * step * g.abs() {
                m = cand;
                f = fc;
                step *= 2.0;
                break;
            }
            step *= 0.5;
            if step * g.abs() < tol || it >= max_iter {
                break 'outer;
            }
        }
    }
    (m, it)
}

/// The `p < 1` objective is concave between consecutive data values, so its
/// global minimum sits on a data value; every distinct value is scored.
fn fractional_search(sorted: &[f64], p: Exponent) -> (f64, usize) {
    let mut best = sorted[0];
    let mut best_f = f64::INFINITY;
    let mut best_idx = 0;
    let mut evals = 0;
    let mut prev = f64::NAN;
    for (i, &c) in sorted.iter().enumerate() {
        if c == prev {
            continue;
        }
        prev = c;
        evals += 1;
        let f = objective_1d(sorted, c, p);
        if f < best_f {
            best_f = f;
            best = c;
            best_idx = i;
        }
    }
    // Golden-section refinement between the neighbouring data values.
    let left = sorted[..best_idx].iter().rev().find(|&&v| v < best).copied();
    let right = sorted[best_idx..].iter().find(|&&v| v > best).copied();
    let (mut a, mut b) = (left.unwrap_or(best), right.unwrap_or(best));
    if b > a {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (objective_1d(sorted, c, p), objective_1d(sorted, d, p));
        evals += 2;
        for _ in 0..GOLDEN_ITERS {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = objective_1d(sorted, c, p);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = objective_1d(sorted, d, p);
            }
            evals += 1;
        }
        for (x, fx) in [(c, fc), (d, fd)] {
            if fx < best_f {
                best_f = fx;
                best = x;
            }
        }
    }
    (best, evals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    fn solve(points: &Array2<f64>, pv: f64) -> Vec<f64> {
        minkowski_center(points.view(), p(pv), None, DEFAULT_TOL, DEFAULT_MAX_ITER)
            .unwrap()
            .center
    }

    #[test]
    fn closed_forms() {
        assert_eq!(solve(&array![[0.0], [6.0]], 2.0), vec![3.0]);
        assert_eq!(solve(&array![[0.0], [0.0], [9.0]], 1.0), vec![0.0]);
        assert_eq!(solve(&array![[0.0], [2.0], [4.0], [10.0]], 1.0), vec![3.0]);
    }

    #[test]
    fn cubic_center_matches_grid() {
        // Brute-force grid over [0, 8] at step 1e-4.
        let xs = [0.0, 1.0, 8.0];
        let f = |m: f64| xs.iter().map(|x: &f64| (x - m).abs().powi(3)).sum::<f64>();
        let best = (0..=80_000)
            .map(|i| i as f64 * 1e-4)
            .map(f)
            .fold(f64::INFINITY, f64::min);
        let m = solve(&array![[0.0], [1.0], [8.0]], 3.0)[0];
        assert!(f(m) <= best + 1e-9, "f(m)={} grid={}", f(m), best);
    }

    #[test]
    fn errors() {
        let empty = Array2::<f64>::zeros((0, 2));
        assert!(minkowski_center(empty.view(), p(2.0), None, 1e-8, 10).is_err());
        let pts = array![[1.0, 2.0]];
        assert!(minkowski_center(pts.view(), p(2.0), None, 0.0, 10).is_err());
        assert!(minkowski_center(pts.view(), p(2.0), Some(&[1.0]), 1e-8, 10).is_err());
        assert!(center_objective(pts.view(), &[1.0], p(2.0)).is_err());
    }

    #[test]
    fn objective_examples() {
        assert_eq!(center_objective(array![[2.0, 3.0]].view(), &[2.0, 3.0], p(1.7)).unwrap(), 0.0);
        let v = center_objective(array![[0.0], [4.0]].view(), &[2.0], p(2.0)).unwrap();
        assert_eq!(v, 2.0 * 2.0 * 2.0);
    }

    #[test]
    fn objective_matches_resummation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..20);
            let d = rng.gen_range(1..6);
            let pts = Array2::from_shape_fn((n, d), |_| rng.gen_range(-5.0..5.0));
            let m: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let pv = rng.gen_range(0.3..3.5);
            let mut naive = 0.0;
            for i in 0..n {
                for l in 0..d {
                    naive += (pts[[i, l]] - m[l]).abs().powf(pv);
                }
            }
            let got = center_objective(pts.view(), &m, p(pv)).unwrap();
            assert!((got - naive).abs() <= 1e-12 * (1.0 + naive));
        }
    }

    #[test]
    fn p1_median_beats_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts = Array2::from_shape_fn((25, 3), |_| rng.gen_range(0.0..10.0));
        let m = solve(&pts, 1.0);
        let f0 = center_objective(pts.view(), &m, p(1.0)).unwrap();
        for _ in 0..1000 {
            let q: Vec<f64> = m.iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect();
            assert!(f0 <= center_objective(pts.view(), &q, p(1.0)).unwrap() + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn p2_is_mean(rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 1..64)) {
            let n = rows.len();
            let pts = Array2::from_shape_fn((n, 3), |(i, j)| rows[i][j]);
            let c = solve(&pts, 2.0);
            for l in 0..3 {
                let mean = rows.iter().map(|r| r[l]).sum::<f64>() / n as f64;
                prop_assert!((c[l] - mean).abs() <= 1e-9);
            }
        }

        #[test]
        fn convex_center_beats_mean_and_median(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 2), 1..40),
            pv in 1.05f64..4.0,
        ) {
            let n = rows.len();
            let pts = Array2::from_shape_fn((n, 2), |(i, j)| rows[i][j]);
            let e = p(pv);
            let c = solve(&pts, pv);
            let f = center_objective(pts.view(), &c, e).unwrap();
            let mean = solve(&pts, 2.0);
            let med = solve(&pts, 1.0);
            prop_assert!(f <= center_objective(pts.view(), &mean, e).unwrap() + 1e-9);
            prop_assert!(f <= center_objective(pts.view(), &med, e).unwrap() + 1e-9);
        }

        #[test]
        fn fractional_center_beats_every_medoid(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 2), 1..40),
            pv in 0.1f64..0.99,
        ) {
            let n = rows.len();
            let pts = Array2::from_shape_fn((n, 2), |(i, j)| rows[i][j]);
            let e = p(pv);
            let c = solve(&pts, pv);
            for l in 0..2 {
                let col: Vec<f64> = rows.iter().map(|r| r[l]).collect();
                let fc = objective_1d(&col, c[l], e);
                for &cand in &col {
                    prop_assert!(fc <= objective_1d(&col, cand, e) + 1e-12);
                }
            }
        }
    }
}
