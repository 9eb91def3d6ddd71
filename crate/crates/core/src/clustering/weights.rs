use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::minkcore::{Exponent, WeightMatrix};

/// Within-cluster dispersions `V[k][l] = sum_{i in C_k} |x_il - m_kl|^p`.
pub fn dispersions(
    points: ArrayView2<'_, f64>,
    assignments: &[usize],
    centers: ArrayView2<'_, f64>,
    p: Exponent,
) -> Result<Array2<f64>> {
    if points.nrows() != assignments.len() {
        return Err(Error::DimensionMismatch {
            expected: points.nrows(),
            got: assignments.len(),
        });
    }
    if points.ncols() != centers.ncols() {
        return Err(Error::DimensionMismatch {
            expected: points.ncols(),
            got: centers.ncols(),
        });
    }
    let k = centers.nrows();
    let mut v = Array2::<f64>::zeros((k, points.ncols()));
    for (row, &a) in points.outer_iter().zip(assignments) {
        if a >= k {
            return Err(Error::InvalidArgument(format!(
                "assignment {a} out of range for {k} clusters"
            )));
        }
        let c = centers.row(a);
        let mut vr = v.row_mut(a);
        for ((acc, x), m) in vr.iter_mut().zip(row).zip(c) {
            *acc += p.pow((x - m).abs());
        }
    }
    Ok(v)
}

/// One row of feature weights from its dispersions.
///
/// For `p > 1`: `w_l = 1 / sum_u (V_l / V_u)^{1/(p-1)}`, so features that
/// are tight within the cluster get the larger share. Dispersions are first
/// floored at `1e-12 (1 + mean V)`.
///
/// `p = 1` is the limit of that rule: the weight is split equally among the
/// features of minimal dispersion. For `p < 1` the rule above is a maximiser
/// of the weighted dispersion, so the exact minimiser is used instead: all
/// weight on the first feature of minimal dispersion.
pub fn weights_from_dispersion(v: &[f64], p: Exponent) -> Vec<f64> {
    let d = v.len();
    if d == 0 {
        return Vec::new();
    }
    let mean = v.iter().sum::<f64>() / d as f64;
    let floor = 1e-12 * (1.0 + mean);
    let v: Vec<f64> = v.iter().map(|x| x.max(floor)).collect();
    let pv = p.value();
    if pv > 1.0 {
        let e = 1.0 / (pv - 1.0);
        return v
            .iter()
            .map(|vl| 1.0 / v.iter().map(|vu| (vl / vu).powf(e)).sum::<f64>())
            .collect();
    }
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w = vec![0.0; d];
    if pv == 1.0 {
        let ties = v.iter().filter(|x| **x == min).count() as f64;
        for (wl, vl) in w.iter_mut().zip(&v) {
            if *vl == min {
                *wl = 1.0 / ties;
            }
        }
    } else {
        let first = v.iter().position(|x| *x == min).unwrap_or(0);
        w[first] = 1.0;
    }
    w
}

/// Feature weights for every cluster from the current partition.
pub fn update_weights(
    points: ArrayView2<'_, f64>,
    assignments: &[usize],
    centers: ArrayView2<'_, f64>,
    p: Exponent,
) -> Result<WeightMatrix> {
    let v = dispersions(points, assignments, centers, p)?;
    Ok(weights_from_dispersion_matrix(&v, p))
}

pub(crate) fn weights_from_dispersion_matrix(v: &Array2<f64>, p: Exponent) -> WeightMatrix {
    let mut w = Array2::<f64>::zeros(v.raw_dim());
    for (mut wr, vr) in w.outer_iter_mut().zip(v.outer_iter()) {
        let row = weights_from_dispersion(&vr.to_vec(), p);
        wr.assign(&ndarray::ArrayView1::from(&row));
    }
    WeightMatrix::from_raw(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    #[test]
    fn fixed_examples() {
        let w = weights_from_dispersion(&[1.0, 4.0], p(2.0));
        assert!((w[0] - 0.8).abs() <= 1e-12 && (w[1] - 0.2).abs() <= 1e-12);
        let w = weights_from_dispersion(&[1.0, 1.0, 2.0], p(2.0));
        for (a, b) in w.iter().zip([0.4, 0.4, 0.2]) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn equal_dispersions_give_uniform() {
        let w = weights_from_dispersion(&[3.0; 5], p(1.7));
        for x in w {
            assert!((x - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_dispersion_takes_the_weight() {
        let w = weights_from_dispersion(&[0.0, 2.0, 5.0], p(2.0));
        assert!(w[0] > 0.999_999);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let w = weights_from_dispersion(&[0.0, 0.0, 0.0], p(3.0));
        assert_eq!(w, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn p_one_and_fractional_limits() {
        assert_eq!(weights_from_dispersion(&[2.0, 1.0, 1.0, 3.0], p(1.0)), vec![0.0, 0.5, 0.5, 0.0]);
        assert_eq!(weights_from_dispersion(&[2.0, 1.0, 1.0, 3.0], p(0.5)), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn update_from_partition() {
        let pts = array![[0.0, 0.0], [2.0, 1.0], [10.0, 10.0], [10.0, 14.0]];
        let centers = array![[1.0, 0.5], [10.0, 12.0]];
        let w = update_weights(pts.view(), &[0, 0, 1, 1], centers.view(), p(2.0)).unwrap();
        // V = [[2, 0.5], [0, 8]]
        let v = dispersions(pts.view(), &[0, 0, 1, 1], centers.view(), p(2.0)).unwrap();
        assert_eq!(v, array![[2.0, 0.5], [0.0, 8.0]]);
        assert!((w.row(0)[0] - 0.2).abs() < 1e-12);
        assert!(w.row(1)[0] > 0.999_999);
        assert!(update_weights(pts.view(), &[0, 0, 1], centers.view(), p(2.0)).is_err());
        assert!(update_weights(pts.view(), &[0, 0, 1, 2], centers.view(), p(2.0)).is_err());
    }

    proptest! {
        #[test]
        fn rows_sum_to_one(
            v in prop::collection::vec(0.0f64..100.0, 1..20),
            pv in prop_oneof![0.2f64..0.99, Just(1.0), 1.01f64..6.0],
        ) {
            let w = weights_from_dispersion(&v, p(pv));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(w.iter().all(|x| *x >= 0.0));
        }

        #[test]
        fn scaling_a_feature_moves_its_weight(
            v in prop::collection::vec(0.1f64..10.0, 2..10),
            c in 1.1f64..5.0,
            pv in 1.1f64..4.0,
        ) {
            let w = weights_from_dispersion(&v, p(pv));
            let mut scaled = v.clone();
            scaled[0] *= c.powf(pv);
            let w2 = weights_from_dispersion(&scaled, p(pv));
            prop_assert!(w2[0] < w[0]);
            let mut shrunk = v.clone();
            shrunk[0] /= c.powf(pv);
            let w3 = weights_from_dispersion(&shrunk, p(pv));
            prop_assert!(w3[0] > w[0]);
        }
    }
}
