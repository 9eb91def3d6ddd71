use std::fmt;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minkowski exponent `p > 0`. Values below 1 give fractional prenorms
/// which do not satisfy the triangle inequality.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 0.0 {
            Ok(Exponent(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_fractional(self) -> bool {
        self.0 < 1.0
    }

    /// `t^p` for `t >= 0`, exact for `p` in `{1, 2}`.
    #[inline]
    pub fn pow(self, t: f64) -> f64 {
        if self.0 == 2.0 {
            t * t
        } else if self.0 == 1.0 {
            t
        } else {
            t.powf(self.0)
        }
    }
}

impl TryFrom<f64> for Exponent {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Exponent::new(p)
    }
}

impl From<Exponent> for f64 {
    fn from(p: Exponent) -> f64 {
        p.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Per-cluster feature weights: `K x D'`, nonnegative, rows summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(Array2<f64>);

impl WeightMatrix {
    pub const ROW_SUM_TOL: f64 = 1e-9;

    pub fn new(w: Array2<f64>) -> Result<Self> {
        for (k, row) in w.outer_iter().enumerate() {
            if let Some(bad) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "weight row {k} has invalid entry {bad}"
                )));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > Self::ROW_SUM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "weight row {k} sums to {s}, expected 1"
                )));
            }
        }
        Ok(WeightMatrix(w))
    }

    pub fn uniform(k: usize, dim: usize) -> Self {
        WeightMatrix(Array2::from_elem((k, dim), 1.0 / dim as f64))
    }

    pub(crate) fn from_raw(w: Array2<f64>) -> Self {
        WeightMatrix(w)
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn row(&self, k: usize) -> ArrayView1<'_, f64> {
        self.0.row(k)
    }

    pub fn n_clusters(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            got: b,
        });
    }
    Ok(())
}

/// `sum_l |x_l - y_l|^p` (the p-th power of the Minkowski distance).
pub fn minkowski_pow_dist(x: &[f64], y: &[f64], p: Exponent) -> Result<f64> {
    check_len(x.len(), y.len())?;
    Ok(pow_dist_unchecked(x, y, p))
}

/// `sum_l w_l^p |x_l - y_l|^p`.
pub fn weighted_pow_dist(x: &[f64], y: &[f64], w: &[f64], p: Exponent) -> Result<f64> {
    check_len(x.len(), y.len())?;
    check_len(x.len(), w.len())?;
    if let Some(l) = w.iter().position(|v| *v < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "negative weight {} at feature {l}",
            w[l]
        )));
    }
    Ok(x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((a, b), wl)| p.pow(*wl) * p.pow((a - b).abs()))
        .sum())
}

/// Minkowski norm `(sum_l |x_l|^p)^{1/p}`.
pub fn minkowski_norm(x: &[f64], p: Exponent) -> f64 {
    let s: f64 = x.iter().map(|v| p.pow(v.abs())).sum();
    if p.value() == 1.0 {
        s
    } else if p.value() == 2.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / p.value())
    }
}

#[inline]
pub(crate) fn pow_dist_unchecked(x: &[f64], y: &[f64], p: Exponent) -> f64 {
    x.iter().zip(y).map(|(a, b)| p.pow((a - b).abs())).sum()
}

/// Distance with precomputed `w^p` factors.
#[inline]
pub(crate) fn scaled_pow_dist(x: &[f64], y: &[f64], wp: &[f64], p: Exponent) -> f64 {
    x.iter()
        .zip(y)
        .zip(wp)
        .map(|((a, b), s)| s * p.pow((a - b).abs()))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    #[test]
    fn pow_dist_examples() {
        assert_eq!(minkowski_pow_dist(&[0.0, 0.0], &[3.0, 4.0], p(2.0)).unwrap(), 25.0);
        assert_eq!(minkowski_pow_dist(&[0.0], &[4.0], p(0.5)).unwrap(), 2.0);
        assert_eq!(minkowski_pow_dist(&[1.5, -2.0], &[1.5, -2.0], p(1.3)).unwrap(), 0.0);
        assert!(minkowski_pow_dist(&[0.0], &[1.0, 2.0], p(2.0)).is_err());
    }

    #[test]
    fn weighted_examples() {
        let d = weighted_pow_dist(&[0.0, 0.0], &[2.0, 2.0], &[0.5, 0.5], p(2.0)).unwrap();
        assert_eq!(d, 2.0);
        let d = weighted_pow_dist(&[0.0, 0.0], &[2.0, 7.0], &[1.0, 0.0], p(1.0)).unwrap();
        assert_eq!(d, 2.0);
        let d = weighted_pow_dist(&[0.0, 0.0], &[2.0, 7.0], &[0.3, 0.0], p(0.7)).unwrap();
        assert_eq!(d, 0.3f64.powf(0.7) * 2.0f64.powf(0.7));
        assert!(weighted_pow_dist(&[0.0], &[1.0], &[-0.1], p(2.0)).is_err());
    }

    #[test]
    fn exponent_validation() {
        assert!(Exponent::new(0.0).is_err());
        assert!(Exponent::new(-1.0).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert!(Exponent::new(f64::INFINITY).is_err());
        assert!(p(0.5).is_fractional());
        assert!(!p(1.0).is_fractional());
    }

    #[test]
    fn weight_matrix_validation() {
        assert!(WeightMatrix::new(ndarray::array![[0.5, 0.5], [0.2, 0.8]]).is_ok());
        assert!(WeightMatrix::new(ndarray::array![[0.5, 0.6]]).is_err());
        assert!(WeightMatrix::new(ndarray::array![[1.5, -0.5]]).is_err());
    }

    proptest! {
        #[test]
        fn constant_weights_factor_out(
            xy in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..12),
            c in 0.0f64..3.0,
            pv in 0.2f64..4.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
            let e = p(pv);
            let w = vec![c; x.len()];
            let lhs = weighted_pow_dist(&x, &y, &w, e).unwrap();
            let rhs = c.powf(pv) * minkowski_pow_dist(&x, &y, e).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn pow_dist_zero_iff_equal(
            x in prop::collection::vec(-5.0f64..5.0, 1..8),
            pv in 0.2f64..4.0,
        ) {
            prop_assert_eq!(minkowski_pow_dist(&x, &x, p(pv)).unwrap(), 0.0);
            let mut y = x.clone();
            y[0] += 1.0;
            prop_assert!(minkowski_pow_dist(&x, &y, p(pv)).unwrap() > 0.0);
        }
    }
}
