use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cluster-by-class counts. Row `r` is the `r`-th smallest cluster id,
/// column `c` the `c`-th smallest class id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contingency {
    pub counts: Vec<Vec<usize>>,
    pub n: usize,
}

impl Contingency {
    fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        let width = self.counts.first().map_or(0, Vec::len);
        (0..width)
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub nmi: f64,
    pub purity: f64,
    pub contingency: Contingency,
}

fn index_of<T: Ord + Copy>(values: &[T]) -> (Vec<usize>, usize) {
    let ids: BTreeMap<T, usize> = values
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    (values.iter().map(|v| ids[v]).collect(), ids.len())
}

pub fn contingency<L: Ord + Copy, A: Ord + Copy>(labels: &[L], assignments: &[A]) -> Result<Contingency> {
    if labels.len() != assignments.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: assignments.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::Empty("partition"));
    }
    let (cls, n_cls) = index_of(labels);
    let (clu, n_clu) = index_of(assignments);
    let mut counts = vec![vec![0usize; n_cls]; n_clu];
    for (a, c) in clu.iter().zip(&cls) {
        counts[*a][*c] += 1;
    }
    Ok(Contingency {
        counts,
        n: labels.len(),
    })
}

fn entropy(sizes: &[usize], n: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let q = s as f64 / n;
            -q * q.ln()
        })
        .sum()
}

fn nmi_from(t: &Contingency) -> f64 {
    let n = t.n as f64;
    let rows = t.row_sums();
    let cols = t.col_sums();
    let hu = entropy(&rows, n);
    let hv = entropy(&cols, n);
    if hu == 0.0 && hv == 0.0 {
        return 1.0;
    }
    let mut mi = 0.0;
    for (r, row) in t.counts.iter().enumerate() {
        for (c, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (rows[r] as f64 * cols[c] as f64)).ln();
            }
        }
    }
    (mi / (0.5 * (hu + hv))).clamp(0.0, 1.0)
}

fn purity_from(t: &Contingency) -> f64 {
    let hits: usize = t
        .counts
        .iter()
        .map(|r| r.iter().copied().max().unwrap_or(0))
        .sum();
    hits as f64 / t.n as f64
}

/// Normalized mutual information: mutual information over the arithmetic
/// mean of the two entropies (natural log). Two single-block partitions
/// score 1.
pub fn nmi<L: Ord + Copy, A: Ord + Copy>(labels: &[L], assignments: &[A]) -> Result<f64> {
    Ok(nmi_from(&contingency(labels, assignments)?))
}

/// Fraction of points that belong to the majority class of their cluster.
pub fn purity<L: Ord + Copy, A: Ord + Copy>(labels: &[L], assignments: &[A]) -> Result<f64> {
    Ok(purity_from(&contingency(labels, assignments)?))
}

pub fn evaluate<L: Ord + Copy, A: Ord + Copy>(labels: &[L], assignments: &[A]) -> Result<MetricResult> {
    let t = contingency(labels, assignments)?;
    Ok(MetricResult {
        nmi: nmi_from(&t),
        purity: purity_from(&t),
        contingency: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nmi_examples() {
        assert_eq!(nmi(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert!((nmi(&[0, 0, 1, 1, 2], &[5, 5, 3, 3, 9]).unwrap() - 1.0).abs() < 1e-15);
        assert!(nmi(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap().abs() < 1e-15);
        assert_eq!(nmi(&[4, 4, 4], &[1, 1, 1]).unwrap(), 1.0);
        assert_eq!(nmi(&[0, 1, 2], &[0, 0, 0]).unwrap(), 0.0);
        assert!(nmi(&[0, 1], &[0]).is_err());
        assert!(nmi::<i64, usize>(&[], &[]).is_err());
    }

    #[test]
    fn purity_examples() {
        assert_eq!(purity(&[0, 1, 2], &[2, 0, 1]).unwrap(), 1.0);
        let labels: Vec<i64> = (0..10).map(|i| i / 5).collect();
        assert_eq!(purity(&labels, &[0usize; 10]).unwrap(), 0.5);
        assert_eq!(purity(&[0, 0, 1, 2], &[0, 0, 0, 1]).unwrap(), 0.75);
        assert!(purity(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn contingency_layout() {
        let t = contingency(&[0, 0, 1, 2], &[0usize, 0, 0, 1]).unwrap();
        assert_eq!(t.counts, vec![vec![2, 1, 0], vec![0, 0, 1]]);
        assert_eq!(t.n, 4);
        let m = evaluate(&[0, 0, 1, 2], &[0usize, 0, 0, 1]).unwrap();
        assert_eq!(m.contingency, t);
    }

    proptest! {
        #[test]
        fn relabel_invariance_and_symmetry(
            pairs in prop::collection::vec((0i64..4, 0usize..5), 1..80),
            shift in 1i64..50,
        ) {
            let (l, a): (Vec<i64>, Vec<usize>) = pairs.into_iter().unzip();
            let base = nmi(&l, &a).unwrap();
            let l2: Vec<i64> = l.iter().map(|v| 3 - v + shift).collect();
            let a2: Vec<usize> = a.iter().map(|v| 10 - v).collect();
            prop_assert!((nmi(&l2, &a2).unwrap() - base).abs() < 1e-12);
            prop_assert!((purity(&l2, &a2).unwrap() - purity(&l, &a).unwrap()).abs() < 1e-15);
            let a_i: Vec<i64> = a.iter().map(|&v| v as i64).collect();
            prop_assert!((nmi(&a_i, &l).unwrap() - base).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&base));
        }

        #[test]
        fn purity_lower_bound(
            pairs in prop::collection::vec((0i64..4, 0usize..5), 1..80),
        ) {
            let (l, a): (Vec<i64>, Vec<usize>) = pairs.into_iter().unzip();
            let classes = l.iter().collect::<std::collections::BTreeSet<_>>().len() as f64;
            prop_assert!(purity(&l, &a).unwrap() >= 1.0 / classes - 1e-15);
        }

        #[test]
        fn self_nmi_is_one(x in prop::collection::vec(0i64..6, 2..60)) {
            prop_assume!(x.iter().any(|v| *v != x[0]));
            prop_assert!((nmi(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
