//! Distance-concentration statistics of Minkowski norms.
//!
//! [`relative_contrast`] and [`relative_variance`] measure how much the
//! `p`-norms of a sample spread out; [`concentration_sweep`] evaluates both
//! over a grid of exponents and dimensionalities on synthetic data.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkcore::{minkowski_norm, Exponent};

fn norms(points: ArrayView2<'_, f64>, p: Exponent) -> Result<Vec<f64>> {
    if points.nrows() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 points, got {}",
            points.nrows()
        )));
    }
    if points.ncols() == 0 {
        return Err(Error::Empty("no feature columns"));
    }
    Ok(points
        .outer_iter()
        .map(|row| minkowski_norm(&row.to_vec(), p))
        .collect())
}

/// `(max_i ||x_i||_p - min_i ||x_i||_p) / D^{1/p - 1/2}`.
pub fn relative_contrast(points: ArrayView2<'_, f64>, p: Exponent) -> Result<f64> {
    let n = norms(points, p)?;
    let max = n.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = n.iter().copied().fold(f64::INFINITY, f64::min);
    let d = points.ncols() as f64;
    Ok((max - min) / d.powf(1.0 / p.value() - 0.5))
}

/// Sample standard deviation of the norms over their mean.
pub fn relative_variance(points: ArrayView2<'_, f64>, p: Exponent) -> Result<f64> {
    let n = norms(points, p)?;
    let len = n.len() as f64;
    let mean = n.iter().sum::<f64>() / len;
    if mean <= 0.0 {
        return Err(Error::InvalidArgument("mean norm is zero".into()));
    }
    let var = n.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (len - 1.0);
    Ok(var.sqrt() / mean)
}

/// Distribution of the i.i.d. coordinates of synthetic points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Uniform { low: f64, high: f64 },
    Gaussian { mean: f64, std: f64 },
}

impl Default for Generator {
    fn default() -> Self {
        Generator::Uniform { low: 0.0, high: 1.0 }
    }
}

impl Generator {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Generator::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            Generator::Gaussian { mean, std } => mean.is_finite() && std.is_finite() && std > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid generator {self:?}")))
        }
    }

    /// `n x d` sample.
    pub fn sample<R: Rng>(&self, n: usize, d: usize, rng: &mut R) -> Result<Array2<f64>> {
        self.validate()?;
        Ok(match *self {
            Generator::Uniform { low, high } => {
                Array2::from_shape_simple_fn((n, d), || rng.gen_range(low..high))
            }
            Generator::Gaussian { mean, std } => {
                let dist = Normal::new(mean, std)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                Array2::from_shape_simple_fn((n, d), || dist.sample(rng))
            }
        })
    }
}

/// Statistics for one `(p, D)` pair, averaged over the repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub p: f64,
    #[serde(rename = "D")]
    pub d: usize,
    pub relative_contrast: f64,
    pub relative_variance: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub generator: Generator,
    pub repeats: usize,
    pub probes: Vec<Probe>,
}

/// One probe per `(p, D)` pair, ordered by `p` then `D`. For each `D` and
/// repetition a single sample is drawn and shared by every `p`, so the
/// exponents are compared on identical data.
pub fn concentration_sweep(
    generator: Generator,
    p_grid: &[f64],
    d_grid: &[usize],
    n: usize,
    seed: u64,
    repeats: usize,
) -> Result<DiagnosticsReport> {
    if p_grid.is_empty() || d_grid.is_empty() {
        return Err(Error::Empty("diagnostic grid"));
    }
    let ps = p_grid
        .iter()
        .map(|&p| Exponent::new(p))
        .collect::<Result<Vec<_>>>()?;
    if let Some(&d) = d_grid.iter().find(|&&d| d < 1) {
        return Err(Error::InvalidArgument(format!("dimension must be >= 1, got {d}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need N >= 2, got {n}")));
    }
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    generator.validate()?;

    // stats[di][pi] = (sum rc, sum rv)
    let stats: Vec<Vec<(f64, f64)>> = d_grid
        .par_iter()
        .map(|&d| {
            let mut acc = vec![(0.0, 0.0); ps.len()];
            for rep in 0..repeats {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((d as u64) << 20) | rep as u64);
                let x = generator.sample(n, d, &mut rng)?;
                for (a, &p) in acc.iter_mut().zip(&ps) {
                    a.0 += relative_contrast(x.view(), p)?;
                    a.1 += relative_variance(x.view(), p)?;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let r = repeats as f64;
    let mut probes = Vec::with_capacity(ps.len() * d_grid.len());
    for (pi, p) in ps.iter().enumerate() {
        for (di, &d) in d_grid.iter().enumerate() {
            let (rc, rv) = stats[di][pi];
            probes.push(Probe {
                p: p.value(),
                d,
                relative_contrast: rc / r,
                relative_variance: rv / r,
                n,
                seed,
            });
        }
    }
    Ok(DiagnosticsReport {
        generator,
        repeats,
        probes,
    })
}
