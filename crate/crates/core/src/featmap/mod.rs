//! Homogeneous additive kernels and their explicit feature maps.
//!
//! A 1-homogeneous kernel factors as `k(a, b) = sqrt(ab) kappa(log b - log a)`.
//! Writing the signature `kappa` as the Fourier transform of its spectrum
//! `rho` and sampling `rho` at `omega = 0, L, 2L, ..., nL` gives a real map
//! of `2n + 1` coordinates per input feature:
//!
//! ```text
//! phi(a) = sqrt(a) * [ sqrt(L rho(0)),
//!                      sqrt(2L rho(L))  cos(L log a),  sqrt(2L rho(L))  sin(L log a),
//!                      ...
//!                      sqrt(2L rho(nL)) cos(nL log a), sqrt(2L rho(nL)) sin(nL log a) ]
//! ```
//!
//! whose inner products are a quadrature of the inverse transform, so
//! `phi(a) . phi(b) ~= k(a, b)`. The Hellinger kernel has the exact map
//! `sqrt(a)` and is never sampled.

mod kernel;
mod spectrum;

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kernel::{kernel_eval, KernelKind, KernelSpec};
pub use spectrum::{spectrum, spectrum_quadrature, QUADRATURE_HALF_WIDTH, QUADRATURE_STEP};

use crate::clustering::Dataset;
use crate::error::{Error, Result};

/// Sampling of the spectrum: `n` samples per side at period `period`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapConfig {
    pub n: usize,
    pub period: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig { n: 1, period: 0.5 }
    }
}

impl MapConfig {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        let cfg = MapConfig { n, period };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "map period must be > 0, got {}",
                self.period
            )));
        }
        Ok(())
    }

    /// Output coordinates per input feature.
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }
}

/// A ready-to-apply scalar feature map with the spectrum samples cached.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    spec: KernelSpec,
    cfg: MapConfig,
    /// `sqrt(L rho(0))`, then `sqrt(2L rho(jL))` for `j = 1..=n`.
    scale: Vec<f64>,
}

impl FeatureMap {
    pub fn new(spec: KernelSpec, cfg: MapConfig) -> Result<Self> {
        cfg.validate()?;
        let scale = if spec.kind() == KernelKind::Hellinger {
            Vec::new()
        } else {
            let l = cfg.period;
            (0..=cfg.n)
                .map(|j| {
                    let rho = spectrum(&spec, j as f64 * l)?;
                    let w = if j == 0 { l } else { 2.0 * l };
                    Ok((w * rho).sqrt())
                })
                .collect::<Result<Vec<_>>>()?
        };
        Ok(FeatureMap { spec, cfg, scale })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn config(&self) -> &MapConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.cfg.dim()
    }

    /// Maps one nonnegative scalar into `out` (length `2n + 1`).
    fn write_scalar(&self, a: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        out.fill(0.0);
        if a == 0.0 {
            return;
        }
        if self.spec.kind() == KernelKind::Hellinger {
            out[0] = a.sqrt();
            return;
        }
        let mag = a.powf(0.5 * self.spec.gamma());
        let log_a = a.ln();
        out[0] = mag * self.scale[0];
        for j in 1..=self.cfg.n {
            let (s, c) = (j as f64 * self.cfg.period * log_a).sin_cos();
            let m = mag * self.scale[j];
            out[2 * j - 1] = m * c;
            out[2 * j] = m * s;
        }
    }

    pub fn map_scalar(&self, a: f64) -> Result<Vec<f64>> {
        if a < 0.0 || a.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "feature map input must be >= 0, got {a}"
            )));
        }
        let mut out = vec![0.0; self.dim()];
        self.write_scalar(a, &mut out);
        Ok(out)
    }

    /// Concatenated map of a whole row.
    pub fn map_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.dim();
        let mut out = vec![0.0; x.len() * m];
        for (l, (&a, chunk)) in x.iter().zip(out.chunks_mut(m)).enumerate() {
            if a < 0.0 {
                return Err(Error::NegativeEntry {
                    row: 0,
                    feature: l,
                    value: a,
                });
            }
            self.write_scalar(a, chunk);
        }
        Ok(out)
    }

    /// Maps every row. Rows are independent, so the parallel result is
    /// identical to the sequential one.
    pub fn map_dataset(&self, data: &Dataset) -> Result<MappedDataset> {
        data.check_nonnegative()?;
        let src = data.values();
        let (n, d) = src.dim();
        let m = self.dim();
        let mut values = Array2::<f64>::zeros((n, d * m));
        values
            .axis_iter_mut(ndarray::Axis(0))
            .into_par_iter()
            .zip(src.axis_iter(ndarray::Axis(0)).into_par_iter())
            .for_each(|(mut out, x)| {
                let out = out.as_slice_mut().expect("standard layout");
                for (&a, chunk) in x.iter().zip(out.chunks_mut(m)) {
                    self.write_scalar(a, chunk);
                }
            });
        Ok(MappedDataset {
            values,
            source_dims: d,
            map_config: self.cfg,
            kernel: self.spec,
        })
    }
}

/// Convenience wrapper around [`FeatureMap::map_scalar`].
pub fn map_scalar(spec: &KernelSpec, cfg: &MapConfig, a: f64) -> Result<Vec<f64>> {
    FeatureMap::new(*spec, *cfg)?.map_scalar(a)
}

/// Convenience wrapper around [`FeatureMap::map_dataset`].
pub fn map_dataset(spec: &KernelSpec, cfg: &MapConfig, data: &Dataset) -> Result<MappedDataset> {
    FeatureMap::new(*spec, *cfg)?.map_dataset(data)
}

/// Output of [`map_dataset`]: `N x D(2n+1)` mapped coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedDataset {
    pub values: Array2<f64>,
    pub source_dims: usize,
    pub map_config: MapConfig,
    pub kernel: KernelSpec,
}

impl MappedDataset {
    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }
}

/// Error of mapped inner products against the exact kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationStats {
    pub pairs: usize,
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    /// Pairs with `K(x, y) > 0`; relative errors are averaged over these.
    pub rel_pairs: usize,
}

/// Samples `pairs` random row pairs `(i, j)` (with replacement, `i == j`
/// allowed) and compares `Phi_i . Phi_j` with `K(x_i, x_j)`.
pub fn approximation_report(
    spec: &KernelSpec,
    cfg: &MapConfig,
    data: &Dataset,
    pairs: usize,
    seed: u64,
) -> Result<ApproximationStats> {
    if pairs == 0 {
        return Err(Error::InvalidArgument("pairs must be >= 1".into()));
    }
    let fmap = FeatureMap::new(*spec, *cfg)?;
    let mapped = fmap.map_dataset(data)?;
    let n = data.n_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx: Vec<(usize, usize)> = (0..pairs)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    Ok(pair_errors(spec, data, &mapped, &idx))
}

fn pair_errors(
    spec: &KernelSpec,
    data: &Dataset,
    mapped: &MappedDataset,
    idx: &[(usize, usize)],
) -> ApproximationStats {
    let src = data.values();
    let mut stats = ApproximationStats {
        pairs: idx.len(),
        max_abs_error: 0.0,
        mean_abs_error: 0.0,
        max_rel_error: 0.0,
        mean_rel_error: 0.0,
        rel_pairs: 0,
    };
    for &(i, j) in idx {
        let exact: f64 = src
            .row(i)
            .iter()
            .zip(src.row(j))
            .map(|(&a, &b)| spec.eval_scalar(a, b))
            .sum();
        let approx = mapped.row(i).dot(&mapped.row(j));
        let abs = (approx - exact).abs();
        stats.max_abs_error = stats.max_abs_error.max(abs);
        stats.mean_abs_error += abs;
        if exact > 0.0 {
            let rel = abs / exact;
            stats.max_rel_error = stats.max_rel_error.max(rel);
            stats.mean_rel_error += rel;
            stats.rel_pairs += 1;
        }
    }
    stats.mean_abs_error /= idx.len() as f64;
    if stats.rel_pairs > 0 {
        stats.mean_rel_error /= stats.rel_pairs as f64;
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hellinger_map_is_exact_and_padded() {
        let cfg = MapConfig::default();
        assert_eq!(map_scalar(&KernelSpec::hellinger(), &cfg, 4.0).unwrap(), vec![2.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_maps_to_zero() {
        for spec in [
            KernelSpec::chi_square(),
            KernelSpec::intersection(),
            KernelSpec::jensen_shannon(),
            KernelSpec::hellinger(),
        ] {
            let v = map_scalar(&spec, &MapConfig::new(3, 0.4).unwrap(), 0.0).unwrap();
            assert_eq!(v, vec![0.0; 7]);
        }
    }

    #[test]
    fn negative_scalar_rejected() {
        assert!(map_scalar(&KernelSpec::chi_square(), &MapConfig::default(), -1.0).is_err());
        assert!(MapConfig::new(1, 0.0).is_err());
        assert!(MapConfig::new(1, -0.5).is_err());
    }

    #[test]
    fn chi_square_unit_self_product() {
        // Riemann sum of sech(pi w) at w = 0, +-0.5: 0.5 + sech(pi/2).
        let v = map_scalar(&KernelSpec::chi_square(), &MapConfig::default(), 1.0).unwrap();
        let dot: f64 = v.iter().map(|x| x * x).sum();
        let expected = 0.5 + 1.0 / (std::f64::consts::FRAC_PI_2).cosh();
        assert_abs_diff_eq!(dot, expected, epsilon = 1e-15);
        // Pinned regression bound on |phi(1).phi(1) - k(1, 1)|.
        assert!((dot - 1.0).abs() <= 0.1016);
    }

    #[test]
    fn shape_and_determinism() {
        let ds = Dataset::from_rows(&[vec![0.2, 0.5], vec![1.0, 0.0], vec![3.0, 2.0]]).unwrap();
        let spec = KernelSpec::intersection();
        let a = map_dataset(&spec, &MapConfig::default(), &ds).unwrap();
        let b = map_dataset(&spec, &MapConfig::default(), &ds).unwrap();
        assert_eq!(a.values.dim(), (3, 6));
        assert_eq!(a, b);
        assert_eq!(a.values.row(2).to_vec(), fmap_row(&spec, &[3.0, 2.0]));
    }

    fn fmap_row(spec: &KernelSpec, x: &[f64]) -> Vec<f64> {
        FeatureMap::new(*spec, MapConfig::default()).unwrap().map_row(x).unwrap()
    }

    #[test]
    fn approximation_report_errors() {
        let ds = Dataset::from_rows(&[vec![0.2, 0.5], vec![1.0, 0.3]]).unwrap();
        let spec = KernelSpec::hellinger();
        let st = approximation_report(&spec, &MapConfig::default(), &ds, 50, 1).unwrap();
        assert!(st.max_abs_error <= 1e-15);
        assert!(approximation_report(&spec, &MapConfig::default(), &ds, 0, 1).is_err());
    }
}
