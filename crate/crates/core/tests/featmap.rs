use kernmink::featmap::{approximation_report, kernel_eval, spectrum, spectrum_quadrature};
use kernmink::{Dataset, FeatureMap, KernelSpec, MapConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_data(seed: u64, n: usize, d: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(0.01..1.0)).collect())
        .collect();
    Dataset::from_rows(&rows).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn three_frequencies_beat_one() {
    let data = random_data(3, 200, 6);
    for spec in [KernelSpec::chi_square(), KernelSpec::intersection()] {
        let errs: Vec<f64> = [1, 3]
            .iter()
            .map(|&n| {
                let cfg = MapConfig::new(n, 0.5).unwrap();
                approximation_report(&spec, &cfg, &data, 2000, 1).unwrap().mean_rel_error
            })
            .collect();
        assert!(errs[1] < errs[0], "{spec:?}: {errs:?}");
    }
}

#[test]
fn closed_form_spectra_match_quadrature() {
    for spec in [
        KernelSpec::chi_square(),
        KernelSpec::intersection(),
        KernelSpec::jensen_shannon(),
    ] {
        for w in [0.0, 0.25, 0.5, 1.0, 2.5] {
            let closed = spectrum(&spec, w).unwrap();
            let quad = spectrum_quadrature(&spec, w, 40.0, 0.001);
            assert!((closed - quad).abs() < 1e-6, "{spec:?} at {w}: {closed} vs {quad}");
        }
    }
}

#[test]
fn zero_maps_to_zero() {
    for spec in [KernelSpec::chi_square(), KernelSpec::jensen_shannon(), KernelSpec::hellinger()] {
        let fmap = FeatureMap::new(spec, MapConfig::new(2, 0.5).unwrap()).unwrap();
        assert!(fmap.map_scalar(0.0).unwrap().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn mapped_dataset_shape_and_labels() {
    let data = random_data(4, 10, 3).with_labels((0..10).collect()).unwrap();
    let mapped = FeatureMap::new(KernelSpec::chi_square(), MapConfig::new(2, 0.5).unwrap())
        .unwrap()
        .map_dataset(&data)
        .unwrap();
    assert_eq!(mapped.values.dim(), (10, 15));
    assert!(data.labels().is_some());
}

proptest! {
    #[test]
    fn self_similarity_is_approximated(x in prop::collection::vec(0.01f64..5.0, 1..8)) {
        // On the diagonal the signature is evaluated at lambda = 0 only.
        let spec = KernelSpec::chi_square();
        let fmap = FeatureMap::new(spec, MapConfig::new(3, 0.5).unwrap()).unwrap();
        let phi = fmap.map_row(&x).unwrap();
        let k = kernel_eval(&spec, &x, &x).unwrap();
        prop_assert!((dot(&phi, &phi) - k).abs() <= 0.01 * k);
    }

    #[test]
    fn mapped_products_are_symmetric_and_homogeneous(
        x in prop::collection::vec(0.01f64..5.0, 4),
        y in prop::collection::vec(0.01f64..5.0, 4),
        t in 0.1f64..10.0,
    ) {
        let fmap = FeatureMap::new(KernelSpec::jensen_shannon(), MapConfig::default()).unwrap();
        let (px, py) = (fmap.map_row(&x).unwrap(), fmap.map_row(&y).unwrap());
        prop_assert_eq!(dot(&px, &py), dot(&py, &px));
        let kx: Vec<f64> = x.iter().map(|v| v * t).collect();
        let ky: Vec<f64> = y.iter().map(|v| v * t).collect();
        let scaled = dot(&fmap.map_row(&kx).unwrap(), &fmap.map_row(&ky).unwrap());
        prop_assert!((scaled - t * dot(&px, &py)).abs() <= 1e-9 * scaled.abs().max(1.0));
    }
}
