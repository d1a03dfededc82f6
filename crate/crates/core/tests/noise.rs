mod common;

use hsi_restore::noise::{apply_noise, BandRange, NoiseSpec, STRIPE_AMPLITUDE};
use hsi_restore::synthetic::{low_rank_scene, SceneSpec};
use hsi_restore::{Error, Tensor3};
use proptest::prelude::*;

#[test]
fn noiseless_spec_is_identity() {
    let clean = low_rank_scene(&SceneSpec::new((12, 10, 6), 3));
    let (noisy, desc) = apply_noise(&clean, &NoiseSpec::none(5)).unwrap();
    assert_eq!(noisy, clean);
    assert!(desc.stripes.is_empty() && desc.deadlines.is_empty());
}

#[test]
fn case_one_statistics() {
    let clean = Tensor3::filled((200, 200, 20), 0.5);
    let mut spec = NoiseSpec::default_case(1, 20).unwrap();
    spec.seed = 2718;
    let (noisy, desc) = apply_noise(&clean, &spec).unwrap();
    let plane = 200 * 200;
    let mut residuals = Vec::new();
    for q in 0..20 {
        let hits = &desc.impulse_pixels[q];
        let frac = hits.len() as f64 / plane as f64;
        assert!((0.18..=0.22).contains(&frac), "band {q}: impulse fraction {frac}");
        let mut struck = vec![false; plane];
        for &px in hits {
            struck[px] = true;
        }
        let band = noisy.band(q);
        for px in 0..plane {
            if !struck[px] {
                residuals.push(band[px] - 0.5);
            }
        }
    }
    let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
    let var = residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (residuals.len() - 1) as f64;
    let sd = var.sqrt();
    assert!((0.095..=0.105).contains(&sd), "std {sd}");
}

#[test]
fn same_seed_is_bit_identical() {
    let clean = low_rank_scene(&SceneSpec::new((20, 16, 10), 9));
    for case in 1..=6 {
        let mut spec = NoiseSpec::default_case(case, 10).unwrap();
        spec.seed = 77;
        let (a, da) = apply_noise(&clean, &spec).unwrap();
        let (b, db) = apply_noise(&clean, &spec).unwrap();
        assert_eq!(a.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   b.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(da, db);
        spec.seed = 78;
        let (c, _) = apply_noise(&clean, &spec).unwrap();
        assert_ne!(a, c);
    }
}

#[test]
fn default_case_parameters() {
    let c1 = NoiseSpec::default_case(1, 20).unwrap();
    assert_eq!(c1.sigma, (0.1, 0.1));
    assert_eq!(c1.impulse, (0.2, 0.2));
    let c2 = NoiseSpec::default_case(2, 20).unwrap();
    assert_eq!(c2.impulse, (0.0, 0.0));
    let c4 = NoiseSpec::default_case(4, 224).unwrap();
    assert_eq!(c4.stripe_bands, Some(BandRange::new(111, 140)));
    assert_eq!(c4.stripe_count, (20, 40));
    let c5 = NoiseSpec::default_case(5, 224).unwrap();
    assert_eq!(c5.deadline_bands, Some(BandRange::new(131, 160)));
    assert_eq!(c5.deadline_count, (3, 10));
    assert_eq!(c5.deadline_width, (1, 3));
    let c6 = NoiseSpec::default_case(6, 112).unwrap();
    assert_eq!(c6.stripe_bands, Some(BandRange::new(56, 70)));
    assert_eq!(c6.deadline_bands, Some(BandRange::new(66, 80)));
    assert!(matches!(NoiseSpec::default_case(7, 20), Err(Error::UnknownCase(7))));
}

#[test]
fn out_of_range_bands_are_rejected() {
    let mut spec = NoiseSpec::default_case(4, 224).unwrap();
    spec.stripe_bands = Some(BandRange::new(5, 30));
    let clean = Tensor3::zeros((4, 4, 20));
    assert!(matches!(apply_noise(&clean, &spec), Err(Error::BandRangeOutOfBounds { .. })));
}

#[test]
fn stripes_are_constant_column_offsets() {
    let clean = low_rank_scene(&SceneSpec::new((30, 40, 12), 4));
    let mut spec = NoiseSpec::none(19);
    spec.stripe_bands = Some(BandRange::new(3, 8));
    let (noisy, desc) = apply_noise(&clean, &spec).unwrap();
    assert!(!desc.stripes.is_empty());
    let mut per_band = vec![0usize; 12];
    for s in &desc.stripes {
        per_band[s.band] += 1;
        assert!((3..=8).contains(&(s.band + 1)));
        let mag = s.offset.abs();
        assert!(mag >= STRIPE_AMPLITUDE.0 && mag <= STRIPE_AMPLITUDE.1);
        for i in 0..30 {
            let d = noisy.get(i, s.col, s.band) - clean.get(i, s.col, s.band);
            assert!((d - s.offset).abs() < 1e-12);
        }
    }
    for (q, &c) in per_band.iter().enumerate() {
        if (3..=8).contains(&(q + 1)) {
            assert!((20..=40).contains(&c), "band {q}: {c} stripes");
        } else {
            assert_eq!(c, 0);
        }
    }
}

#[test]
fn deadlines_zero_full_columns() {
    let clean = Tensor3::filled((25, 30, 10), 0.6);
    let mut spec = NoiseSpec::default_case(6, 10).unwrap();
    spec.seed = 8;
    spec.deadline_bands = Some(BandRange::new(2, 9));
    let (noisy, desc) = apply_noise(&clean, &spec).unwrap();
    assert!(!desc.deadlines.is_empty());
    for d in &desc.deadlines {
        for i in 0..25 {
            assert_eq!(noisy.get(i, d.col, d.band), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn impulse_pixels_are_exactly_zero_or_one(case in 1u8..=6, seed in any::<u64>()) {
        let clean = Tensor3::filled((16, 16, 8), 0.5);
        let mut spec = NoiseSpec::default_case(case, 8).unwrap();
        spec.seed = seed;
        let (noisy, desc) = apply_noise(&clean, &spec).unwrap();
        for (q, hits) in desc.impulse_pixels.iter().enumerate() {
            let expected = (desc.band_impulse[q] * 256.0).round() as usize;
            prop_assert_eq!(hits.len(), expected);
            for &px in hits {
                let v = noisy.band(q)[px];
                prop_assert!(v == 0.0 || v == 1.0);
            }
        }
        prop_assert!(noisy.is_finite());
    }
}
