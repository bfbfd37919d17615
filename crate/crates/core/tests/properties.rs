//! Property tests for the library-wide invariants.

use proptest::prelude::*;

use stereopt::ga::{mutate, two_point_crossover, Chromosome, GENE_COUNT};
use stereopt::img::{
    is_valid, load_pfm, load_pgm, save_pfm, save_pgm, DisparityMap, GrayImage, INVALID_DISPARITY,
};
use stereopt::reference;
use stereopt::sgbm::{
    aggregate_path, lr_consistency, select_disparity, speckle_filter, subpixel_refine,
    uniqueness_filter, CostVolume, DIRECTIONS,
};
use stereopt::wls::{wls_refine, WlsParams};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gray_image() -> impl Strategy<Value = GrayImage> {
    (1usize..20, 1usize..16)
        .prop_flat_map(|(w, h)| {
            prop::collection::vec(any::<u8>(), w * h).prop_map(move |data| {
                GrayImage::from_raw(w, h, data).unwrap()
            })
        })
}

fn disparity_map() -> impl Strategy<Value = DisparityMap> {
    (1usize..14, 1usize..11)
        .prop_flat_map(|(w, h)| {
            prop::collection::vec(
                prop_oneof![
                    3 => (0u32..63_000).prop_map(|v| v as f32 / 1000.0),
                    1 => Just(INVALID_DISPARITY),
                ],
                w * h,
            )
            .prop_map(move |data| DisparityMap::from_raw(w, h, data).unwrap())
        })
}

fn cost_volume(max_dim: usize, max_disp: usize) -> impl Strategy<Value = CostVolume> {
    (2..=max_dim, 2..=max_dim, 2..=max_disp).prop_flat_map(|(w, h, d)| {
        prop::collection::vec(0u32..256, w * h * d).prop_map(move |costs| {
            let mut v = CostVolume::zeroed(w, h, d);
            v.costs_mut().copy_from_slice(&costs);
            v
        })
    })
}

fn chromosome() -> impl Strategy<Value = Chromosome> {
    prop::collection::vec(1u8..=10, GENE_COUNT)
        .prop_map(|genes| Chromosome::new(genes.try_into().unwrap()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pgm_round_trip_bit_exact(img in gray_image()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        save_pgm(&img, &path).unwrap();
        prop_assert_eq!(load_pgm(&path).unwrap(), img);
    }

    #[test]
    fn pfm_round_trip_bit_exact(map in disparity_map()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.pfm");
        save_pfm(&map, &path).unwrap();
        let back = load_pfm(&path).unwrap();
        prop_assert_eq!(back.data().len(), map.data().len());
        for (a, b) in back.data().iter().zip(map.data()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn crossover_preserves_flanks_and_ranges(
        a in chromosome(),
        b in chromosome(),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c1, c2) = two_point_crossover(&a, &b, &mut rng);
        let mut swapped = 0usize;
        for i in 0..GENE_COUNT {
            let kept = c1.genes()[i] == a.genes()[i] && c2.genes()[i] == b.genes()[i];
            let traded = c1.genes()[i] == b.genes()[i] && c2.genes()[i] == a.genes()[i];
            prop_assert!(kept || traded, "gene {i} is neither parent's");
            prop_assert!((1..=10).contains(&c1.genes()[i]));
            prop_assert!((1..=10).contains(&c2.genes()[i]));
            if !kept {
                swapped += 1;
            }
        }
        // The exchanged region is one contiguous segment.
        prop_assert!(swapped <= GENE_COUNT);
    }

    #[test]
    fn mutation_stays_in_range(c in chromosome(), p in 0.0f64..=1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = mutate(&c, p, &mut rng);
        prop_assert!(m.genes().iter().all(|g| (1..=10).contains(g)));
    }

    #[test]
    fn subpixel_moves_at_most_half(volume in cost_volume(8, 10)) {
        let base = select_disparity(&volume);
        let refined = subpixel_refine(&volume, &base);
        for (r, b) in refined.data().iter().zip(base.data()) {
            prop_assert!((r - b).abs() <= 0.5);
        }
    }

    #[test]
    fn filters_never_change_surviving_values(
        volume in cost_volume(8, 8),
        gamma in 1u32..=100,
        delta in 1u32..=100,
        window in 1u32..=40,
        range in 1u32..=100,
    ) {
        let base = subpixel_refine(&volume, &select_disparity(&volume));
        let stages = [
            uniqueness_filter(&volume, &base, gamma),
            lr_consistency(&base, &volume, delta),
            speckle_filter(&base, window, range),
        ];
        for filtered in stages {
            for (o, i) in filtered.data().iter().zip(base.data()) {
                prop_assert!(*o == *i || *o == INVALID_DISPARITY);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn aggregation_matches_naive_oracle(
        volume in cost_volume(8, 8),
        alpha in 1u32..500,
        extra in 1u32..2000,
    ) {
        let beta = alpha + extra;
        for dir in DIRECTIONS {
            let fast = aggregate_path(&volume, dir, alpha, beta);
            let slow = reference::aggregate_path_naive(&volume, dir, alpha, beta);
            prop_assert_eq!(fast.costs(), slow.costs(), "direction {:?}", dir);
        }
    }

    #[test]
    fn wls_energy_descent_holds(
        map in disparity_map(),
        guide_seed in any::<u64>(),
        lambda in 1u32..5000,
        sigma_step in 0u8..100,
    ) {
        let mut state = guide_seed | 1;
        let data = (0..map.width() * map.height())
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 24) as u8
            })
            .collect();
        let guide = GrayImage::from_raw(map.width(), map.height(), data).unwrap();
        let params = WlsParams {
            lambda,
            sigma: sigma_step as f64 / 101.0,
            ..WlsParams::default()
        };
        let out = wls_refine(&map, &guide, &params).unwrap();
        let before = reference::wls_energy_naive(&map, &map, &guide, &params);
        let after = reference::wls_energy_naive(&out.map, &map, &guide, &params);
        prop_assert!(after <= before + 1e-6, "energy rose {before} -> {after}");

        // Valid pixels stay inside the convex hull of the valid inputs.
        let valid: Vec<f32> = map.data().iter().copied().filter(|v| is_valid(*v)).collect();
        if !valid.is_empty() {
            let lo = valid.iter().copied().fold(f32::INFINITY, f32::min);
            let hi = valid.iter().copied().fold(f32::NEG_INFINITY, f32::max);
            for (&o, &i) in out.map.data().iter().zip(map.data()) {
                if is_valid(i) {
                    prop_assert!(o >= lo && o <= hi, "{o} outside [{lo}, {hi}]");
                }
            }
        }
    }
}
